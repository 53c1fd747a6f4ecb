#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pulsepol/config.hpp"
#include "pulsepol/engine.hpp"
#include "pulsepol/lattice.hpp"
#include "pulsepol/sequence.hpp"

namespace pulsepol::harness {

/// Seed of realization r; shared by every grid cell so that cells differ
/// only in the error parameters.
std::uint64_t realization_seed(std::uint64_t base_seed, int realization);

/// Evenly spaced grid (a single point uses `lo`).
std::vector<double> linspace(double lo, double hi, int steps);

/// Sequence described by the config with `blocks` repeated cycles.
PulseSequence build_sequence(const SweepConfig& cfg, std::size_t blocks);

/// Spin system for realization r (or the single-nucleus bath).
SpinSystem build_system(const SweepConfig& cfg, int realization);

struct SweepResult {
  SweepConfig config;
  std::vector<double> detunings;    // rad/s
  std::vector<double> rabi_errors;  // fractions
  std::vector<std::uint64_t> seeds;
  // values[(i_rabi * detunings.size() + i_detuning) * realizations + r]
  std::vector<double> values;

  double value(std::size_t i_det, std::size_t i_rabi, std::size_t r) const;
  double mean(std::size_t i_det, std::size_t i_rabi) const;
};

/// Transfer efficiency after cfg.cycles cycles for every grid cell and
/// realization. Results do not depend on cfg.threads.
SweepResult run_sweep(const SweepConfig& cfg);

/// detuning_rad_s,rabi_error_frac,realization,efficiency,seed
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// Parallel for over [0, count) with a fixed item-to-slot mapping.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

struct ProtocolSpec {
  std::string name;  // pulsepol | novel | ise:<range MHz> | polxy
};

std::vector<ProtocolSpec> parse_protocols(const std::string& list);

/// Sequence used for one polarise/reset cycle of a protocol.
PulseSequence protocol_sequence(const SweepConfig& cfg, const ProtocolSpec& p);

struct ComparisonRow {
  std::string protocol;
  double detuning = 0.0;
  int cycle = 0;
  double polarisation = 0.0;  // Σ<Iz> along the pumping direction
};

struct ComparisonSummary {
  std::string protocol;
  double detuning = 0.0;
  double final_polarisation = 0.0;
  /// First (interpolated) cycle at which half of the final value is
  /// reached; infinity if the final value is not positive.
  double cycles_to_half = 0.0;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonSummary> summary;
  int nuclei = 0;
};

/// Buildup curves from a mixed bath for each protocol and detuning,
/// averaged over cfg.realizations lattice baths.
ComparisonResult run_comparison(const SweepConfig& cfg,
                                const std::vector<ProtocolSpec>& protocols,
                                const std::vector<double>& detunings);

/// protocol,detuning_rad_s,cycle,polarisation
void write_comparison_csv(std::ostream& out, const ComparisonResult& result);

struct DepolarisationRow {
  std::string protocol;
  double detuning = 0.0;
  double retained = 0.0;  // final / initial polarisation along the pump direction
};

/// Starts from a bath fully polarised along the protocol's pumping
/// direction and applies cfg.propi_cycles polarise/reset cycles. The
/// retained fraction is averaged over realizations.
std::vector<DepolarisationRow> run_depolarisation(const SweepConfig& cfg,
                                                  const std::vector<ProtocolSpec>& protocols,
                                                  const std::vector<double>& detunings);

/// protocol,detuning_rad_s,retained
void write_depolarisation_csv(std::ostream& out, const std::vector<DepolarisationRow>& rows);

/// Centred moving average over `window` points (odd), shrinking at the ends.
std::vector<double> moving_average(const std::vector<double>& v, int window);

}  // namespace pulsepol::harness
