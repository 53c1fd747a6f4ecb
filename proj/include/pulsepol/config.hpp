#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulsepol/engine.hpp"
#include "pulsepol/sequence.hpp"

namespace pulsepol::harness {

struct SequenceSpec {
  // pulsepol | pulsepol-yx | pulsepol-combined | polxy | novel | ise
  std::string kind = "pulsepol";
  int n = 3;
  Timing timing = Timing::kFinite;
  bool composite = false;
  double lock_rabi = 0.0;         // rad/s; 0 means "match the Larmor frequency"
  double lock_duration = 10e-6;   // s
  double sweep_range = 0.0;       // rad/s (ISE)
  double inverse_rate = 0.0;      // s per rad/s (ISE)
};

/// Every run parameter in library units. Text configs use the units named
/// in the key (MHz are cyclic and converted with 2π at the boundary).
struct SweepConfig {
  // Robustness grid.
  double detuning_min = 0.0;
  double detuning_max = 0.0;
  int detuning_steps = 1;
  double rabi_error_min = 0.0;
  double rabi_error_max = 0.0;
  int rabi_error_steps = 1;
  int realizations = 10;
  std::uint64_t base_seed = 1;

  // System.
  std::string bath = "lattice";  // lattice | single
  int nuclei = 5;
  double larmor = 0.0;
  double rabi = 0.0;
  double hyperfine_x = 0.0;  // single-nucleus bath
  double hyperfine_z = 0.0;
  engine::NuclearInit nuclear_init = engine::NuclearInit::kMixed;

  // Sequence and errors.
  SequenceSpec sequence;
  int cycles = 30;
  double resonance_shift = 0.0;
  std::optional<double> phase_error;  // unset: matched to resonance_shift
  double detuning = 0.0;              // single runs
  double rabi_error = 0.0;            // single runs

  // Trace sampling.
  std::size_t sample_every = 1;
  double max_step = 0.0;

  // Polarisation cycling.
  int propi_cycles = 40;
  int pulsepol_blocks = 0;  // per cycle; 0 matches the spin-lock duration
  double reset_fidelity = 1.0;
  double ise_rabi = 0.0;    // 0 means the lock Rabi frequency

  int threads = 1;

  void validate() const;
  /// Phase error actually applied.
  double effective_phase_error() const;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Recognised keys in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Sets one key from text. Throws ConfigError naming the key.
void set_config_value(SweepConfig& cfg, std::string_view key, std::string_view value);

/// Flat "key = value" lines; '#' starts a comment; blank lines ignored.
SweepConfig parse_config(std::istream& in, SweepConfig base = SweepConfig{});
SweepConfig load_config(const std::string& path, SweepConfig base = SweepConfig{});

/// Defaults for the desk-scale robustness sweep.
SweepConfig default_config();

/// Renders a config back to the text format.
std::string config_to_text(const SweepConfig& cfg);

}  // namespace pulsepol::harness
