#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pulsepol/sequence.hpp"
#include "pulsepol/spin_system.hpp"

namespace pulsepol::engine {

enum class NuclearInit { kMixed, kUp, kDown };

struct DensityState {
  CMatrix rho;
  std::vector<int> dims;

  /// Electron in Sz = +1/2 (|0>), nuclei as requested.
  static DensityState initial(const SpinSystem& sys,
                              NuclearInit init = NuclearInit::kMixed);
  /// Electron in Sz = +1/2 with the given nuclear density matrix.
  static DensityState with_bath(const CMatrix& bath);

  double trace() const;
  /// Throws NumericalError when Hermiticity, trace or positivity fails.
  void validate(double tol = 1e-10) const;
  void apply(const CMatrix& u);
  double electron_sz() const;
  double nuclear_iz(int k) const;
  double total_iz() const;
};

struct ChirpOptions {
  int min_steps = 512;
  int max_steps = 1 << 16;
  double tolerance = 1e-8;
};

/// Propagator of a single element. Delays evolve under the free
/// Hamiltonian; pulses add the drive; chirps are integrated with a
/// fourth-order Magnus scheme, doubling the step count until successive
/// results agree within options.tolerance.
CMatrix element_propagator(const SpinSystem& sys, const Element& e,
                           const ErrorModel& err, const ChirpOptions& opt = {});

/// Ordered product of element propagators over a list of elements.
CMatrix elements_propagator(const SpinSystem& sys, const std::vector<Element>& elems,
                            const ErrorModel& err, const ChirpOptions& opt = {});

/// Full propagator of the sequence (suffix · cycle^reps · prefix).
CMatrix sequence_propagator(const SpinSystem& sys, const PulseSequence& seq,
                            const ErrorModel& err, const ChirpOptions& opt = {});

struct TraceOptions {
  std::size_t sample_every = 1;  // cycles between samples
  double max_step = 0.0;         // > 0: sample inside elements every max_step seconds
};

struct PolarisationTrace {
  std::vector<double> times;                   // s
  std::vector<std::vector<double>> nuclear_iz;  // [sample][nucleus] <Iz>
  std::vector<double> electron_sz;
  int pump_sign = 1;

  /// pump_sign · 2 Σ (<Iz>(t) - <Iz>(0)) at sample k.
  double transfer(std::size_t k) const;
  double max_transfer() const;
};

/// Evolves the state and samples observables. With max_step == 0 samples
/// are taken after the prefix and then every `sample_every` cycles; with
/// max_step > 0 every element is subdivided and sampled.
PolarisationTrace polarisation_trace(const SpinSystem& sys, const PulseSequence& seq,
                                     const ErrorModel& err, const DensityState& init,
                                     const TraceOptions& opt = {});

/// Raw 2 Σ (<Iz>(t) - <Iz>(0)) after evolving from |0> ⊗ mixed until t_final
/// (clamped to the sequence length; partial elements are evolved exactly).
double raw_transfer(const SpinSystem& sys, const PulseSequence& seq,
                    const ErrorModel& err, double t_final);

/// raw_transfer measured along the sequence's pumping direction.
double transfer_efficiency(const SpinSystem& sys, const PulseSequence& seq,
                           const ErrorModel& err, double t_final);

struct PropiOptions {
  double reset_fidelity = 1.0;  // population put into |0> at each reset
};

struct BuildupCurve {
  std::vector<double> total_iz;      // raw Σ<Iz>, index = cycle (0 = initial)
  std::vector<double> polarisation;  // pump_sign · Σ<Iz>
};

/// Repeats (reset electron, apply full sequence) `cycles` times.
BuildupCurve propi_run(const SpinSystem& sys, const PulseSequence& seq,
                       const ErrorModel& err, int cycles,
                       const DensityState& init, const PropiOptions& opt = {});

/// Replaces the electron state by f|0><0| + (1-f)|1><1| keeping the bath.
DensityState reset_electron(const DensityState& s, double fidelity = 1.0);

/// CSV with columns time_s,observable,value. Observables: electron_sz,
/// iz_<k> per nucleus and transfer.
void write_trace_csv(std::ostream& out, const PolarisationTrace& trace);

}  // namespace pulsepol::engine
