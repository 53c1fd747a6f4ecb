#pragma once

#include <vector>

#include "pulsepol/linalg.hpp"

namespace pulsepol {

using linalg::CMatrix;

struct NuclearSpin {
  double larmor = 0.0;       // ω_I, rad/s
  double hyperfine_x = 0.0;  // A_x, rad/s (basis chosen so A_y = 0)
  double hyperfine_z = 0.0;  // A_z, rad/s
};

struct SpinSystem {
  std::vector<NuclearSpin> nuclei;
  double detuning = 0.0;  // static Δ, rad/s
  double rabi = 0.0;      // nominal Ω₀, rad/s

  int num_nuclei() const { return static_cast<int>(nuclei.size()); }
  int dim() const { return 2 << nuclei.size(); }
  /// Subsystem dimensions, electron first.
  std::vector<int> dims() const { return std::vector<int>(nuclei.size() + 1, 2); }
  void validate() const;
};

struct ErrorModel {
  double detuning = 0.0;          // Δ added to the system value, rad/s
  double rabi_error_frac = 0.0;   // δΩ/Ω₀; actual drive is Ω₀(1 - δΩ/Ω₀)
  double phase_error = 0.0;       // α_φ on chained π/2 pulses, rad
  double resonance_shift = 0.0;   // ΔT/T applied to the pulse spacing

  void validate() const;
};

struct NVGeometry {
  double zero_field_splitting = 0.0;  // D, rad/s
  double polar_angle = 0.0;           // θ, rad
  double azimuth = 0.0;               // φ_nv, rad
};

namespace ops {

// Pauli matrices scaled by 1/2.
CMatrix sx();
CMatrix sy();
CMatrix sz();

/// Embeds a single-spin operator at position `site` (0 = electron) of a
/// register with `num_nuclei` nuclei.
CMatrix embed(const CMatrix& single, int site, int num_nuclei);

}  // namespace ops

/// Δ·Sz + Σ [ω_I Iz + Sz(A_x Ix + A_z Iz)], electron first.
/// `extra_detuning` is added to sys.detuning.
CMatrix free_hamiltonian(const SpinSystem& sys, double extra_detuning = 0.0);

/// Electron drive Ω (Sx cos φ + Sy sin φ) on the full register.
CMatrix drive_term(int num_nuclei, double rabi, double phase);

/// Free Hamiltonian (with err.detuning) plus the drive at Ω₀(1 - δΩ/Ω₀).
CMatrix pulse_hamiltonian(const SpinSystem& sys, double phase,
                          const ErrorModel& err);

/// Effective two-level detuning of a spin-1 NV whose axis is tilted by θ
/// from the field: ω_S - ω_MW + D(1 - 3/2 sin²θ).
double nv_effective_detuning(const NVGeometry& geom, double omega_s,
                             double omega_mw);

/// True when θ lies within the small-angle regime (≤ 10°) in which the
/// two-level reduction is controlled.
bool nv_secular_regime(const NVGeometry& geom);

/// Two-level Rabi frequency Ω₃/√2 for a spin-1 drive amplitude Ω₃.
double nv_effective_rabi(double omega3);

}  // namespace pulsepol
