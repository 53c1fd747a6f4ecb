#pragma once

#include "pulsepol/sequence.hpp"

namespace pulsepol::avgham {

struct FourierPair {
  int n = 0;
  double a = 0.0;
  double b = 0.0;
};

/// Coefficients of the resonant harmonic of the PulsePol modulation
/// function f₁. Both vanish for even n.
FourierPair fourier_coeffs(int n);

/// Piecewise modulation function f₁ over one period normalised to [0, 1).
/// Used by the quadrature checks.
double modulation_f1(double phase_fraction);

/// Effective coupling √(a_n² + b_n²); n must be odd.
double alpha(int n);

/// Pulse spacing nπ/ω_I for odd n.
double resonance_tau(double larmor, int n);

/// Detuning k-th resonance line for a free-evolution spacing of tau/4:
/// Δ_k = 4πk/τ.
double detuning_resonance(double tau, int k);

/// Swap probability sin²(αA_x t/4) for one nucleus under the averaged
/// flip-flop Hamiltonian, starting from a polarised electron and a nucleus
/// in the opposite state. Equals 2Δ⟨Iz⟩ for a maximally mixed start.
double predict_transfer(double a_x, int n, double t);

/// First complete exchange of the averaged Hamiltonian: 2π/(αA_x).
double full_transfer_time(double a_x, int n);

/// Exchange time 4π/(αA_x) as stated alongside the effective Hamiltonian
/// (kept for comparison; the exact evolution reproduces full_transfer_time).
double stated_transfer_time(double a_x, int n);

/// Signed ratio (ΔT/T)/α_φ: +2/(πn) for n ≡ 3 mod 4, -2/(πn) for n ≡ 1 mod 4.
double phase_shift_slope(int n);

/// Resonance shift ΔT/T produced by a phase error α_φ.
double phase_shift(int n, double alpha_phi);

/// Phase error that produces the given resonance shift.
double phase_error_for_shift(int n, double shift);

/// Sign of the nuclear polarisation built up from a polarised electron
/// (Sz = +1/2): PulsePol-family and PolXY give -1 for n ≡ 3 mod 4 and +1
/// otherwise; NOVEL and ISE (phase-X lock) give +1.
int pump_direction(SequenceKind kind, int n);

/// Fraction of isotropically oriented NV axes whose detuning, with the
/// microwave tuned to the θ = 90° transition, stays within Δmax:
/// |Δ(θ)| = (3/2) D cos²θ ≤ Δmax.
double orientation_fraction(double zero_field_splitting, double max_detuning);

}  // namespace pulsepol::avgham
