#include "pulsepol/avgham.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pulsepol/error.hpp"

namespace pulsepol::avgham {

namespace {
constexpr double kPi = std::numbers::pi;

void require_odd(int n, const char* what) {
  if (n < 1 || n % 2 == 0) {
    throw InvalidArgument(std::string(what) + ": n must be odd and >= 1, got " +
                          std::to_string(n));
  }
}
}  // namespace

FourierPair fourier_coeffs(int n) {
  if (n < 1) throw InvalidArgument("fourier_coeffs: n must be >= 1");
  FourierPair out{n, 0.0, 0.0};
  if (n % 2 == 0) return out;
  const double x = kPi * n;
  out.a = (4.0 * std::sin(x / 4.0) - 2.0 * std::sin(x / 2.0)) / x;
  out.b = (2.0 - 4.0 * std::cos(x / 4.0)) / x;
  return out;
}

double modulation_f1(double u) {
  u -= std::floor(u);
  // Period 2τ in eighths: +1, -1, 0, 0, -1, +1, 0, 0.
  if (u < 0.125) return 1.0;
  if (u < 0.25) return -1.0;
  if (u < 0.5) return 0.0;
  if (u < 0.625) return -1.0;
  if (u < 0.75) return 1.0;
  return 0.0;
}

double alpha(int n) {
  require_odd(n, "alpha");
  const auto c = fourier_coeffs(n);
  return std::hypot(c.a, c.b);
}

double resonance_tau(double larmor, int n) {
  require_odd(n, "resonance_tau");
  if (!(larmor > 0.0)) throw InvalidArgument("resonance_tau: larmor must be > 0");
  return n * kPi / larmor;
}

double detuning_resonance(double tau, int k) {
  if (!(tau > 0.0)) throw InvalidArgument("detuning_resonance: tau must be > 0");
  return 4.0 * kPi * k / tau;
}

double predict_transfer(double a_x, int n, double t) {
  const double s = std::sin(alpha(n) * a_x * t / 4.0);
  return s * s;
}

double full_transfer_time(double a_x, int n) {
  return 2.0 * kPi / (alpha(n) * std::abs(a_x));
}

double stated_transfer_time(double a_x, int n) {
  return 4.0 * kPi / (alpha(n) * std::abs(a_x));
}

double phase_shift_slope(int n) {
  require_odd(n, "phase_shift_slope");
  const double mag = 2.0 / (kPi * n);
  return n % 4 == 3 ? mag : -mag;
}

double phase_shift(int n, double alpha_phi) {
  return phase_shift_slope(n) * alpha_phi;
}

double phase_error_for_shift(int n, double shift) {
  return shift / phase_shift_slope(n);
}

int pump_direction(SequenceKind kind, int n) {
  switch (kind) {
    case SequenceKind::kNovel:
    case SequenceKind::kIse:
      return 1;
    case SequenceKind::kPulsePol:
    case SequenceKind::kPolXY:
      return (n % 4 == 3) ? -1 : 1;
    case SequenceKind::kCustom:
      return 1;
  }
  return 1;
}

double orientation_fraction(double zero_field_splitting, double max_detuning) {
  if (!(zero_field_splitting > 0.0)) {
    throw InvalidArgument("orientation_fraction: D must be > 0");
  }
  if (max_detuning < 0.0) {
    throw InvalidArgument("orientation_fraction: max detuning must be >= 0");
  }
  // Uniform orientations are uniform in cos θ.
  return std::min(1.0, std::sqrt(2.0 * max_detuning / (3.0 * zero_field_splitting)));
}

}  // namespace pulsepol::avgham
