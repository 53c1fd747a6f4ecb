#include "pulsepol/spin_system.hpp"

#include <cmath>
#include <numbers>

#include "pulsepol/error.hpp"
#include "pulsepol/units.hpp"

namespace pulsepol {

using linalg::Complex;

void SpinSystem::validate() const {
  if (!(rabi > 0.0)) throw InvalidArgument("SpinSystem: rabi must be > 0");
  for (const auto& n : nuclei) {
    if (!(n.larmor > 0.0)) {
      throw InvalidArgument("SpinSystem: nuclear larmor must be > 0");
    }
  }
  if (nuclei.size() > 9) {
    throw InvalidArgument("SpinSystem: at most 9 nuclei are supported");
  }
}

void ErrorModel::validate() const {
  if (!(std::abs(rabi_error_frac) < 1.0)) {
    throw InvalidArgument("ErrorModel: |rabi_error_frac| must be < 1");
  }
}

namespace ops {

CMatrix sx() {
  CMatrix m(2, 2);
  m << 0.0, 0.5, 0.5, 0.0;
  return m;
}

CMatrix sy() {
  CMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -0.5), Complex(0, 0.5), Complex(0, 0);
  return m;
}

CMatrix sz() {
  CMatrix m(2, 2);
  m << 0.5, 0.0, 0.0, -0.5;
  return m;
}

CMatrix embed(const CMatrix& single, int site, int num_nuclei) {
  if (site < 0 || site > num_nuclei) {
    throw InvalidArgument("embed: site out of range");
  }
  const Eigen::Index left = Eigen::Index{1} << site;
  const Eigen::Index right = Eigen::Index{1} << (num_nuclei - site);
  return linalg::kron(
      linalg::kron(CMatrix::Identity(left, left), single),
      CMatrix::Identity(right, right));
}

}  // namespace ops

CMatrix free_hamiltonian(const SpinSystem& sys, double extra_detuning) {
  const int n = sys.num_nuclei();
  const CMatrix se = ops::embed(ops::sz(), 0, n);
  CMatrix h = (sys.detuning + extra_detuning) * se;
  for (int k = 0; k < n; ++k) {
    const auto& nuc = sys.nuclei[k];
    const CMatrix ix = ops::embed(ops::sx(), k + 1, n);
    const CMatrix iz = ops::embed(ops::sz(), k + 1, n);
    h += nuc.larmor * iz;
    h += se * (nuc.hyperfine_x * ix + nuc.hyperfine_z * iz);
  }
  return h;
}

CMatrix drive_term(int num_nuclei, double rabi, double phase) {
  const CMatrix axis = std::cos(phase) * ops::sx() + std::sin(phase) * ops::sy();
  return ops::embed(rabi * axis, 0, num_nuclei);
}

CMatrix pulse_hamiltonian(const SpinSystem& sys, double phase,
                          const ErrorModel& err) {
  return free_hamiltonian(sys, err.detuning) +
         drive_term(sys.num_nuclei(), sys.rabi * (1.0 - err.rabi_error_frac),
                    phase);
}

double nv_effective_detuning(const NVGeometry& geom, double omega_s,
                             double omega_mw) {
  const double s = std::sin(geom.polar_angle);
  return omega_s - omega_mw +
         geom.zero_field_splitting * (1.0 - 1.5 * s * s);
}

bool nv_secular_regime(const NVGeometry& geom) {
  return geom.polar_angle <= units::deg(10.0);
}

double nv_effective_rabi(double omega3) {
  if (omega3 < 0.0) throw InvalidArgument("nv_effective_rabi: Ω₃ must be >= 0");
  return omega3 / std::numbers::sqrt2;
}

}  // namespace pulsepol
