#include "pulsepol/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsepol/error.hpp"

namespace pulsepol::linalg {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const Eigen::Index rb = b.rows();
  const Eigen::Index cb = b.cols();
  CMatrix out(a.rows() * rb, a.cols() * cb);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m.size() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

bool is_hermitian(const CMatrix& m, double tol) {
  return hermiticity_defect(m) <= tol;
}

double unitarity_defect(const CMatrix& u) {
  if (u.rows() != u.cols()) return INFINITY;
  const CMatrix d = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
  return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
}

HermitianExp::HermitianExp(const CMatrix& h) {
  if (!is_hermitian(h)) {
    throw NumericalError("propagator: generator is not Hermitian (defect " +
                         std::to_string(hermiticity_defect(h)) + ")");
  }
  // Symmetrise so the solver sees an exactly self-adjoint input.
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("propagator: eigendecomposition failed");
  }
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

CMatrix HermitianExp::at(double t) const {
  Eigen::VectorXcd phases(values_.size());
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    phases(k) = std::polar(1.0, -values_(k) * t);
  }
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

CMatrix propagator(const CMatrix& h, double t) {
  if (h.size() == 0) return h;
  return HermitianExp(h).at(t);
}

CMatrix partial_trace_electron(const CMatrix& rho, std::span<const int> dims) {
  if (dims.empty()) throw DimensionError("partial_trace_electron: empty dims");
  Eigen::Index total = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionError("partial_trace_electron: non-positive dim");
    total *= d;
  }
  if (rho.rows() != total || rho.cols() != total) {
    throw DimensionError("partial_trace_electron: rho is " +
                         std::to_string(rho.rows()) + "x" +
                         std::to_string(rho.cols()) + ", dims give " +
                         std::to_string(total));
  }
  const Eigen::Index first = dims.front();
  const Eigen::Index rest = total / first;
  CMatrix out = CMatrix::Zero(rest, rest);
  for (Eigen::Index k = 0; k < first; ++k) {
    out += rho.block(k * rest, k * rest, rest, rest);
  }
  return out;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

double phase_insensitive_diff(const CMatrix& a, const CMatrix& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase =
      std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0, 0.0};
  return max_abs_diff(a, phase * b);
}

}  // namespace pulsepol::linalg
