#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pulsepol::linalg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// Kronecker product: result(i*rb + k, j*cb + l) = a(i, j) * b(k, l).
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Kronecker product of an ordered list of factors (left to right).
CMatrix kron_all(std::span<const CMatrix> factors);

/// Largest entry modulus of m - m^dagger, relative to max(1, max|m|).
double hermiticity_defect(const CMatrix& m);

bool is_hermitian(const CMatrix& m, double tol = 1e-12);

/// max |U^dagger U - 1| entrywise.
double unitarity_defect(const CMatrix& u);

/// exp(-i h t) for Hermitian h (rad/s) and t (s), via eigendecomposition.
/// Throws NumericalError when h is not Hermitian.
CMatrix propagator(const CMatrix& h, double t);

/// Eigendecomposition of a Hermitian matrix, reusable for many times t.
class HermitianExp {
 public:
  explicit HermitianExp(const CMatrix& h);
  CMatrix at(double t) const;
  const Eigen::VectorXd& eigenvalues() const { return values_; }

 private:
  Eigen::VectorXd values_;
  CMatrix vectors_;
};

/// Traces out the first subsystem of `rho` on dims[0] x dims[1] x ... and
/// returns the reduced matrix on the remaining factors.
CMatrix partial_trace_electron(const CMatrix& rho, std::span<const int> dims);

/// max |a - b| entrywise; shapes must match.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Distance from a up to a global phase: min over phi of max|a - e^{i phi} b|,
/// evaluated at the phase aligning the traces.
double phase_insensitive_diff(const CMatrix& a, const CMatrix& b);

}  // namespace pulsepol::linalg
