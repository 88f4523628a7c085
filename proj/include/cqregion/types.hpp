#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cqregion {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Numerical tolerances used across the library. All rates are in bits
// (base-2 logarithms throughout).
namespace tol {
inline constexpr double hermitian = 1e-10;     // entrywise |M - M^dag|
inline constexpr double trace_one = 1e-10;     // |tr(rho) - 1|
inline constexpr double psd_floor = -1e-10;    // eigenvalues below this are invalid
inline constexpr double entropy_cut = 1e-12;   // eigenvalues below this contribute 0
inline constexpr double kraus_closure = 1e-9;  // |sum K^dag K - I| entrywise
inline constexpr double prob_prune = 1e-12;    // ensemble members below this are dropped
}  // namespace tol

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or subsystem-layout inconsistency.
struct dimension_error : error {
  using error::error;
};

// A value failed a state/channel validity check (PSD, trace, closure).
struct validation_error : error {
  using error::error;
};

// Scalar argument outside its documented range.
struct domain_error : error {
  using error::error;
};

// A channel lacks the structure an operation requires.
struct structural_error : error {
  using error::error;
};

// Request exceeds the configured resource guard (e.g. tensor powers).
struct resource_error : error {
  using error::error;
};

// Malformed configuration input (files, flags).
struct config_error : error {
  using error::error;
};

inline bool is_hermitian(const CMatrix& m, double eps = tol::hermitian) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= eps;
}

}  // namespace cqregion
