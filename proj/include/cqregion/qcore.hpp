#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "cqregion/types.hpp"

namespace cqregion {

inline constexpr double kLn2 = 0.6931471805599453094;

// Addresses the tensor factors of a composite operator, e.g. {2, 3} for a
// qubit x qutrit system. Factor 0 is the leftmost (most significant) index.
struct SystemLayout {
  std::vector<int> dims;

  SystemLayout() = default;
  SystemLayout(std::initializer_list<int> d) : dims(d) { check(); }
  explicit SystemLayout(std::vector<int> d) : dims(std::move(d)) { check(); }

  int total_dim() const {
    return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
  }
  int size() const { return static_cast<int>(dims.size()); }

 private:
  void check() const {
    for (int d : dims)
      if (d < 1) throw dimension_error("SystemLayout: all dimensions must be >= 1");
  }
};

// Positive semidefinite, unit-trace operator. `trusted` construction skips
// the eigenvalue scan for states assembled from already-valid pieces.
struct DensityOperator {
  CMatrix matrix;
  int dim = 0;

  DensityOperator() = default;

  explicit DensityOperator(CMatrix m) : matrix(std::move(m)), dim(static_cast<int>(matrix.rows())) {
    validate();
  }

  static DensityOperator trusted(CMatrix m) {
    DensityOperator rho;
    rho.matrix = std::move(m);
    rho.dim = static_cast<int>(rho.matrix.rows());
    return rho;
  }

  void validate() const {
    if (matrix.rows() != matrix.cols())
      throw dimension_error("DensityOperator: matrix must be square");
    if (!is_hermitian(matrix))
      throw validation_error("DensityOperator: not Hermitian within 1e-10");
    if (std::abs(matrix.trace().real() - 1.0) > tol::trace_one ||
        std::abs(matrix.trace().imag()) > tol::trace_one)
      throw validation_error("DensityOperator: trace differs from 1 beyond 1e-10");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < tol::psd_floor)
      throw validation_error("DensityOperator: eigenvalue below -1e-10");
  }
};

// Kronecker product; dimensions multiply.
inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

inline void check_layout(const CMatrix& m, const SystemLayout& layout) {
  if (m.rows() != m.cols()) throw dimension_error("partial_trace: matrix must be square");
  if (layout.total_dim() != m.rows())
    throw dimension_error("partial_trace: layout product does not match matrix dimension");
}

// Row-major multi-index <-> flat index over the layout dims.
inline int flat_index(const std::vector<int>& idx, const std::vector<int>& dims) {
  int f = 0;
  for (size_t k = 0; k < dims.size(); ++k) f = f * dims[k] + idx[k];
  return f;
}

}  // namespace detail

// Trace out every subsystem not listed in `keep` (indices into the layout,
// strictly increasing). The result is laid out in the order of `keep`.
inline CMatrix partial_trace(const CMatrix& m, const SystemLayout& layout,
                             const std::vector<int>& keep) {
  detail::check_layout(m, layout);
  const int n = layout.size();
  for (size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= n) throw dimension_error("partial_trace: keep index out of range");
    if (k > 0 && keep[k] <= keep[k - 1])
      throw dimension_error("partial_trace: keep indices must be strictly increasing");
  }
  std::vector<int> traced;
  for (int s = 0; s < n; ++s)
    if (std::find(keep.begin(), keep.end(), s) == keep.end()) traced.push_back(s);

  int dim_keep = 1, dim_tr = 1;
  for (int s : keep) dim_keep *= layout.dims[s];
  for (int s : traced) dim_tr *= layout.dims[s];

  CMatrix out = CMatrix::Zero(dim_keep, dim_keep);
  std::vector<int> row(n), col(n);
  std::vector<int> ki(keep.size()), kj(keep.size()), t(traced.size());

  // Iterate kept row/col indices and sum over the traced diagonal.
  for (int a = 0; a < dim_keep; ++a) {
    int rem = a;
    for (int k = static_cast<int>(keep.size()) - 1; k >= 0; --k) {
      ki[k] = rem % layout.dims[keep[k]];
      rem /= layout.dims[keep[k]];
    }
    for (int b = 0; b < dim_keep; ++b) {
      rem = b;
      for (int k = static_cast<int>(keep.size()) - 1; k >= 0; --k) {
        kj[k] = rem % layout.dims[keep[k]];
        rem /= layout.dims[keep[k]];
      }
      Complex acc(0, 0);
      for (int c = 0; c < dim_tr; ++c) {
        rem = c;
        for (int k = static_cast<int>(traced.size()) - 1; k >= 0; --k) {
          t[k] = rem % layout.dims[traced[k]];
          rem /= layout.dims[traced[k]];
        }
        for (size_t k = 0; k < keep.size(); ++k) row[keep[k]] = ki[k], col[keep[k]] = kj[k];
        for (size_t k = 0; k < traced.size(); ++k) row[traced[k]] = t[k], col[traced[k]] = t[k];
        acc += m(detail::flat_index(row, layout.dims), detail::flat_index(col, layout.dims));
      }
      out(a, b) = acc;
    }
  }
  return out;
}

namespace detail {

// Eigenvalues of a Hermitian matrix; 2x2 is closed-form, larger sizes go
// through Eigen's self-adjoint solver.
inline void hermitian_eigenvalues(const CMatrix& m, std::vector<double>& out) {
  const int d = static_cast<int>(m.rows());
  out.resize(d);
  if (d == 1) {
    out[0] = m(0, 0).real();
    return;
  }
  if (d == 2) {
    const double a = m(0, 0).real(), c = m(1, 1).real();
    const double habs = std::abs(m(0, 1));
    const double mean = 0.5 * (a + c);
    const double rad = std::sqrt(0.25 * (a - c) * (a - c) + habs * habs);
    out[0] = mean - rad;
    out[1] = mean + rad;
    return;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  for (int i = 0; i < d; ++i) out[i] = es.eigenvalues()[i];
}

// Entropy in bits of a nonnegative spectrum. Eigenvalues in
// [psd_floor, entropy_cut) count as zero; anything below psd_floor is a
// validation failure (PSD drift beyond what channel application explains).
inline double entropy_from_eigenvalues(const std::vector<double>& evs) {
  double h = 0.0;
  for (double ev : evs) {
    if (ev < tol::psd_floor)
      throw validation_error("entropy: eigenvalue below -1e-10, operator is not PSD");
    if (ev < tol::entropy_cut) continue;
    h -= ev * std::log2(ev);
  }
  return h;
}

}  // namespace detail

// von Neumann entropy H(rho) = -tr(rho log2 rho), in bits.
inline double entropy(const CMatrix& rho) {
  if (rho.rows() != rho.cols()) throw dimension_error("entropy: matrix must be square");
  std::vector<double> evs;
  detail::hermitian_eigenvalues(rho, evs);
  return detail::entropy_from_eigenvalues(evs);
}

inline double entropy(const DensityOperator& rho) { return entropy(rho.matrix); }

// h2(mu) = -mu log2 mu - (1-mu) log2(1-mu), with 0 log 0 := 0. Evaluated on
// min(mu, 1-mu) so the symmetry h2(mu) = h2(1-mu) holds exactly whenever both
// arguments are representable.
inline double binary_entropy(double mu) {
  if (mu < 0.0 || mu > 1.0) throw domain_error("binary_entropy: argument outside [0, 1]");
  const double m = std::min(mu, 1.0 - mu);
  if (m <= 0.0) return 0.0;
  return -m * std::log2(m) - (1.0 - m) * std::log2(1.0 - m);
}

// Shannon entropy in bits of a probability vector (unchecked normalization).
inline double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > tol::entropy_cut) h -= x * std::log2(x);
  return h;
}

namespace detail {

// Hermitian square root with negative-drift clamping.
inline CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  RVector ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < tol::psd_floor) throw validation_error("psd_sqrt: operator is not PSD");
    ev[i] = ev[i] > 0 ? std::sqrt(ev[i]) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Uhlmann fidelity F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2, in [0, 1].
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim != sigma.dim) throw dimension_error("fidelity: dimension mismatch");
  const CMatrix root = detail::psd_sqrt(rho.matrix);
  const CMatrix inner = root * sigma.matrix * root;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(inner, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()[i];
    if (ev > 0) sum += std::sqrt(ev);
  }
  return std::min(1.0, sum * sum);
}

// Trace distance (1/2)||rho - sigma||_1, in [0, 1].
inline double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim != sigma.dim) throw dimension_error("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix - sigma.matrix, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// Purification on reference (x) system: |psi> = sum_i sqrt(l_i) |i>_R |v_i>,
// eigenvalues sorted descending so a pure input uses only |0>_R.
inline CVector purify(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix);
  const int d = rho.dim;
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(d) * d);
  for (int k = 0; k < d; ++k) {
    const int src = d - 1 - k;  // descending order
    const double ev = es.eigenvalues()[src];
    if (ev <= tol::entropy_cut) continue;
    const double amp = std::sqrt(ev);
    for (int i = 0; i < d; ++i) psi[k * d + i] = amp * es.eigenvectors().col(src)[i];
  }
  return psi;
}

// Reduced state of a pure vector on the given layout, keeping `keep`.
inline CMatrix reduce_pure(const CVector& psi, const SystemLayout& layout,
                           const std::vector<int>& keep) {
  const CMatrix proj = psi * psi.adjoint();
  return partial_trace(proj, layout, keep);
}

}  // namespace cqregion
