#pragma once

#include <optional>
#include <sstream>
#include <string>

#include "cqregion/qcore.hpp"

namespace cqregion {

// Completely positive trace-preserving map in Kraus form. Each operator is
// dim_out x dim_in; closure sum K^dag K = I is enforced by validate().
struct KrausChannel {
  std::vector<CMatrix> kraus;
  int dim_in = 0;
  int dim_out = 0;
  std::string name;  // descriptor for manifests, e.g. "dephasing(q=0.1)"

  KrausChannel() = default;
  KrausChannel(std::vector<CMatrix> ops, std::string label = "") : kraus(std::move(ops)), name(std::move(label)) {
    if (kraus.empty()) throw validation_error("KrausChannel: empty Kraus list");
    dim_out = static_cast<int>(kraus.front().rows());
    dim_in = static_cast<int>(kraus.front().cols());
  }

  int env_dim() const { return static_cast<int>(kraus.size()); }
};

struct ChannelReport {
  bool valid = false;
  double max_deviation = 0.0;  // entrywise |sum K^dag K - I|
  std::string detail;
};

// Checks shape consistency and trace preservation; throws on deviation
// beyond 1e-9 when `throwing` is set.
inline ChannelReport validate(const KrausChannel& ch, bool throwing = true) {
  ChannelReport rep;
  for (const auto& k : ch.kraus) {
    if (k.rows() != ch.dim_out || k.cols() != ch.dim_in) {
      rep.detail = "inconsistent Kraus operator shape";
      if (throwing) throw validation_error("validate: " + rep.detail);
      return rep;
    }
  }
  CMatrix closure = CMatrix::Zero(ch.dim_in, ch.dim_in);
  for (const auto& k : ch.kraus) closure += k.adjoint() * k;
  rep.max_deviation = (closure - CMatrix::Identity(ch.dim_in, ch.dim_in)).cwiseAbs().maxCoeff();
  rep.valid = rep.max_deviation <= tol::kraus_closure;
  if (!rep.valid) {
    std::ostringstream os;
    os << "trace preservation violated, max deviation " << rep.max_deviation;
    rep.detail = os.str();
    if (throwing) throw validation_error("validate: " + rep.detail);
  }
  return rep;
}

// N(rho) = sum_k K rho K^dag.
inline CMatrix apply_matrix(const KrausChannel& ch, const CMatrix& rho) {
  if (rho.rows() != ch.dim_in || rho.cols() != ch.dim_in)
    throw dimension_error("apply: state dimension does not match channel input");
  CMatrix out = CMatrix::Zero(ch.dim_out, ch.dim_out);
  for (const auto& k : ch.kraus) out.noalias() += k * rho * k.adjoint();
  return out;
}

inline DensityOperator apply(const KrausChannel& ch, const DensityOperator& rho) {
  return DensityOperator::trusted(apply_matrix(ch, rho.matrix));
}

// (1 (x) N) acting on the last factor of a bipartite state.
inline DensityOperator apply_to_part(const KrausChannel& ch, const DensityOperator& rho_ab,
                                     const SystemLayout& layout) {
  if (layout.size() != 2) throw dimension_error("apply_to_part: expected a bipartite layout");
  if (layout.dims[1] != ch.dim_in)
    throw dimension_error("apply_to_part: second factor does not match channel input");
  if (layout.total_dim() != rho_ab.dim)
    throw dimension_error("apply_to_part: layout does not match state dimension");
  const CMatrix ida = CMatrix::Identity(layout.dims[0], layout.dims[0]);
  CMatrix out = CMatrix::Zero(layout.dims[0] * ch.dim_out, layout.dims[0] * ch.dim_out);
  for (const auto& k : ch.kraus) {
    const CMatrix lifted = tensor(ida, k);
    out.noalias() += lifted * rho_ab.matrix * lifted.adjoint();
  }
  return DensityOperator::trusted(out);
}

// Isometry V with V|psi> = sum_k (K_k|psi>) (x) |k>_E; shape (dim_out*env) x dim_in.
struct StinespringIsometry {
  CMatrix v;
  int dim_out = 0;
  int dim_env = 0;
};

inline StinespringIsometry stinespring(const KrausChannel& ch) {
  StinespringIsometry iso;
  iso.dim_out = ch.dim_out;
  iso.dim_env = ch.env_dim();
  iso.v = CMatrix::Zero(static_cast<Eigen::Index>(ch.dim_out) * iso.dim_env, ch.dim_in);
  for (int k = 0; k < iso.dim_env; ++k)
    for (int b = 0; b < ch.dim_out; ++b)
      iso.v.row(static_cast<Eigen::Index>(b) * iso.dim_env + k) = ch.kraus[k].row(b);
  return iso;
}

// Complementary channel N^c(rho) = Tr_B V rho V^dag. Its output dimension is
// the Kraus count of N, with the environment basis indexed by Kraus position.
inline KrausChannel complementary(const KrausChannel& ch) {
  const int m = ch.env_dim();
  std::vector<CMatrix> ops;
  ops.reserve(ch.dim_out);
  for (int b = 0; b < ch.dim_out; ++b) {
    CMatrix e = CMatrix::Zero(m, ch.dim_in);
    for (int k = 0; k < m; ++k) e.row(k) = ch.kraus[k].row(b);
    ops.push_back(std::move(e));
  }
  KrausChannel comp(std::move(ops), ch.name.empty() ? "complement" : ch.name + "^c");
  return comp;
}

// Environment output (N^c applied) without materializing the complementary
// channel: entry (i, j) = tr(K_i rho K_j^dag).
inline CMatrix environment_output(const KrausChannel& ch, const CMatrix& rho) {
  const int m = ch.env_dim();
  CMatrix env(m, m);
  std::vector<CMatrix> t(m);
  for (int i = 0; i < m; ++i) t[i].noalias() = ch.kraus[i] * rho;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      const Complex v = (t[i].array() * ch.kraus[j].array().conjugate()).sum();
      env(i, j) = v;
      env(j, i) = std::conj(v);
    }
  }
  return env;
}

// Pairwise tensor of Kraus sets; the l = 2 cap keeps matrix sizes inside the
// dense-eigensolver regime this library is built for.
inline KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  std::vector<CMatrix> ops;
  ops.reserve(a.kraus.size() * b.kraus.size());
  for (const auto& ka : a.kraus)
    for (const auto& kb : b.kraus) ops.push_back(tensor(ka, kb));
  return KrausChannel(std::move(ops), a.name + "(x)" + b.name);
}

inline KrausChannel tensor_power(const KrausChannel& ch, int l) {
  if (l < 1 || l > 2)
    throw resource_error("tensor_power: only l in {1, 2} is supported by the resource guard");
  if (l == 1) return ch;
  return tensor(ch, ch);
}

// Choi state (1 (x) N)(|Phi><Phi|), |Phi> = d^{-1/2} sum_i |ii>; trace 1,
// partial trace over the output equals I/d.
inline CMatrix choi(const KrausChannel& ch) {
  const int d = ch.dim_in;
  CMatrix j = CMatrix::Zero(static_cast<Eigen::Index>(d) * ch.dim_out,
                            static_cast<Eigen::Index>(d) * ch.dim_out);
  CMatrix unit = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      unit.setZero();
      unit(i, k) = Complex(1, 0);
      const CMatrix block = apply_matrix(ch, unit) / static_cast<double>(d);
      j.block(static_cast<Eigen::Index>(i) * ch.dim_out, static_cast<Eigen::Index>(k) * ch.dim_out,
              ch.dim_out, ch.dim_out) = block;
    }
  }
  return j;
}

// Generalized dephasing data: U|i> = |i>|phi_i>, captured by the Gram matrix
// G_ij = <phi_i|phi_j> (PSD, unit diagonal).
struct GeneralizedDephasingSpec {
  int d = 0;
  CMatrix gram;

  GeneralizedDephasingSpec() = default;
  GeneralizedDephasingSpec(int dim, CMatrix g) : d(dim), gram(std::move(g)) {
    if (gram.rows() != d || gram.cols() != d)
      throw dimension_error("GeneralizedDephasingSpec: Gram matrix must be d x d");
    if (!is_hermitian(gram, tol::kraus_closure))
      throw validation_error("GeneralizedDephasingSpec: Gram matrix not Hermitian");
    for (int i = 0; i < d; ++i)
      if (std::abs(gram(i, i).real() - 1.0) > tol::kraus_closure)
        throw validation_error("GeneralizedDephasingSpec: Gram diagonal must be 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::kraus_closure)
      throw validation_error("GeneralizedDephasingSpec: Gram matrix not PSD");
  }

  static GeneralizedDephasingSpec from_env_states(const std::vector<CVector>& phis) {
    const int d = static_cast<int>(phis.size());
    CMatrix g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = phis[i].dot(phis[j]);
    return GeneralizedDephasingSpec(d, std::move(g));
  }
};

// Structural test: a generalized dephasing channel acts on matrix units as
// N(|i><j|) = <phi_j|phi_i> |i><j| with unit diagonal factors. Returns the
// recovered spec, or nullopt if the channel is not dephasing in the
// computational basis.
inline std::optional<GeneralizedDephasingSpec> dephasing_structure(const KrausChannel& ch,
                                                                   double eps = 1e-9) {
  if (ch.dim_in != ch.dim_out) return std::nullopt;
  const int d = ch.dim_in;
  CMatrix gram(d, d);
  CMatrix unit = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      unit.setZero();
      unit(i, j) = Complex(1, 0);
      const CMatrix out = apply_matrix(ch, unit);
      const Complex c = out(i, j);
      CMatrix expect = CMatrix::Zero(d, d);
      expect(i, j) = c;
      if ((out - expect).cwiseAbs().maxCoeff() > eps) return std::nullopt;
      if (i == j && std::abs(c - Complex(1, 0)) > eps) return std::nullopt;
      gram(j, i) = c;  // c = <phi_j|phi_i>
    }
  }
  try {
    return GeneralizedDephasingSpec(d, std::move(gram));
  } catch (const error&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Named channel factories
// ---------------------------------------------------------------------------
namespace channels {

inline KrausChannel identity(int d) {
  if (d < 1) throw domain_error("identity: dimension must be >= 1");
  std::ostringstream name;
  name << "identity(d=" << d << ")";
  return KrausChannel({CMatrix::Identity(d, d)}, name.str());
}

// sigma_z applied with probability q; off-diagonal survival factor 1 - 2q.
inline KrausChannel dephasing_qubit(double q) {
  if (q < 0.0 || q > 1.0) throw domain_error("dephasing_qubit: q outside [0, 1]");
  CMatrix z = CMatrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  std::vector<CMatrix> ops;
  ops.push_back(std::sqrt(1.0 - q) * CMatrix::Identity(2, 2));
  ops.push_back(std::sqrt(q) * z);
  std::ostringstream name;
  name << "dephasing(q=" << q << ")";
  return KrausChannel(std::move(ops), name.str());
}

// Kraus operators are diagonal in the preferred basis: K_e = diag((phi_i)_e).
// Environment vectors are recovered from the Gram matrix eigendecomposition.
inline KrausChannel generalized_dephasing(const GeneralizedDephasingSpec& spec) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(spec.gram);
  std::vector<CMatrix> ops;
  const int d = spec.d;
  for (int a = 0; a < d; ++a) {
    const double ev = es.eigenvalues()[a];
    if (ev < tol::entropy_cut) continue;
    CMatrix k = CMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) k(i, i) = std::sqrt(ev) * std::conj(es.eigenvectors().col(a)[i]);
    ops.push_back(std::move(k));
  }
  std::ostringstream name;
  name << "generalized_dephasing(d=" << d << ")";
  return KrausChannel(std::move(ops), name.str());
}

inline KrausChannel depolarizing(double p) {
  if (p < 0.0 || p > 1.0) throw domain_error("depolarizing: p outside [0, 1]");
  CMatrix x = CMatrix::Zero(2, 2), y = CMatrix::Zero(2, 2), z = CMatrix::Zero(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  y(0, 1) = Complex(0, -1);
  y(1, 0) = Complex(0, 1);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  std::vector<CMatrix> ops;
  ops.push_back(std::sqrt(1.0 - p) * CMatrix::Identity(2, 2));
  ops.push_back(std::sqrt(p / 3.0) * x);
  ops.push_back(std::sqrt(p / 3.0) * y);
  ops.push_back(std::sqrt(p / 3.0) * z);
  std::ostringstream name;
  name << "depolarizing(p=" << p << ")";
  return KrausChannel(std::move(ops), name.str());
}

// dim d -> d + 1 with the last basis vector as the erasure flag.
inline KrausChannel erasure(double p, int d = 2) {
  if (p < 0.0 || p > 1.0) throw domain_error("erasure: p outside [0, 1]");
  if (d < 2) throw domain_error("erasure: dimension must be >= 2");
  std::vector<CMatrix> ops;
  CMatrix keep = CMatrix::Zero(d + 1, d);
  keep.topRows(d) = std::sqrt(1.0 - p) * CMatrix::Identity(d, d);
  ops.push_back(std::move(keep));
  for (int i = 0; i < d; ++i) {
    CMatrix flag = CMatrix::Zero(d + 1, d);
    flag(d, i) = std::sqrt(p);
    ops.push_back(std::move(flag));
  }
  std::ostringstream name;
  name << "erasure(p=" << p << ",d=" << d << ")";
  return KrausChannel(std::move(ops), name.str());
}

inline KrausChannel completely_dephasing(int d) {
  if (d < 2) throw domain_error("completely_dephasing: dimension must be >= 2");
  std::vector<CMatrix> ops;
  for (int i = 0; i < d; ++i) {
    CMatrix k = CMatrix::Zero(d, d);
    k(i, i) = 1.0;
    ops.push_back(std::move(k));
  }
  std::ostringstream name;
  name << "completely_dephasing(d=" << d << ")";
  return KrausChannel(std::move(ops), name.str());
}

// Qutrit-to-qubit channel with operation elements
// {|0><0|, |e+><1|, |e-><2|}, |e+-> = (1/2)|0> +- (sqrt(3)/2)|1>.
inline KrausChannel trine() {
  const double half = 0.5, root3half = std::sqrt(3.0) / 2.0;
  CMatrix k0 = CMatrix::Zero(2, 3), k1 = CMatrix::Zero(2, 3), k2 = CMatrix::Zero(2, 3);
  k0(0, 0) = 1.0;
  k1(0, 1) = half;
  k1(1, 1) = root3half;
  k2(0, 2) = half;
  k2(1, 2) = -root3half;
  return KrausChannel({k0, k1, k2}, "trine");
}

}  // namespace channels

// Composition (second after first): Kraus set is all pairwise products.
inline KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  if (second.dim_in != first.dim_out)
    throw dimension_error("compose: inner dimensions do not match");
  std::vector<CMatrix> ops;
  ops.reserve(second.kraus.size() * first.kraus.size());
  for (const auto& a : second.kraus)
    for (const auto& b : first.kraus) {
      CMatrix prod = a * b;
      if (prod.cwiseAbs().maxCoeff() > 1e-14) ops.push_back(std::move(prod));
    }
  return KrausChannel(std::move(ops), second.name + " o " + first.name);
}

}  // namespace cqregion
