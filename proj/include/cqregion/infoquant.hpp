#pragma once

#include "cqregion/channel.hpp"

namespace cqregion {

// Finite ensemble {p_x, rho_x} on the channel input space. Members are the
// reduced states phi_x^{A'}; purifications to the reference system A are
// reconstructed on demand, so mixed members are first-class.
struct Ensemble {
  struct Member {
    double p = 0.0;
    DensityOperator rho;
  };
  std::vector<Member> members;

  Ensemble() = default;
  explicit Ensemble(std::vector<Member> ms) : members(std::move(ms)) { validate(); }

  static Ensemble single(DensityOperator rho) {
    Ensemble e;
    e.members.push_back({1.0, std::move(rho)});
    return e;
  }

  static Ensemble trusted(std::vector<Member> ms) {
    Ensemble e;
    e.members = std::move(ms);
    return e;
  }

  int dim() const { return members.empty() ? 0 : members.front().rho.dim; }
  int cardinality() const { return static_cast<int>(members.size()); }

  CMatrix average() const {
    CMatrix avg = CMatrix::Zero(dim(), dim());
    for (const auto& m : members) avg += m.p * m.rho.matrix;
    return avg;
  }

  void validate() const {
    if (members.empty()) throw validation_error("Ensemble: no members");
    double total = 0.0;
    for (const auto& m : members) {
      if (m.p < -tol::prob_prune) throw validation_error("Ensemble: negative probability");
      if (m.rho.dim != dim()) throw dimension_error("Ensemble: mixed member dimensions");
      total += m.p;
    }
    if (std::abs(total - 1.0) > tol::trace_one)
      throw validation_error("Ensemble: probabilities do not sum to 1");
  }
};

// I_c(rho, N) = H(N(rho)) - H(N^c(rho)); purification-independent.
inline double coherent_information(const DensityOperator& rho, const KrausChannel& ch) {
  if (rho.dim != ch.dim_in) throw dimension_error("coherent_information: dimension mismatch");
  return entropy(apply_matrix(ch, rho.matrix)) - entropy(environment_output(ch, rho.matrix));
}

// I(X;B) = H(N(rho_bar)) - sum_x p_x H(N(rho_x)).
inline double holevo_information(const Ensemble& e, const KrausChannel& ch) {
  if (e.dim() != ch.dim_in) throw dimension_error("holevo_information: dimension mismatch");
  double avg_member = 0.0;
  for (const auto& m : e.members)
    if (m.p > 0) avg_member += m.p * entropy(apply_matrix(ch, m.rho.matrix));
  return entropy(apply_matrix(ch, e.average())) - avg_member;
}

// I(A>BX) = sum_x p_x I_c(rho_x, N).
inline double avg_coherent_information(const Ensemble& e, const KrausChannel& ch) {
  if (e.dim() != ch.dim_in) throw dimension_error("avg_coherent_information: dimension mismatch");
  double acc = 0.0;
  for (const auto& m : e.members)
    if (m.p > 0) acc += m.p * coherent_information(m.rho, ch);
  return acc;
}

// The four ensemble quantities of the state sigma^{XAB}. The identity
// avg_coherent - cond_mutual = neg_cond_entropy holds by construction.
struct InfoBreakdown {
  double holevo = 0.0;            // I(X;B)
  double avg_coherent = 0.0;      // I(A>BX)
  double cond_mutual = 0.0;       // I(A;B|X)
  double neg_cond_entropy = 0.0;  // -H(A|X)
};

inline InfoBreakdown info_breakdown(const Ensemble& e, const KrausChannel& ch) {
  if (e.dim() != ch.dim_in) throw dimension_error("info_breakdown: dimension mismatch");
  InfoBreakdown out;
  double avg_member_out = 0.0;
  for (const auto& m : e.members) {
    if (m.p <= 0) continue;
    const double ha = entropy(m.rho);                                // H(A)_x = H(rho_x)
    const double hb = entropy(apply_matrix(ch, m.rho.matrix));              // H(B)_x
    const double he = entropy(environment_output(ch, m.rho.matrix));  // H(AB)_x = H(E)_x
    avg_member_out += m.p * hb;
    out.avg_coherent += m.p * (hb - he);
    out.cond_mutual += m.p * (ha + hb - he);
    out.neg_cond_entropy -= m.p * ha;
  }
  out.holevo = entropy(apply_matrix(ch, e.average())) - avg_member_out;
  return out;
}

// (I(A;B|X), -H(A|X)) for the Eq.-8 continuation region.
inline std::pair<double, double> cond_mutual_and_neg_entropy(const Ensemble& e,
                                                             const KrausChannel& ch) {
  const InfoBreakdown b = info_breakdown(e, ch);
  return {b.cond_mutual, b.neg_cond_entropy};
}

enum class Lemma2DimReading {
  joint,     // d = dim(A) * dim(B); the weaker (safer) reading, default
  system_a,  // d = dim(A); available for experimentation
};

// Continuity bound margin for coherent information:
//   margin = 2/e + 4 log2(d) sqrt(1 - F(rho, sigma)) - |I(A>B)_rho - I(A>B)_sigma|.
// A nonnegative return certifies the instance.
inline double lemma2_margin(const DensityOperator& rho_ab, const DensityOperator& sigma_ab,
                            const SystemLayout& layout,
                            Lemma2DimReading reading = Lemma2DimReading::joint) {
  if (layout.size() != 2) throw dimension_error("lemma2_margin: expected a bipartite layout");
  if (rho_ab.dim != layout.total_dim() || sigma_ab.dim != layout.total_dim())
    throw dimension_error("lemma2_margin: layout mismatch");
  const double f = fidelity(rho_ab, sigma_ab);
  const double d = reading == Lemma2DimReading::joint ? static_cast<double>(layout.total_dim())
                                                      : static_cast<double>(layout.dims[0]);
  auto coherent = [&](const DensityOperator& s) {
    const double hb = entropy(partial_trace(s.matrix, layout, {1}));
    return hb - entropy(s);
  };
  const double lhs = std::abs(coherent(rho_ab) - coherent(sigma_ab));
  const double bound = 2.0 / std::exp(1.0) + 4.0 * std::log2(d) * std::sqrt(std::max(0.0, 1.0 - f));
  return bound - lhs;
}

// lambda-weighted concatenation of two ensembles; the joining flag U is
// absorbed into the classical index. Members below the probability floor are
// pruned.
inline Ensemble convex_join(const Ensemble& e0, const Ensemble& e1, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw domain_error("convex_join: lambda outside [0, 1]");
  if (e0.dim() != e1.dim()) throw dimension_error("convex_join: dimension mismatch");
  std::vector<Ensemble::Member> ms;
  for (const auto& m : e0.members) {
    const double p = lambda * m.p;
    if (p > tol::prob_prune) ms.push_back({p, m.rho});
  }
  for (const auto& m : e1.members) {
    const double p = (1.0 - lambda) * m.p;
    if (p > tol::prob_prune) ms.push_back({p, m.rho});
  }
  if (ms.empty()) throw validation_error("convex_join: all members pruned");
  return Ensemble::trusted(std::move(ms));
}

}  // namespace cqregion
