#pragma once

#include <cstring>
#include <limits>

#include "cqregion/infoquant.hpp"
#include "cqregion/optimize.hpp"

namespace cqregion {

// ---------------------------------------------------------------------------
// Configuration and result types
// ---------------------------------------------------------------------------

struct OptimizerConfig {
  int restarts = 32;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int max_iters = 2000;
  int cardinality = 0;  // 0 resolves to dim_in^2 + 2
  double fd_step = 1e-5;
  int patience = 25;
  int threads = 0;  // 0: CQREGION_THREADS env, then hardware concurrency

  // lambda-grid refinement: adjacent envelope points further apart than
  // `refine_resolution` (Chebyshev distance in the (r, R) plane) trigger a
  // geometric-midpoint lambda insertion, up to `refine_budget` extra points.
  double refine_resolution = 0.02;
  int refine_budget = 24;

  int resolved_cardinality(int dim_in) const {
    return cardinality > 0 ? cardinality : dim_in * dim_in + 2;
  }

  void validate() const {
    if (restarts < 1) throw config_error("OptimizerConfig: restarts must be >= 1");
    if (tol <= 0) throw config_error("OptimizerConfig: tol must be > 0");
    if (max_iters < 1) throw config_error("OptimizerConfig: max_iters must be >= 1");
    if (cardinality < 0) throw config_error("OptimizerConfig: cardinality must be >= 1 (or 0 for auto)");
    if (fd_step <= 0) throw config_error("OptimizerConfig: fd_step must be > 0");
  }
};

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid = {1.0, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 9.0, 17.0, 33.0, 65.0};
  return grid;
}

enum class PointKind { lambda_point, holevo_endpoint, q1_endpoint, analytic, mapped };

inline const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::lambda_point: return "lambda";
    case PointKind::holevo_endpoint: return "holevo-endpoint";
    case PointKind::q1_endpoint: return "q1-endpoint";
    case PointKind::analytic: return "analytic";
    case PointKind::mapped: return "mapped";
  }
  return "?";
}

struct RatePoint {
  PointKind kind = PointKind::lambda_point;
  double lambda = 0.0;  // meaningful for kind == lambda_point / mapped
  double r = 0.0;       // classical rate I(X;B), bits
  double R = 0.0;       // quantum rate I(A>BX), qubits
  double objective = 0.0;
  Ensemble ensemble;
};

struct TradeoffCurve {
  std::vector<RatePoint> points;  // ordered by decreasing R
  std::string channel;
  OptimizerConfig config;
};

// ---------------------------------------------------------------------------
// Lagrangian objective over parametrized ensembles.
//
// Members are rho_x = G_x G_x^dag / tr(G_x G_x^dag) with G_x a free complex
// d x d matrix; probabilities are a softmax over free logits. Parameter
// layout per member: [logit, Re G (d^2), Im G (d^2)].
// ---------------------------------------------------------------------------

inline double lagrangian(const Ensemble& e, const KrausChannel& ch, double lambda) {
  if (lambda < 1.0) throw domain_error("lagrangian: lambda must be >= 1");
  return holevo_information(e, ch) + lambda * avg_coherent_information(e, ch);
}

namespace detail {

class EnsembleObjective {
 public:
  enum class Mode { lagrangian, holevo_only, coherent_penalized };

  EnsembleObjective(const KrausChannel& ch, int members, double lambda, Mode mode,
                    double coherent_floor = 0.0, double penalty = 0.0)
      : ch_(&ch),
        k_(members),
        d_(ch.dim_in),
        m_(static_cast<int>(ch.kraus.size())),
        lambda_(lambda),
        mode_(mode),
        coherent_floor_(coherent_floor),
        penalty_(penalty),
        g_(ch.dim_in, ch.dim_in),
        rho_(ch.dim_in, ch.dim_in),
        out_(ch.dim_out, ch.dim_out),
        avg_(ch.dim_out, ch.dim_out),
        env_(static_cast<int>(ch.kraus.size()), static_cast<int>(ch.kraus.size())),
        t_(ch.kraus.size(), CMatrix(ch.dim_out, ch.dim_in)) {}

  int params_per_member() const { return 2 * d_ * d_ + 1; }
  int param_count() const { return k_ * params_per_member(); }

  double operator()(const std::vector<double>& x) const {
    const int npm = params_per_member();
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_; ++k) max_logit = std::max(max_logit, x[k * npm]);
    double norm = 0.0;
    probs_.resize(k_);
    for (int k = 0; k < k_; ++k) {
      probs_[k] = std::exp(x[k * npm] - max_logit);
      norm += probs_[k];
    }
    avg_.setZero();
    double sum_hb = 0.0, sum_coh = 0.0;
    for (int k = 0; k < k_; ++k) {
      const double p = probs_[k] / norm;
      unpack_member(x, k);
      member_quantities();
      avg_ += p * out_;
      sum_hb += p * hb_;
      sum_coh += p * (hb_ - he_);
    }
    const double holevo = entropy_of(avg_) - sum_hb;
    switch (mode_) {
      case Mode::holevo_only:
        return holevo;
      case Mode::lagrangian:
        return holevo + lambda_ * sum_coh;
      case Mode::coherent_penalized:
        return holevo + penalty_ * std::min(0.0, sum_coh - coherent_floor_);
    }
    return holevo;
  }

  Ensemble ensemble_at(const std::vector<double>& x) const {
    const int npm = params_per_member();
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_; ++k) max_logit = std::max(max_logit, x[k * npm]);
    double norm = 0.0;
    std::vector<double> p(k_);
    for (int k = 0; k < k_; ++k) {
      p[k] = std::exp(x[k * npm] - max_logit);
      norm += p[k];
    }
    std::vector<Ensemble::Member> members;
    for (int k = 0; k < k_; ++k) {
      unpack_member(x, k);
      members.push_back({p[k] / norm, DensityOperator::trusted(rho_)});
    }
    return Ensemble::trusted(std::move(members));
  }

  // Starting points: 0 cycles computational-basis states, 1 is all maximally
  // mixed, the rest are Ginibre-random.
  std::vector<double> start(int restart, Rng& rng) const {
    std::vector<double> x(param_count(), 0.0);
    const int npm = params_per_member();
    if (restart == 0) {
      for (int k = 0; k < k_; ++k) {
        const int i = k % d_;
        x[k * npm + 1 + i * d_ + i] = 1.0;  // G = |i><i|
      }
      return x;
    }
    if (restart == 1) {
      for (int k = 0; k < k_; ++k)
        for (int i = 0; i < d_; ++i) x[k * npm + 1 + i * d_ + i] = 1.0;  // G = I
      return x;
    }
    for (double& v : x) v = 0.8 * rng.normal();
    return x;
  }

 private:
  void unpack_member(const std::vector<double>& x, int k) const {
    const int npm = params_per_member();
    const double* re = x.data() + k * npm + 1;
    const double* im = re + d_ * d_;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) g_(i, j) = Complex(re[i * d_ + j], im[i * d_ + j]);
    rho_.noalias() = g_ * g_.adjoint();
    const double tr = rho_.trace().real();
    if (tr < 1e-30) {
      rho_ = CMatrix::Identity(d_, d_) / static_cast<double>(d_);
      return;
    }
    rho_ /= tr;
  }

  void member_quantities() const {
    out_.setZero();
    for (int i = 0; i < m_; ++i) {
      t_[i].noalias() = ch_->kraus[i] * rho_;
      out_.noalias() += t_[i] * ch_->kraus[i].adjoint();
    }
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j <= i; ++j) {
        const Complex v = (t_[i].array() * ch_->kraus[j].array().conjugate()).sum();
        env_(i, j) = v;
        env_(j, i) = std::conj(v);
      }
    }
    hb_ = entropy_of(out_);
    he_ = entropy_of(env_);
  }

  double entropy_of(const CMatrix& mat) const {
    detail::hermitian_eigenvalues(mat, eigs_);
    double h = 0.0;
    for (double ev : eigs_) {
      if (ev < tol::entropy_cut) continue;  // optimizer path: clamp drift silently
      h -= ev * std::log2(ev);
    }
    return h;
  }

  const KrausChannel* ch_;
  int k_, d_, m_;
  double lambda_;
  Mode mode_;
  double coherent_floor_, penalty_;
  mutable CMatrix g_, rho_, out_, avg_, env_;
  mutable std::vector<CMatrix> t_;
  mutable std::vector<double> probs_;
  mutable std::vector<double> eigs_;
  mutable double hb_ = 0.0, he_ = 0.0;
};

// Single-state coherent information objective for the Q1 endpoint.
class CoherentObjective {
 public:
  explicit CoherentObjective(const KrausChannel& ch)
      : ch_(&ch),
        d_(ch.dim_in),
        m_(static_cast<int>(ch.kraus.size())),
        g_(ch.dim_in, ch.dim_in),
        rho_(ch.dim_in, ch.dim_in),
        out_(ch.dim_out, ch.dim_out),
        env_(static_cast<int>(ch.kraus.size()), static_cast<int>(ch.kraus.size())),
        t_(ch.kraus.size(), CMatrix(ch.dim_out, ch.dim_in)) {}

  int param_count() const { return 2 * d_ * d_; }

  double operator()(const std::vector<double>& x) const {
    unpack(x);
    out_.setZero();
    for (int i = 0; i < m_; ++i) {
      t_[i].noalias() = ch_->kraus[i] * rho_;
      out_.noalias() += t_[i] * ch_->kraus[i].adjoint();
    }
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j <= i; ++j) {
        const Complex v = (t_[i].array() * ch_->kraus[j].array().conjugate()).sum();
        env_(i, j) = v;
        env_(j, i) = std::conj(v);
      }
    return entropy_of(out_) - entropy_of(env_);
  }

  DensityOperator state_at(const std::vector<double>& x) const {
    unpack(x);
    return DensityOperator::trusted(rho_);
  }

  // Starting points: 0 is maximally mixed, 1..d are basis states, the rest
  // Ginibre-random.
  std::vector<double> start(int restart, Rng& rng) const {
    std::vector<double> x(param_count(), 0.0);
    if (restart == 0) {
      for (int i = 0; i < d_; ++i) x[i * d_ + i] = 1.0;  // G = I -> pi
      return x;
    }
    if (restart >= 1 && restart <= d_) {
      const int i = restart - 1;
      x[i * d_ + i] = 1.0;  // G = |i><i|
      return x;
    }
    for (double& v : x) v = 0.8 * rng.normal();
    return x;
  }

 private:
  void unpack(const std::vector<double>& x) const {
    const double* re = x.data();
    const double* im = re + d_ * d_;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) g_(i, j) = Complex(re[i * d_ + j], im[i * d_ + j]);
    rho_.noalias() = g_ * g_.adjoint();
    const double tr = rho_.trace().real();
    if (tr < 1e-30) {
      rho_ = CMatrix::Identity(d_, d_) / static_cast<double>(d_);
      return;
    }
    rho_ /= tr;
  }

  double entropy_of(const CMatrix& mat) const {
    detail::hermitian_eigenvalues(mat, eigs_);
    double h = 0.0;
    for (double ev : eigs_) {
      if (ev < tol::entropy_cut) continue;
      h -= ev * std::log2(ev);
    }
    return h;
  }

  const KrausChannel* ch_;
  int d_, m_;
  mutable CMatrix g_, rho_, out_, env_;
  mutable std::vector<CMatrix> t_;
  mutable std::vector<double> eigs_;
};

struct RestartOutcome {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

// Runs `restarts` independent ascents in parallel; slot-indexed results keep
// the reduction schedule-independent. Stream ids mix the lambda bits (or an
// operation tag) so refined grids reproduce bit-identically.
template <class MakeObjective>
RestartOutcome multistart(MakeObjective&& make, const OptimizerConfig& cfg,
                          std::uint64_t stream_tag) {
  std::vector<RestartOutcome> slots(cfg.restarts);
  AscentOptions opts{cfg.tol, cfg.max_iters, cfg.fd_step, cfg.patience};
  parallel_for(cfg.restarts, resolve_threads(cfg.threads), [&](int rIdx) {
    auto objective = make();
    Rng rng(mix_seed(cfg.seed, stream_tag, static_cast<std::uint64_t>(rIdx)));
    std::vector<double> x0 = objective.start(rIdx, rng);
    AscentResult res = ascend(objective, std::move(x0), opts, rng);
    slots[rIdx].value = res.value;
    slots[rIdx].x = std::move(res.x);
  });
  int best = 0;
  for (int i = 1; i < cfg.restarts; ++i)
    if (slots[i].value > slots[best].value) best = i;
  return std::move(slots[best]);
}

inline std::uint64_t lambda_tag(double lambda) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(lambda));
  std::memcpy(&bits, &lambda, sizeof(bits));
  return bits;
}

constexpr std::uint64_t kHolevoTag = 0xC1A500000001ULL;
constexpr std::uint64_t kQ1Tag = 0xC1A500000002ULL;
constexpr std::uint64_t kFlatTag = 0xC1A500000003ULL;
constexpr std::uint64_t kFLambdaTag = 0xC1A500000004ULL;

}  // namespace detail

// ---------------------------------------------------------------------------
// Region operations
// ---------------------------------------------------------------------------

// Best rate point for max I(X;B) + lambda I(A>BX) over parametrized
// ensembles; deterministic given (config.seed, lambda).
inline RatePoint optimize_lambda(const KrausChannel& ch, double lambda,
                                 const OptimizerConfig& cfg) {
  if (lambda < 1.0) throw domain_error("optimize_lambda: lambda must be >= 1");
  cfg.validate();
  const int k = cfg.resolved_cardinality(ch.dim_in);
  auto make = [&] {
    return detail::EnsembleObjective(ch, k, lambda, detail::EnsembleObjective::Mode::lagrangian);
  };
  detail::RestartOutcome best = detail::multistart(make, cfg, detail::lambda_tag(lambda));
  detail::EnsembleObjective obj = make();
  RatePoint pt;
  pt.kind = PointKind::lambda_point;
  pt.lambda = lambda;
  pt.ensemble = obj.ensemble_at(best.x);
  pt.r = std::max(0.0, holevo_information(pt.ensemble, ch));
  pt.R = avg_coherent_information(pt.ensemble, ch);
  pt.objective = pt.r + lambda * pt.R;
  return pt;
}

// Classical endpoint: max I(X;B) over ensembles at the configured cardinality.
inline RatePoint holevo_capacity(const KrausChannel& ch, const OptimizerConfig& cfg) {
  cfg.validate();
  const int k = cfg.resolved_cardinality(ch.dim_in);
  auto make = [&] {
    return detail::EnsembleObjective(ch, k, 0.0, detail::EnsembleObjective::Mode::holevo_only);
  };
  detail::RestartOutcome best = detail::multistart(make, cfg, detail::kHolevoTag);
  detail::EnsembleObjective obj = make();
  RatePoint pt;
  pt.kind = PointKind::holevo_endpoint;
  pt.ensemble = obj.ensemble_at(best.x);
  pt.r = std::max(0.0, holevo_information(pt.ensemble, ch));
  pt.R = avg_coherent_information(pt.ensemble, ch);
  pt.objective = pt.r;
  return pt;
}

// Quantum endpoint: max I_c over single density operators. R may come out
// (slightly) negative for channels with no quantum capacity; the region
// endpoint is then max(0, R).
inline RatePoint q1_capacity(const KrausChannel& ch, const OptimizerConfig& cfg) {
  cfg.validate();
  auto make = [&] { return detail::CoherentObjective(ch); };
  detail::RestartOutcome best = detail::multistart(make, cfg, detail::kQ1Tag);
  detail::CoherentObjective obj = make();
  RatePoint pt;
  pt.kind = PointKind::q1_endpoint;
  pt.ensemble = Ensemble::single(obj.state_at(best.x));
  pt.r = 0.0;
  pt.R = coherent_information(pt.ensemble.members.front().rho, ch);
  pt.objective = pt.R;
  return pt;
}

namespace detail {

// Envelope assembly: sort by decreasing R, drop points dominated by an
// earlier one, then collapse near-ties in R (within 1e-9) onto the larger r.
inline std::vector<RatePoint> prune_envelope(std::vector<RatePoint> pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const RatePoint& a, const RatePoint& b) {
    if (a.R != b.R) return a.R > b.R;
    return a.r > b.r;
  });
  std::vector<RatePoint> kept;
  double max_r = -std::numeric_limits<double>::infinity();
  for (auto& p : pts) {
    if (p.r > max_r + 1e-12) {
      max_r = p.r;
      kept.push_back(std::move(p));
    }
  }
  // kept is R-descending with strictly increasing r; a point whose successor
  // sits within 1e-9 in R is tolerance-dominated by it.
  std::vector<RatePoint> out;
  for (size_t i = 0; i < kept.size(); ++i) {
    if (i + 1 < kept.size() && kept[i].R - kept[i + 1].R <= 1e-9) continue;
    out.push_back(std::move(kept[i]));
  }
  return out;
}

}  // namespace detail

// Full sweep: one optimization per grid lambda, adaptive geometric-midpoint
// refinement where the envelope is unresolved, plus the Holevo endpoint.
inline TradeoffCurve sweep_curve(const KrausChannel& ch, std::vector<double> lambda_grid,
                                 const OptimizerConfig& cfg) {
  cfg.validate();
  if (lambda_grid.empty()) throw config_error("sweep_curve: empty lambda grid");
  std::sort(lambda_grid.begin(), lambda_grid.end());
  for (double l : lambda_grid)
    if (l < 1.0) throw domain_error("sweep_curve: lambda grid values must be >= 1");

  struct Node {
    double lambda;
    RatePoint pt;
  };
  std::vector<Node> nodes(lambda_grid.size());
  parallel_for(static_cast<int>(lambda_grid.size()), 1, [&](int i) {
    // optimize_lambda parallelizes over restarts internally
    nodes[i] = {lambda_grid[i], optimize_lambda(ch, lambda_grid[i], cfg)};
  });

  // Refinement rounds: insert sqrt(l1*l2) between adjacent nodes whose points
  // are further apart than the resolution, until the budget runs out.
  int budget = cfg.refine_budget;
  bool changed = true;
  while (budget > 0 && changed) {
    changed = false;
    std::vector<double> inserts;
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
      const RatePoint& a = nodes[i].pt;
      const RatePoint& b = nodes[i + 1].pt;
      const double gap = std::max(std::abs(a.r - b.r), std::abs(a.R - b.R));
      const double ratio = nodes[i + 1].lambda / nodes[i].lambda;
      if (gap > cfg.refine_resolution && ratio > 1.0 + 1e-3 &&
          static_cast<int>(inserts.size()) < budget)
        inserts.push_back(std::sqrt(nodes[i].lambda * nodes[i + 1].lambda));
    }
    if (inserts.empty()) break;
    std::vector<Node> fresh(inserts.size());
    parallel_for(static_cast<int>(inserts.size()), 1, [&](int i) {
      fresh[i] = {inserts[i], optimize_lambda(ch, inserts[i], cfg)};
    });
    for (auto& n : fresh) nodes.push_back(std::move(n));
    std::sort(nodes.begin(), nodes.end(),
              [](const Node& a, const Node& b) { return a.lambda < b.lambda; });
    budget -= static_cast<int>(inserts.size());
    changed = true;
  }

  std::vector<RatePoint> pts;
  pts.reserve(nodes.size() + 1);
  for (auto& n : nodes) pts.push_back(std::move(n.pt));
  pts.push_back(holevo_capacity(ch, cfg));

  TradeoffCurve curve;
  curve.points = detail::prune_envelope(std::move(pts));
  curve.channel = ch.name;
  curve.config = cfg;
  return curve;
}

inline TradeoffCurve sweep_curve(const KrausChannel& ch, const OptimizerConfig& cfg) {
  return sweep_curve(ch, default_lambda_grid(), cfg);
}

// ---------------------------------------------------------------------------
// Closed-form qubit dephasing curve:
//   (r, R) = (1 - h2(mu), h2(mu) - h2(1/2 + 1/2 sqrt(1 - 16 q (1-q) mu(1-mu))))
// with the sigma_z-probability convention for q. Each point is achieved by
// the equiprobable pair {diag(mu, 1-mu), diag(1-mu, mu)}.
// ---------------------------------------------------------------------------

struct DephasingCurveOracle {
  double q;

  explicit DephasingCurveOracle(double q_in) : q(q_in) {
    if (q < 0.0 || q > 0.5) throw domain_error("dephasing curve: q outside [0, 1/2]");
  }

  double r_of_mu(double mu) const { return 1.0 - binary_entropy(check(mu)); }

  double R_of_mu(double mu) const {
    check(mu);
    const double s = std::sqrt(std::max(0.0, 1.0 - 16.0 * q * (1.0 - q) * mu * (1.0 - mu)));
    return binary_entropy(mu) - binary_entropy(0.5 + 0.5 * s);
  }

  double quantum_endpoint() const { return R_of_mu(0.5); }

  // r is strictly decreasing and R nondecreasing in mu on [0, 1/2]; both
  // inversions bisect on the known monotonicity.
  double mu_of_r(double r) const {
    r = std::clamp(r, 0.0, 1.0);
    double lo = 0.0, hi = 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (r_of_mu(mid) > r ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  double mu_of_R(double R) const {
    R = std::clamp(R, 0.0, quantum_endpoint());
    double lo = 0.0, hi = 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (R_of_mu(mid) < R ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  double R_at_r(double r) const { return R_of_mu(mu_of_r(r)); }
  double r_at_R(double R) const { return r_of_mu(mu_of_R(R)); }

 private:
  static double check(double mu) {
    if (mu < 0.0 || mu > 0.5) throw domain_error("dephasing curve: mu outside [0, 1/2]");
    return mu;
  }
};

inline TradeoffCurve analytic_dephasing_curve(double q, const std::vector<double>& mu_grid) {
  DephasingCurveOracle oracle(q);
  TradeoffCurve curve;
  std::ostringstream name;
  name << "dephasing(q=" << q << ") analytic";
  curve.channel = name.str();
  for (double mu : mu_grid) {
    RatePoint pt;
    pt.kind = PointKind::analytic;
    pt.lambda = 0.0;
    pt.r = oracle.r_of_mu(mu);
    pt.R = oracle.R_of_mu(mu);
    pt.objective = pt.r;
    CMatrix m0 = CMatrix::Zero(2, 2), m1 = CMatrix::Zero(2, 2);
    m0(0, 0) = mu;
    m0(1, 1) = 1.0 - mu;
    m1(0, 0) = 1.0 - mu;
    m1(1, 1) = mu;
    pt.ensemble = Ensemble::trusted(
        {{0.5, DensityOperator::trusted(m0)}, {0.5, DensityOperator::trusted(m1)}});
    curve.points.push_back(std::move(pt));
  }
  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const RatePoint& a, const RatePoint& b) { return a.R > b.R; });
  return curve;
}

// ---------------------------------------------------------------------------
// f_lambda for generalized dephasing channels:
//   f_lambda(N) = max [ H(Y) + (lambda - 1) H(Y|X) - lambda H(E|X) ]
// over ensembles of diagonal states; equals the Lagrangian optimum for
// dephasing channels. H(E|x) comes from the Gram trick: the mixture
// sum_i w_i |phi_i><phi_i| has the spectrum of [sqrt(w_i w_j) G_ij].
// ---------------------------------------------------------------------------

namespace detail {

class DiagonalObjective {
 public:
  DiagonalObjective(const CMatrix& gram, int members, double lambda)
      : gram_(gram), k_(members), d_(static_cast<int>(gram.rows())), lambda_(lambda),
        s_(d_, d_) {}

  int params_per_member() const { return d_ + 1; }
  int param_count() const { return k_ * params_per_member(); }

  double operator()(const std::vector<double>& x) const {
    const int npm = params_per_member();
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_; ++k) max_logit = std::max(max_logit, x[k * npm]);
    double norm = 0.0;
    probs_.resize(k_);
    for (int k = 0; k < k_; ++k) {
      probs_[k] = std::exp(x[k * npm] - max_logit);
      norm += probs_[k];
    }
    avg_.assign(d_, 0.0);
    double hyx = 0.0, hex = 0.0;
    for (int k = 0; k < k_; ++k) {
      const double p = probs_[k] / norm;
      member_weights(x, k);
      for (int i = 0; i < d_; ++i) avg_[i] += p * w_[i];
      hyx += p * shannon_entropy(w_);
      hex += p * env_entropy();
    }
    return shannon_entropy(avg_) + (lambda_ - 1.0) * hyx - lambda_ * hex;
  }

  Ensemble ensemble_at(const std::vector<double>& x) const {
    const int npm = params_per_member();
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_; ++k) max_logit = std::max(max_logit, x[k * npm]);
    double norm = 0.0;
    std::vector<double> p(k_);
    for (int k = 0; k < k_; ++k) {
      p[k] = std::exp(x[k * npm] - max_logit);
      norm += p[k];
    }
    std::vector<Ensemble::Member> members;
    for (int k = 0; k < k_; ++k) {
      member_weights(x, k);
      CMatrix m = CMatrix::Zero(d_, d_);
      for (int i = 0; i < d_; ++i) m(i, i) = w_[i];
      members.push_back({p[k] / norm, DensityOperator::trusted(std::move(m))});
    }
    return Ensemble::trusted(std::move(members));
  }

  std::vector<double> start(int restart, Rng& rng) const {
    std::vector<double> x(param_count(), 0.0);
    const int npm = params_per_member();
    if (restart == 0) {
      for (int k = 0; k < k_; ++k) x[k * npm + 1 + (k % d_)] = 30.0;  // near-basis
      return x;
    }
    if (restart == 1) return x;  // uniform weights everywhere
    for (double& v : x) v = 0.8 * rng.normal();
    return x;
  }

 private:
  void member_weights(const std::vector<double>& x, int k) const {
    const int npm = params_per_member();
    const double* logits = x.data() + k * npm + 1;
    double mx = logits[0];
    for (int i = 1; i < d_; ++i) mx = std::max(mx, logits[i]);
    double nrm = 0.0;
    w_.resize(d_);
    for (int i = 0; i < d_; ++i) {
      w_[i] = std::exp(logits[i] - mx);
      nrm += w_[i];
    }
    for (int i = 0; i < d_; ++i) w_[i] /= nrm;
  }

  double env_entropy() const {
    for (int i = 0; i < d_; ++i) {
      const double si = std::sqrt(w_[i]);
      for (int j = 0; j <= i; ++j) {
        const Complex v = si * std::sqrt(w_[j]) * gram_(i, j);
        s_(i, j) = v;
        s_(j, i) = std::conj(v);
      }
    }
    detail::hermitian_eigenvalues(s_, eigs_);
    double h = 0.0;
    for (double ev : eigs_) {
      if (ev < tol::entropy_cut) continue;
      h -= ev * std::log2(ev);
    }
    return h;
  }

  const CMatrix& gram_;
  int k_, d_;
  double lambda_;
  mutable CMatrix s_;
  mutable std::vector<double> w_, probs_, avg_;
  mutable std::vector<double> eigs_;
};

}  // namespace detail

// Maximizes the dephasing functional; throws structural_error for channels
// that are not generalized dephasing in the computational basis.
inline double f_lambda(const KrausChannel& ch, double lambda, const OptimizerConfig& cfg) {
  if (lambda < 1.0) throw domain_error("f_lambda: lambda must be >= 1");
  cfg.validate();
  const auto spec = dephasing_structure(ch);
  if (!spec) throw structural_error("f_lambda: channel is not a generalized dephasing channel");
  const int k = cfg.resolved_cardinality(ch.dim_in);
  const CMatrix gram = spec->gram;
  auto make = [&] { return detail::DiagonalObjective(gram, k, lambda); };
  detail::RestartOutcome best =
      detail::multistart(make, cfg, mix_seed(detail::kFLambdaTag, detail::lambda_tag(lambda)));
  return best.value;
}

// ---------------------------------------------------------------------------
// Bounds, continuation map, cardinality experiment
// ---------------------------------------------------------------------------

// Time-sharing (inner) and unit-rate (outer) segments through the endpoints.
struct RegionBounds {
  double C = 0.0;
  double Q = 0.0;

  RegionBounds(double c, double q) : C(c), Q(q) {
    if (c < 0.0 || q < 0.0) throw domain_error("bounds: capacities must be >= 0");
  }

  double time_share(double r) const {
    if (C <= 0.0) {
      if (r > 0.0) throw domain_error("bounds: time-sharing undefined for C = 0 and r > 0");
      return Q;
    }
    if (r < -1e-12 || r > C + 1e-9) throw domain_error("bounds: r outside [0, C]");
    return Q * (1.0 - std::clamp(r, 0.0, C) / C);
  }

  // Outer bound r + R <= C.
  bool outer_ok(double r, double R, double slack = 1e-9) const { return r + R <= C + slack; }
};

inline RegionBounds bounds(double C, double Q) { return RegionBounds(C, Q); }

// Bijection onto the R <= 0 continuation: (r, R) -> (r + I(A;B|X), R - I(A;B|X))
// using the point's achieving ensemble. The sum r + R is preserved.
inline RatePoint negative_R_map(const RatePoint& pt, const KrausChannel& ch) {
  if (pt.ensemble.members.empty())
    throw validation_error("negative_R_map: point carries no achieving ensemble");
  const InfoBreakdown b = info_breakdown(pt.ensemble, ch);
  RatePoint out = pt;
  out.kind = PointKind::mapped;
  out.r = pt.r + b.cond_mutual;
  out.R = pt.R - b.cond_mutual;
  out.objective = pt.kind == PointKind::lambda_point ? out.r + pt.lambda * out.R : out.r + out.R;
  return out;
}

struct CardinalityReport {
  int cardinality_base = 0;
  int cardinality_double = 0;
  double objective_base = 0.0;
  double objective_double = 0.0;
  double gap = 0.0;  // objective_double - objective_base
};

// Compares the lambda optimum at |X| = d^2+2 against |X| = 2(d^2+2).
inline CardinalityReport cardinality_experiment(const KrausChannel& ch, double lambda,
                                                const OptimizerConfig& cfg) {
  CardinalityReport rep;
  OptimizerConfig base = cfg;
  base.cardinality = cfg.resolved_cardinality(ch.dim_in);
  OptimizerConfig doubled = cfg;
  doubled.cardinality = 2 * base.cardinality;
  rep.cardinality_base = base.cardinality;
  rep.cardinality_double = doubled.cardinality;
  rep.objective_base = optimize_lambda(ch, lambda, base).objective;
  rep.objective_double = optimize_lambda(ch, lambda, doubled).objective;
  rep.gap = rep.objective_double - rep.objective_base;
  return rep;
}

struct FlatRegionReport {
  double q1 = 0.0;          // reference quantum endpoint
  double r_achieved = 0.0;  // classical rate with R pinned near q1
  double R_achieved = 0.0;
  bool flat_region_found = false;
};

// Diagnostic for the flat-segment observation: searches for ensembles with
// R >= Q1 - 1e-4 and reports the classical rate found. Reported, not
// asserted; the underlying claim is qualitative.
inline FlatRegionReport flat_region_probe(const KrausChannel& ch, const OptimizerConfig& cfg) {
  cfg.validate();
  FlatRegionReport rep;
  rep.q1 = q1_capacity(ch, cfg).R;
  const double floor = rep.q1 - 1e-4;
  const int k = cfg.resolved_cardinality(ch.dim_in);
  auto make = [&] {
    return detail::EnsembleObjective(ch, k, 0.0,
                                     detail::EnsembleObjective::Mode::coherent_penalized, floor,
                                     1000.0);
  };
  detail::RestartOutcome best = detail::multistart(make, cfg, detail::kFlatTag);
  detail::EnsembleObjective obj = make();
  const Ensemble e = obj.ensemble_at(best.x);
  rep.r_achieved = holevo_information(e, ch);
  rep.R_achieved = avg_coherent_information(e, ch);
  rep.flat_region_found = rep.R_achieved >= floor - 1e-6 && rep.r_achieved > 1e-3;
  return rep;
}

}  // namespace cqregion
