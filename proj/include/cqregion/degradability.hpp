#pragma once

#include "cqregion/channel.hpp"
#include "cqregion/optimize.hpp"

namespace cqregion {

struct DegradabilityConfig {
  int restarts = 20;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int max_iters = 1500;
  double fd_step = 1e-5;
  int patience = 25;
  int threads = 0;
  double certify_threshold = 1e-8;
};

struct DegradabilityReport {
  double residual = 0.0;  // Frobenius distance between Choi(T o N) and Choi(N^c)
  bool certified = false;
  bool exact_path = false;  // dephasing identity N^c o N = N^c used, no search
  KrausChannel degrading_map;
};

namespace detail {

inline double choi_distance(const KrausChannel& a, const KrausChannel& b) {
  return (choi(a) - choi(b)).norm();
}

// CPTP candidate T: H_B -> H_E parametrized by a free complex matrix M of
// shape (dE * kT) x dB; the isometry is the polar factor M (M^dag M)^{-1/2}.
class DegradingObjective {
 public:
  DegradingObjective(const KrausChannel& ch, const KrausChannel& comp)
      : ch_(&ch), comp_(&comp), db_(ch.dim_out), de_(comp.dim_out), kt_(db_ * de_) {}

  int param_count() const { return 2 * de_ * kt_ * db_; }

  // Negated squared Choi distance (the ascent engine maximizes).
  double operator()(const std::vector<double>& x) const {
    const KrausChannel t = map_at(x);
    const KrausChannel composed = compose(t, *ch_);
    const double dist = choi_distance(composed, *comp_);
    return -dist * dist;
  }

  KrausChannel map_at(const std::vector<double>& x) const {
    const Eigen::Index rows = static_cast<Eigen::Index>(de_) * kt_;
    CMatrix m(rows, db_);
    const double* re = x.data();
    const double* im = re + rows * db_;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (int j = 0; j < db_; ++j)
        m(i, j) = Complex(re[i * db_ + j], im[i * db_ + j]);
    // Polar projection onto isometries.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m.adjoint() * m);
    RVector ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev[i] = ev[i] > 1e-14 ? 1.0 / std::sqrt(ev[i]) : 0.0;
    const CMatrix v = m * (es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
    std::vector<CMatrix> kraus;
    kraus.reserve(kt_);
    for (int k = 0; k < kt_; ++k) {
      CMatrix op(de_, db_);
      for (int e = 0; e < de_; ++e) op.row(e) = v.row(static_cast<Eigen::Index>(e) * kt_ + k);
      kraus.push_back(std::move(op));
    }
    return KrausChannel(std::move(kraus), "degrading-candidate");
  }

  std::vector<double> start(int restart, Rng& rng) const {
    std::vector<double> x(param_count());
    (void)restart;
    for (double& v : x) v = rng.normal();
    return x;
  }

 private:
  const KrausChannel* ch_;
  const KrausChannel* comp_;
  int db_, de_, kt_;
};

}  // namespace detail

// Searches for a CPTP map T with T o N = N^c. Generalized dephasing channels
// take the exact path T = N^c (the complement depends only on the input
// diagonal, which N preserves); everything else runs a multistart descent on
// the squared Choi distance. A residual below the certification threshold
// certifies degradability at numerical precision; a larger residual is
// inconclusive evidence against.
inline DegradabilityReport degradability_residual(const KrausChannel& ch,
                                                  const DegradabilityConfig& cfg = {}) {
  validate(ch);
  const KrausChannel comp = complementary(ch);
  DegradabilityReport rep;

  if (dephasing_structure(ch)) {
    rep.degrading_map = comp;
    rep.residual = detail::choi_distance(compose(comp, ch), comp);
    rep.exact_path = true;
    rep.certified = rep.residual < cfg.certify_threshold;
    return rep;
  }

  detail::DegradingObjective probe(ch, comp);
  std::vector<double> best_x;
  double best = -std::numeric_limits<double>::infinity();
  AscentOptions opts{cfg.tol, cfg.max_iters, cfg.fd_step, cfg.patience};
  std::vector<std::pair<double, std::vector<double>>> slots(cfg.restarts);
  parallel_for(cfg.restarts, resolve_threads(cfg.threads), [&](int rIdx) {
    detail::DegradingObjective obj(ch, comp);
    Rng rng(mix_seed(cfg.seed, 0xDE62ADULL, static_cast<std::uint64_t>(rIdx)));
    AscentResult res = ascend(obj, obj.start(rIdx, rng), opts, rng);
    slots[rIdx] = {res.value, std::move(res.x)};
  });
  for (auto& [value, x] : slots) {
    if (value > best) {
      best = value;
      best_x = std::move(x);
    }
  }
  rep.degrading_map = probe.map_at(best_x);
  rep.residual = std::sqrt(std::max(0.0, -best));
  rep.certified = rep.residual < cfg.certify_threshold;
  return rep;
}

}  // namespace cqregion
