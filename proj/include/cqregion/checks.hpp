#pragma once

#include <sstream>

#include "cqregion/degradability.hpp"
#include "cqregion/io.hpp"
#include "cqregion/region.hpp"
#include "cqregion/sampling.hpp"

// Property suites behind `cqregion check` and the acceptance harness. Each
// suite returns per-assertion log lines plus a pass/fail tally.

namespace cqregion {

struct CheckResult {
  std::string suite;
  int passed = 0;
  int failed = 0;
  std::vector<std::string> lines;

  bool ok() const { return failed == 0; }

  void expect(bool cond, const std::string& what) {
    (cond ? passed : failed)++;
    lines.push_back(std::string(cond ? "ok - " : "FAIL - ") + what);
  }
};

namespace detail {

inline std::string measured(const char* what, double value, const char* rel, double bound) {
  std::ostringstream os;
  os << what << ": " << value << " " << rel << " " << bound;
  return os.str();
}

}  // namespace detail

// qcore + channel invariants on randomized inputs.
inline CheckResult check_core(std::uint64_t seed) {
  CheckResult res;
  res.suite = "core";
  Rng rng(mix_seed(seed, 0xC03E));

  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const int da = 2 + static_cast<int>(rng.bits() % 3), db = 2 + static_cast<int>(rng.bits() % 3);
    const DensityOperator a = random_density(da, rng), b = random_density(db, rng);
    worst = std::max(worst, std::abs(entropy(tensor(a.matrix, b.matrix)) - entropy(a) - entropy(b)));
  }
  res.expect(worst <= 1e-9, detail::measured("entropy additivity |H(a@b)-H(a)-H(b)|", worst, "<=", 1e-9));

  worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const int d = 2 + static_cast<int>(rng.bits() % 3);
    const DensityOperator rho = random_density(d, rng);
    const CMatrix u = random_unitary(d, rng);
    worst = std::max(worst, std::abs(entropy(u * rho.matrix * u.adjoint()) - entropy(rho)));
  }
  res.expect(worst <= 1e-9, detail::measured("entropy unitary invariance", worst, "<=", 1e-9));

  worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const int d = 2 + static_cast<int>(rng.bits() % 3);
    const DensityOperator rho = random_density(d, rng);
    const CVector psi = purify(rho);
    const CMatrix back = reduce_pure(psi, SystemLayout{d, d}, {1});
    worst = std::max(worst, (back - rho.matrix).cwiseAbs().maxCoeff());
  }
  res.expect(worst <= 1e-10, detail::measured("purify round-trip", worst, "<=", 1e-10));

  bool sandwich = true;
  for (int i = 0; i < 200; ++i) {
    const int d = 2 + static_cast<int>(rng.bits() % 3);
    const DensityOperator a = random_density(d, rng), b = random_density(d, rng);
    const double f = fidelity(a, b), td = trace_distance(a, b);
    if (!(1.0 - f <= td + 1e-9 && td <= std::sqrt(1.0 - f) + 1e-9)) sandwich = false;
  }
  res.expect(sandwich, "fidelity/trace-distance sandwich on 200 random pairs");

  bool sym = true;
  for (int k = 0; k <= 256; ++k) {
    const double mu = static_cast<double>(k) / 256.0;
    if (binary_entropy(mu) != binary_entropy(1.0 - mu)) sym = false;
  }
  res.expect(sym, "binary_entropy(mu) == binary_entropy(1-mu) exactly on the dyadic grid");

  {
    bool factories_ok = true;
    double dev = 0.0;
    const std::vector<KrausChannel> all = {
        channels::identity(2),       channels::identity(3),
        channels::dephasing_qubit(0.1), channels::depolarizing(0.25),
        channels::erasure(0.3),      channels::completely_dephasing(3),
        channels::trine(),           channels::generalized_dephasing(random_dephasing_spec(3, rng))};
    for (const auto& ch : all) {
      const ChannelReport rep = validate(ch, false);
      factories_ok = factories_ok && rep.valid;
      dev = std::max(dev, rep.max_deviation);
    }
    res.expect(factories_ok && dev < 1e-10,
               detail::measured("factory validation, max closure deviation", dev, "<", 1e-10));
  }

  worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int din = 2 + static_cast<int>(rng.bits() % 2);
    const KrausChannel ch = random_channel(din, 2 + static_cast<int>(rng.bits() % 2), 2, rng);
    const KrausChannel comp = complementary(ch);
    const StinespringIsometry iso = stinespring(ch);
    const DensityOperator rho = random_density(din, rng);
    const CMatrix joint = iso.v * rho.matrix * iso.v.adjoint();
    const SystemLayout layout{ch.dim_out, iso.dim_env};
    worst = std::max(worst,
                     (partial_trace(joint, layout, {0}) - apply_matrix(ch, rho.matrix)).cwiseAbs().maxCoeff());
    worst = std::max(
        worst, (partial_trace(joint, layout, {1}) - apply_matrix(comp, rho.matrix)).cwiseAbs().maxCoeff());
  }
  res.expect(worst <= 1e-10,
             detail::measured("Stinespring marginals vs apply/complementary", worst, "<=", 1e-10));

  worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int d = 2 + static_cast<int>(rng.bits() % 2);
    const KrausChannel n = channels::generalized_dephasing(random_dephasing_spec(d, rng));
    const KrausChannel delta = channels::completely_dephasing(d);
    const KrausChannel nc = complementary(n);
    worst = std::max(worst, (choi(compose(delta, n)) - choi(delta)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (choi(compose(n, delta)) - choi(delta)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (choi(compose(nc, delta)) - choi(nc)).cwiseAbs().maxCoeff());
  }
  res.expect(worst <= 1e-10,
             detail::measured("dephasing identities Delta o N = N o Delta = Delta, N^c o Delta = N^c",
                              worst, "<=", 1e-10));

  {
    bool agree = true;
    for (int i = 0; i < 10; ++i) {
      KrausChannel ch = random_channel(2, 2, 2, rng);
      if (i % 2 == 1) ch.kraus[0] *= 1.05;  // break trace preservation
      const bool kraus_ok = validate(ch, false).valid;
      const CMatrix j = choi(ch);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(j, Eigen::EigenvaluesOnly);
      const bool psd = es.eigenvalues().minCoeff() > -1e-10;
      const CMatrix marg = partial_trace(j, SystemLayout{2, 2}, {0});
      const bool marg_ok =
          (marg - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <= 1e-9;
      if (kraus_ok != (psd && marg_ok)) agree = false;
    }
    res.expect(agree, "Choi-based CPTP verdict agrees with Kraus-based verdict");
  }

  return res;
}

// Appendix-A concavity: Holevo superadditivity under joins (inequality) and
// exact linearity of the average coherent information.
inline CheckResult check_concavity(std::uint64_t seed, int trials = 200) {
  CheckResult res;
  res.suite = "concavity";
  Rng rng(mix_seed(seed, 0xC0CA));
  double worst_ineq = std::numeric_limits<double>::infinity();
  double worst_eq = 0.0;
  for (int i = 0; i < trials; ++i) {
    const int din = 2 + static_cast<int>(rng.bits() % 2);
    const KrausChannel ch = random_channel(din, 2 + static_cast<int>(rng.bits() % 2),
                                           2 + static_cast<int>(rng.bits() % 2), rng);
    const Ensemble e0 = random_ensemble(din, 1 + static_cast<int>(rng.bits() % 3), rng);
    const Ensemble e1 = random_ensemble(din, 1 + static_cast<int>(rng.bits() % 3), rng);
    const double lam = rng.uniform();
    const Ensemble joined = convex_join(e0, e1, lam);
    const double lhs_h = holevo_information(joined, ch);
    const double rhs_h = lam * holevo_information(e0, ch) + (1 - lam) * holevo_information(e1, ch);
    worst_ineq = std::min(worst_ineq, lhs_h - rhs_h);
    const double lhs_c = avg_coherent_information(joined, ch);
    const double rhs_c =
        lam * avg_coherent_information(e0, ch) + (1 - lam) * avg_coherent_information(e1, ch);
    worst_eq = std::max(worst_eq, std::abs(lhs_c - rhs_c));
  }
  res.expect(worst_ineq >= -1e-9,
             detail::measured("holevo(join) - mix of holevos, min slack", worst_ineq, ">=", -1e-9));
  res.expect(worst_eq <= 1e-10,
             detail::measured("avg coherent linearity, max |mismatch|", worst_eq, "<=", 1e-10));
  return res;
}

// Lemma-2 continuity bound margin over random bipartite pairs.
inline CheckResult check_lemma2(std::uint64_t seed, int trials = 1000,
                                Lemma2DimReading reading = Lemma2DimReading::joint) {
  CheckResult res;
  res.suite = "lemma2";
  Rng rng(mix_seed(seed, 0x1E22A));
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    const SystemLayout layout = (i % 2 == 0) ? SystemLayout{2, 2} : SystemLayout{2, 3};
    const int d = layout.total_dim();
    DensityOperator a = random_density(d, rng);
    DensityOperator b;
    if (i % 3 == 0) {
      // nearby pair: fidelity close to 1 probes the tight corner of the bound
      CMatrix m = 0.98 * a.matrix + 0.02 * random_density(d, rng).matrix;
      b = DensityOperator::trusted(std::move(m));
    } else {
      b = random_density(d, rng);
    }
    worst = std::min(worst, lemma2_margin(a, b, layout, reading));
  }
  res.expect(worst >= 0.0, detail::measured("lemma-2 margin, min over pairs", worst, ">=", 0.0));
  return res;
}

// f_lambda additivity across a tensor pair of dephasing channels.
inline CheckResult check_additivity(const OptimizerConfig& cfg, double q1 = 0.1, double q2 = 0.2,
                                    std::vector<double> lambdas = {1.0, 2.0, 4.0},
                                    double tolerance = 5e-3) {
  CheckResult res;
  res.suite = "additivity";
  const KrausChannel n1 = channels::dephasing_qubit(q1);
  const KrausChannel n2 = channels::dephasing_qubit(q2);
  const KrausChannel joint = tensor(n1, n2);
  for (double lam : lambdas) {
    const double f1 = f_lambda(n1, lam, cfg);
    const double f2 = f_lambda(n2, lam, cfg);
    const double fj = f_lambda(joint, lam, cfg);
    const double gap = std::abs(fj - f1 - f2);
    std::ostringstream os;
    os << "f_" << lam << "(N1 @ N2) = " << fj << " vs f(N1)+f(N2) = " << f1 + f2
       << ", |gap| = " << gap << " <= " << tolerance;
    res.expect(gap <= tolerance, os.str());
  }
  return res;
}

// Cardinality saturation: doubling |X| beyond d^2+2 moves the optimum by
// less than the tolerance.
inline CheckResult check_cardinality(const OptimizerConfig& cfg, double tolerance = 1e-3) {
  CheckResult res;
  res.suite = "cardinality";
  struct Case {
    KrausChannel ch;
    double lambda;
  };
  const std::vector<Case> cases = {{channels::dephasing_qubit(0.1), 1.0},
                                   {channels::dephasing_qubit(0.1), 2.0},
                                   {channels::depolarizing(0.03), 1.0},
                                   {channels::depolarizing(0.03), 2.0}};
  for (const auto& c : cases) {
    const CardinalityReport rep = cardinality_experiment(c.ch, c.lambda, cfg);
    std::ostringstream os;
    os << c.ch.name << " lambda=" << c.lambda << ": |X|=" << rep.cardinality_base << " -> "
       << rep.cardinality_double << " objective gap " << std::abs(rep.gap) << " <= " << tolerance;
    res.expect(std::abs(rep.gap) <= tolerance, os.str());
  }
  return res;
}

// Numerically optimized dephasing curves against the closed form, matched at
// equal r and equal R.
inline CheckResult check_dephasing_oracle(const OptimizerConfig& cfg,
                                          std::vector<double> qs = {0.05, 0.1, 0.2},
                                          double tolerance = 1e-3) {
  CheckResult res;
  res.suite = "dephasing-oracle";
  for (double q : qs) {
    const DephasingCurveOracle oracle(q);
    const TradeoffCurve curve = sweep_curve(channels::dephasing_qubit(q), cfg);
    double worst_R = 0.0, worst_r = 0.0;
    for (const auto& p : curve.points) {
      worst_R = std::max(worst_R, std::abs(p.R - oracle.R_at_r(p.r)));
      worst_r = std::max(worst_r, std::abs(p.r - oracle.r_at_R(std::max(0.0, p.R))));
    }
    std::ostringstream os;
    os << "q=" << q << ": " << curve.points.size() << " envelope points, max |dR|@r = " << worst_R
       << ", max |dr|@R = " << worst_r << " <= " << tolerance;
    res.expect(worst_R <= tolerance && worst_r <= tolerance, os.str());
  }
  return res;
}

}  // namespace cqregion
