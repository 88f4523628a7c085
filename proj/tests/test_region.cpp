#include <catch2/catch_amalgamated.hpp>

#include "cqregion/region.hpp"
#include "cqregion/sampling.hpp"

using namespace cqregion;

namespace {

constexpr double kQ1_Deph01 = 0.5310044064107188;   // 1 - h2(0.1)
constexpr double kLag2Deph01 = 1.0620088128214376;  // 2 (1 - h2(0.1))
constexpr double kR_mu02_q01 = 0.38908532390661155;
constexpr double kr_mu02 = 0.2780719051126377;  // 1 - h2(0.2)

DensityOperator diag_rho(double a, double b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return DensityOperator::trusted(std::move(m));
}

OptimizerConfig fast_config(int restarts = 6) {
  OptimizerConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = 2024;
  cfg.max_iters = 700;
  return cfg;
}

}  // namespace

TEST_CASE("lagrangian", "[region]") {
  const Ensemble pi = Ensemble::single(diag_rho(0.5, 0.5));
  REQUIRE(lagrangian(pi, channels::identity(2), 1.0) == Catch::Approx(1.0).margin(1e-12));

  const Ensemble basis = Ensemble::trusted({{0.5, diag_rho(1, 0)}, {0.5, diag_rho(0, 1)}});
  REQUIRE(lagrangian(basis, channels::completely_dephasing(2), 1.0) ==
          Catch::Approx(1.0).margin(1e-12));

  const Ensemble mu_half = Ensemble::trusted({{0.5, diag_rho(0.5, 0.5)}, {0.5, diag_rho(0.5, 0.5)}});
  REQUIRE(lagrangian(mu_half, channels::dephasing_qubit(0.1), 2.0) ==
          Catch::Approx(kLag2Deph01).margin(1e-12));

  REQUIRE_THROWS_AS(lagrangian(pi, channels::identity(2), 0.5), domain_error);
}

TEST_CASE("optimize_lambda on the noiseless channel", "[region][optimizer]") {
  const OptimizerConfig cfg = fast_config();
  SECTION("lambda > 1: quantum rate dominates") {
    const RatePoint pt = optimize_lambda(channels::identity(2), 2.0, cfg);
    REQUIRE(pt.objective == Catch::Approx(2.0).margin(1e-6));
    REQUIRE(pt.R == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(pt.r == Catch::Approx(0.0).margin(1e-6));
  }
  SECTION("lambda = 1: any split of r + R = 1") {
    const RatePoint pt = optimize_lambda(channels::identity(2), 1.0, cfg);
    REQUIRE(pt.objective == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(pt.r + pt.R == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("capacity endpoints", "[region][optimizer]") {
  const OptimizerConfig cfg = fast_config();
  SECTION("identity qubit") {
    REQUIRE(holevo_capacity(channels::identity(2), cfg).r == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(q1_capacity(channels::identity(2), cfg).R == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("dephasing(0.1)") {
    REQUIRE(holevo_capacity(channels::dephasing_qubit(0.1), cfg).r ==
            Catch::Approx(1.0).margin(1e-4));
    REQUIRE(q1_capacity(channels::dephasing_qubit(0.1), cfg).R ==
            Catch::Approx(kQ1_Deph01).margin(1e-6));
  }
  SECTION("trine: one classical bit, no quantum capacity") {
    const OptimizerConfig tcfg = fast_config(8);
    REQUIRE(holevo_capacity(channels::trine(), tcfg).r == Catch::Approx(1.0).margin(1e-3));
    REQUIRE(std::abs(q1_capacity(channels::trine(), tcfg).R) <= 1e-4);
  }
}

TEST_CASE("analytic dephasing curve", "[region]") {
  SECTION("endpoints and the frozen mu = 0.2 sample") {
    const DephasingCurveOracle oracle(0.1);
    REQUIRE(oracle.r_of_mu(0.0) == Catch::Approx(1.0));
    REQUIRE(oracle.R_of_mu(0.0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(oracle.R_of_mu(0.5) == Catch::Approx(kQ1_Deph01).margin(1e-12));
    REQUIRE(oracle.r_of_mu(0.2) == Catch::Approx(kr_mu02).margin(1e-12));
    REQUIRE(oracle.R_of_mu(0.2) == Catch::Approx(kR_mu02_q01).margin(1e-12));
    // strictly above the time-sharing segment through (1, 0) and (0, Q1)
    const double ts = kQ1_Deph01 * (1.0 - kr_mu02);
    REQUIRE(kR_mu02_q01 - ts > 1e-3);
  }
  SECTION("curve object holds ensembles that reproduce each point") {
    const TradeoffCurve curve = analytic_dephasing_curve(0.1, {0.0, 0.1, 0.25, 0.5});
    const KrausChannel ch = channels::dephasing_qubit(0.1);
    for (const auto& p : curve.points) {
      REQUIRE(holevo_information(p.ensemble, ch) == Catch::Approx(p.r).margin(1e-10));
      REQUIRE(avg_coherent_information(p.ensemble, ch) == Catch::Approx(p.R).margin(1e-10));
    }
  }
  SECTION("inversions agree") {
    const DephasingCurveOracle oracle(0.2);
    for (double mu : {0.05, 0.17, 0.33, 0.49}) {
      REQUIRE(oracle.mu_of_r(oracle.r_of_mu(mu)) == Catch::Approx(mu).margin(1e-9));
      REQUIRE(oracle.R_at_r(oracle.r_of_mu(mu)) == Catch::Approx(oracle.R_of_mu(mu)).margin(1e-9));
    }
  }
  SECTION("R is nondecreasing in mu") {
    for (double q : {0.05, 0.1, 0.2, 0.35}) {
      const DephasingCurveOracle oracle(q);
      double prev = -1.0;
      for (int k = 0; k <= 400; ++k) {
        const double R = oracle.R_of_mu(0.5 * k / 400.0);
        REQUIRE(R >= prev - 1e-12);
        prev = R;
      }
    }
  }
  REQUIRE_THROWS_AS(analytic_dephasing_curve(0.7, {0.1}), domain_error);
  REQUIRE_THROWS_AS(analytic_dephasing_curve(0.1, {0.7}), domain_error);
}

TEST_CASE("bounds", "[region]") {
  SECTION("identity: inner and outer segments coincide") {
    const RegionBounds b = bounds(1.0, 1.0);
    for (double r : {0.0, 0.3, 1.0}) {
      REQUIRE(b.time_share(r) == Catch::Approx(1.0 - r).margin(1e-12));
      REQUIRE(b.outer_ok(r, 1.0 - r));
      REQUIRE_FALSE(b.outer_ok(r, 1.0 - r + 1e-6));
    }
  }
  SECTION("dephasing(0.1) time-sharing at r = 0.5") {
    const RegionBounds b = bounds(1.0, kQ1_Deph01);
    REQUIRE(b.time_share(0.5) == Catch::Approx(0.2655022032053594).margin(1e-12));
  }
  SECTION("degenerate classical capacity") {
    const RegionBounds b = bounds(0.0, 0.5);
    REQUIRE(b.time_share(0.0) == Catch::Approx(0.5));
    REQUIRE_THROWS_AS(b.time_share(0.1), domain_error);
  }
}

TEST_CASE("negative-R continuation map", "[region]") {
  const KrausChannel id = channels::identity(2);
  SECTION("pure members map to themselves") {
    RatePoint pt;
    pt.kind = PointKind::lambda_point;
    pt.lambda = 2.0;
    pt.ensemble = Ensemble::trusted({{0.5, diag_rho(1, 0)}, {0.5, diag_rho(0, 1)}});
    pt.r = holevo_information(pt.ensemble, id);
    pt.R = avg_coherent_information(pt.ensemble, id);
    const RatePoint mapped = negative_R_map(pt, id);
    REQUIRE(mapped.r == Catch::Approx(pt.r).margin(1e-12));
    REQUIRE(mapped.R == Catch::Approx(pt.R).margin(1e-12));
  }
  SECTION("Bell input maps (0, 1) to (2, -1)") {
    RatePoint pt;
    pt.kind = PointKind::q1_endpoint;
    pt.ensemble = Ensemble::single(diag_rho(0.5, 0.5));
    pt.r = 0.0;
    pt.R = 1.0;
    const RatePoint mapped = negative_R_map(pt, id);
    REQUIRE(mapped.r == Catch::Approx(2.0).margin(1e-10));
    REQUIRE(mapped.R == Catch::Approx(-1.0).margin(1e-10));
  }
  SECTION("the sum r + R is preserved") {
    Rng rng(107);
    for (int t = 0; t < 20; ++t) {
      const KrausChannel ch = random_channel(2, 2, 2, rng);
      RatePoint pt;
      pt.kind = PointKind::lambda_point;
      pt.lambda = 1.5;
      pt.ensemble = random_ensemble(2, 3, rng);
      pt.r = holevo_information(pt.ensemble, ch);
      pt.R = avg_coherent_information(pt.ensemble, ch);
      const RatePoint mapped = negative_R_map(pt, ch);
      REQUIRE(mapped.r + mapped.R == Catch::Approx(pt.r + pt.R).margin(1e-10));
    }
  }
  SECTION("missing ensemble is rejected") {
    RatePoint empty;
    REQUIRE_THROWS_AS(negative_R_map(empty, id), validation_error);
  }
}

TEST_CASE("f_lambda", "[region][optimizer]") {
  const OptimizerConfig cfg = fast_config();
  SECTION("completely dephasing at lambda = 1 reaches 1 bit") {
    REQUIRE(f_lambda(channels::completely_dephasing(2), 1.0, cfg) ==
            Catch::Approx(1.0).margin(1e-6));
  }
  SECTION("matches the general-ensemble optimizer on dephasing(0.1)") {
    const double direct = f_lambda(channels::dephasing_qubit(0.1), 2.0, cfg);
    const double general = optimize_lambda(channels::dephasing_qubit(0.1), 2.0, cfg).objective;
    REQUIRE(direct == Catch::Approx(general).margin(2e-3));
    REQUIRE(direct == Catch::Approx(kLag2Deph01).margin(1e-4));
  }
  SECTION("dominates random diagonal ensembles") {
    Rng rng(109);
    const KrausChannel ch = channels::dephasing_qubit(0.15);
    const double best = f_lambda(ch, 1.5, cfg);
    for (int t = 0; t < 20; ++t) {
      std::vector<Ensemble::Member> ms;
      const int k = 1 + static_cast<int>(rng.bits() % 4);
      std::vector<double> w(k);
      double norm = 0;
      for (auto& x : w) norm += (x = -std::log(rng.uniform()));
      for (int i = 0; i < k; ++i) {
        const double a = rng.uniform();
        ms.push_back({w[i] / norm, diag_rho(a, 1 - a)});
      }
      REQUIRE(best >= lagrangian(Ensemble::trusted(ms), ch, 1.5) - 1e-9);
    }
  }
  REQUIRE_THROWS_AS(f_lambda(channels::depolarizing(0.1), 2.0, cfg), structural_error);
  REQUIRE_THROWS_AS(f_lambda(channels::dephasing_qubit(0.1), 0.5, cfg), domain_error);
}

TEST_CASE("sweep_curve on the noiseless channel", "[region][optimizer]") {
  OptimizerConfig cfg = fast_config();
  const TradeoffCurve curve = sweep_curve(channels::identity(2), cfg);

  SECTION("envelope is on the r + R = 1 segment with both endpoints") {
    REQUIRE(curve.points.size() >= 2);
    for (const auto& p : curve.points) {
      REQUIRE(p.r >= 0.0);
      REQUIRE(p.r + p.R == Catch::Approx(1.0).margin(1e-6));
    }
    REQUIRE(curve.points.front().R == Catch::Approx(1.0).margin(1e-6));  // decreasing R order
    REQUIRE(curve.points.back().r == Catch::Approx(1.0).margin(1e-6));
  }
  SECTION("ordered by decreasing R with no dominated points") {
    for (size_t i = 0; i + 1 < curve.points.size(); ++i) {
      REQUIRE(curve.points[i].R >= curve.points[i + 1].R - 1e-12);
      REQUIRE(curve.points[i + 1].r > curve.points[i].r);
    }
  }
}

TEST_CASE("sweep determinism", "[region][optimizer]") {
  OptimizerConfig cfg = fast_config(4);
  cfg.max_iters = 250;
  const KrausChannel ch = channels::dephasing_qubit(0.1);
  const TradeoffCurve a = sweep_curve(ch, {1.0, 2.0, 5.0}, cfg);
  OptimizerConfig cfg_threads = cfg;
  cfg_threads.threads = 1;  // same results regardless of parallel schedule
  const TradeoffCurve b = sweep_curve(ch, {1.0, 2.0, 5.0}, cfg_threads);
  REQUIRE(a.points.size() == b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) {
    REQUIRE(a.points[i].r == b.points[i].r);
    REQUIRE(a.points[i].R == b.points[i].R);
    REQUIRE(a.points[i].objective == b.points[i].objective);
  }
}

TEST_CASE("cardinality experiment runs twin optimizations", "[region][optimizer]") {
  OptimizerConfig cfg = fast_config(4);
  cfg.max_iters = 500;
  const CardinalityReport rep = cardinality_experiment(channels::dephasing_qubit(0.1), 2.0, cfg);
  REQUIRE(rep.cardinality_base == 6);
  REQUIRE(rep.cardinality_double == 12);
  REQUIRE(std::abs(rep.gap) <= 1e-3);
}

TEST_CASE("config validation", "[region]") {
  OptimizerConfig cfg;
  cfg.restarts = 0;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = OptimizerConfig{};
  cfg.tol = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = OptimizerConfig{};
  REQUIRE(cfg.resolved_cardinality(2) == 6);
  REQUIRE(cfg.resolved_cardinality(4) == 18);
  REQUIRE_THROWS_AS(optimize_lambda(channels::identity(2), 0.9, cfg), domain_error);
  REQUIRE_THROWS_AS(sweep_curve(channels::identity(2), {0.5, 2.0}, cfg), domain_error);
}
