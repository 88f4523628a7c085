#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cqregion/checks.hpp"
#include "cqregion/io.hpp"

using namespace cqregion;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "cqregion_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Non-comment portion of an output file (the deterministic body).
std::string body_of(const std::string& text) {
  std::stringstream in(text), out;
  std::string line;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out << line << "\n";
  return out.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CQREGION_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("channel config parsing", "[io]") {
  SECTION("named kinds") {
    REQUIRE(channel_from_json({{"kind", "identity"}, {"dim", 3}}).dim_in == 3);
    REQUIRE(channel_from_json({{"kind", "dephasing"}, {"param", 0.1}}).kraus.size() == 2);
    REQUIRE(channel_from_json({{"kind", "depolarizing"}, {"param", 0.2}}).kraus.size() == 4);
    REQUIRE(channel_from_json({{"kind", "erasure"}, {"param", 0.5}}).dim_out == 3);
    REQUIRE(channel_from_json({{"kind", "completely_dephasing"}, {"dim", 3}}).kraus.size() == 3);
    REQUIRE(channel_from_json({{"kind", "trine"}}).dim_in == 3);
  }
  SECTION("explicit kraus lists validate") {
    nlohmann::json j;
    j["kind"] = "kraus";
    j["dim"] = 2;
    const double s = 1.0 / std::sqrt(2.0);
    j["kraus"] = {{{s, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {s, 0.0}},
                  {{s, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {-s, 0.0}}};
    const KrausChannel ch = channel_from_json(j);
    REQUIRE(ch.kraus.size() == 2);
    REQUIRE(validate(ch).valid);
  }
  SECTION("generalized dephasing via a Gram matrix") {
    nlohmann::json j;
    j["kind"] = "generalized_dephasing";
    j["dim"] = 2;
    j["gram"] = {{1.0, 0.0}, {0.6, 0.0}, {0.6, 0.0}, {1.0, 0.0}};
    const KrausChannel ch = channel_from_json(j);
    const auto spec = dephasing_structure(ch);
    REQUIRE(spec.has_value());
    REQUIRE(spec->gram(0, 1).real() == Catch::Approx(0.6).margin(1e-10));
  }
  SECTION("errors name the offending field") {
    using Catch::Matchers::ContainsSubstring;
    REQUIRE_THROWS_WITH(channel_from_json({{"kind", "dephasing"}}), ContainsSubstring("param"));
    REQUIRE_THROWS_WITH(channel_from_json({{"kind", "nonsense"}}), ContainsSubstring("nonsense"));
    REQUIRE_THROWS_WITH(channel_from_json({{"param", 0.1}}), ContainsSubstring("kind"));
    REQUIRE_THROWS_WITH(channel_from_json({{"kind", "kraus"}, {"dim", 2}}),
                        ContainsSubstring("kraus"));
    nlohmann::json bad_kraus = {{"kind", "kraus"}, {"dim", 2}, {"kraus", {{{1.0, 0.0}}}}};
    REQUIRE_THROWS_WITH(channel_from_json(bad_kraus), ContainsSubstring("[re, im]"));
    REQUIRE_THROWS_AS(load_channel("/nonexistent/path.json"), config_error);
  }
}

TEST_CASE("numeric formatting", "[io]") {
  REQUIRE(fmt10(1.0) == "1");
  REQUIRE(fmt10(0.5310044064107188) == "0.5310044064");
  REQUIRE(fmt10(1e-12) == "1e-12");
  REQUIRE(fmt10(-0.25) == "-0.25");
}

TEST_CASE("atomic writes", "[io]") {
  const fs::path dir = temp_dir();
  const fs::path target = dir / "atomic.txt";
  write_text_atomic(target.string(), "payload\n");
  REQUIRE(slurp(target) == "payload\n");
  REQUIRE_FALSE(fs::exists(dir / "atomic.txt.tmp"));
  SECTION("failure leaves no partial file") {
    const fs::path bad = dir / "no_such_subdir" / "x.txt";
    REQUIRE_THROWS(write_text_atomic(bad.string(), "y"));
    REQUIRE_FALSE(fs::exists(bad));
  }
}

TEST_CASE("concave envelope", "[io]") {
  // Points on and below the parabola R = 1 - r^2.
  ConcaveEnvelope hull({{0.0, 1.0}, {0.5, 0.75}, {1.0, 0.0}, {0.5, 0.2}, {0.25, 0.9}});
  REQUIRE(hull.value(0.0) == Catch::Approx(1.0));
  REQUIRE(hull.value(1.0) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(hull.value(0.5) == Catch::Approx(0.75));   // interior vertex survives
  REQUIRE(hull.value(0.375) == Catch::Approx((0.9 + 0.75) / 2.0));
  REQUIRE(hull.value(-0.5) == Catch::Approx(1.0));   // flat extension to the left
  // a dominated point must not dent the hull
  ConcaveEnvelope hull2({{0.0, 1.0}, {1.0, 0.0}, {0.5, 0.1}});
  REQUIRE(hull2.value(0.5) == Catch::Approx(0.5));
}

TEST_CASE("curve CSV body", "[io]") {
  TradeoffCurve curve;
  RatePoint a;
  a.kind = PointKind::lambda_point;
  a.lambda = 2.0;
  a.r = 0.25;
  a.R = 0.5;
  a.objective = 1.25;
  RatePoint b;
  b.kind = PointKind::holevo_endpoint;
  b.r = 1.0;
  b.R = 0.0;
  b.objective = 1.0;
  curve.points = {a, b};
  const std::string body = curve_csv_body(curve, 6);
  REQUIRE(body == "lambda,r,R,objective,cardinality_used\n"
                  "2,0.25,0.5,1.25,6\n"
                  "holevo-endpoint,1,0,1,6\n");
}

TEST_CASE("cli surface", "[io][cli]") {
  const fs::path dir = temp_dir();
  const fs::path idcfg = dir / "identity.json";
  spit(idcfg, R"({"kind": "identity", "dim": 2})");
  const fs::path badcfg = dir / "bad.json";
  spit(badcfg, R"({"kind": "dephasing"})");
  const fs::path out1 = dir / "c1.csv", out2 = dir / "c2.csv";

  SECTION("exit codes") {
    REQUIRE(run_cli("curve --channel " + badcfg.string() + " --out " + out1.string()) == 2);
    REQUIRE(run_cli("curve --channel " + idcfg.string()) == 3);  // missing required --out
    REQUIRE(run_cli("check --suite nonsense") == 3);
    REQUIRE(run_cli("curve --bogus-flag 1 --channel " + idcfg.string() + " --out " +
                    out1.string()) == 3);
    REQUIRE(run_cli("curve --channel " + idcfg.string() + " --lambda-grid 0.5,2 --out " +
                    out1.string()) == 2);
  }
  SECTION("curve runs are deterministic per seed") {
    const std::string common = "curve --channel " + idcfg.string() +
                               " --lambda-grid 1,2 --restarts 3 --max-iters 150 --seed 9 --out ";
    REQUIRE(run_cli(common + out1.string()) == 0);
    REQUIRE(run_cli(common + out2.string()) == 0);
    const std::string b1 = body_of(slurp(out1)), b2 = body_of(slurp(out2));
    REQUIRE(b1 == b2);
    REQUIRE(b1.rfind("lambda,r,R,objective,cardinality_used\n", 0) == 0);
    // different seed moves at least the ensembles; the file still parses
    REQUIRE(run_cli("curve --channel " + idcfg.string() +
                    " --lambda-grid 1,2 --restarts 3 --max-iters 150 --seed 10 --out " +
                    out2.string()) == 0);
  }
  SECTION("compare on the identity channel has delta ~ 0") {
    const fs::path out = dir / "cmp.csv";
    REQUIRE(run_cli("compare --channel " + idcfg.string() +
                    " --lambda-grid 1,2,5 --restarts 4 --max-iters 300 --grid-points 41 --out " +
                    out.string()) == 0);
    std::stringstream body(body_of(slurp(out)));
    std::string line;
    std::getline(body, line);
    REQUIRE(line == "r,R_opt,R_timeshare,delta");
    double max_abs_delta = 0.0;
    int rows = 0;
    while (std::getline(body, line)) {
      const auto last = line.rfind(',');
      max_abs_delta = std::max(max_abs_delta, std::abs(std::stod(line.substr(last + 1))));
      ++rows;
    }
    REQUIRE(rows == 41);
    REQUIRE(max_abs_delta <= 5e-4);
  }
  SECTION("capacities emits key=value lines and a JSON report") {
    const fs::path json = dir / "caps.json";
    const std::string cmd = std::string(CQREGION_CLI_PATH) + " capacities --channel " +
                            idcfg.string() + " --restarts 3 --max-iters 200 --json " +
                            json.string() + " > " + (dir / "caps.txt").string() + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const std::string text = slurp(dir / "caps.txt");
    REQUIRE(text.find("C1=") != std::string::npos);
    REQUIRE(text.find("Q1=") != std::string::npos);
    REQUIRE(text.find("degradability_residual=") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(json));
    REQUIRE(j["schema"] == 1);
    REQUIRE(std::abs(j["C1"].get<double>() - 1.0) < 1e-6);
    REQUIRE(std::abs(j["Q1"].get<double>() - 1.0) < 1e-6);
    REQUIRE(j["ea_point"]["r"].get<double>() == Catch::Approx(2.0).margin(1e-6));
    REQUIRE(j["ea_point"]["R"].get<double>() == Catch::Approx(-1.0).margin(1e-6));
  }
}

TEST_CASE("check suites smoke", "[io][cli]") {
  REQUIRE(check_core(3).ok());
  REQUIRE(check_concavity(3, 25).ok());
  REQUIRE(check_lemma2(3, 50).ok());
}
