// cqregion: trade-off curves and capacities of finite-dimensional quantum
// channels. Subcommands: curve, compare, capacities, check.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "cqregion/checks.hpp"
#include "cqregion/cqregion.hpp"

namespace {

using namespace cqregion;

struct CommonFlags {
  std::string channel_file;
  std::string lambda_spec = "default";
  int restarts = 32;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int max_iters = 2000;
  int cardinality = 0;
  double fd_step = 1e-5;
  int tensor_power = 1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_out) {
  cmd->add_option("--channel", f.channel_file, "channel config file (JSON)")->required();
  cmd->add_option("--lambda-grid", f.lambda_spec, "comma-separated lambda values >= 1, or 'default'");
  cmd->add_option("--restarts", f.restarts, "optimizer restarts per lambda")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--tol", f.tol, "ascent improvement tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", f.max_iters, "ascent iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--cardinality", f.cardinality, "ensemble cardinality (0 = dim^2+2)");
  cmd->add_option("--fd-step", f.fd_step, "finite-difference step")->check(CLI::PositiveNumber);
  cmd->add_option("--tensor-power", f.tensor_power, "channel copies l in {1, 2}")
      ->check(CLI::Range(1, 2));
  auto* out = cmd->add_option("--out", f.out, "output CSV path");
  if (needs_out) out->required();
}

OptimizerConfig config_from(const CommonFlags& f) {
  OptimizerConfig cfg;
  cfg.restarts = f.restarts;
  cfg.seed = f.seed;
  cfg.tol = f.tol;
  cfg.max_iters = f.max_iters;
  cfg.cardinality = f.cardinality;
  cfg.fd_step = f.fd_step;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
  if (spec == "default") return default_lambda_grid();
  std::vector<double> grid;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw config_error("--lambda-grid: cannot parse '" + item + "'");
    }
  }
  if (grid.empty()) throw config_error("--lambda-grid: empty grid");
  for (double v : grid)
    if (v < 1.0) throw config_error("--lambda-grid: values must be >= 1");
  return grid;
}

struct LoadedChannel {
  KrausChannel ch;
  int tensor_power = 1;
};

LoadedChannel prepare_channel(const CommonFlags& f) {
  KrausChannel base = load_channel(f.channel_file);
  validate(base);
  LoadedChannel out{f.tensor_power == 2 ? tensor_power(base, 2) : std::move(base), f.tensor_power};
  return out;
}

int cmd_curve(const CommonFlags& f) {
  const auto grid = parse_lambda_grid(f.lambda_spec);
  const OptimizerConfig cfg = config_from(f);
  const LoadedChannel loaded = prepare_channel(f);
  const auto t0 = std::chrono::steady_clock::now();
  const TradeoffCurve curve = sweep_curve(loaded.ch, grid, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunManifest man;
  man.command = "curve";
  man.channel = loaded.ch.name + " [file: " + f.channel_file + "]";
  man.config_echo = config_echo(cfg, grid, loaded.tensor_power);
  man.seed = cfg.seed;
  man.duration_s = secs;
  write_text_atomic(f.out, manifest_header(man) +
                               curve_csv_body(curve, cfg.resolved_cardinality(loaded.ch.dim_in),
                                              loaded.tensor_power));
  std::cout << "wrote " << f.out << " (" << curve.points.size() << " envelope points, "
            << fmt10(secs) << "s)\n";
  return 0;
}

int cmd_compare(const CommonFlags& f, int grid_points) {
  const auto grid = parse_lambda_grid(f.lambda_spec);
  const OptimizerConfig cfg = config_from(f);
  const LoadedChannel loaded = prepare_channel(f);
  const auto t0 = std::chrono::steady_clock::now();
  CompareResult cmp = compare_to_time_sharing(loaded.ch, grid, cfg, grid_points);
  if (loaded.tensor_power > 1) {
    const double scale = 1.0 / static_cast<double>(loaded.tensor_power);
    for (auto& row : cmp.rows) {
      row.r *= scale;
      row.R_opt *= scale;
      row.R_timeshare *= scale;
      row.delta *= scale;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunManifest man;
  man.command = "compare";
  man.channel = loaded.ch.name + " [file: " + f.channel_file + "]";
  man.config_echo = config_echo(cfg, grid, loaded.tensor_power) + " grid_points=" +
                    std::to_string(grid_points);
  man.seed = cfg.seed;
  man.duration_s = secs;
  write_text_atomic(f.out, manifest_header(man) + compare_csv_body(cmp.rows));
  std::cout << "wrote " << f.out << " (" << grid_points << " rows, " << fmt10(secs) << "s)\n";
  return 0;
}

nlohmann::json ensemble_json(const Ensemble& e) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : e.members) {
    if (m.p <= tol::prob_prune) continue;
    nlohmann::json rho = nlohmann::json::array();
    for (int i = 0; i < m.rho.dim; ++i)
      for (int j = 0; j < m.rho.dim; ++j)
        rho.push_back({m.rho.matrix(i, j).real(), m.rho.matrix(i, j).imag()});
    members.push_back({{"p", m.p}, {"dim", m.rho.dim}, {"rho", rho}});
  }
  return members;
}

int cmd_capacities(const CommonFlags& f, const std::string& json_path, bool flat_probe) {
  const OptimizerConfig cfg = config_from(f);
  const LoadedChannel loaded = prepare_channel(f);
  const auto t0 = std::chrono::steady_clock::now();

  const RatePoint c1 = holevo_capacity(loaded.ch, cfg);
  const RatePoint q1 = q1_capacity(loaded.ch, cfg);

  DegradabilityConfig dcfg;
  dcfg.seed = cfg.seed;
  const DegradabilityReport deg = degradability_residual(loaded.ch, dcfg);

  // Entanglement-assisted pair (I(A;B), -H(A)) at the Q1-achieving input.
  const InfoBreakdown ea = info_breakdown(q1.ensemble, loaded.ch);

  const double scale = 1.0 / static_cast<double>(loaded.tensor_power);
  std::cout << "C1=" << fmt10(c1.r * scale) << "\n";
  std::cout << "Q1=" << fmt10(q1.R * scale) << "\n";
  std::cout << "degradability_residual=" << fmt10(deg.residual) << "\n";
  std::cout << "degradability_certified=" << (deg.certified ? 1 : 0) << "\n";
  std::cout << "EA_r=" << fmt10(ea.cond_mutual * scale) << "\n";
  std::cout << "EA_R=" << fmt10(ea.neg_cond_entropy * scale) << "\n";

  FlatRegionReport flat;
  if (flat_probe) {
    flat = flat_region_probe(loaded.ch, cfg);
    std::cout << "flat_region_found=" << (flat.flat_region_found ? 1 : 0) << "\n";
    std::cout << "flat_region_r=" << fmt10(flat.r_achieved * scale) << "\n";
    std::cout << "flat_region_R=" << fmt10(flat.R_achieved * scale) << "\n";
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!json_path.empty()) {
    nlohmann::json j;
    j["schema"] = 1;
    j["command"] = "capacities";
    j["version"] = kVersion;
    j["channel"] = loaded.ch.name;
    j["channel_file"] = f.channel_file;
    j["config"] = config_echo(cfg, {}, loaded.tensor_power);
    j["seed"] = cfg.seed;
    j["duration_s"] = secs;
    j["C1"] = c1.r * scale;
    j["Q1"] = q1.R * scale;
    j["degradability"] = {{"residual", deg.residual},
                          {"certified", deg.certified},
                          {"exact_path", deg.exact_path}};
    j["ea_point"] = {{"r", ea.cond_mutual * scale}, {"R", ea.neg_cond_entropy * scale}};
    j["c1_ensemble"] = ensemble_json(c1.ensemble);
    j["q1_state"] = ensemble_json(q1.ensemble);
    if (flat_probe)
      j["flat_region"] = {{"found", flat.flat_region_found},
                          {"r", flat.r_achieved * scale},
                          {"R", flat.R_achieved * scale},
                          {"q1_reference", flat.q1 * scale}};
    write_text_atomic(json_path, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_check(const std::string& suite, std::uint64_t seed, int restarts) {
  OptimizerConfig cfg;
  cfg.seed = seed;
  cfg.restarts = restarts;

  CheckResult res;
  if (suite == "core") {
    res = check_core(seed);
  } else if (suite == "concavity") {
    res = check_concavity(seed);
  } else if (suite == "lemma2") {
    res = check_lemma2(seed);
  } else if (suite == "additivity") {
    res = check_additivity(cfg);
  } else if (suite == "cardinality") {
    res = check_cardinality(cfg);
  } else if (suite == "dephasing-oracle") {
    res = check_dephasing_oracle(cfg);
  } else {
    std::cerr << "unknown suite '" << suite
              << "' (expected core|concavity|lemma2|additivity|cardinality|dephasing-oracle)\n";
    return 3;
  }
  for (const auto& line : res.lines) std::cout << line << "\n";
  std::cout << "suite " << res.suite << ": " << res.passed << " passed, " << res.failed
            << " failed\n";
  return res.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simultaneous (classical, quantum) capacity region toolkit"};
  app.require_subcommand(1);

  CommonFlags curve_flags, compare_flags, cap_flags;
  int compare_grid_points = 201;
  std::string cap_json = "capacities.json";
  bool cap_flat_probe = false;
  std::string check_suite;
  std::uint64_t check_seed = 1;
  int check_restarts = 32;

  CLI::App* curve = app.add_subcommand("curve", "sweep the trade-off curve, write CSV");
  add_common(curve, curve_flags, true);

  CLI::App* compare = app.add_subcommand("compare", "optimal curve vs time-sharing, write CSV");
  add_common(compare, compare_flags, true);
  compare->add_option("--grid-points", compare_grid_points, "rows in the r grid")
      ->check(CLI::Range(2, 100000));

  CLI::App* capacities =
      app.add_subcommand("capacities", "C1, Q1, degradability residual, EA point");
  add_common(capacities, cap_flags, false);
  capacities->add_option("--json", cap_json, "JSON report path (empty to skip)");
  capacities->add_flag("--flat-probe", cap_flat_probe, "probe for a flat segment at R ~ Q1");

  CLI::App* check = app.add_subcommand("check", "run a property suite");
  check
      ->add_option("--suite", check_suite,
                   "core|concavity|lemma2|additivity|cardinality|dephasing-oracle")
      ->required();
  check->add_option("--seed", check_seed, "RNG seed");
  check->add_option("--restarts", check_restarts, "optimizer restarts for optimizer-backed suites")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 3;
  }

  try {
    if (app.got_subcommand(curve)) return cmd_curve(curve_flags);
    if (app.got_subcommand(compare)) return cmd_compare(compare_flags, compare_grid_points);
    if (app.got_subcommand(capacities)) return cmd_capacities(cap_flags, cap_json, cap_flat_probe);
    if (app.got_subcommand(check)) return cmd_check(check_suite, check_seed, check_restarts);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    std::cerr << "flag error: " << e.what() << "\n";
    return 3;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
