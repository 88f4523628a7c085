#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cqregion/region.hpp"
#include "cqregion/version.hpp"

namespace cqregion {

// "%.10g" with the C locale: 10 significant digits, '.' decimal separator.
inline std::string fmt10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Channel config files
// ---------------------------------------------------------------------------

namespace detail {

inline double require_param(const nlohmann::json& j, const char* kind) {
  if (!j.contains("param") || !j["param"].is_number())
    throw config_error(std::string("channel config: kind '") + kind +
                       "' requires numeric field 'param'");
  return j["param"].get<double>();
}

inline int dim_or(const nlohmann::json& j, int fallback) {
  if (!j.contains("dim")) return fallback;
  if (!j["dim"].is_number_integer())
    throw config_error("channel config: field 'dim' must be an integer");
  return j["dim"].get<int>();
}

inline CMatrix parse_complex_matrix(const nlohmann::json& entries, int rows, int cols,
                                    const char* field) {
  if (!entries.is_array() || static_cast<int>(entries.size()) != rows * cols)
    throw config_error(std::string("channel config: field '") + field + "' must hold " +
                       std::to_string(rows * cols) + " [re, im] pairs (row-major)");
  CMatrix m(rows, cols);
  for (int i = 0; i < rows * cols; ++i) {
    const auto& e = entries[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw config_error(std::string("channel config: field '") + field +
                         "' entries must be [re, im] pairs");
    m(i / cols, i % cols) = Complex(e[0].get<double>(), e[1].get<double>());
  }
  return m;
}

}  // namespace detail

inline KrausChannel channel_from_json(const nlohmann::json& j) {
  if (!j.contains("kind") || !j["kind"].is_string())
    throw config_error("channel config: missing string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();

  if (kind == "identity") return channels::identity(detail::dim_or(j, 2));
  if (kind == "dephasing") return channels::dephasing_qubit(detail::require_param(j, "dephasing"));
  if (kind == "depolarizing")
    return channels::depolarizing(detail::require_param(j, "depolarizing"));
  if (kind == "erasure") return channels::erasure(detail::require_param(j, "erasure"), detail::dim_or(j, 2));
  if (kind == "completely_dephasing") return channels::completely_dephasing(detail::dim_or(j, 2));
  if (kind == "trine") return channels::trine();
  if (kind == "generalized_dephasing") {
    const int d = detail::dim_or(j, 0);
    if (d < 2) throw config_error("channel config: generalized_dephasing requires field 'dim' >= 2");
    if (!j.contains("gram"))
      throw config_error("channel config: generalized_dephasing requires field 'gram'");
    CMatrix gram = detail::parse_complex_matrix(j["gram"], d, d, "gram");
    return channels::generalized_dephasing(GeneralizedDephasingSpec(d, std::move(gram)));
  }
  if (kind == "kraus") {
    if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
      throw config_error("channel config: kind 'kraus' requires a nonempty array field 'kraus'");
    const int din = detail::dim_or(j, 0);
    if (din < 1) throw config_error("channel config: kind 'kraus' requires field 'dim'");
    int dout = din;
    if (j.contains("dim_out")) {
      if (!j["dim_out"].is_number_integer())
        throw config_error("channel config: field 'dim_out' must be an integer");
      dout = j["dim_out"].get<int>();
    }
    std::vector<CMatrix> ops;
    for (const auto& entry : j["kraus"])
      ops.push_back(detail::parse_complex_matrix(entry, dout, din, "kraus"));
    KrausChannel ch(std::move(ops), "kraus");
    validate(ch);
    return ch;
  }
  throw config_error("channel config: unknown kind '" + kind + "'");
}

inline KrausChannel load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("channel config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("channel config: JSON parse failure in '" + path + "': " + e.what());
  }
  return channel_from_json(j);
}

// ---------------------------------------------------------------------------
// Output files: '#'-prefixed manifest header, then the payload. Re-running
// with the same manifest reproduces the payload bytes; only duration varies.
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string command;
  std::string channel;
  std::string config_echo;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
};

inline std::string config_echo(const OptimizerConfig& cfg, const std::vector<double>& grid,
                               int tensor_power = 1) {
  std::ostringstream os;
  os << "restarts=" << cfg.restarts << " seed=" << cfg.seed << " tol=" << fmt10(cfg.tol)
     << " max_iters=" << cfg.max_iters << " cardinality=" << cfg.cardinality
     << " fd_step=" << fmt10(cfg.fd_step) << " tensor_power=" << tensor_power;
  if (!grid.empty()) {
    os << " lambda_grid=";
    for (size_t i = 0; i < grid.size(); ++i) os << (i ? "," : "") << fmt10(grid[i]);
  }
  return os.str();
}

inline std::string manifest_header(const RunManifest& m) {
  std::ostringstream os;
  os << "# cqregion " << kVersion << "\n";
  os << "# command: " << m.command << "\n";
  os << "# channel: " << m.channel << "\n";
  os << "# config: " << m.config_echo << "\n";
  os << "# seed: " << m.seed << "\n";
  os << "# duration_s: " << fmt10(m.duration_s) << "\n";
  return os.str();
}

// Write-to-temp, rename-on-success: no partial files on error.
inline void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open temporary output file '" + tmp.string() + "'");
    out << content;
    if (!out) throw error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

// CSV body for a trade-off curve: "lambda,r,R,objective,cardinality_used".
// Endpoint rows carry their tag in the lambda column.
inline std::string curve_csv_body(const TradeoffCurve& curve, int cardinality_used,
                                  int tensor_power = 1) {
  std::ostringstream os;
  os << "lambda,r,R,objective,cardinality_used\n";
  const double scale = 1.0 / static_cast<double>(tensor_power);
  for (const auto& p : curve.points) {
    if (p.kind == PointKind::lambda_point)
      os << fmt10(p.lambda);
    else
      os << to_string(p.kind);
    os << ',' << fmt10(p.r * scale) << ',' << fmt10(p.R * scale) << ',' << fmt10(p.objective * scale)
       << ',' << cardinality_used << "\n";
  }
  return os.str();
}

// CSV body for the optimal-vs-time-sharing comparison.
struct ComparisonRow {
  double r = 0.0, R_opt = 0.0, R_timeshare = 0.0, delta = 0.0;
};

struct CompareResult {
  std::vector<ComparisonRow> rows;
  double C1 = 0.0;  // largest achieved classical rate
  double Q1 = 0.0;  // quantum endpoint, clamped at 0
  TradeoffCurve curve;
};

inline std::string compare_csv_body(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "r,R_opt,R_timeshare,delta\n";
  for (const auto& row : rows)
    os << fmt10(row.r) << ',' << fmt10(row.R_opt) << ',' << fmt10(row.R_timeshare) << ','
       << fmt10(row.delta) << "\n";
  return os.str();
}

// Upper concave envelope of achieved points, evaluated on an r grid. Time
// sharing between achieved points is itself achievable, so the hull is the
// honest numerical estimate of the optimal curve.
class ConcaveEnvelope {
 public:
  explicit ConcaveEnvelope(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> uniq;
    for (const auto& p : pts) {
      if (!uniq.empty() && uniq.back().first == p.first)
        uniq.back().second = std::max(uniq.back().second, p.second);
      else
        uniq.push_back(p);
    }
    // Monotone-chain upper hull over (r, R).
    for (const auto& p : uniq) {
      while (hull_.size() >= 2 && cross(hull_[hull_.size() - 2], hull_.back(), p) >= 0)
        hull_.pop_back();
      hull_.push_back(p);
    }
  }

  double r_min() const { return hull_.front().first; }
  double r_max() const { return hull_.back().first; }

  double value(double r) const {
    if (r <= hull_.front().first) return hull_.front().second;  // flat extension: r may be discarded
    if (r >= hull_.back().first) return hull_.back().second;
    size_t hi = 1;
    while (hi < hull_.size() && hull_[hi].first < r) ++hi;
    const auto& a = hull_[hi - 1];
    const auto& b = hull_[hi];
    const double t = (r - a.first) / (b.first - a.first);
    return a.second + t * (b.second - a.second);
  }

 private:
  static double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
                      const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  }
  std::vector<std::pair<double, double>> hull_;
};

// Optimal-vs-time-sharing comparison: swept envelope plus the Q1 point, hull
// interpolated on an r grid against the segment through the achieved
// endpoints.
inline CompareResult compare_to_time_sharing(const KrausChannel& ch,
                                             const std::vector<double>& lambda_grid,
                                             const OptimizerConfig& cfg, int grid_points = 201) {
  CompareResult out;
  out.curve = sweep_curve(ch, lambda_grid, cfg);
  const RatePoint q1 = q1_capacity(ch, cfg);
  out.Q1 = std::max(0.0, q1.R);
  for (const auto& p : out.curve.points) out.C1 = std::max(out.C1, p.r);

  std::vector<std::pair<double, double>> pts;
  for (const auto& p : out.curve.points) pts.emplace_back(p.r, p.R);
  pts.emplace_back(0.0, out.Q1);
  const ConcaveEnvelope hull(std::move(pts));
  const RegionBounds ts = bounds(out.C1, out.Q1);

  out.rows.resize(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double r = out.C1 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    out.rows[i].r = r;
    out.rows[i].R_opt = hull.value(r);
    out.rows[i].R_timeshare = ts.time_share(r);
    out.rows[i].delta = out.rows[i].R_opt - out.rows[i].R_timeshare;
  }
  return out;
}

}  // namespace cqregion
