#include "tcsim/sweep.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "tcsim/parallel.hpp"
#include "tcsim/thermal.hpp"

namespace tcsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string_view> kConfigKeys = {
    "graph", "alpha",      "p_grid",      "t_grid",         "flux",
    "mc_samples", "seed", "tomography_enabled", "pair_selection", "outcome_weighting"};

double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("{}: cannot parse '{}' as a number", what, text));
  }
  return value;
}

// numbers, or the string "inf" for an infinite temperature
double json_extended_real(const nlohmann::json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "inf") return kInf;
  throw ConfigError(field, "expected a number or \"inf\"");
}

nlohmann::json extended_real_json(double v) {
  if (std::isinf(v) && v > 0.0) return "inf";
  return v;
}

template <class T>
T json_get(const nlohmann::json& j, const std::string& field) {
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field, "has the wrong type");
  }
}

std::vector<double> json_grid(const nlohmann::json& j, const std::string& field) {
  const nlohmann::json& v = j.at(field);
  if (!v.is_array()) throw ConfigError(field, "expected a list");
  std::vector<double> out;
  for (const auto& item : v) out.push_back(json_extended_real(item, field));
  return out;
}

nlohmann::json grid_json(const std::vector<double>& grid) {
  nlohmann::json out = nlohmann::json::array();
  for (double v : grid) out.push_back(extended_real_json(v));
  return out;
}

std::string format_number(double v) { return fmt::format("{}", v); }

}  // namespace

double parse_angle(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.ends_with("pi")) {
    text.remove_suffix(2);
    while (!text.empty() && (text.back() == '*' || text.back() == ' ')) text.remove_suffix(1);
    return (text.empty() ? 1.0 : parse_double(text, "angle")) * std::numbers::pi;
  }
  return parse_double(text, "angle");
}

void SweepConfig::validate() const {
  if (graph != linear_graph(3)) {
    throw ConfigError("graph", fmt::format("the sweep needs the three-qubit chain \"3; 0-1,1-2\", "
                                           "got \"{}\"",
                                           graph.to_string()));
  }
  if (!std::isfinite(alpha)) throw ConfigError("alpha", "must be finite");
  if (p_grid.has_value() == t_grid.has_value()) {
    throw ConfigError("p_grid", "give exactly one of p_grid and t_grid");
  }
  if (p_grid) {
    if (p_grid->empty()) throw ConfigError("p_grid", "is empty");
    for (double p : *p_grid) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p_grid", fmt::format("{} not in [0, 1]", p));
    }
  }
  if (t_grid) {
    if (t_grid->empty()) throw ConfigError("t_grid", "is empty");
    for (double t : *t_grid) {
      if (!(t >= 0.0)) throw ConfigError("t_grid", fmt::format("{} is negative or NaN", t));
    }
  }
  if (!(flux > 0.0) || !std::isfinite(flux)) throw ConfigError("flux", "must be positive and finite");
  if (tomography_enabled && mc_samples < 2) {
    throw ConfigError("mc_samples", "must be at least 2 with tomography enabled");
  }
  if (mc_samples < 0) throw ConfigError("mc_samples", "must be non-negative");
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw ConfigError(key, "unknown key");
    }
  }
  SweepConfig cfg;
  if (j.contains("graph")) {
    try {
      cfg.graph = Graph::parse(json_get<std::string>(j, "graph"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("graph", e.what());
    }
  }
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    try {
      cfg.alpha = a.is_string() ? parse_angle(a.get<std::string>()) : json_get<double>(j, "alpha");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("alpha", e.what());
    }
  }
  if (j.contains("p_grid")) cfg.p_grid = json_grid(j, "p_grid");
  if (j.contains("t_grid")) cfg.t_grid = json_grid(j, "t_grid");
  if (j.contains("flux")) cfg.flux = json_get<double>(j, "flux");
  if (j.contains("mc_samples")) cfg.mc_samples = json_get<int>(j, "mc_samples");
  if (j.contains("seed")) cfg.seed = json_get<std::uint64_t>(j, "seed");
  if (j.contains("tomography_enabled")) {
    cfg.tomography_enabled = json_get<bool>(j, "tomography_enabled");
  }
  try {
    if (j.contains("pair_selection")) {
      cfg.pair_selection = pair_selection_from_string(json_get<std::string>(j, "pair_selection"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("pair_selection", e.what());
  }
  try {
    if (j.contains("outcome_weighting")) {
      cfg.outcome_weighting =
          outcome_weighting_from_string(json_get<std::string>(j, "outcome_weighting"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("outcome_weighting", e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json j;
  j["graph"] = graph.to_string();
  j["alpha"] = alpha;
  if (p_grid) j["p_grid"] = grid_json(*p_grid);
  if (t_grid) j["t_grid"] = grid_json(*t_grid);
  j["flux"] = flux;
  j["mc_samples"] = mc_samples;
  j["seed"] = seed;
  j["tomography_enabled"] = tomography_enabled;
  j["pair_selection"] = std::string(to_string(pair_selection));
  j["outcome_weighting"] = std::string(to_string(outcome_weighting));
  return j;
}

std::string SweepConfig::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : to_json().dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

std::vector<double> grid_p_values(const SweepConfig& cfg) {
  if (cfg.p_grid) return *cfg.p_grid;
  std::vector<double> out;
  if (cfg.t_grid) {
    for (double t : *cfg.t_grid) out.push_back(p_from_temperature(t));
  }
  return out;
}

SweepPoint evaluate_point(const SweepConfig& cfg, double p, std::uint64_t seed) {
  const Graph& g = cfg.graph;
  const PreparationOptions prep{cfg.pair_selection, cfg.outcome_weighting};
  const Bipartition cut_ap({kQubitAp}, 3);
  const Bipartition cut_bp({kQubitBp}, 3);
  const Bipartition cut_bs({kQubitBs}, 3);

  SweepPoint pt{};
  pt.p = p;
  pt.t_over_delta = temperature_from_p(p);
  const DensityMatrix model = thermal_state_model(g, p, cfg.alpha);

  DensityMatrix state = model;
  if (cfg.tomography_enabled) {
    const CountRecord rec = simulate_counts(model, standard_settings(3), cfg.flux, seed);
    state = mle_reconstruct(rec).rho;
    const std::vector<StateStatistic> stats = {
        [&](const DensityMatrix& r) { return negativity(r, cut_ap); },
        [&](const DensityMatrix& r) { return negativity(r, cut_bp); },
        [&](const DensityMatrix& r) { return negativity(r, cut_bs); },
        [&](const DensityMatrix& r) { return average_preparation_fidelity(r, prep); },
    };
    const auto est = monte_carlo_statistics(rec, stats, cfg.mc_samples, seed + 1);
    pt.err_ap = est[0].stddev;
    pt.err_bp = est[1].stddev;
    pt.err_bs = est[2].stddev;
    pt.fid_error = est[3].stddev;
  }

  pt.neg_ap = negativity(state, cut_ap);
  pt.neg_bp = negativity(state, cut_bp);
  pt.neg_bs = negativity(state, cut_bs);
  const double values[] = {pt.neg_ap, pt.neg_bp, pt.neg_bs};
  const double tols[] = {std::max(kDefaultNegativityTolerance, pt.err_ap),
                         std::max(kDefaultNegativityTolerance, pt.err_bp),
                         std::max(kDefaultNegativityTolerance, pt.err_bs)};
  pt.klass = classify_pattern(values, tols);
  pt.avg_fidelity = average_preparation_fidelity(state, prep);
  pt.state_fidelity_vs_ideal = fidelity(state, gibbs_state(g, 1.0, pt.t_over_delta));
  return pt;
}

std::vector<SweepPoint> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<double> ps = grid_p_values(cfg);
  std::vector<SweepPoint> out(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) {
    out[i] = evaluate_point(cfg, ps[i], point_seed(cfg.seed, i));
  });
  return out;
}

OutputFormat output_format_from_string(std::string_view text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw ConfigError("format", fmt::format("expected csv or json, got '{}'", text));
}

std::string provenance_line(const SweepConfig& cfg) {
  return fmt::format("# {} {} config_hash={} seed={}", kToolName, kToolVersion, cfg.hash(),
                     cfg.seed);
}

std::string to_csv(std::span<const SweepPoint> points, const SweepConfig& cfg) {
  if (points.empty()) throw std::invalid_argument("to_csv: no points");
  std::string out = provenance_line(cfg) + "\n" + std::string(kCsvHeader) + "\n";
  for (const auto& pt : points) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", format_number(pt.p),
                       format_number(pt.t_over_delta), format_number(pt.neg_ap),
                       format_number(pt.err_ap), format_number(pt.neg_bp), format_number(pt.err_bp),
                       format_number(pt.neg_bs), format_number(pt.err_bs), to_string(pt.klass),
                       format_number(pt.avg_fidelity), format_number(pt.fid_error),
                       format_number(pt.state_fidelity_vs_ideal));
  }
  return out;
}

std::vector<SweepPoint> points_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::vector<SweepPoint> out;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw std::invalid_argument("points_from_csv: unexpected header");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() != 12) {
      throw std::invalid_argument(fmt::format("points_from_csv: expected 12 cells in '{}'", line));
    }
    SweepPoint pt{};
    pt.p = parse_double(cells[0], "p");
    pt.t_over_delta = parse_double(cells[1], "t_over_delta");
    pt.neg_ap = parse_double(cells[2], "neg_Ap");
    pt.err_ap = parse_double(cells[3], "err_Ap");
    pt.neg_bp = parse_double(cells[4], "neg_Bp");
    pt.err_bp = parse_double(cells[5], "err_Bp");
    pt.neg_bs = parse_double(cells[6], "neg_Bs");
    pt.err_bs = parse_double(cells[7], "err_Bs");
    pt.klass = entanglement_class_from_string(cells[8]);
    pt.avg_fidelity = parse_double(cells[9], "avg_fidelity");
    pt.fid_error = parse_double(cells[10], "fid_error");
    pt.state_fidelity_vs_ideal = parse_double(cells[11], "state_fidelity_vs_ideal");
    out.push_back(pt);
  }
  return out;
}

nlohmann::json to_json(std::span<const SweepPoint> points, const SweepConfig& cfg) {
  if (points.empty()) throw std::invalid_argument("to_json: no points");
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& pt : points) {
    rows.push_back({
        {"p", pt.p},
        {"t_over_delta", extended_real_json(pt.t_over_delta)},
        {"neg_Ap", pt.neg_ap},
        {"err_Ap", pt.err_ap},
        {"neg_Bp", pt.neg_bp},
        {"err_Bp", pt.err_bp},
        {"neg_Bs", pt.neg_bs},
        {"err_Bs", pt.err_bs},
        {"class", std::string(to_string(pt.klass))},
        {"avg_fidelity", pt.avg_fidelity},
        {"fid_error", pt.fid_error},
        {"state_fidelity_vs_ideal", pt.state_fidelity_vs_ideal},
    });
  }
  return {
      {"provenance",
       {{"tool", kToolName}, {"version", kToolVersion}, {"config_hash", cfg.hash()},
        {"seed", cfg.seed}}},
      {"config", cfg.to_json()},
      {"points", std::move(rows)},
  };
}

std::vector<SweepPoint> points_from_json(const nlohmann::json& j) {
  std::vector<SweepPoint> out;
  for (const auto& row : j.at("points")) {
    SweepPoint pt{};
    pt.p = row.at("p").get<double>();
    pt.t_over_delta = json_extended_real(row.at("t_over_delta"), "t_over_delta");
    pt.neg_ap = row.at("neg_Ap").get<double>();
    pt.err_ap = row.at("err_Ap").get<double>();
    pt.neg_bp = row.at("neg_Bp").get<double>();
    pt.err_bp = row.at("err_Bp").get<double>();
    pt.neg_bs = row.at("neg_Bs").get<double>();
    pt.err_bs = row.at("err_Bs").get<double>();
    pt.klass = entanglement_class_from_string(row.at("class").get<std::string>());
    pt.avg_fidelity = row.at("avg_fidelity").get<double>();
    pt.fid_error = row.at("fid_error").get<double>();
    pt.state_fidelity_vs_ideal = row.at("state_fidelity_vs_ideal").get<double>();
    out.push_back(pt);
  }
  return out;
}

void emit(std::span<const SweepPoint> points, const SweepConfig& cfg, OutputFormat format,
          const std::filesystem::path& path) {
  const std::string body =
      format == OutputFormat::kCsv ? to_csv(points, cfg) : to_json(points, cfg).dump(2) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << body;
  if (!out.flush()) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace tcsim
