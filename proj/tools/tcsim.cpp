// tcsim: temperature sweeps of the three-qubit cluster model, plus small
// single-shot diagnostics (spectrum, tomography round trip, MBQC breakdown).
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tcsim/entanglement.hpp"
#include "tcsim/graph.hpp"
#include "tcsim/mbqc.hpp"
#include "tcsim/sweep.hpp"
#include "tcsim/thermal.hpp"
#include "tcsim/tomography.hpp"

using namespace tcsim;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (item == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field, fmt::format("cannot parse '{}'", item));
    }
  }
  if (out.empty()) throw ConfigError(field, "is empty");
  return out;
}

// "start,stop,count"
std::vector<double> parse_linspace(const std::string& text, const std::string& field) {
  const std::vector<double> v = parse_list(text, field);
  if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2])) {
    throw ConfigError(field, "expected start,stop,count");
  }
  const auto count = static_cast<int>(v[2]);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? v[0] : v[0] + (v[1] - v[0]) * i / (count - 1));
  }
  return out;
}

nlohmann::json grid_to_json(const std::vector<double>& grid) {
  nlohmann::json out = nlohmann::json::array();
  for (double v : grid) {
    if (std::isinf(v)) {
      out.push_back("inf");
    } else {
      out.push_back(v);
    }
  }
  return out;
}

struct SweepFlags {
  std::string config_path;
  std::optional<std::string> graph;
  std::optional<std::string> alpha;
  std::optional<std::string> p_grid;
  std::optional<std::string> t_grid;
  std::optional<std::string> p_linspace;
  std::optional<std::string> t_linspace;
  std::optional<double> flux;
  std::optional<int> mc_samples;
  std::optional<std::uint64_t> seed;
  bool tomography_enabled = false;
  std::optional<std::string> pair_selection;
  std::optional<std::string> outcome_weighting;
  std::string format = "csv";
  std::string output = "-";
};

// Config file first, then flags on top.
SweepConfig build_config(const SweepFlags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("config", fmt::format("cannot read '{}'", f.config_path));
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config", e.what());
    }
  }
  if (f.graph) j["graph"] = *f.graph;
  if (f.alpha) j["alpha"] = *f.alpha;
  const int grids = (f.p_grid ? 1 : 0) + (f.t_grid ? 1 : 0) + (f.p_linspace ? 1 : 0) +
                    (f.t_linspace ? 1 : 0);
  if (grids > 1) throw ConfigError("p_grid", "give only one grid flag");
  if (f.p_grid || f.p_linspace) {
    j.erase("t_grid");
    j["p_grid"] = grid_to_json(f.p_grid ? parse_list(*f.p_grid, "p_grid")
                                        : parse_linspace(*f.p_linspace, "p_grid"));
  }
  if (f.t_grid || f.t_linspace) {
    j.erase("p_grid");
    j["t_grid"] = grid_to_json(f.t_grid ? parse_list(*f.t_grid, "t_grid")
                                        : parse_linspace(*f.t_linspace, "t_grid"));
  }
  if (f.flux) j["flux"] = *f.flux;
  if (f.mc_samples) j["mc_samples"] = *f.mc_samples;
  if (f.seed) j["seed"] = *f.seed;
  if (f.tomography_enabled) j["tomography_enabled"] = true;
  if (f.pair_selection) j["pair_selection"] = *f.pair_selection;
  if (f.outcome_weighting) j["outcome_weighting"] = *f.outcome_weighting;
  return SweepConfig::from_json(j);
}

void write_text(const std::string& path, const std::string& body) {
  if (path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << body).flush()) {
    throw std::runtime_error(fmt::format("cannot write '{}'", path));
  }
}

void run_sweep_command(const SweepFlags& f) {
  const SweepConfig cfg = build_config(f);
  const OutputFormat format = output_format_from_string(f.format);
  const std::vector<SweepPoint> points = run_sweep(cfg);
  if (f.output == "-") {
    write_text("-", format == OutputFormat::kCsv ? to_csv(points, cfg)
                                                 : to_json(points, cfg).dump(2) + "\n");
  } else {
    emit(points, cfg, format, f.output);
  }
}

double resolve_p(const std::optional<double>& p, const std::optional<double>& t) {
  if (p.has_value() == t.has_value()) throw ConfigError("p", "give exactly one of --p and --t");
  if (p) {
    if (!(*p >= 0.0 && *p <= 1.0)) throw ConfigError("p", "must lie in [0, 1]");
    return *p;
  }
  if (!(*t >= 0.0)) throw ConfigError("t", "must be non-negative");
  return p_from_temperature(*t);
}

void run_spectrum_command(const std::string& graph_text, double gap) {
  const Graph g = [&] {
    try {
      return Graph::parse(graph_text);
    } catch (const std::exception& e) {
      throw ConfigError("graph", e.what());
    }
  }();
  if (!(gap > 0.0)) throw ConfigError("gap", "must be positive");
  if (g.n_vertices() > kMaxDenseQubits) {
    throw ConfigError("graph", fmt::format("at most {} vertices", kMaxDenseQubits));
  }
  const SpectrumReport r = verify_spectrum(g, gap);
  fmt::print("graph {}\n", g.to_string());
  fmt::print("energy,multiplicity\n");
  for (const auto& level : r.levels) fmt::print("{},{}\n", level.energy, level.multiplicity);
  fmt::print("ground_unique {}\ngap {}\ngap_matches {}\nmultiplicities_binomial {}\n"
             "max_eigenvector_residual {}\n",
             r.ground_unique, r.gap, r.gap_matches, r.multiplicities_binomial,
             r.max_eigenvector_residual);
  if (!(r.ground_unique && r.gap_matches && r.multiplicities_binomial)) {
    throw std::runtime_error("spectrum does not match the closed form");
  }
}

struct TomoFlags {
  std::string alpha = "pi";
  std::optional<double> p;
  std::optional<double> t;
  double flux = 5000.0;
  std::uint64_t seed = 1;
  std::string method = "mle";
  std::string family = "minimal";
  std::string counts_in;
  std::string counts_out;
};

void run_tomo_command(const TomoFlags& f) {
  double alpha = 0.0;
  try {
    alpha = parse_angle(f.alpha);
  } catch (const std::exception& e) {
    throw ConfigError("alpha", e.what());
  }
  if (f.method != "mle" && f.method != "linear") throw ConfigError("method", "expected mle or linear");
  if (f.family != "minimal" && f.family != "mub") throw ConfigError("family", "expected minimal or mub");
  const double p = resolve_p(f.p, f.t);
  const DensityMatrix model = thermal_state_model(linear_graph(3), p, alpha);

  CountRecord rec;
  if (!f.counts_in.empty()) {
    std::ifstream in(f.counts_in);
    if (!in) throw ConfigError("counts_in", fmt::format("cannot read '{}'", f.counts_in));
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      rec = CountRecord::from_text(buffer.str());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("counts_in", e.what());
    }
  } else {
    if (!(f.flux > 0.0)) throw ConfigError("flux", "must be positive");
    const auto family =
        f.family == "mub" ? SettingsFamily::kMutuallyUnbiased : SettingsFamily::kMinimal;
    rec = simulate_counts(model, standard_settings(3, family), f.flux, f.seed);
  }
  if (!f.counts_out.empty()) write_text(f.counts_out, rec.to_text());

  const ReconstructionResult r = f.method == "mle" ? mle_reconstruct(rec) : linear_inversion(rec);
  const EntanglementReport report = classify(r.rho);
  fmt::print("method {}\niterations {}\nconverged {}\nlog_likelihood {}\n", to_string(r.method),
             r.iterations, r.converged, r.log_likelihood);
  fmt::print("fidelity_vs_model {}\npurity {}\n", fidelity(model, r.rho), r.rho.purity());
  for (const auto& entry : report.negativities) {
    fmt::print("negativity {} {}\n", entry.cut.label(), entry.value);
  }
  if (report.klass) fmt::print("class {}\n", to_string(*report.klass));
}

struct MbqcFlags {
  std::string alpha = "pi";
  std::optional<double> p;
  std::optional<double> t;
  std::string pair_selection = "one_per_axis";
  std::string outcome_weighting = "probability";
};

void run_mbqc_command(const MbqcFlags& f) {
  PreparationOptions options;
  double alpha = 0.0;
  try {
    alpha = parse_angle(f.alpha);
  } catch (const std::exception& e) {
    throw ConfigError("alpha", e.what());
  }
  try {
    options.selection = pair_selection_from_string(f.pair_selection);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("pair_selection", e.what());
  }
  try {
    options.weighting = outcome_weighting_from_string(f.outcome_weighting);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("outcome_weighting", e.what());
  }
  const double p = resolve_p(f.p, f.t);
  const DensityMatrix rho = thermal_state_model(linear_graph(3), p, alpha);

  fmt::print("p {}\nt_over_delta {}\n", p, temperature_from_p(p));
  fmt::print("basis_bp,basis_bs,outcome_bp,outcome_bs,probability,fidelity\n");
  for (const auto& r : preparation_records(rho, options)) {
    fmt::print("{},{},{},{},{},{}\n", to_char(r.bases.bp.axis), to_char(r.bases.bs.axis),
               r.outcome_bp, r.outcome_bs, r.probability, r.fidelity);
  }
  const std::vector<BasisPair> pairs = enabled_pairs(options.selection);
  const std::vector<double> per_pair = pair_fidelities(rho, options);
  fmt::print("basis_bp,basis_bs,pair_fidelity\n");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    fmt::print("{},{},{}\n", to_char(pairs[k].bp.axis), to_char(pairs[k].bs.axis), per_pair[k]);
  }
  const double avg = average_preparation_fidelity(rho, options);
  fmt::print("average_fidelity {}\nclassical_threshold {}\nabove_threshold {}\n", avg,
             classical_threshold(), avg > classical_threshold());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal cluster-state simulator"};
  app.require_subcommand(1);

  SweepFlags sweep;
  auto* cmd_sweep = app.add_subcommand("sweep", "Temperature sweep to CSV or JSON");
  cmd_sweep->add_option("--config", sweep.config_path, "JSON file with SweepConfig keys");
  cmd_sweep->add_option("--graph", sweep.graph, "Graph, e.g. \"3; 0-1,1-2\"");
  cmd_sweep->add_option("--alpha", sweep.alpha, "Phase angle in radians, or e.g. 0.84pi");
  cmd_sweep->add_option("--p-grid", sweep.p_grid, "Comma-separated dephasing strengths");
  cmd_sweep->add_option("--t-grid", sweep.t_grid, "Comma-separated T/Delta values (inf allowed)");
  cmd_sweep->add_option("--p-linspace", sweep.p_linspace, "start,stop,count");
  cmd_sweep->add_option("--t-linspace", sweep.t_linspace, "start,stop,count");
  cmd_sweep->add_option("--flux", sweep.flux, "Expected counts per unit probability");
  cmd_sweep->add_option("--mc-samples", sweep.mc_samples, "Bootstrap samples per point");
  cmd_sweep->add_option("--seed", sweep.seed, "Base seed");
  cmd_sweep->add_flag("--tomography-enabled", sweep.tomography_enabled,
                      "Simulate counts and reconstruct at each point");
  cmd_sweep->add_option("--pair-selection", sweep.pair_selection, "one_per_axis or all_eligible");
  cmd_sweep->add_option("--outcome-weighting", sweep.outcome_weighting, "probability or uniform");
  cmd_sweep->add_option("--format", sweep.format, "csv or json")->capture_default_str();
  cmd_sweep->add_option("--output", sweep.output, "Output path, - for stdout")
      ->capture_default_str();

  std::string spectrum_graph = "3; 0-1,1-2";
  double spectrum_gap = 1.0;
  auto* cmd_spectrum = app.add_subcommand("spectrum", "Check the parent-Hamiltonian spectrum");
  cmd_spectrum->add_option("--graph", spectrum_graph, "Graph")->capture_default_str();
  cmd_spectrum->add_option("--gap", spectrum_gap, "Energy gap")->capture_default_str();

  TomoFlags tomo;
  auto* cmd_tomo = app.add_subcommand("tomo", "Simulate counts for one state and reconstruct");
  cmd_tomo->add_option("--alpha", tomo.alpha, "Phase angle")->capture_default_str();
  cmd_tomo->add_option("--p", tomo.p, "Dephasing strength");
  cmd_tomo->add_option("--t", tomo.t, "T/Delta");
  cmd_tomo->add_option("--flux", tomo.flux, "Flux")->capture_default_str();
  cmd_tomo->add_option("--seed", tomo.seed, "Seed")->capture_default_str();
  cmd_tomo->add_option("--method", tomo.method, "mle or linear")->capture_default_str();
  cmd_tomo->add_option("--family", tomo.family, "minimal or mub")->capture_default_str();
  cmd_tomo->add_option("--counts-in", tomo.counts_in, "Read counts instead of simulating");
  cmd_tomo->add_option("--counts-out", tomo.counts_out, "Write the counts table");

  MbqcFlags mbqc;
  auto* cmd_mbqc = app.add_subcommand("mbqc", "Preparation fidelity per basis pair");
  cmd_mbqc->add_option("--alpha", mbqc.alpha, "Phase angle")->capture_default_str();
  cmd_mbqc->add_option("--p", mbqc.p, "Dephasing strength");
  cmd_mbqc->add_option("--t", mbqc.t, "T/Delta");
  cmd_mbqc->add_option("--pair-selection", mbqc.pair_selection, "one_per_axis or all_eligible")
      ->capture_default_str();
  cmd_mbqc->add_option("--outcome-weighting", mbqc.outcome_weighting, "probability or uniform")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*cmd_sweep) run_sweep_command(sweep);
    if (*cmd_spectrum) run_spectrum_command(spectrum_graph, spectrum_gap);
    if (*cmd_tomo) run_tomo_command(tomo);
    if (*cmd_mbqc) run_mbqc_command(mbqc);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
