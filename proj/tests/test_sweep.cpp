#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "tcsim/sweep.hpp"
#include "tcsim/thermal.hpp"

using namespace tcsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SweepConfig p_config(std::vector<double> grid, double alpha = std::numbers::pi) {
  SweepConfig cfg;
  cfg.alpha = alpha;
  cfg.p_grid = std::move(grid);
  return cfg;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t data_lines(const std::string& csv) {
  std::size_t count = 0;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.front() != '#') ++count;
  }
  return count;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TCSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tcsim_test_" + name);
}

}  // namespace

TEST(Sweep, PureClusterRow) {
  const auto points = run_sweep(p_config({0.0}));
  ASSERT_EQ(points.size(), 1u);
  const SweepPoint& pt = points[0];
  EXPECT_NEAR(pt.neg_ap, 0.5, 1e-12);
  EXPECT_NEAR(pt.neg_bp, 0.5, 1e-12);
  EXPECT_NEAR(pt.neg_bs, 0.5, 1e-12);
  EXPECT_EQ(pt.klass, EntanglementClass::kFree);
  EXPECT_NEAR(pt.avg_fidelity, 1.0, 1e-10);
  EXPECT_EQ(pt.t_over_delta, 0.0);
  EXPECT_EQ(pt.err_ap, 0.0);
  EXPECT_NEAR(pt.state_fidelity_vs_ideal, 1.0, 1e-10);
}

TEST(Sweep, MaximallyMixedRow) {
  const auto points = run_sweep(p_config({1.0}));
  const SweepPoint& pt = points[0];
  EXPECT_NEAR(pt.neg_ap, 0.0, 1e-12);
  EXPECT_NEAR(pt.neg_bp, 0.0, 1e-12);
  EXPECT_NEAR(pt.neg_bs, 0.0, 1e-12);
  EXPECT_EQ(pt.klass, EntanglementClass::kPptAll);
  EXPECT_NEAR(pt.avg_fidelity, 0.5, 1e-10);
  EXPECT_EQ(pt.t_over_delta, kInf);
}

TEST(Sweep, ImperfectPhaseModelHasBoundRowNear1p8) {
  SweepConfig cfg;
  cfg.alpha = 0.84 * std::numbers::pi;
  std::vector<double> ts;
  for (int k = 0; k <= 29; ++k) ts.push_back(0.1 + 0.1 * k);
  cfg.t_grid = ts;
  const auto points = run_sweep(cfg);
  ASSERT_EQ(points.size(), ts.size());
  const auto near = std::find_if(points.begin(), points.end(), [](const SweepPoint& p) {
    return std::abs(p.t_over_delta - 1.8) < 1e-9;
  });
  ASSERT_NE(near, points.end());
  EXPECT_EQ(near->klass, EntanglementClass::kBound);
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_NEAR(points[i].t_over_delta, ts[i], 1e-9);
}

TEST(Sweep, RowsFollowGridOrder) {
  const auto points = run_sweep(p_config({0.9, 0.1, 0.5}));
  EXPECT_EQ(points[0].p, 0.9);
  EXPECT_EQ(points[1].p, 0.1);
  EXPECT_EQ(points[2].p, 0.5);
}

TEST(Sweep, ClassConsistentWithErrors) {
  SweepConfig cfg = p_config({0.2, 0.62, 0.8}, 0.84 * std::numbers::pi);
  cfg.tomography_enabled = true;
  cfg.flux = 3000;
  cfg.mc_samples = 8;
  for (const auto& pt : run_sweep(cfg)) {
    const double v[] = {pt.neg_ap, pt.neg_bp, pt.neg_bs};
    const double tol[] = {std::max(1e-9, pt.err_ap), std::max(1e-9, pt.err_bp),
                          std::max(1e-9, pt.err_bs)};
    EXPECT_EQ(pt.klass, classify_pattern(v, tol));
    EXPECT_GT(pt.err_bs, 0.0);
    EXPECT_GT(pt.fid_error, 0.0);
  }
}

TEST(Sweep, TomographyApproachesModelAtHighFlux) {
  SweepConfig model = p_config({0.3}, 0.84 * std::numbers::pi);
  SweepConfig tomo = model;
  tomo.tomography_enabled = true;
  tomo.flux = 1e7;
  tomo.mc_samples = 20;
  const SweepPoint a = run_sweep(model)[0];
  const SweepPoint b = run_sweep(tomo)[0];
  EXPECT_LE(std::abs(a.neg_ap - b.neg_ap), 2.0 * b.err_ap);
  EXPECT_LE(std::abs(a.neg_bp - b.neg_bp), 2.0 * b.err_bp);
  EXPECT_LE(std::abs(a.neg_bs - b.neg_bs), 2.0 * b.err_bs);
  EXPECT_LE(std::abs(a.avg_fidelity - b.avg_fidelity), 2.0 * b.fid_error);
  EXPECT_LT(b.err_bs, 1e-3);
}

TEST(Sweep, ValidationNamesField) {
  auto field_of = [](const SweepConfig& cfg) {
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("none");
  };
  SweepConfig cfg;
  EXPECT_EQ(field_of(cfg), "p_grid");  // neither grid
  cfg.p_grid = {0.1};
  EXPECT_EQ(field_of(cfg), "none");
  cfg.t_grid = {1.0};
  EXPECT_EQ(field_of(cfg), "p_grid");  // both grids
  cfg.t_grid.reset();
  cfg.p_grid = {1.2};
  EXPECT_EQ(field_of(cfg), "p_grid");
  cfg.p_grid.reset();
  cfg.t_grid = {-1.0};
  EXPECT_EQ(field_of(cfg), "t_grid");
  cfg.t_grid = {kInf, 0.0};
  EXPECT_EQ(field_of(cfg), "none");
  cfg.flux = 0.0;
  EXPECT_EQ(field_of(cfg), "flux");
  cfg.flux = 10.0;
  cfg.tomography_enabled = true;
  cfg.mc_samples = 1;
  EXPECT_EQ(field_of(cfg), "mc_samples");
  cfg.mc_samples = 2;
  cfg.graph = linear_graph(4);
  EXPECT_EQ(field_of(cfg), "graph");
  cfg.graph = linear_graph(3);
  cfg.alpha = std::nan("");
  EXPECT_EQ(field_of(cfg), "alpha");
}

TEST(Sweep, JsonConfigParsing) {
  const auto j = nlohmann::json::parse(R"({
    "graph": "3; 0-1,1-2", "alpha": "0.84pi", "t_grid": [0.5, "inf"],
    "flux": 2000, "mc_samples": 5, "seed": 9, "tomography_enabled": true,
    "pair_selection": "all_eligible", "outcome_weighting": "uniform"})");
  const SweepConfig cfg = SweepConfig::from_json(j);
  EXPECT_NEAR(cfg.alpha, 0.84 * std::numbers::pi, 1e-15);
  ASSERT_TRUE(cfg.t_grid.has_value());
  EXPECT_EQ((*cfg.t_grid)[1], kInf);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.pair_selection, PairSelection::kAllEligible);
  EXPECT_EQ(cfg.outcome_weighting, OutcomeWeighting::kUniform);
  const SweepConfig again = SweepConfig::from_json(cfg.to_json());
  EXPECT_EQ(again.to_json(), cfg.to_json());
  EXPECT_EQ(again.hash(), cfg.hash());

  EXPECT_THROW(SweepConfig::from_json(nlohmann::json::parse(R"({"p_grid":[0],"colour":1})")),
               ConfigError);
  EXPECT_THROW(SweepConfig::from_json(nlohmann::json::parse(R"({"p_grid":[0],"flux":"x"})")),
               ConfigError);
  EXPECT_THROW(SweepConfig::from_json(nlohmann::json::parse(R"({"p_grid":[0],"graph":"3; 0-0"})")),
               ConfigError);
}

TEST(Sweep, ParseAngle) {
  EXPECT_NEAR(parse_angle("pi"), std::numbers::pi, 0.0);
  EXPECT_NEAR(parse_angle("0.84pi"), 0.84 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(parse_angle("0.5*pi"), 0.5 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(parse_angle("2.5"), 2.5, 0.0);
  EXPECT_THROW(parse_angle("half"), std::invalid_argument);
}

TEST(Sweep, HashTracksConfig) {
  SweepConfig a = p_config({0.1});
  SweepConfig b = a;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 2;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Sweep, SinglePointCsvHasHeaderAndRow) {
  const SweepConfig cfg = p_config({0.25});
  const auto points = run_sweep(cfg);
  const std::string csv = to_csv(points, cfg);
  EXPECT_EQ(data_lines(csv), 2u);
  EXPECT_EQ(csv.substr(0, 1), "#");
  EXPECT_NE(csv.find(std::string(kCsvHeader) + "\n"), std::string::npos);
  EXPECT_NE(csv.find(cfg.hash()), std::string::npos);
  EXPECT_EQ(points_from_csv(csv), points);
}

TEST(Sweep, InfiniteTemperatureSerialized) {
  const SweepConfig cfg = p_config({1.0});
  const auto points = run_sweep(cfg);
  EXPECT_NE(to_csv(points, cfg).find(",inf,"), std::string::npos);
  const nlohmann::json j = to_json(points, cfg);
  EXPECT_EQ(j["points"][0]["t_over_delta"], "inf");
  EXPECT_EQ(points_from_json(j), points);
}

TEST(Sweep, JsonRoundTripThroughText) {
  SweepConfig cfg = p_config({0.0, 0.3, 0.7, 1.0}, 0.84 * std::numbers::pi);
  const auto points = run_sweep(cfg);
  const auto path = temp_path("roundtrip.json");
  emit(points, cfg, OutputFormat::kJson, path);
  EXPECT_EQ(points_from_json(nlohmann::json::parse(read_file(path))), points);
  std::filesystem::remove(path);
}

TEST(Sweep, EmitRejectsUnwritablePath) {
  const SweepConfig cfg = p_config({0.5});
  const auto points = run_sweep(cfg);
  EXPECT_THROW(emit(points, cfg, OutputFormat::kCsv, "/nonexistent-dir/out.csv"),
               std::runtime_error);
  EXPECT_THROW(to_csv(std::span<const SweepPoint>{}, cfg), std::invalid_argument);
}

TEST(Sweep, SeededSweepIsByteIdentical) {
  SweepConfig cfg = p_config({0.2, 0.6}, 0.84 * std::numbers::pi);
  cfg.tomography_enabled = true;
  cfg.flux = 2000;
  cfg.mc_samples = 4;
  cfg.seed = 31;
  const auto a = temp_path("det_a.csv");
  const auto b = temp_path("det_b.csv");
  emit(run_sweep(cfg), cfg, OutputFormat::kCsv, a);
  emit(run_sweep(cfg), cfg, OutputFormat::kCsv, b);
  EXPECT_EQ(read_file(a), read_file(b));
  cfg.seed = 32;
  emit(run_sweep(cfg), cfg, OutputFormat::kCsv, b);
  EXPECT_NE(read_file(a), read_file(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Sweep, ModelCurvesMatchGolden) {
  // the imperfect-phase model curves behind the entanglement-regime figure
  const std::string golden = read_file(std::string(TCSIM_GOLDEN_DIR) + "/model_sweep.csv");
  ASSERT_FALSE(golden.empty());
  SweepConfig cfg;
  cfg.alpha = 0.84 * std::numbers::pi;
  std::vector<double> ts;
  for (int k = 0; k <= 30; ++k) ts.push_back(0.1 * k);
  cfg.t_grid = ts;
  const auto fresh = run_sweep(cfg);
  const auto frozen = points_from_csv(golden);
  ASSERT_EQ(fresh.size(), frozen.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    EXPECT_NEAR(fresh[i].p, frozen[i].p, 1e-12);
    EXPECT_NEAR(fresh[i].neg_ap, frozen[i].neg_ap, 1e-9);
    EXPECT_NEAR(fresh[i].neg_bp, frozen[i].neg_bp, 1e-9);
    EXPECT_NEAR(fresh[i].neg_bs, frozen[i].neg_bs, 1e-9);
    EXPECT_NEAR(fresh[i].avg_fidelity, frozen[i].avg_fidelity, 1e-9);
    EXPECT_EQ(fresh[i].klass, frozen[i].klass);
  }
  // three decaying curves with staggered zeros: ends vanish first
  double prev_end = 1.0, prev_mid = 1.0;
  for (const auto& pt : fresh) {
    EXPECT_LE(pt.neg_ap, prev_end + 1e-12);
    EXPECT_LE(pt.neg_bs, prev_mid + 1e-12);
    prev_end = pt.neg_ap;
    prev_mid = pt.neg_bs;
  }
}

TEST(SweepCli, ExitCodes) {
  EXPECT_EQ(run_cli("sweep --p-grid 0,0.5"), 0);
  EXPECT_EQ(run_cli("sweep --p-grid 1.5"), 1);
  EXPECT_EQ(run_cli("sweep"), 1);
  EXPECT_EQ(run_cli("sweep --p-grid 0 --t-grid 1"), 1);
  EXPECT_EQ(run_cli("sweep --p-grid 0 --mc-samples 1 --tomography-enabled"), 1);
  EXPECT_EQ(run_cli("sweep --p-grid 0 --bogus"), 1);
  EXPECT_EQ(run_cli("sweep --p-grid 0 --output /nonexistent-dir/x.csv"), 2);
  EXPECT_EQ(run_cli("spectrum"), 0);
  EXPECT_EQ(run_cli("mbqc --t 1.0"), 0);
  EXPECT_EQ(run_cli("tomo --t 0.5 --flux 2000"), 0);
  EXPECT_EQ(run_cli("tomo --t 0.5 --p 0.1"), 1);
}

TEST(SweepCli, FlagsOverrideConfigFile) {
  const auto cfg_path = temp_path("cfg.json");
  const auto out_a = temp_path("cli_a.csv");
  const auto out_b = temp_path("cli_b.csv");
  {
    std::ofstream f(cfg_path);
    f << R"({"alpha": "0.84pi", "p_grid": [0.1, 0.2], "seed": 4})";
  }
  EXPECT_EQ(run_cli("sweep --config " + cfg_path.string() + " --output " + out_a.string()), 0);
  EXPECT_EQ(run_cli("sweep --config " + cfg_path.string() + " --p-grid 0.3 --output " +
                    out_b.string()),
            0);
  EXPECT_EQ(data_lines(read_file(out_a)), 3u);
  const auto b = points_from_csv(read_file(out_b));
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].p, 0.3);
  std::filesystem::remove(cfg_path);
  std::filesystem::remove(out_a);
  std::filesystem::remove(out_b);
}
