#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcsim/entanglement.hpp"
#include "tcsim/graph.hpp"
#include "tcsim/mbqc.hpp"
#include "tcsim/tomography.hpp"

namespace tcsim {

inline constexpr std::string_view kToolName = "tcsim";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Invalid sweep configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SweepConfig {
  Graph graph = linear_graph(3);
  double alpha = std::numbers::pi;
  std::optional<std::vector<double>> p_grid;
  std::optional<std::vector<double>> t_grid;  // T / Delta, may hold +inf
  double flux = 5000.0;
  int mc_samples = 100;
  std::uint64_t seed = 1;
  bool tomography_enabled = false;
  PairSelection pair_selection = PairSelection::kOnePerAxis;
  OutcomeWeighting outcome_weighting = OutcomeWeighting::kProbability;

  /// Throws ConfigError for the first violated constraint.
  void validate() const;

  /// Keys match the field names. Unknown keys are rejected; alpha may also be
  /// a string such as "0.84pi".
  static SweepConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// FNV-1a over the compact JSON form, as 16 hex digits.
  std::string hash() const;
};

/// Angle in radians; a trailing "pi" multiplies, e.g. "0.84pi" or "pi".
double parse_angle(std::string_view text);

struct SweepPoint {
  double p;
  double t_over_delta;
  double neg_ap;
  double err_ap;
  double neg_bp;
  double err_bp;
  double neg_bs;
  double err_bs;
  EntanglementClass klass;
  double avg_fidelity;
  double fid_error;
  double state_fidelity_vs_ideal;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

/// Dephasing strengths in grid order, converted from temperatures if needed.
std::vector<double> grid_p_values(const SweepConfig& cfg);

/// Evaluates one grid value. `point_seed` drives the simulated counts;
/// bootstrap samples use point_seed + 1 + i.
SweepPoint evaluate_point(const SweepConfig& cfg, double p, std::uint64_t point_seed);

/// Seed used for grid index i.
constexpr std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  return seed + 1000003ULL * index;
}

/// All grid points, ordered by grid index.
std::vector<SweepPoint> run_sweep(const SweepConfig& cfg);

enum class OutputFormat { kCsv, kJson };

OutputFormat output_format_from_string(std::string_view text);

inline constexpr std::string_view kCsvHeader =
    "p,t_over_delta,neg_Ap,err_Ap,neg_Bp,err_Bp,neg_Bs,err_Bs,class,avg_fidelity,fid_error,"
    "state_fidelity_vs_ideal";

/// "# tcsim 0.1.0 config_hash=<h> seed=<s>"
std::string provenance_line(const SweepConfig& cfg);

/// Provenance comment, header, one row per point.
std::string to_csv(std::span<const SweepPoint> points, const SweepConfig& cfg);
std::vector<SweepPoint> points_from_csv(std::string_view text);

nlohmann::json to_json(std::span<const SweepPoint> points, const SweepConfig& cfg);
std::vector<SweepPoint> points_from_json(const nlohmann::json& j);

/// Writes the table; throws std::runtime_error if the file cannot be written.
void emit(std::span<const SweepPoint> points, const SweepConfig& cfg, OutputFormat format,
          const std::filesystem::path& path);

}  // namespace tcsim
