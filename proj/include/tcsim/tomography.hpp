#pragma once

// Simulated product-projector tomography with Poissonian counts.
//
// A setting is a product of single-qubit projectors. The expected count for
// setting s is flux * Tr(rho Pi_s); `flux` absorbs source brightness and
// integration time.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tcsim/linalg.hpp"

namespace tcsim {

enum class ProjectorLabel : std::uint8_t {
  kZ0,      // |0>
  kZ1,      // |1>
  kXPlus,   // |+>
  kYPlus,   // |r> = (|0> + i|1>)/sqrt2
  kXMinus,  // |->  (overcomplete family only)
  kYMinus,  // |l>  (overcomplete family only)
};

std::string_view to_string(ProjectorLabel label);
PureState projector_state(ProjectorLabel label);

/// Product projector, one label per qubit.
struct ProjectorSetting {
  std::vector<ProjectorLabel> per_qubit;

  std::size_t num_qubits() const { return per_qubit.size(); }
  /// Concatenated qubit labels, e.g. "z0x+y+".
  std::string label() const;
  static ProjectorSetting parse(std::string_view label);
  ComplexMatrix projector() const;

  friend bool operator==(const ProjectorSetting&, const ProjectorSetting&) = default;
};

enum class SettingsFamily {
  kMinimal,      // {z0, z1, x+, y+}^n, 4^n settings
  kMutuallyUnbiased,  // all six Pauli eigenstates, 6^n settings
};

std::vector<ProjectorSetting> standard_settings(std::size_t n,
                                                SettingsFamily family = SettingsFamily::kMinimal);

/// Counts per setting plus the metadata needed to reproduce them.
struct CountRecord {
  std::vector<ProjectorSetting> settings;
  std::vector<std::uint64_t> counts;
  double flux = 1.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless counts and settings match in length,
  /// every setting has the same qubit count, and flux > 0.
  void validate() const;
  std::vector<double> counts_as_double() const;

  /// Text table: "# flux: <v>" and "# seed: <v>" header lines, then the
  /// column header "setting_label,count" and one row per setting.
  std::string to_text() const;
  static CountRecord from_text(std::string_view text);
};

/// flux * Tr(rho Pi_s) for every setting.
std::vector<double> expected_counts(const DensityMatrix& rho,
                                    std::span<const ProjectorSetting> settings, double flux);

/// Poisson draws with mean flux * Tr(rho Pi_s) from a generator seeded with `seed`.
CountRecord simulate_counts(const DensityMatrix& rho, std::vector<ProjectorSetting> settings,
                            double flux, std::uint64_t seed);

/// sum_s [n_s log(flux p_s) - flux p_s]; -inf when some p_s = 0 has n_s > 0.
double log_likelihood(const ComplexMatrix& rho, std::span<const ProjectorSetting> settings,
                      std::span<const double> counts, double flux);

enum class ReconstructionMethod { kLinear, kMaximumLikelihood };

std::string_view to_string(ReconstructionMethod method);

class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReconstructionResult {
  DensityMatrix rho;
  ReconstructionMethod method;
  double log_likelihood;
  int iterations = 0;
  bool converged = true;
  /// Least-squares solution before projection onto the state set (linear only).
  std::optional<ComplexMatrix> unconstrained;
};

/// Least-squares fit of flux Tr(rho Pi_s) = n_s over Hermitian unit-trace
/// matrices, then Euclidean projection of the spectrum onto the probability
/// simplex. All-zero counts give the maximally mixed state. Throws
/// ReconstructionError when the settings are not informationally complete.
ReconstructionResult linear_inversion(std::span<const ProjectorSetting> settings,
                                      std::span<const double> counts, double flux);
ReconstructionResult linear_inversion(const CountRecord& rec);

struct MleOptions {
  int max_iter = 5000;
  /// Stop once one iteration improves the log-likelihood by less than this.
  double tol = 1e-9;
};

/// Poisson maximum-likelihood estimate over density matrices by accelerated
/// projected gradient ascent, warm-started from the linear-inversion estimate.
/// Each accepted iterate increases the likelihood. When max_iter is reached the
/// best iterate is returned with converged = false.
ReconstructionResult mle_reconstruct(std::span<const ProjectorSetting> settings,
                                     std::span<const double> counts, double flux,
                                     const MleOptions& options = {});
ReconstructionResult mle_reconstruct(const CountRecord& rec, const MleOptions& options = {});

using StateStatistic = std::function<double(const DensityMatrix&)>;

struct MonteCarloEstimate {
  double mean;
  double stddev;  // sample standard deviation (n - 1 denominator)
};

/// Parametric bootstrap: sample i redraws every count as Poisson(observed)
/// from a generator seeded with seed + i, reconstructs by MLE and evaluates
/// each statistic. Results are identical for identical inputs regardless of
/// thread count.
std::vector<MonteCarloEstimate> monte_carlo_statistics(const CountRecord& rec,
                                                       std::span<const StateStatistic> statistics,
                                                       int n_samples, std::uint64_t seed,
                                                       const MleOptions& options = {});

MonteCarloEstimate monte_carlo_statistic(const CountRecord& rec, const StateStatistic& statistic,
                                         int n_samples, std::uint64_t seed,
                                         const MleOptions& options = {});

/// Euclidean projection of a Hermitian matrix onto the density matrices
/// (eigenvalues projected onto the probability simplex).
ComplexMatrix project_to_density_matrix(const ComplexMatrix& m);

}  // namespace tcsim
