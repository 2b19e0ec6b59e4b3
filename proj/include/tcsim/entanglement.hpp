#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tcsim/linalg.hpp"

namespace tcsim {

/// A cut of an n-qubit register into side_a and its complement.
class Bipartition {
 public:
  /// side_a must be a nonempty proper subset of {0..n-1}; stored sorted.
  Bipartition(QubitSet side_a, std::size_t n_qubits);

  const QubitSet& side_a() const { return side_a_; }
  QubitSet side_b() const;
  std::size_t n_qubits() const { return n_qubits_; }

  /// e.g. "0|12" for side_a = {0} on three qubits
  std::string label() const;

  friend bool operator==(const Bipartition&, const Bipartition&) = default;

 private:
  QubitSet side_a_;
  std::size_t n_qubits_;
};

enum class EntanglementClass {
  kPptAll,  // every cut PPT; a separability candidate, not a proof of separability
  kBound,   // some cuts NPT, others PPT
  kFree,    // every cut NPT
};

std::string_view to_string(EntanglementClass klass);
EntanglementClass entanglement_class_from_string(std::string_view text);

inline constexpr double kDefaultNegativityTolerance = 1e-9;

struct NegativityEntry {
  Bipartition cut;
  double value;
};

struct EntanglementReport {
  std::vector<NegativityEntry> negativities;
  /// Set for three-qubit inputs only.
  std::optional<EntanglementClass> klass;
  double tolerance;
};

/// (||rho^{T_A}||_1 - 1) / 2, the summed magnitude of the negative
/// eigenvalues of the partial transpose.
double negativity(const DensityMatrix& rho, const Bipartition& cut);

/// All 2^{n-1} - 1 distinct cuts. Each is represented by its smaller side (the
/// side holding qubit 0 on ties), ordered by size and then lexicographically.
/// For n = 3 this is {0}, {1}, {2}.
std::vector<Bipartition> all_bipartitions(std::size_t n);

/// Threshold pattern: all values <= tolerance -> PPT_ALL, all above -> FREE,
/// otherwise BOUND. `tolerances` holds one threshold per value.
EntanglementClass classify_pattern(std::span<const double> values,
                                   std::span<const double> tolerances);

EntanglementReport classify(const DensityMatrix& rho, double tol = kDefaultNegativityTolerance);

/// Raised when a model sweep never crosses the requested tolerance.
class BracketingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TransitionPoints {
  double p_free_to_bound;  // min(N_0, N_2) reaches tol
  double p_bound_to_ppt;   // N_1 reaches tol
  double t_free_to_bound;
  double t_bound_to_ppt;
};

/// Dephasing strengths at which the end-qubit negativities and the
/// middle-qubit negativity of the three-qubit linear-cluster phase-gate model
/// first fall to `tol`, located by a grid scan followed by bisection.
TransitionPoints transition_points(double alpha, double tol = kDefaultNegativityTolerance);

}  // namespace tcsim
