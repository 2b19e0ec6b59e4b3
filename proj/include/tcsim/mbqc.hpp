#pragma once

// Single-qubit state preparation on the three-qubit chain A_p - B_s - B_p:
// B_p and B_s are measured in Pauli bases and A_p is left in a conditional
// state that is compared with the state an ideal cluster would produce.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "tcsim/graph.hpp"
#include "tcsim/linalg.hpp"

namespace tcsim {

inline constexpr QubitIndex kQubitAp = 0;
inline constexpr QubitIndex kQubitBs = 1;
inline constexpr QubitIndex kQubitBp = 2;

enum class PauliAxis : std::uint8_t { kX, kY, kZ };

char to_char(PauliAxis axis);

struct MeasurementBasis {
  PauliAxis axis;

  /// Outcome 0 is the +1 eigenstate: |+>, |r>, |0>; outcome 1 is |->, |l>, |1>.
  PureState eigenstate(int outcome) const;

  friend bool operator==(const MeasurementBasis&, const MeasurementBasis&) = default;
  friend auto operator<=>(const MeasurementBasis&, const MeasurementBasis&) = default;
};

inline constexpr std::array<MeasurementBasis, 3> kAllBases = {
    MeasurementBasis{PauliAxis::kX}, MeasurementBasis{PauliAxis::kY},
    MeasurementBasis{PauliAxis::kZ}};

/// Axis whose eigenstate `psi` is (within 1e-9), or nullopt.
std::optional<PauliAxis> eigen_axis(const PureState& psi);

inline constexpr double kZeroProbability = 1e-12;

struct ConditionalState {
  double probability;
  DensityMatrix state;       // one qubit
  bool zero_probability;     // probability < kZeroProbability; state is then I/2
};

/// Projects B_p and B_s of a three-qubit state onto the given kets and
/// returns the probability and the normalized A_p state.
ConditionalState conditional_state(const DensityMatrix& rho, const PureState& ket_bp,
                                   const PureState& ket_bs);

ConditionalState conditional_state(const DensityMatrix& rho, MeasurementBasis basis_bp,
                                   MeasurementBasis basis_bs, int outcome_bp, int outcome_bs);

struct BasisPair {
  MeasurementBasis bp;
  MeasurementBasis bs;

  friend bool operator==(const BasisPair&, const BasisPair&) = default;
  friend auto operator<=>(const BasisPair&, const BasisPair&) = default;
};

struct TargetEntry {
  BasisPair bases;
  int outcome_bp;
  int outcome_bs;
  PureState target;
  PauliAxis target_axis;
};

/// Targets for every eligible basis pair: the pure A_p state left by the ideal
/// cluster (p = 0). A pair is eligible when all four of its targets are Pauli
/// eigenstates. Entries are ordered by (bp, bs, outcome_bp, outcome_bs).
/// Requires g == linear_graph(3).
std::vector<TargetEntry> target_map(const Graph& g);

enum class PairSelection {
  kOnePerAxis,   // eligible pairs with B_p in Z: one pair per target axis
  kAllEligible,  // every eligible pair
};

enum class OutcomeWeighting {
  kProbability,  // outcomes weighted by their probability within a pair
  kUniform,      // each outcome weighted 1/4
};

std::string_view to_string(PairSelection selection);
std::string_view to_string(OutcomeWeighting weighting);
PairSelection pair_selection_from_string(std::string_view text);
OutcomeWeighting outcome_weighting_from_string(std::string_view text);

struct PreparationOptions {
  PairSelection selection = PairSelection::kOnePerAxis;
  OutcomeWeighting weighting = OutcomeWeighting::kProbability;
};

std::vector<BasisPair> enabled_pairs(PairSelection selection);

struct PreparationRecord {
  BasisPair bases;
  int outcome_bp;
  int outcome_bs;
  double probability;
  DensityMatrix conditional;
  PureState target;
  double fidelity;
};

/// One record per enabled pair and outcome, in target_map order.
std::vector<PreparationRecord> preparation_records(const DensityMatrix& rho,
                                                   const PreparationOptions& options = {});

/// Mean over enabled pairs of the outcome-weighted fidelity within each pair.
double average_preparation_fidelity(const DensityMatrix& rho,
                                    const PreparationOptions& options = {});

/// Per-pair averages in enabled_pairs order.
std::vector<double> pair_fidelities(const DensityMatrix& rho,
                                    const PreparationOptions& options = {});

/// Best average fidelity reachable by measure-and-prepare strategies.
constexpr double classical_threshold() { return 2.0 / 3.0; }

}  // namespace tcsim
