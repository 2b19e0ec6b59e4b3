#include "tcsim/mbqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace tcsim {

namespace {

constexpr double kAxisTolerance = 1e-9;

ComplexMatrix pauli_for(PauliAxis axis) {
  switch (axis) {
    case PauliAxis::kX: return pauli::x();
    case PauliAxis::kY: return pauli::y();
    case PauliAxis::kZ: return pauli::z();
  }
  return pauli::identity();
}

void check_outcome(int outcome) {
  if (outcome != 0 && outcome != 1) {
    throw std::invalid_argument(fmt::format("measurement outcome must be 0 or 1, got {}", outcome));
  }
}

// Targets are fixed by the protocol on the ideal chain, so they are derived
// once and shared.
const std::vector<TargetEntry>& chain_targets() {
  static const std::vector<TargetEntry> targets = [] {
    const DensityMatrix ideal = DensityMatrix::from_pure(build_graph_state(linear_graph(3)));
    std::vector<TargetEntry> out;
    for (const auto bp : kAllBases) {
      for (const auto bs : kAllBases) {
        std::vector<TargetEntry> pair_entries;
        for (int obp = 0; obp < 2; ++obp) {
          for (int obs = 0; obs < 2; ++obs) {
            const ConditionalState c = conditional_state(ideal, bp, bs, obp, obs);
            if (c.zero_probability) break;
            // the conditional state of a pure input is pure: take its top eigenvector
            const HermitianEigen e = eigh(c.state.matrix());
            const PureState psi = PureState::normalized(e.vectors.col(1));
            const auto axis = eigen_axis(psi);
            if (!axis) break;
            pair_entries.push_back({{bp, bs}, obp, obs, psi, *axis});
          }
        }
        if (pair_entries.size() == 4) {
          out.insert(out.end(), pair_entries.begin(), pair_entries.end());
        }
      }
    }
    bool covered[3] = {false, false, false};
    for (const auto& t : out) covered[static_cast<int>(t.target_axis)] = true;
    if (!(covered[0] && covered[1] && covered[2])) {
      throw std::logic_error("target_map: eligible pairs do not cover all three axes");
    }
    return out;
  }();
  return targets;
}

}  // namespace

char to_char(PauliAxis axis) {
  switch (axis) {
    case PauliAxis::kX: return 'X';
    case PauliAxis::kY: return 'Y';
    case PauliAxis::kZ: return 'Z';
  }
  return '?';
}

PureState MeasurementBasis::eigenstate(int outcome) const {
  check_outcome(outcome);
  const double h = 1.0 / std::numbers::sqrt2;
  const double sign = outcome == 0 ? 1.0 : -1.0;
  ComplexVector v(2);
  switch (axis) {
    case PauliAxis::kX: v << h, sign * h; break;
    case PauliAxis::kY: v << h, Complex{0.0, sign * h}; break;
    case PauliAxis::kZ: v << (outcome == 0 ? 1.0 : 0.0), (outcome == 0 ? 0.0 : 1.0); break;
  }
  return PureState::normalized(std::move(v));
}

std::optional<PauliAxis> eigen_axis(const PureState& psi) {
  if (psi.num_qubits() != 1) throw std::invalid_argument("eigen_axis: expected one qubit");
  for (const auto basis : kAllBases) {
    const ComplexVector& a = psi.amplitudes();
    const double expectation = (a.adjoint() * pauli_for(basis.axis) * a)(0, 0).real();
    if (std::abs(std::abs(expectation) - 1.0) < kAxisTolerance) return basis.axis;
  }
  return std::nullopt;
}

ConditionalState conditional_state(const DensityMatrix& rho, const PureState& ket_bp,
                                   const PureState& ket_bs) {
  if (rho.num_qubits() != 3) throw std::invalid_argument("conditional_state: expected three qubits");
  if (ket_bp.num_qubits() != 1 || ket_bs.num_qubits() != 1) {
    throw std::invalid_argument("conditional_state: measurement kets must be single-qubit");
  }
  // columns |a> (x) |bs> (x) |bp> for a = 0, 1
  ComplexMatrix k(8, 2);
  for (int a = 0; a < 2; ++a) {
    ComplexVector e = ComplexVector::Zero(2);
    e(a) = 1.0;
    k.col(a) = tensor(tensor(e, ket_bs.amplitudes()), ket_bp.amplitudes());
  }
  ComplexMatrix reduced = k.adjoint() * rho.matrix() * k;
  reduced = (0.5 * (reduced + reduced.adjoint())).eval();
  const double probability = std::max(reduced.trace().real(), 0.0);
  if (probability < kZeroProbability) {
    return {probability, DensityMatrix::maximally_mixed(1), true};
  }
  return {probability, DensityMatrix(reduced / probability), false};
}

ConditionalState conditional_state(const DensityMatrix& rho, MeasurementBasis basis_bp,
                                   MeasurementBasis basis_bs, int outcome_bp, int outcome_bs) {
  return conditional_state(rho, basis_bp.eigenstate(outcome_bp), basis_bs.eigenstate(outcome_bs));
}

std::vector<TargetEntry> target_map(const Graph& g) {
  if (g != linear_graph(3)) {
    throw std::invalid_argument(
        fmt::format("target_map: protocol needs the three-qubit chain, got '{}'", g.to_string()));
  }
  return chain_targets();
}

std::string_view to_string(PairSelection selection) {
  return selection == PairSelection::kOnePerAxis ? "one_per_axis" : "all_eligible";
}

std::string_view to_string(OutcomeWeighting weighting) {
  return weighting == OutcomeWeighting::kProbability ? "probability" : "uniform";
}

PairSelection pair_selection_from_string(std::string_view text) {
  if (text == "one_per_axis") return PairSelection::kOnePerAxis;
  if (text == "all_eligible") return PairSelection::kAllEligible;
  throw std::invalid_argument(fmt::format("unknown pair selection '{}'", text));
}

OutcomeWeighting outcome_weighting_from_string(std::string_view text) {
  if (text == "probability") return OutcomeWeighting::kProbability;
  if (text == "uniform") return OutcomeWeighting::kUniform;
  throw std::invalid_argument(fmt::format("unknown outcome weighting '{}'", text));
}

std::vector<BasisPair> enabled_pairs(PairSelection selection) {
  std::vector<BasisPair> out;
  for (const auto& t : chain_targets()) {
    if (!out.empty() && out.back() == t.bases) continue;
    if (selection == PairSelection::kOnePerAxis && t.bases.bp.axis != PauliAxis::kZ) continue;
    out.push_back(t.bases);
  }
  if (selection == PairSelection::kOnePerAxis) {
    bool seen[3] = {false, false, false};
    for (const auto& t : chain_targets()) {
      if (t.bases.bp.axis == PauliAxis::kZ) seen[static_cast<int>(t.target_axis)] = true;
    }
    if (out.size() != 3 || !(seen[0] && seen[1] && seen[2])) {
      throw std::logic_error("enabled_pairs: B_p in Z does not give one pair per axis");
    }
  }
  return out;
}

std::vector<PreparationRecord> preparation_records(const DensityMatrix& rho,
                                                   const PreparationOptions& options) {
  const std::vector<BasisPair> pairs = enabled_pairs(options.selection);
  std::vector<PreparationRecord> out;
  for (const auto& t : chain_targets()) {
    if (std::find(pairs.begin(), pairs.end(), t.bases) == pairs.end()) continue;
    ConditionalState c = conditional_state(rho, t.bases.bp, t.bases.bs, t.outcome_bp, t.outcome_bs);
    const double f = fidelity(t.target, c.state);
    out.push_back({t.bases, t.outcome_bp, t.outcome_bs, c.probability, std::move(c.state), t.target,
                   f});
  }
  return out;
}

std::vector<double> pair_fidelities(const DensityMatrix& rho, const PreparationOptions& options) {
  const std::vector<BasisPair> pairs = enabled_pairs(options.selection);
  const std::vector<PreparationRecord> records = preparation_records(rho, options);
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    double weighted = 0.0;
    double weight = 0.0;
    for (const auto& r : records) {
      if (r.bases != pair) continue;
      const double w = options.weighting == OutcomeWeighting::kProbability ? r.probability : 0.25;
      weighted += w * r.fidelity;
      weight += w;
    }
    out.push_back(weight > 0.0 ? weighted / weight : 0.5);
  }
  return out;
}

double average_preparation_fidelity(const DensityMatrix& rho, const PreparationOptions& options) {
  const std::vector<double> per_pair = pair_fidelities(rho, options);
  double sum = 0.0;
  for (double f : per_pair) sum += f;
  return sum / static_cast<double>(per_pair.size());
}

}  // namespace tcsim
