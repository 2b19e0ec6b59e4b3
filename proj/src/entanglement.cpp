#include "tcsim/entanglement.hpp"

#include <algorithm>
#include <bit>
#include <functional>

#include <fmt/format.h>

#include "tcsim/graph.hpp"
#include "tcsim/thermal.hpp"

namespace tcsim {

namespace {

constexpr int kScanPoints = 400;
constexpr double kBisectionWidth = 1e-14;

// First p in [0, 1] where f(p) <= tol, assuming f is non-increasing.
double first_crossing(const std::function<double(double)>& f, double tol, const char* what) {
  if (f(0.0) <= tol) {
    throw BracketingError(fmt::format("{} is already below tolerance at p = 0", what));
  }
  double lo = 0.0;
  double hi = -1.0;
  for (int k = 1; k <= kScanPoints; ++k) {
    const double p = static_cast<double>(k) / kScanPoints;
    if (f(p) <= tol) {
      hi = p;
      break;
    }
    lo = p;
  }
  if (hi < 0.0) {
    throw BracketingError(fmt::format("{} never falls to tolerance on p in [0, 1]", what));
  }
  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= tol ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Bipartition::Bipartition(QubitSet side_a, std::size_t n_qubits)
    : side_a_(std::move(side_a)), n_qubits_(n_qubits) {
  std::sort(side_a_.begin(), side_a_.end());
  side_a_.erase(std::unique(side_a_.begin(), side_a_.end()), side_a_.end());
  if (side_a_.empty()) throw std::invalid_argument("bipartition: side A is empty");
  if (side_a_.back() >= n_qubits) throw std::out_of_range("bipartition: qubit out of range");
  if (side_a_.size() == n_qubits) throw std::invalid_argument("bipartition: side B is empty");
}

QubitSet Bipartition::side_b() const {
  QubitSet out;
  for (QubitIndex q = 0; q < n_qubits_; ++q) {
    if (!std::binary_search(side_a_.begin(), side_a_.end(), q)) out.push_back(q);
  }
  return out;
}

std::string Bipartition::label() const {
  std::string out;
  for (auto q : side_a_) out += std::to_string(q);
  out += '|';
  for (auto q : side_b()) out += std::to_string(q);
  return out;
}

std::string_view to_string(EntanglementClass klass) {
  switch (klass) {
    case EntanglementClass::kPptAll: return "PPT_ALL";
    case EntanglementClass::kBound: return "BOUND";
    case EntanglementClass::kFree: return "FREE";
  }
  return "?";
}

EntanglementClass entanglement_class_from_string(std::string_view text) {
  if (text == "PPT_ALL") return EntanglementClass::kPptAll;
  if (text == "BOUND") return EntanglementClass::kBound;
  if (text == "FREE") return EntanglementClass::kFree;
  throw std::invalid_argument(fmt::format("unknown entanglement class '{}'", text));
}

double negativity(const DensityMatrix& rho, const Bipartition& cut) {
  if (cut.n_qubits() != rho.num_qubits()) {
    throw std::invalid_argument("negativity: bipartition size does not match state");
  }
  const ComplexMatrix pt = partial_transpose(rho, cut.side_a());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (pt + pt.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    if (solver.eigenvalues()(i) < 0.0) neg -= solver.eigenvalues()(i);
  }
  return neg;
}

std::vector<Bipartition> all_bipartitions(std::size_t n) {
  if (n < 2) throw std::invalid_argument("all_bipartitions: need at least two qubits");
  std::vector<QubitSet> sides;
  const std::size_t full = (std::size_t{1} << n) - 1;
  for (std::size_t mask = 1; mask < full; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    const bool holds_zero = (mask >> bit_of(0, n)) & 1;
    if (2 * size > n || (2 * size == n && !holds_zero)) continue;
    QubitSet side;
    for (QubitIndex q = 0; q < n; ++q) {
      if ((mask >> bit_of(q, n)) & 1) side.push_back(q);
    }
    sides.push_back(std::move(side));
  }
  std::sort(sides.begin(), sides.end(), [](const QubitSet& a, const QubitSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  std::vector<Bipartition> out;
  out.reserve(sides.size());
  for (auto& s : sides) out.emplace_back(std::move(s), n);
  return out;
}

EntanglementClass classify_pattern(std::span<const double> values,
                                   std::span<const double> tolerances) {
  if (values.empty() || values.size() != tolerances.size()) {
    throw std::invalid_argument("classify_pattern: need one tolerance per value");
  }
  std::size_t above = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] > tolerances[k]) ++above;
  }
  if (above == 0) return EntanglementClass::kPptAll;
  if (above == values.size()) return EntanglementClass::kFree;
  return EntanglementClass::kBound;
}

EntanglementReport classify(const DensityMatrix& rho, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("classify: tolerance must be positive");
  EntanglementReport report{{}, std::nullopt, tol};
  std::vector<double> values;
  for (auto& cut : all_bipartitions(rho.num_qubits())) {
    const double v = negativity(rho, cut);
    values.push_back(v);
    report.negativities.push_back({std::move(cut), v});
  }
  if (rho.num_qubits() == 3) {
    const std::vector<double> tols(values.size(), tol);
    report.klass = classify_pattern(values, tols);
  }
  return report;
}

TransitionPoints transition_points(double alpha, double tol) {
  const Graph chain = linear_graph(3);
  const Bipartition end_a({0}, 3);
  const Bipartition middle({1}, 3);
  const Bipartition end_b({2}, 3);

  auto end_min = [&](double p) {
    const DensityMatrix rho = thermal_state_model(chain, p, alpha);
    return std::min(negativity(rho, end_a), negativity(rho, end_b));
  };
  auto mid = [&](double p) { return negativity(thermal_state_model(chain, p, alpha), middle); };

  TransitionPoints out{};
  out.p_free_to_bound = first_crossing(end_min, tol, "end-qubit negativity");
  out.p_bound_to_ppt = first_crossing(mid, tol, "middle-qubit negativity");
  out.t_free_to_bound = temperature_from_p(out.p_free_to_bound);
  out.t_bound_to_ppt = temperature_from_p(out.p_bound_to_ppt);
  return out;
}

}  // namespace tcsim
