#include "tcsim/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace tcsim {

namespace {

constexpr double kLevelTolerance = 1e-8;
constexpr double kSpectrumTolerance = 1e-10;

std::size_t parse_index(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(fmt::format("graph: cannot parse {} '{}'", what, text));
  }
  return value;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Matrix of the Pauli string with X on `x_mask` bits and Z on `z_mask` bits
// (no Y factors, so all entries are +-1).
ComplexMatrix pauli_string(std::size_t n, std::size_t x_mask, std::size_t z_mask) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t col = 0; col < static_cast<std::size_t>(dim); ++col) {
    // Z acts first on the input basis state, then X flips bits
    const double sign = (std::popcount(col & z_mask) % 2 == 0) ? 1.0 : -1.0;
    m(static_cast<Eigen::Index>(col ^ x_mask), static_cast<Eigen::Index>(col)) = sign;
  }
  return m;
}

}  // namespace

Graph::Graph(std::size_t n_vertices, std::vector<std::pair<QubitIndex, QubitIndex>> edges)
    : n_vertices_(n_vertices) {
  if (n_vertices == 0) throw std::invalid_argument("graph: needs at least one vertex");
  edges_.reserve(edges.size());
  for (auto [i, j] : edges) {
    if (i == j) throw std::invalid_argument(fmt::format("graph: self-loop on vertex {}", i));
    if (i >= n_vertices || j >= n_vertices) {
      throw std::invalid_argument(
          fmt::format("graph: edge {}-{} out of range for {} vertices", i, j, n_vertices));
    }
    edges_.push_back(Edge{std::min(i, j), std::max(i, j)});
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw std::invalid_argument(fmt::format("graph: duplicate edge {}-{}", dup->a, dup->b));
  }
}

std::vector<QubitIndex> Graph::neighbors(QubitIndex v) const {
  if (v >= n_vertices_) throw std::out_of_range("graph: vertex out of range");
  std::vector<QubitIndex> out;
  for (const Edge& e : edges_) {
    if (e.a == v) out.push_back(e.b);
    if (e.b == v) out.push_back(e.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Graph::to_string() const {
  std::string out = fmt::format("{};", n_vertices_);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    out += fmt::format("{}{}-{}", k == 0 ? " " : ",", edges_[k].a, edges_[k].b);
  }
  return out;
}

Graph Graph::parse(std::string_view text) {
  const auto semi = text.find(';');
  if (semi == std::string_view::npos) {
    throw std::invalid_argument(fmt::format("graph: expected 'n; i-j,...', got '{}'", text));
  }
  const std::size_t n = parse_index(text.substr(0, semi), "vertex count");
  std::vector<std::pair<QubitIndex, QubitIndex>> edges;
  std::string_view rest = text.substr(semi + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.find_first_not_of(' ') == std::string_view::npos) {
      if (comma == std::string_view::npos) break;
      throw std::invalid_argument("graph: empty edge entry");
    }
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      throw std::invalid_argument(fmt::format("graph: malformed edge '{}'", item));
    }
    edges.emplace_back(parse_index(item.substr(0, dash), "edge endpoint"),
                       parse_index(item.substr(dash + 1), "edge endpoint"));
  }
  return Graph(n, std::move(edges));
}

Graph linear_graph(std::size_t n) {
  if (n < 2) throw std::invalid_argument("linear_graph: n must be at least 2");
  std::vector<std::pair<QubitIndex, QubitIndex>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, std::move(edges));
}

PureState build_graph_state(const Graph& g) {
  const std::size_t n = g.n_vertices();
  const std::size_t dim = std::size_t{1} << n;
  ComplexVector amps =
      ComplexVector::Constant(static_cast<Eigen::Index>(dim), 1.0 / std::sqrt(static_cast<double>(dim)));
  for (const Edge& e : g.edges()) {
    const std::size_t both = (std::size_t{1} << bit_of(e.a, n)) | (std::size_t{1} << bit_of(e.b, n));
    for (std::size_t b = 0; b < dim; ++b) {
      if ((b & both) == both) amps(static_cast<Eigen::Index>(b)) *= -1.0;
    }
  }
  return PureState::normalized(std::move(amps));
}

PureState excited_state(const Graph& g, const ExcitationVector& mu) {
  const std::size_t n = g.n_vertices();
  if (mu.size() != n) {
    throw std::invalid_argument(
        fmt::format("excited_state: excitation vector length {} != {}", mu.size(), n));
  }
  std::size_t z_mask = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] > 1) throw std::invalid_argument("excited_state: entries must be 0 or 1");
    if (mu[i]) z_mask |= std::size_t{1} << bit_of(i, n);
  }
  ComplexVector amps = build_graph_state(g).amplitudes();
  for (Eigen::Index b = 0; b < amps.size(); ++b) {
    if (std::popcount(static_cast<std::size_t>(b) & z_mask) % 2) amps(b) *= -1.0;
  }
  return PureState::normalized(std::move(amps));
}

double excitation_energy(const ExcitationVector& mu, double gap) {
  double s = 0.0;
  for (auto m : mu) s += m ? -1.0 : 1.0;
  return -0.5 * gap * s;
}

std::vector<ExcitationVector> all_excitations(std::size_t n) {
  std::vector<ExcitationVector> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t code = 0; code < (std::size_t{1} << n); ++code) {
    ExcitationVector mu(n);
    for (std::size_t i = 0; i < n; ++i) mu[i] = static_cast<std::uint8_t>((code >> bit_of(i, n)) & 1);
    out.push_back(std::move(mu));
  }
  return out;
}

std::vector<ComplexMatrix> stabilizer_terms(const Graph& g) {
  const std::size_t n = g.n_vertices();
  std::vector<ComplexMatrix> terms;
  terms.reserve(n);
  for (QubitIndex i = 0; i < n; ++i) {
    std::size_t z_mask = 0;
    for (QubitIndex j : g.neighbors(i)) z_mask |= std::size_t{1} << bit_of(j, n);
    terms.push_back(pauli_string(n, std::size_t{1} << bit_of(i, n), z_mask));
  }
  return terms;
}

ComplexMatrix parent_hamiltonian(const Graph& g, double gap) {
  if (!(gap > 0.0)) throw std::invalid_argument("parent_hamiltonian: gap must be positive");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << g.n_vertices());
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (const auto& term : stabilizer_terms(g)) h += term;
  return -0.5 * gap * h;
}

SpectrumReport verify_spectrum(const Graph& g, double gap) {
  const std::size_t n = g.n_vertices();
  if (n > kMaxDenseQubits) {
    throw std::invalid_argument(
        fmt::format("verify_spectrum: {} qubits exceeds dense limit {}", n, kMaxDenseQubits));
  }
  const ComplexMatrix h = parent_hamiltonian(g, gap);
  const HermitianEigen eig = eigh(h);

  SpectrumReport report;
  report.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
  for (double e : report.eigenvalues) {
    if (!report.levels.empty() && std::abs(e - report.levels.back().energy) < kLevelTolerance) {
      ++report.levels.back().multiplicity;
    } else {
      report.levels.push_back({e, 1});
    }
  }
  report.ground_unique = report.levels.front().multiplicity == 1;
  if (report.levels.size() >= 2) {
    report.gap = report.levels[1].energy - report.levels[0].energy;
    report.gap_matches = std::abs(report.gap - gap) <= kSpectrumTolerance;
  }

  // level k (k excitations) sits at -(gap/2)(n - 2k) with multiplicity C(n, k)
  report.multiplicities_binomial = report.levels.size() == n + 1;
  for (std::size_t k = 0; report.multiplicities_binomial && k <= n; ++k) {
    const double expected = -0.5 * gap * (static_cast<double>(n) - 2.0 * static_cast<double>(k));
    const auto& level = report.levels[k];
    report.multiplicities_binomial =
        std::abs(level.energy - expected) <= kSpectrumTolerance &&
        static_cast<double>(level.multiplicity) == binomial(n, k);
  }

  for (const auto& mu : all_excitations(n)) {
    const ComplexVector v = excited_state(g, mu).amplitudes();
    const double residual = (h * v - excitation_energy(mu, gap) * v).norm();
    report.max_eigenvector_residual = std::max(report.max_eigenvector_residual, residual);
  }
  return report;
}

}  // namespace tcsim
