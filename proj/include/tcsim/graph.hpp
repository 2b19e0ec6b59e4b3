#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tcsim/linalg.hpp"

namespace tcsim {

/// Undirected edge with a < b.
struct Edge {
  QubitIndex a;
  QubitIndex b;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph on vertices 0..n-1. Edges are stored sorted and
/// deduplication is rejected rather than silently applied.
class Graph {
 public:
  Graph(std::size_t n_vertices, std::vector<std::pair<QubitIndex, QubitIndex>> edges);

  std::size_t n_vertices() const { return n_vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<QubitIndex> neighbors(QubitIndex v) const;

  /// Text form "n; i-j,i-j,...", e.g. "3; 0-1,1-2". An edgeless graph is "3;".
  std::string to_string() const;
  static Graph parse(std::string_view text);

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_vertices_;
  std::vector<Edge> edges_;
};

/// Path 0-1-...-(n-1). Requires n >= 2.
Graph linear_graph(std::size_t n);

/// mu_i in {0, 1}: mu_i = 1 places a Z excitation on vertex i.
using ExcitationVector = std::vector<std::uint8_t>;

/// prod_{edges} CZ_ij |+>^{n}
PureState build_graph_state(const Graph& g);

/// (prod_i Z_i^{mu_i}) |G>
PureState excited_state(const Graph& g, const ExcitationVector& mu);

/// Energy -(gap/2) sum_i (-1)^{mu_i} of excited_state(g, mu).
double excitation_energy(const ExcitationVector& mu, double gap);

/// All 2^n excitation vectors in binary-counting order (vertex 0 most significant).
std::vector<ExcitationVector> all_excitations(std::size_t n);

/// Stabilizer X_i prod_{j in N(i)} Z_j for every vertex, each 2^n x 2^n.
std::vector<ComplexMatrix> stabilizer_terms(const Graph& g);

/// H = -(gap/2) sum_i X_i prod_{j in N(i)} Z_j
ComplexMatrix parent_hamiltonian(const Graph& g, double gap);

struct SpectrumLevel {
  double energy;
  std::size_t multiplicity;
};

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending
  std::vector<SpectrumLevel> levels;
  bool ground_unique = false;
  double gap = 0.0;  // between the two lowest distinct levels
  bool gap_matches = false;
  bool multiplicities_binomial = false;
  /// max over mu of || H|G^mu> - E_mu |G^mu> ||
  double max_eigenvector_residual = 0.0;
};

inline constexpr std::size_t kMaxDenseQubits = 10;

/// Dense eigensolve of the parent Hamiltonian with consistency checks against
/// the closed-form excitation spectrum. Requires n <= kMaxDenseQubits.
SpectrumReport verify_spectrum(const Graph& g, double gap);

}  // namespace tcsim
