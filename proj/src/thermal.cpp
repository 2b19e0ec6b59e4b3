#include "tcsim/thermal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace tcsim {

namespace {

constexpr double kWeightTolerance = 1e-12;

void check_strength(double p, const char* who) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("{}: p = {} outside [0, 1]", who, p));
  }
}

}  // namespace

Channel::Channel(std::vector<WeightedUnitary> branches, QubitIndex target)
    : branches_(std::move(branches)), target_(target) {
  if (branches_.empty()) throw std::invalid_argument("channel: no branches");
  double total = 0.0;
  for (const auto& b : branches_) {
    if (!(b.weight >= 0.0 && b.weight <= 1.0)) {
      throw std::invalid_argument(fmt::format("channel: weight {} outside [0, 1]", b.weight));
    }
    if (b.unitary.rows() != 2 || b.unitary.cols() != 2) {
      throw std::invalid_argument("channel: unitaries must be 2x2");
    }
    total += b.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw std::invalid_argument(fmt::format("channel: weights sum to {:.17g}", total));
  }
}

ComplexMatrix Channel::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& b : branches_) {
    if (b.weight == 0.0) continue;
    out += b.weight * conjugate_local(rho, b.unitary, target_);
  }
  return out;
}

double p_from_temperature(double t_over_delta) {
  if (!(t_over_delta >= 0.0)) {
    throw std::invalid_argument(
        fmt::format("p_from_temperature: T/Delta = {} must be non-negative", t_over_delta));
  }
  if (t_over_delta == 0.0) return 0.0;
  if (std::isinf(t_over_delta)) return 1.0;
  // 2 / (1 + e^x) written to stay finite when x = Delta/T is large
  const double x = 1.0 / t_over_delta;
  const double e = std::exp(-x);
  return 2.0 * e / (1.0 + e);
}

double temperature_from_p(double p) {
  check_strength(p, "temperature_from_p");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (std::log(2.0 - p) - std::log(p));
}

TemperaturePoint TemperaturePoint::from_p(double p) {
  return {p, temperature_from_p(p)};
}

TemperaturePoint TemperaturePoint::from_temperature(double t_over_delta) {
  return {p_from_temperature(t_over_delta), t_over_delta};
}

DensityMatrix gibbs_state(const Graph& g, double gap, double t_over_delta) {
  if (!(t_over_delta >= 0.0)) {
    throw std::invalid_argument("gibbs_state: temperature must be non-negative");
  }
  if (g.n_vertices() > kMaxDenseQubits) {
    throw std::invalid_argument("gibbs_state: graph exceeds dense qubit limit");
  }
  if (t_over_delta == 0.0) return DensityMatrix::from_pure(build_graph_state(g));
  if (std::isinf(t_over_delta)) return DensityMatrix::maximally_mixed(g.n_vertices());

  const ComplexMatrix h = parent_hamiltonian(g, gap);
  // shift by the ground energy so the exponent is never positive
  const double ground = -0.5 * gap * static_cast<double>(g.n_vertices());
  const ComplexMatrix shifted = h - ground * ComplexMatrix::Identity(h.rows(), h.cols());
  const ComplexMatrix boltzmann = hermitian_expm(shifted, -1.0 / (t_over_delta * gap));
  return DensityMatrix(boltzmann / boltzmann.trace().real());
}

Channel dephasing_channel(double p, QubitIndex qubit) {
  check_strength(p, "dephasing_channel");
  return Channel({{1.0 - 0.5 * p, pauli::identity()}, {0.5 * p, pauli::z()}}, qubit);
}

Channel phase_gate_channel(double p, double alpha, QubitIndex qubit) {
  check_strength(p, "phase_gate_channel");
  return Channel({{1.0 - 0.5 * p, pauli::identity()}, {0.5 * p, pauli::phase(alpha)}}, qubit);
}

DensityMatrix apply_channels(const DensityMatrix& state, std::span<const Channel> channels) {
  ComplexMatrix rho = state.matrix();
  for (const auto& ch : channels) {
    if (ch.target() >= state.num_qubits()) {
      throw std::out_of_range(fmt::format("apply_channels: channel targets qubit {} of {}",
                                          ch.target(), state.num_qubits()));
    }
    rho = ch.apply(rho);
  }
  return DensityMatrix(rho);
}

DensityMatrix thermal_state_model(const Graph& g, double p, double alpha) {
  const std::vector<double> alphas(g.n_vertices(), alpha);
  return thermal_state_model(g, p, alphas);
}

DensityMatrix thermal_state_model(const Graph& g, double p, std::span<const double> alphas) {
  if (alphas.size() != g.n_vertices()) {
    throw std::invalid_argument("thermal_state_model: need one phase angle per qubit");
  }
  std::vector<Channel> channels;
  channels.reserve(alphas.size());
  for (QubitIndex q = 0; q < alphas.size(); ++q) {
    channels.push_back(phase_gate_channel(p, alphas[q], q));
  }
  return apply_channels(DensityMatrix::from_pure(build_graph_state(g)), channels);
}

}  // namespace tcsim
