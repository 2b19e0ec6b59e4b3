#pragma once

#include <span>
#include <vector>

#include "tcsim/graph.hpp"
#include "tcsim/linalg.hpp"

namespace tcsim {

/// One branch of a mixed-unitary map: rho -> weight * U rho U^dagger.
struct WeightedUnitary {
  double weight;
  ComplexMatrix unitary;  // 2x2
};

/// Mixed-unitary single-qubit channel acting on `target`.
/// Weights lie in [0, 1] and sum to 1 within 1e-12.
class Channel {
 public:
  Channel(std::vector<WeightedUnitary> branches, QubitIndex target);

  const std::vector<WeightedUnitary>& branches() const { return branches_; }
  QubitIndex target() const { return target_; }

  ComplexMatrix apply(const ComplexMatrix& rho) const;

 private:
  std::vector<WeightedUnitary> branches_;
  QubitIndex target_;
};

/// Dephasing strength p = 2 / (1 + e^{1/t}) for t = T/Delta. t = 0 gives 0,
/// t = +inf gives 1. Throws on negative or NaN input.
double p_from_temperature(double t_over_delta);

/// Inverse of p_from_temperature: t = 1 / (ln(2 - p) - ln p). p = 0 gives 0,
/// p = 1 gives +inf.
double temperature_from_p(double p);

/// A dephasing strength together with its temperature.
struct TemperaturePoint {
  double p;
  double t_over_delta;

  static TemperaturePoint from_p(double p);
  static TemperaturePoint from_temperature(double t_over_delta);
};

/// e^{-H/T} / Tr e^{-H/T} for the parent Hamiltonian of `g` with T = t * gap.
/// t = 0 returns the ground-state projector and t = +inf the maximally mixed
/// state.
DensityMatrix gibbs_state(const Graph& g, double gap, double t_over_delta);

/// (1 - p/2) rho + (p/2) Z rho Z on `qubit`.
Channel dephasing_channel(double p, QubitIndex qubit);

/// (1 - p/2) rho + (p/2) F rho F^dagger with F = diag(1, e^{i alpha}).
Channel phase_gate_channel(double p, double alpha, QubitIndex qubit);

/// Applies the channels in order.
DensityMatrix apply_channels(const DensityMatrix& state, std::span<const Channel> channels);

/// Graph state followed by phase_gate_channel(p, alpha) on every qubit.
/// With alpha = pi this is the thermal state at temperature_from_p(p).
DensityMatrix thermal_state_model(const Graph& g, double p, double alpha);

/// Per-qubit phase angles; `alphas` must have one entry per vertex.
DensityMatrix thermal_state_model(const Graph& g, double p, std::span<const double> alphas);

}  // namespace tcsim
