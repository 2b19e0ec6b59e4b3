#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "tcsim/thermal.hpp"

using namespace tcsim;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(Thermal, TemperatureMapEndpoints) {
  EXPECT_EQ(p_from_temperature(0.0), 0.0);
  EXPECT_EQ(p_from_temperature(kInf), 1.0);
  EXPECT_EQ(temperature_from_p(0.0), 0.0);
  EXPECT_EQ(temperature_from_p(1.0), kInf);
  EXPECT_THROW(p_from_temperature(-0.1), std::invalid_argument);
  EXPECT_THROW(p_from_temperature(std::nan("")), std::invalid_argument);
  EXPECT_THROW(temperature_from_p(1.5), std::invalid_argument);
}

TEST(Thermal, TemperatureMapValues) {
  // p = 2 / (1 + e^{1/t})
  EXPECT_NEAR(p_from_temperature(1.0), 2.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(p_from_temperature(1e-3), 2.0 * std::exp(-1000.0), 1e-300);
  EXPECT_NEAR(p_from_temperature(1e6), 1.0, 1e-6);
}

TEST(Thermal, TemperatureMapRoundTrip) {
  for (int k = 1; k < 200; ++k) {
    const double p = k / 200.0;
    EXPECT_NEAR(p_from_temperature(temperature_from_p(p)), p, 1e-13);
  }
  for (double t : {0.05, 0.3, 1.0, 1.8, 3.0, 50.0}) {
    EXPECT_NEAR(temperature_from_p(p_from_temperature(t)), t, 1e-10 * t);
  }
  const auto pt = TemperaturePoint::from_temperature(1.5);
  EXPECT_NEAR(TemperaturePoint::from_p(pt.p).t_over_delta, 1.5, 1e-12);
}

TEST(Thermal, ChannelValidation) {
  EXPECT_THROW(Channel({{0.5, pauli::identity()}}, 0), std::invalid_argument);
  EXPECT_THROW(Channel({{1.2, pauli::identity()}, {-0.2, pauli::z()}}, 0), std::invalid_argument);
  EXPECT_THROW(Channel({{1.0, ComplexMatrix::Identity(4, 4)}}, 0), std::invalid_argument);
  EXPECT_THROW(dephasing_channel(1.1, 0), std::invalid_argument);
  const DensityMatrix rho = DensityMatrix::maximally_mixed(2);
  const Channel far = dephasing_channel(0.5, 2);
  EXPECT_THROW(apply_channels(rho, std::span(&far, 1)), std::out_of_range);
}

TEST(Thermal, DephasingShrinksCoherence) {
  const DensityMatrix plus = DensityMatrix::from_pure(PureState::normalized(ComplexVector::Ones(2)));
  for (double p : {0.0, 0.3, 1.0}) {
    const Channel c = dephasing_channel(p, 0);
    const DensityMatrix out = apply_channels(plus, std::span(&c, 1));
    EXPECT_NEAR(out.matrix()(0, 1).real(), 0.5 * (1.0 - p), 1e-15);
  }
}

TEST(Thermal, PhaseGateOffDiagonalModulus) {
  // coherence scaled by 1 - (p/2)(1 - e^{i alpha})
  const DensityMatrix plus = DensityMatrix::from_pure(PureState::normalized(ComplexVector::Ones(2)));
  const double alpha = 0.84 * std::numbers::pi;
  const double p = 1.0;
  const Channel c = phase_gate_channel(p, alpha, 0);
  const DensityMatrix out = apply_channels(plus, std::span(&c, 1));
  const double expected = 0.5 * std::abs(1.0 - 0.5 * p * (1.0 - std::exp(Complex(0.0, alpha))));
  EXPECT_NEAR(std::abs(out.matrix()(0, 1)), expected, 1e-15);
  EXPECT_GT(expected, 0.0);  // an imperfect Z never fully dephases
}

TEST(Thermal, GibbsEndpoints) {
  const Graph g = linear_graph(3);
  const DensityMatrix cold = gibbs_state(g, 1.0, 0.0);
  EXPECT_LT(max_abs_diff(cold.matrix(), build_graph_state(g).projector()), 1e-15);
  const DensityMatrix hot = gibbs_state(g, 1.0, kInf);
  EXPECT_LT(max_abs_diff(hot.matrix(), ComplexMatrix::Identity(8, 8) / 8.0), 1e-15);
}

TEST(Thermal, GibbsMatchesTaylorOracle) {
  for (double t : {0.2, 1.0, 2.5}) {
    const DensityMatrix rho = gibbs_state(linear_graph(3), 1.0, t);
    EXPECT_LT(max_abs_diff(rho.matrix(), oracle::chain_gibbs(3, t)), 1e-12) << t;
  }
}

TEST(Thermal, GibbsIsLowTemperatureStable) {
  const DensityMatrix rho = gibbs_state(linear_graph(4), 1.0, 1e-3);
  EXPECT_NEAR(rho.purity(), 1.0, 1e-12);
}

TEST(Thermal, GibbsEqualsDephasedGraphState) {
  for (std::size_t n = 2; n <= 4; ++n) {
    const Graph g = linear_graph(n);
    for (int k = 0; k <= 100; ++k) {
      const double p = k / 100.0;
      const DensityMatrix a = thermal_state_model(g, p, std::numbers::pi);
      const DensityMatrix b = gibbs_state(g, 1.0, temperature_from_p(p));
      EXPECT_LE(max_abs_diff(a.matrix(), b.matrix()), 1e-10) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Thermal, GapOnlyRescalesTemperature) {
  const Graph g = linear_graph(3);
  EXPECT_LT(max_abs_diff(gibbs_state(g, 2.0, 0.7).matrix(), gibbs_state(g, 1.0, 0.7).matrix()),
            1e-13);
}

TEST(Thermal, ChannelsCommuteAcrossQubits) {
  const Graph g = linear_graph(3);
  const DensityMatrix rho = DensityMatrix::from_pure(build_graph_state(g));
  const std::vector<Channel> forward = {phase_gate_channel(0.4, 1.0, 0),
                                        phase_gate_channel(0.4, 1.0, 1),
                                        phase_gate_channel(0.4, 1.0, 2)};
  const std::vector<Channel> backward(forward.rbegin(), forward.rend());
  EXPECT_LT(max_abs_diff(apply_channels(rho, forward).matrix(),
                         apply_channels(rho, backward).matrix()),
            1e-15);
  const double alphas[] = {1.0, 1.0, 1.0};
  EXPECT_LT(max_abs_diff(apply_channels(rho, forward).matrix(),
                         thermal_state_model(g, 0.4, alphas).matrix()),
            1e-15);
  EXPECT_THROW(thermal_state_model(g, 0.4, std::span(alphas, 2)), std::invalid_argument);
}

TEST(Thermal, DephasingRouteMatchesExplicitMixture) {
  // sum over Z patterns with weights (p/2)^k (1 - p/2)^(n-k)
  const std::size_t n = 3;
  const double p = 0.37;
  const ComplexVector g = oracle::graph_state(n, oracle::chain_edges(n));
  ComplexMatrix ref = ComplexMatrix::Zero(8, 8);
  for (int mask = 0; mask < 8; ++mask) {
    ComplexMatrix z = ComplexMatrix::Identity(8, 8);
    double w = 1.0;
    for (std::size_t q = 0; q < n; ++q) {
      const bool flip = (mask >> q) & 1;
      if (flip) z = oracle::on_qubit(oracle::pauli('Z'), q, n) * z;
      w *= flip ? p / 2.0 : 1.0 - p / 2.0;
    }
    const ComplexVector v = z * g;
    ref += w * v * v.adjoint();
  }
  EXPECT_LT(max_abs_diff(thermal_state_model(linear_graph(3), p, std::numbers::pi).matrix(), ref),
            1e-15);
}
