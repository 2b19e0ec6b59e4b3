#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tcsim/entanglement.hpp"
#include "tcsim/thermal.hpp"
#include "tcsim/tomography.hpp"

using namespace tcsim;

namespace {

void expect_valid_density(const ComplexMatrix& m) {
  EXPECT_TRUE(is_hermitian(m, 1e-12));
  EXPECT_NEAR(m.trace().real(), 1.0, 1e-10);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
}

}  // namespace

TEST(Tomography, SettingFamiliesHaveExpectedSize) {
  EXPECT_EQ(standard_settings(3).size(), 64u);
  EXPECT_EQ(standard_settings(3, SettingsFamily::kMutuallyUnbiased).size(), 216u);
  EXPECT_EQ(standard_settings(1)[2].label(), "x+");
  EXPECT_EQ(standard_settings(2)[1].label(), "z0z1");
}

TEST(Tomography, LabelsRoundTrip) {
  for (const auto& s : standard_settings(2, SettingsFamily::kMutuallyUnbiased)) {
    EXPECT_EQ(ProjectorSetting::parse(s.label()), s);
  }
  EXPECT_THROW(ProjectorSetting::parse("z0x"), std::invalid_argument);
  EXPECT_THROW(ProjectorSetting::parse("q0"), std::invalid_argument);
}

TEST(Tomography, ProjectorStatesAreMutuallyUnbiased) {
  const ProjectorLabel labels[] = {ProjectorLabel::kZ0, ProjectorLabel::kXPlus, ProjectorLabel::kYPlus};
  for (auto a : labels) {
    for (auto b : labels) {
      const double overlap = std::norm(projector_state(a).inner(projector_state(b)));
      EXPECT_NEAR(overlap, a == b ? 1.0 : 0.5, 1e-15);
    }
  }
  EXPECT_NEAR(std::norm(projector_state(ProjectorLabel::kYPlus)
                            .inner(projector_state(ProjectorLabel::kYMinus))),
              0.0, 1e-15);
}

TEST(Tomography, MinimalSettingsAreInformationallyComplete) {
  const auto settings = standard_settings(3);
  Eigen::MatrixXcd gram(64, 64);
  for (Eigen::Index s = 0; s < 64; ++s) {
    ComplexMatrix pi = ComplexMatrix::Identity(1, 1);
    for (auto l : settings[static_cast<std::size_t>(s)].per_qubit) {
      const ComplexVector v = projector_state(l).amplitudes();
      pi = oracle::kron(pi, v * v.adjoint());
    }
    gram.row(s) = Eigen::Map<const ComplexVector>(pi.data(), 64).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
  svd.setThreshold(1e-10);
  EXPECT_EQ(svd.rank(), 64);
}

TEST(Tomography, CountRecordTextRoundTrip) {
  const DensityMatrix rho = DensityMatrix::from_pure(build_graph_state(linear_graph(3)));
  const CountRecord rec = simulate_counts(rho, standard_settings(3), 1234.5, 77);
  const std::string text = rec.to_text();
  EXPECT_EQ(text.substr(0, 14), "# flux: 1234.5");
  const CountRecord back = CountRecord::from_text(text);
  EXPECT_EQ(back.counts, rec.counts);
  EXPECT_EQ(back.settings, rec.settings);
  EXPECT_EQ(back.flux, rec.flux);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.to_text(), text);
}

TEST(Tomography, CountRecordRejectsMalformedText) {
  EXPECT_THROW(CountRecord::from_text("setting_label,count\nz0,3\n"), std::invalid_argument);
  EXPECT_THROW(CountRecord::from_text("# flux: 1\nlabel,count\nz0,3\n"), std::invalid_argument);
  EXPECT_THROW(CountRecord::from_text("# flux: 1\nsetting_label,count\nz0,-3\n"),
               std::invalid_argument);
  EXPECT_THROW(CountRecord::from_text("# flux: 0\nsetting_label,count\nz0,3\n"),
               std::invalid_argument);
  EXPECT_THROW(CountRecord::from_text("# flux: 1\nsetting_label,count\nz0,3\nz0z1,2\n"),
               std::invalid_argument);
}

TEST(Tomography, SimulationIsSeeded) {
  const DensityMatrix rho = thermal_state_model(linear_graph(3), 0.3, std::numbers::pi);
  const auto a = simulate_counts(rho, standard_settings(3), 1000, 5);
  const auto b = simulate_counts(rho, standard_settings(3), 1000, 5);
  const auto c = simulate_counts(rho, standard_settings(3), 1000, 6);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_NE(a.counts, c.counts);
}

TEST(Tomography, PoissonMeanMatchesExpectedCounts) {
  const DensityMatrix rho = thermal_state_model(linear_graph(3), 0.5, 0.84 * std::numbers::pi);
  const std::vector<ProjectorSetting> settings = {ProjectorSetting::parse("z0x+y+"),
                                                  ProjectorSetting::parse("x+x+x+")};
  const auto expected = expected_counts(rho, settings, 50.0);
  std::vector<double> mean(2, 0.0);
  constexpr int kSeeds = 10000;
  for (int s = 0; s < kSeeds; ++s) {
    const auto rec = simulate_counts(rho, settings, 50.0, static_cast<std::uint64_t>(s));
    for (std::size_t k = 0; k < 2; ++k) mean[k] += static_cast<double>(rec.counts[k]) / kSeeds;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    // five standard errors of a Poisson mean
    EXPECT_NEAR(mean[k], expected[k], 5.0 * std::sqrt(expected[k] / kSeeds));
  }
}

TEST(Tomography, ZeroProbabilityGivesZeroCounts) {
  const DensityMatrix zero = DensityMatrix::from_pure(PureState::basis_state(1, 0));
  const auto rec = simulate_counts(zero, standard_settings(1), 1e6, 1);
  EXPECT_EQ(rec.counts[1], 0u);  // z1
}

TEST(Tomography, LogLikelihoodFormula) {
  const auto settings = standard_settings(1);
  const std::vector<double> counts = {3, 0, 2, 1};
  const DensityMatrix rho = DensityMatrix::maximally_mixed(1);
  double ref = 0.0;
  for (double n : counts) ref += (n > 0 ? n * std::log(10.0 * 0.5) : 0.0) - 10.0 * 0.5;
  EXPECT_NEAR(log_likelihood(rho.matrix(), settings, counts, 10.0), ref, 1e-12);
  const ComplexMatrix one = PureState::basis_state(1, 1).projector();
  EXPECT_EQ(log_likelihood(one, settings, counts, 10.0), -std::numeric_limits<double>::infinity());
}

TEST(Tomography, LinearInversionExactOnMeans) {
  std::mt19937_64 rng(31);
  const auto settings = standard_settings(3);
  for (int trial = 0; trial < 5; ++trial) {
    const DensityMatrix rho(oracle::random_density(3, rng));
    const auto means = expected_counts(rho, settings, 1e4);
    const ReconstructionResult r = linear_inversion(settings, means, 1e4);
    EXPECT_LT(max_abs_diff(r.rho.matrix(), rho.matrix()), 1e-10);
    ASSERT_TRUE(r.unconstrained.has_value());
    EXPECT_LT(max_abs_diff(*r.unconstrained, rho.matrix()), 1e-10);
    EXPECT_EQ(r.method, ReconstructionMethod::kLinear);
  }
}

TEST(Tomography, LinearInversionNeedsCompleteSettings) {
  auto settings = standard_settings(2);
  settings.pop_back();
  const std::vector<double> counts(settings.size(), 10.0);
  EXPECT_THROW(linear_inversion(settings, counts, 100.0), ReconstructionError);
}

TEST(Tomography, ZeroCountsGiveMaximallyMixed) {
  const auto settings = standard_settings(2);
  const std::vector<double> counts(settings.size(), 0.0);
  const ComplexMatrix mixed = ComplexMatrix::Identity(4, 4) / 4.0;
  EXPECT_LT(max_abs_diff(linear_inversion(settings, counts, 10.0).rho.matrix(), mixed), 1e-15);
  EXPECT_LT(max_abs_diff(mle_reconstruct(settings, counts, 10.0).rho.matrix(), mixed), 1e-15);
}

TEST(Tomography, ProjectionOntoStates) {
  std::mt19937_64 rng(37);
  const ComplexMatrix rho = oracle::random_density(2, rng);
  EXPECT_LT(max_abs_diff(project_to_density_matrix(rho), rho), 1e-14);
  ComplexMatrix bad(2, 2);
  bad << 1.3, 0.2, 0.2, -0.3;
  const ComplexMatrix fixed = project_to_density_matrix(bad);
  expect_valid_density(fixed);
  EXPECT_NEAR(fixed(1, 1).real(), 0.0, 0.1);
}

TEST(Tomography, MleRecoversStateFromMeans) {
  const DensityMatrix rho = thermal_state_model(linear_graph(3), 0.4, 0.84 * std::numbers::pi);
  const auto settings = standard_settings(3);
  const auto means = expected_counts(rho, settings, 1e5);
  const ReconstructionResult r = mle_reconstruct(settings, means, 1e5);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(fidelity(r.rho, rho), 1.0 - 1e-8);
}

TEST(Tomography, MleBeatsTrueStateAndLinearInversion) {
  const DensityMatrix rho = thermal_state_model(linear_graph(3), 0.6, 0.84 * std::numbers::pi);
  const auto settings = standard_settings(3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CountRecord rec = simulate_counts(rho, settings, 800, seed);
    const auto counts = rec.counts_as_double();
    const ReconstructionResult mle = mle_reconstruct(rec);
    const ReconstructionResult li = linear_inversion(rec);
    expect_valid_density(mle.rho.matrix());
    EXPECT_TRUE(mle.converged);
    EXPECT_GE(mle.log_likelihood, li.log_likelihood - 1e-9);
    EXPECT_GE(mle.log_likelihood, log_likelihood(rho.matrix(), settings, counts, 800) - 1e-9);
    EXPECT_NEAR(mle.log_likelihood, log_likelihood(mle.rho.matrix(), settings, counts, 800), 1e-6);
  }
}

TEST(Tomography, GraphStateRoundTripAtHighFlux) {
  const DensityMatrix rho = DensityMatrix::from_pure(build_graph_state(linear_graph(3)));
  const CountRecord rec = simulate_counts(rho, standard_settings(3), 1e6, 7);
  // clipped linear inversion sits near 0.998 here over many seeds; MLE clears 0.999
  EXPECT_GE(fidelity(rho, linear_inversion(rec).rho), 0.997);
  EXPECT_GE(fidelity(rho, mle_reconstruct(rec).rho), 0.999);
}

TEST(Tomography, MleInfidelityFallsAsOneOverFlux) {
  // mean over random full-rank states; a 16x flux step should cut it about 16x
  auto mean_infidelity = [](double flux) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed);
      const DensityMatrix rho(oracle::random_density(3, rng));
      const CountRecord rec = simulate_counts(rho, standard_settings(3), flux, seed);
      sum += 1.0 - fidelity(rho, mle_reconstruct(rec).rho);
    }
    return sum / 20.0;
  };
  const double ratio = mean_infidelity(1e5) / mean_infidelity(1.6e6);
  EXPECT_GT(ratio, 8.0);
  EXPECT_LT(ratio, 32.0);
}

TEST(Tomography, MleOutputValidOnSparseCounts) {
  std::mt19937_64 rng(41);
  const auto settings = standard_settings(3);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho(oracle::random_density(3, rng, 1 + trial % 3));
    const CountRecord rec = simulate_counts(rho, settings, 20.0, static_cast<std::uint64_t>(trial));
    const ReconstructionResult r = mle_reconstruct(rec);
    expect_valid_density(r.rho.matrix());
    EXPECT_TRUE(std::isfinite(r.log_likelihood));
  }
}

TEST(Tomography, MleIterationCapReported) {
  const DensityMatrix rho = thermal_state_model(linear_graph(3), 0.5, std::numbers::pi);
  const CountRecord rec = simulate_counts(rho, standard_settings(3), 500, 3);
  const ReconstructionResult r = mle_reconstruct(rec, {1, 1e-300});
  EXPECT_EQ(r.iterations, 1);
  EXPECT_FALSE(r.converged);
  expect_valid_density(r.rho.matrix());
}

TEST(Tomography, MonteCarloDeterministicAndPositive) {
  const DensityMatrix rho = thermal_state_model(linear_graph(3), 0.3, std::numbers::pi);
  const CountRecord rec = simulate_counts(rho, standard_settings(3), 3000, 9);
  const StateStatistic neg = [](const DensityMatrix& r) {
    return negativity(r, Bipartition({1}, 3));
  };
  const auto a = monte_carlo_statistic(rec, neg, 12, 100);
  const auto b = monte_carlo_statistic(rec, neg, 12, 100);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stddev, b.stddev);
  EXPECT_GT(a.stddev, 0.0);
  EXPECT_THROW(monte_carlo_statistic(rec, neg, 1, 100), std::invalid_argument);
}
