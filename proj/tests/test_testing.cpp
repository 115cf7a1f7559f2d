#include "markovcov/testing.hpp"

#include <cmath>
#include <gtest/gtest.h>

#include "markovcov/rng.hpp"
#include "markovcov/stats.hpp"

using namespace markovcov;

namespace {

ObservationSet dense_from_matrix(const Eigen::MatrixXd& X, const Grid& grid) {
  ObservationSet obs;
  obs.regime = Regime::dense;
  obs.grid = grid;
  obs.curves.resize(static_cast<size_t>(X.rows()));
  for (int i = 0; i < X.rows(); ++i) {
    auto& c = obs.curves[static_cast<size_t>(i)];
    c.times = grid.points();
    c.values.assign(X.row(i).begin(), X.row(i).end());
  }
  return obs;
}

std::vector<double> gaussian_vector(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = gauss(rng);
  return v;
}

}  // namespace

TEST(FisherZ, ClosedForm) {
  EXPECT_DOUBLE_EQ(fisher_z(0.0), 0.0);
  EXPECT_NEAR(fisher_z(0.5), 0.5 * std::log(3.0), 1e-15);
  EXPECT_NEAR(fisher_z(-0.3), -fisher_z(0.3), 1e-15);
  EXPECT_THROW(fisher_z(1.0), std::invalid_argument);
  EXPECT_THROW(fisher_z(-1.0), std::invalid_argument);
}

TEST(PartialCorrelation, DegenerateWhenConditioningEqualsInput) {
  Rng rng(1);
  const auto xj = gaussian_vector(50, rng);
  const auto xp = gaussian_vector(50, rng);
  EXPECT_THROW(partial_correlation(xj, xp, xj), std::runtime_error);
}

TEST(PartialCorrelation, NearZeroForIndependentInputs) {
  Rng rng(2);
  const int n = 100000;
  const auto x1 = gaussian_vector(n, rng);
  const auto xp = gaussian_vector(n, rng);
  const auto xj = gaussian_vector(n, rng);
  EXPECT_LT(std::abs(partial_correlation(x1, xp, xj)), 0.02);
}

TEST(PartialCorrelation, BrownianTripleIsConditionallyUncorrelated) {
  // population conditional correlation of X(t1), X(tp) given an interior
  // X(tj) vanishes for Brownian motion
  const int n = 100000;
  const auto obs = sample_curves(BrownianMotion{}, DenseDesign{Grid({0.2, 0.5, 0.9})},
                                 n, 0.0, 77);
  const Eigen::MatrixXd X = obs.dense_matrix();
  std::vector<double> x1(X.col(0).begin(), X.col(0).end());
  std::vector<double> xj(X.col(1).begin(), X.col(1).end());
  std::vector<double> xp(X.col(2).begin(), X.col(2).end());
  EXPECT_LT(std::abs(partial_correlation(x1, xp, xj)), 0.02);
}

TEST(MarkovTest, NearDuplicatedEndpointRejects) {
  const int n = 100, p = 5;
  const Grid grid = Grid::regular_midpoints(p);
  Rng rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = gauss(rng);
  X.col(p - 1) = X.col(0);
  for (int i = 0; i < n; ++i) X(i, p - 1) += 1e-3 * gauss(rng);
  const auto report =
      markov_test(dense_from_matrix(X, grid), 0.001, GaussianMC{2000}, 9);
  EXPECT_TRUE(report.reject);
  EXPECT_GT(report.partial_corr.minCoeff(), 0.99);

  // exact duplication degenerates the correlation and is reported as such
  Eigen::MatrixXd Y = X;
  Y.col(p - 1) = Y.col(0);
  EXPECT_THROW(markov_test(dense_from_matrix(Y, grid), 0.05, GaussianMC{500}, 9),
               std::runtime_error);
}

TEST(MarkovTest, ReportShapeAndConsistency) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(12)}, 60, 0.0, 8);
  const auto report = markov_test(obs, 0.05, GaussianMC{1000}, 4);
  ASSERT_EQ(report.indices.size(), 10u);
  EXPECT_EQ(report.indices.front(), 2);
  EXPECT_EQ(report.indices.back(), 11);
  for (long i = 0; i < report.partial_corr.size(); ++i)
    EXPECT_LT(std::abs(report.partial_corr(i)), 1.0);
  EXPECT_DOUBLE_EQ(report.statistic, report.scaled_abs_z.maxCoeff());
  EXPECT_EQ(report.reject, report.statistic > report.critical_value);
}

TEST(MarkovTest, ScaleInvarianceExact) {
  const Grid grid = Grid::regular_midpoints(8);
  const auto obs = sample_curves(OrnsteinUhlenbeck{}, DenseDesign{grid}, 80, 0.0, 13);
  Eigen::MatrixXd X = obs.dense_matrix();
  const auto a = markov_test(dense_from_matrix(X, grid), 0.05, GaussianMC{1000}, 21);
  const auto b =
      markov_test(dense_from_matrix(4.0 * X, grid), 0.05, GaussianMC{1000}, 21);
  // powers of two keep every floating-point operation exact
  for (long i = 0; i < a.z.size(); ++i) {
    EXPECT_EQ(a.partial_corr(i), b.partial_corr(i));
    EXPECT_EQ(a.z(i), b.z(i));
  }
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.reject, b.reject);
}

TEST(MarkovTest, CurveOrderInvariance) {
  const Grid grid = Grid::regular_midpoints(8);
  const auto obs = sample_curves(OrnsteinUhlenbeck{}, DenseDesign{grid}, 60, 0.0, 14);
  Eigen::MatrixXd X = obs.dense_matrix();
  Eigen::MatrixXd Y = X.colwise().reverse();  // reverse curve order
  const auto a = markov_test(dense_from_matrix(X, grid), 0.05, Bonferroni{}, 0);
  const auto b = markov_test(dense_from_matrix(Y, grid), 0.05, Bonferroni{}, 0);
  for (long i = 0; i < a.z.size(); ++i)
    EXPECT_NEAR(a.z(i), b.z(i), 1e-12 * std::max(1.0, std::abs(a.z(i))));
  EXPECT_NEAR(a.statistic, b.statistic, 1e-12);
}

TEST(MarkovTest, CalibratedCriticalValueDominatesSingleTest) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(20)}, 500, 0.0, 15);
  const auto report = markov_test(obs, 0.05, GaussianMC{10000}, 2);
  EXPECT_GE(report.critical_value, normal_quantile(1.0 - 0.05 / 2.0));
}

TEST(MarkovTest, BonferroniReport) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(10)}, 100, 0.0, 16);
  const auto report = markov_test(obs, 0.05, Bonferroni{}, 0);
  EXPECT_EQ(report.calibration, "bonferroni");
  const double q = normal_quantile(1.0 - 0.05 / (2.0 * 8));
  EXPECT_NEAR(report.critical_value, q * std::sqrt(100.0 / 96.0), 1e-12);
  EXPECT_GE(report.p_value, 0.0);
  EXPECT_LE(report.p_value, 1.0);
}

TEST(MarkovTest, RejectsBadInputs) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(10)}, 50, 0.0, 17);
  EXPECT_THROW(markov_test(obs, 1.5, Bonferroni{}, 0), std::invalid_argument);
  const auto irregular = sample_curves(BrownianMotion{}, IrregularDesign{4}, 50, 0.0, 1);
  EXPECT_THROW(markov_test(irregular, 0.05, Bonferroni{}, 0), std::invalid_argument);
  const auto tiny = sample_curves(BrownianMotion{},
                                  DenseDesign{Grid::regular_midpoints(10)}, 5, 0.0, 1);
  EXPECT_THROW(markov_test(tiny, 0.05, Bonferroni{}, 0), std::invalid_argument);
}

TEST(FisherScreening, NullZScoresAreApproximatelyStandardNormal) {
  // under Brownian truth, each sqrt(n-4) z_j across replicates should be close
  // to N(0,1) in Kolmogorov distance
  const int p = 20, n = 500, reps = 5000;
  const Grid grid = Grid::regular_midpoints(p);
  const KernelMatrix K = kernel_matrix(BrownianMotion{}, grid, Exec::serial);
  const Eigen::MatrixXd L = psd_factor(K.values);
  std::vector<std::vector<double>> samples(static_cast<size_t>(p - 2));
  for (auto& s : samples) s.resize(reps);
  parallel_for(reps, Exec::parallel, [&](std::int64_t rep) {
    Rng rng = make_rng(321, static_cast<std::uint64_t>(rep));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd z(p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) z(j) = gauss(rng);
      X.row(i) = (L * z).transpose();
    }
    std::vector<double> x1(X.col(0).begin(), X.col(0).end());
    std::vector<double> xp(X.col(p - 1).begin(), X.col(p - 1).end());
    for (int j = 1; j + 1 < p; ++j) {
      std::vector<double> xj(X.col(j).begin(), X.col(j).end());
      const double rho = partial_correlation(x1, xp, xj);
      samples[static_cast<size_t>(j - 1)][static_cast<size_t>(rep)] =
          std::sqrt(n - 4.0) * fisher_z(rho);
    }
  });
  for (auto& s : samples)
    EXPECT_LT(kolmogorov_distance_to_normal(std::move(s)), 0.05);
}

TEST(PowerCurve, SizeNearLevelAndDeterministic) {
  const std::vector<double> hs{0.0};
  const auto rows =
      power_curve(hs, 10, 200, 0.05, GaussianMC{2000}, 200, 55, Exec::parallel, 100);
  ASSERT_EQ(rows.size(), 1u);
  // binomial tolerance around the level
  EXPECT_NEAR(rows[0].power, 0.05, 3.0 * std::sqrt(0.05 * 0.95 / 200.0) + 0.02);
  const auto again =
      power_curve(hs, 10, 200, 0.05, GaussianMC{2000}, 200, 55, Exec::parallel, 100);
  EXPECT_EQ(rows[0].power, again[0].power);
}

TEST(PowerCurve, StrongAlternativeIsDetected) {
  const auto rows =
      power_curve({0.5}, 20, 500, 0.05, GaussianMC{2000}, 60, 18, Exec::parallel, 100);
  EXPECT_GE(rows[0].power, 0.9);
}

TEST(RocCurve, NullEqualsAlternativeStaysNearDiagonal) {
  const auto roc = roc_curve(BrownianMotion{}, BrownianMotion{}, 10, 200, 200, 23);
  double max_gap = 0.0;
  for (const auto& pt : roc) max_gap = std::max(max_gap, std::abs(pt.tpr - pt.fpr));
  EXPECT_LT(max_gap, 0.2);
  EXPECT_NEAR(roc_auc(roc), 0.5, 0.12);
}

TEST(RocCurve, StrongAlternativeSeparates) {
  const auto roc =
      roc_curve(BrownianMotion{}, KernelEmbeddedBM{0.5, 100}, 20, 500, 120, 29);
  EXPECT_GT(roc_auc(roc), 0.95);
}

TEST(RocCurve, WellFormed) {
  const auto roc = roc_curve(BrownianMotion{}, KernelEmbeddedBM{0.2, 100}, 10, 100, 150, 31);
  EXPECT_DOUBLE_EQ(roc.front().fpr, 0.0);
  EXPECT_DOUBLE_EQ(roc.front().tpr, 0.0);
  EXPECT_DOUBLE_EQ(roc.back().fpr, 1.0);
  EXPECT_DOUBLE_EQ(roc.back().tpr, 1.0);
  for (size_t i = 1; i < roc.size(); ++i) {
    EXPECT_GE(roc[i].fpr, roc[i - 1].fpr);
    EXPECT_GE(roc[i].tpr, roc[i - 1].tpr);
    EXPECT_GE(roc[i].fpr, 0.0);
    EXPECT_LE(roc[i].fpr, 1.0);
    EXPECT_GE(roc[i].tpr, 0.0);
    EXPECT_LE(roc[i].tpr, 1.0);
  }
}
