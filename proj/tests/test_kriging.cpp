#include "markovcov/kriging.hpp"

#include <cmath>
#include <gtest/gtest.h>

#include "markovcov/stats.hpp"

using namespace markovcov;

namespace {

// Independent check: minimize the prediction variance over the affine set
// sum w = 1 by eliminating the constraint and solving the reduced problem.
Eigen::VectorXd constrained_qp_oracle(const Eigen::MatrixXd& K,
                                      const Eigen::VectorXd& k0) {
  const int p = static_cast<int>(K.rows());
  // w = e_1 + N v with N spanning {sum = 0}
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(p, p - 1);
  for (int j = 0; j < p - 1; ++j) {
    N(0, j) = -1.0;
    N(j + 1, j) = 1.0;
  }
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(p);
  w0(0) = 1.0;
  const Eigen::MatrixXd H = N.transpose() * K * N;
  const Eigen::VectorXd g = N.transpose() * (K * w0 - k0);
  const Eigen::VectorXd v = H.ldlt().solve(-g);
  return w0 + N * v;
}

}  // namespace

TEST(SolveKriging, UnitWeightAtNode) {
  const Grid nodes = Grid::regular_midpoints(8);
  for (int j : {0, 3, 7}) {
    const auto system = solve_kriging(BrownianMotion{}, nodes, nodes[j], 0.0);
    for (int k = 0; k < 8; ++k)
      EXPECT_NEAR(system.weights(k), k == j ? 1.0 : 0.0, 1e-8);
    Eigen::VectorXd values = Eigen::VectorXd::LinSpaced(8, -1.0, 2.5);
    EXPECT_NEAR(system.predict(values), values(j), 1e-8);
    EXPECT_NEAR(system.variance, 0.0, 1e-8);
  }
}

TEST(SolveKriging, MatchesConstrainedQpOracle) {
  const Grid nodes({0.25, 0.75});
  const double t0 = 0.5;
  const auto system = solve_kriging(BrownianMotion{}, nodes, t0, 0.0);
  Eigen::MatrixXd K(2, 2);
  K << 0.25, 0.25, 0.25, 0.75;
  Eigen::VectorXd k0(2);
  k0 << 0.25, 0.5;
  const Eigen::VectorXd oracle = constrained_qp_oracle(K, k0);
  EXPECT_NEAR(system.weights(0), oracle(0), 1e-8);
  EXPECT_NEAR(system.weights(1), oracle(1), 1e-8);
  EXPECT_NEAR(system.weights.sum(), 1.0, 1e-10);
}

TEST(SolveKriging, ConstantKernelStillSatisfiesConstraint) {
  const Grid nodes = Grid::regular_midpoints(5);
  const auto system = solve_kriging([](double, double) { return 3.0; }, nodes, 0.41,
                                    3.0 * 1e-8);
  EXPECT_NEAR(system.weights.sum(), 1.0, 1e-8);
  EXPECT_TRUE(system.weights.allFinite());
}

TEST(SolveKriging, UnbiasednessAcrossSpecsAndTargets) {
  const Grid nodes = Grid::regular_midpoints(12);
  const KernelSpec specs[] = {BrownianMotion{}, OrnsteinUhlenbeck{},
                              KernelEmbeddedBM{0.15, 60}};
  for (const auto& spec : specs) {
    const KernelMatrix K = kernel_matrix(spec, nodes, Exec::serial);
    for (double t0 : {0.0, 0.31, 0.5, 0.99}) {
      const auto system = solve_kriging(spec, nodes, t0, default_ridge(K.values));
      EXPECT_NEAR(system.weights.sum(), 1.0, 1e-8) << kernel_name(spec) << " " << t0;
    }
  }
}

TEST(SolveKriging, BrownianBridgeVariance) {
  // conditioning on the two flanking nodes only: the kriging variance equals
  // the closed-form bridge variance (t0-s1)(s2-t0)/(s2-s1)
  const double s1 = 0.3, s2 = 0.7;
  for (double t0 : {0.4, 0.5, 0.62}) {
    const auto system = solve_kriging(BrownianMotion{}, Grid({s1, s2}), t0, 0.0);
    const double expected = (t0 - s1) * (s2 - t0) / (s2 - s1);
    EXPECT_NEAR(system.variance, expected, 1e-6) << "t0=" << t0;
  }
}

TEST(SolveKriging, RidgeContinuity) {
  const Grid nodes = Grid::regular_midpoints(10);
  const double t0 = 0.47;
  const auto base = solve_kriging(BrownianMotion{}, nodes, t0, 0.0);
  double prev = 1e300;
  for (double eps : {1e-2, 1e-4, 1e-8}) {
    const auto sys = solve_kriging(BrownianMotion{}, nodes, t0, eps);
    const double dev = (sys.weights - base.weights).norm();
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(SolveKriging, SingularSystemReported) {
  // zero node covariance with conflicting cross-covariances leaves no
  // multiplier satisfying both rows
  const auto cov = [](double s, double t) {
    if (s > t) std::swap(s, t);
    if (s == 0.2 && t == 0.5) return 1.0;
    if (s == 0.5 && t == 0.8) return 2.0;
    return 0.0;
  };
  EXPECT_THROW(solve_kriging(cov, Grid({0.2, 0.8}), 0.5, 0.0), std::runtime_error);
}

TEST(KrigingBenchmark, OracleDominatesAndRowsComplete) {
  KrigingBenchmarkConfig config;
  config.spec = BrownianMotion{};
  config.estimators = {EstimatorKind::markov, EstimatorKind::empirical};
  config.p = 10;
  config.n = 50;
  config.replicates = 40;
  config.seed = 31;
  const auto table = kriging_error_benchmark(config);
  ASSERT_EQ(table.rows.size(), 40u * 3u * 9u);  // 3 estimators x 9 midpoints

  std::map<std::string, std::vector<double>> sq;
  for (const auto& row : table.rows) {
    ASSERT_FALSE(std::isnan(row.error)) << row.estimator;
    sq[row.estimator].push_back(row.error * row.error);
  }
  const double oracle_mse = mean(sq["oracle"]);
  for (const auto& name : {"markov", "empirical"}) {
    const double est_mse = mean(sq[name]);
    const double se = sample_sd(sq[name]) / std::sqrt(static_cast<double>(sq[name].size()));
    EXPECT_LE(oracle_mse, est_mse + 2.0 * se) << name;
  }

  const auto summary = table.summary();
  ASSERT_EQ(summary.size(), 3u);
  for (const auto& s : summary) {
    EXPECT_EQ(s.count, 40 * 9);
    EXPECT_EQ(s.failures, 0);
    EXPECT_GT(s.mse, 0.0);
    EXPECT_LE(s.q25, s.median_abs);
    EXPECT_LE(s.median_abs, s.q75);
  }
}

TEST(KrigingBenchmark, LeaveNodeOutPolicy) {
  KrigingBenchmarkConfig config;
  config.spec = BrownianMotion{};
  config.estimators = {EstimatorKind::markov};
  config.include_oracle = true;
  config.p = 8;
  config.n = 60;
  config.replicates = 20;
  config.policy = TargetPolicy::leave_node_out;
  config.seed = 77;
  const auto table = kriging_error_benchmark(config);
  ASSERT_EQ(table.rows.size(), 20u * 2u * 6u);  // interior nodes only
  for (const auto& row : table.rows) EXPECT_FALSE(std::isnan(row.error));
}
