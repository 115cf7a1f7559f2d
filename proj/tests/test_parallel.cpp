// The parallel kernels must reproduce the serial reference bit for bit:
// work items draw from derived-seed streams and write to disjoint slots.
#include <gtest/gtest.h>

#include "markovcov/experiments.hpp"
#include "markovcov/kernels.hpp"
#include "markovcov/kriging.hpp"
#include "markovcov/observations.hpp"
#include "markovcov/testing.hpp"

using namespace markovcov;

TEST(SerialParallel, KernelMatrix) {
  const KernelSpec spec = KernelEmbeddedBM{0.1, 120};
  const Grid grid = Grid::regular_midpoints(30);
  const auto a = kernel_matrix(spec, grid, Exec::serial);
  const auto b = kernel_matrix(spec, grid, Exec::parallel);
  EXPECT_TRUE(a.values == b.values);
}

TEST(SerialParallel, SampleCurvesDense) {
  const DenseDesign design{Grid::regular_midpoints(15)};
  const auto a = sample_curves(OrnsteinUhlenbeck{}, design, 200, 0.2, 42, Exec::serial);
  const auto b = sample_curves(OrnsteinUhlenbeck{}, design, 200, 0.2, 42, Exec::parallel);
  ASSERT_EQ(a.curve_count(), b.curve_count());
  for (int i = 0; i < a.curve_count(); ++i)
    EXPECT_EQ(a.curves[static_cast<size_t>(i)].values,
              b.curves[static_cast<size_t>(i)].values);
}

TEST(SerialParallel, SampleCurvesIrregular) {
  const auto a = sample_curves(BrownianMotion{}, IrregularDesign{6}, 100, 0.1, 7,
                               Exec::serial);
  const auto b = sample_curves(BrownianMotion{}, IrregularDesign{6}, 100, 0.1, 7,
                               Exec::parallel);
  for (int i = 0; i < a.curve_count(); ++i) {
    EXPECT_EQ(a.curves[static_cast<size_t>(i)].times,
              b.curves[static_cast<size_t>(i)].times);
    EXPECT_EQ(a.curves[static_cast<size_t>(i)].values,
              b.curves[static_cast<size_t>(i)].values);
  }
}

TEST(SerialParallel, MarkovTestCalibration) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(15)}, 150, 0.0, 3);
  const auto a = markov_test(obs, 0.05, GaussianMC{4000}, 11, Exec::serial);
  const auto b = markov_test(obs, 0.05, GaussianMC{4000}, 11, Exec::parallel);
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.critical_value, b.critical_value);
  EXPECT_EQ(a.p_value, b.p_value);
  EXPECT_EQ(a.reject, b.reject);
}

TEST(SerialParallel, PowerCurve) {
  const std::vector<double> hs{0.0, 0.3};
  const auto a = power_curve(hs, 8, 60, 0.05, GaussianMC{500}, 40, 5, Exec::serial, 60);
  const auto b = power_curve(hs, 8, 60, 0.05, GaussianMC{500}, 40, 5, Exec::parallel, 60);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].power, b[i].power);
}

TEST(SerialParallel, KrigingBenchmark) {
  KrigingBenchmarkConfig config;
  config.spec = BrownianMotion{};
  config.p = 8;
  config.n = 40;
  config.replicates = 25;
  config.seed = 13;
  const auto a = kriging_error_benchmark(config, Exec::serial);
  const auto b = kriging_error_benchmark(config, Exec::parallel);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].estimator, b.rows[i].estimator);
    EXPECT_EQ(a.rows[i].error, b.rows[i].error);
  }
}

TEST(SerialParallel, ConvergenceExperiment) {
  ExperimentConfig config;
  config.kind = "convergence";
  config.process = BrownianMotion{};
  config.n_values = {50, 100};
  config.p_values = {5, 10};
  config.replicates = 10;
  config.seed = 2;
  config.estimators = {EstimatorKind::markov};
  config.exec = Exec::serial;
  const auto a = run_convergence(config);
  config.exec = Exec::parallel;
  const auto b = run_convergence(config);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (size_t i = 0; i < a.cells.size(); ++i)
    EXPECT_EQ(a.cells[i].mean_l2, b.cells[i].mean_l2);
}
