#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "markovcov/estimation.hpp"
#include "markovcov/kernels.hpp"

namespace markovcov {

/// Solved ordinary kriging system: weights predicting X(target) from the
/// node values under the sum-to-one constraint.
struct KrigingSystem {
  Grid nodes;
  double target = 0.0;
  double ridge = 0.0;
  Eigen::VectorXd weights;
  double multiplier = 0.0;  // Lagrange multiplier of the constraint
  double variance = 0.0;    // kriging variance at the target
  double residual_norm = 0.0;

  double predict(const Eigen::VectorXd& node_values) const {
    return weights.dot(node_values);
  }
};

using CovarianceFn = std::function<double(double, double)>;

/// Solves the bordered system [[K + ridge*I, 1], [1^T, 0]] [w; mu] = [k0; 1]
/// by pivoted LU. Throws when the solve residual exceeds 1e-8 * ||A||.
KrigingSystem solve_kriging(const CovarianceFn& cov, const Grid& nodes,
                            double target, double ridge);
KrigingSystem solve_kriging(const KernelSpec& spec, const Grid& nodes,
                            double target, double ridge);
KrigingSystem solve_kriging(const EstimatedKernel& est, const Grid& nodes,
                            double target, double ridge);

/// Default ridge: 1e-8 * trace(K)/p, scale-relative.
double default_ridge(const Eigen::MatrixXd& node_cov);

enum class TargetPolicy {
  midpoints,       // predict at midpoints between adjacent nodes
  leave_node_out,  // predict each interior node from the remaining nodes
};

struct KrigingBenchmarkConfig {
  KernelSpec spec;
  std::vector<EstimatorKind> estimators{EstimatorKind::markov,
                                        EstimatorKind::empirical};
  bool include_oracle = true;
  int p = 20;
  int n = 200;
  int replicates = 1000;
  TargetPolicy policy = TargetPolicy::midpoints;
  double ridge_scale = 1e-8;  // ridge = ridge_scale * trace/p
  double smoother_bandwidth = 0.1;
  std::uint64_t seed = 0;
};

struct KrigingErrorRow {
  std::string estimator;
  int replicate = 0;
  double target = 0.0;
  double error = 0.0;
};

struct KrigingSummaryRow {
  std::string estimator;
  double mse = 0.0;
  double median_abs = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int count = 0;
  int failures = 0;
};

struct KrigingErrorTable {
  std::vector<KrigingErrorRow> rows;
  std::vector<KrigingSummaryRow> summary() const;
};

/// Per replicate: train n curves on the estimation grid, fit each estimator,
/// draw a fresh target curve on a 4x finer grid joined with the nodes and
/// targets, and record prediction errors at the policy's targets. Estimator
/// failures skip that replicate for that estimator only.
KrigingErrorTable kriging_error_benchmark(const KrigingBenchmarkConfig& config,
                                          Exec exec = Exec::parallel);

}  // namespace markovcov
