#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "markovcov/kernels.hpp"
#include "markovcov/observations.hpp"
#include "markovcov/parallel.hpp"

namespace markovcov {

/// 0.5 * log((1+rho)/(1-rho)) for |rho| < 1.
double fisher_z(double rho);

/// Empirical correlation of the residuals of x1 and xp regressed on xj
/// (no intercept; mean-zero model). Throws on zero residual variance.
double partial_correlation(std::span<const double> x1, std::span<const double> xp,
                           std::span<const double> xj, bool center = false);

/// Calibrates the max statistic against max |Y| with Y ~ N(0, Sigma_hat),
/// Sigma_hat the empirical covariance of the per-sample products of
/// standardized residuals. Drawn by Gaussian multipliers on the influence
/// matrix, which samples that law exactly and keeps the cost linear in p.
struct GaussianMC {
  int draws = 10000;
};

/// Per-index rule at level alpha/(p-2) on the sqrt(n-4) scale.
struct Bonferroni {};

using Calibration = std::variant<GaussianMC, Bonferroni>;

struct TestReport {
  std::vector<int> indices;        // interior node indices, 1-based (2..p-1)
  Eigen::VectorXd partial_corr;    // rho_hat per index
  Eigen::VectorXd z;               // Fisher transforms
  Eigen::VectorXd scaled_abs_z;    // sqrt(n) |z|
  double statistic = 0.0;          // max of scaled_abs_z
  double critical_value = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  int n = 0;
  int p = 0;
  bool reject = false;
  std::string calibration;  // "mc" or "bonferroni"
};

/// Tests the endpoint conditional-independence family X(t_1) indep X(t_p)
/// given X(t_j) over all interior j, aggregated by the max statistic.
/// Only the p-2 endpoint conditionals are touched, so cost is linear in p.
TestReport markov_test(const ObservationSet& dense_obs, double alpha,
                       const Calibration& calibration, std::uint64_t seed,
                       Exec exec = Exec::parallel);

struct PowerRow {
  double h = 0.0;
  double power = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  int replicates = 0;
};

/// Rejection rate against embedded-BM alternatives per bandwidth; h = 0 runs
/// plain Brownian motion as a size check. Replicates parallelize over
/// derived seeds.
std::vector<PowerRow> power_curve(const std::vector<double>& bandwidths, int p,
                                  int n, double alpha,
                                  const Calibration& calibration,
                                  int replicates, std::uint64_t seed,
                                  Exec exec = Exec::parallel,
                                  int kebm_quadrature = 200);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Sweeps the critical value over pooled max statistics from null and
/// alternative replicates.
std::vector<RocPoint> roc_curve(const KernelSpec& null_spec,
                                const KernelSpec& alt_spec, int p, int n,
                                int replicates, std::uint64_t seed,
                                Exec exec = Exec::parallel);

double roc_auc(const std::vector<RocPoint>& roc);

}  // namespace markovcov
