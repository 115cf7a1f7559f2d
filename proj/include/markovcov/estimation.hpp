#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "markovcov/kernels.hpp"
#include "markovcov/observations.hpp"

namespace markovcov {

/// Per-curve, per-bin summaries under a p-bin partition of [0,1]:
/// observation count m, value sum S and squared-value sum Q. Only occupied
/// bins are stored.
struct BinnedStatistics {
  struct BinCell {
    int bin = 0;
    int count = 0;     // m_i(k)
    double sum = 0.0;  // sum of y
    double sum_sq = 0.0;
  };

  int bin_count = 0;
  int curve_count = 0;
  Regime regime = Regime::dense;
  std::vector<std::vector<BinCell>> per_curve;  // sorted by bin within a curve
  std::vector<int> pair_counts;                 // n_k for k = 0..p-2

  double max_second_moment() const;  // max over cells of sum_sq / count
};

BinnedStatistics bin_observations(const ObservationSet& obs, int p);

/// True if some curve has two or more observations in one bin.
bool noise_identifiable(const BinnedStatistics& stats);

/// Mean over curve-bin cells with m >= 2 of (mean of squares) minus (mean of
/// distinct-pair cross-products), clamped at zero. Throws when no cell has
/// two observations.
double estimate_noise(const BinnedStatistics& stats);

enum class EstimatorKind { markov, empirical, smoothed, triangular };

std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

/// A nodal covariance matrix with a bilinear continuum extension. The
/// evaluator reproduces nodal values at the nodes exactly and clamps to the
/// nearest node outside the node hull.
class EstimatedKernel {
 public:
  EstimatedKernel() = default;
  EstimatedKernel(Grid nodes, Eigen::MatrixXd nodal, EstimatorKind kind,
                  double noise_var = 0.0, std::vector<int> clamped_bins = {});

  double operator()(double s, double t) const;

  const Grid& nodes() const { return nodes_; }
  const Eigen::MatrixXd& nodal() const { return nodal_; }
  EstimatorKind kind() const { return kind_; }
  double noise_var() const { return noise_var_; }
  const std::vector<int>& clamped_bins() const { return clamped_bins_; }

 private:
  Grid nodes_;
  Eigen::MatrixXd nodal_;
  EstimatorKind kind_ = EstimatorKind::empirical;
  double noise_var_ = 0.0;
  std::vector<int> clamped_bins_;  // bins whose de-noised variance was floored
};

/// Markov estimator from binned data. `noise_var` empty means estimate it
/// from the bins (dense single-observation bins fall back to zero).
/// Interpolation nodes are the bin midpoints.
EstimatedKernel markov_estimate(const BinnedStatistics& stats,
                                std::optional<double> noise_var);

/// (1/n) sum of x_i x_i^T on the dense grid (mean-zero model).
EstimatedKernel empirical_estimate(const ObservationSet& obs);

/// Nadaraya-Watson smoothing of the empirical covariance surface with a
/// Gaussian weight of the given bandwidth, evaluated back at the grid nodes.
EstimatedKernel smoothed_estimate(const ObservationSet& obs, double bandwidth);

/// Same smoother with source entries restricted to the upper triangle
/// (s <= t), reflected to the lower triangle.
EstimatedKernel triangular_estimate(const ObservationSet& obs, double bandwidth);

/// True kernel sampled on the regular midpoint grid of the given resolution;
/// reused by l2_error so expensive kernels are evaluated once per resolution.
Eigen::MatrixXd kernel_on_midgrid(const KernelSpec& spec, int resolution,
                                  Exec exec = Exec::parallel);

/// L2([0,1]^2) distance between the continuum evaluator and the true kernel,
/// approximated on a resolution x resolution midpoint grid.
double l2_error(const EstimatedKernel& est, const KernelSpec& truth,
                int resolution);
double l2_error(const EstimatedKernel& est, const Eigen::MatrixXd& truth_on_midgrid);

}  // namespace markovcov
