#include "markovcov/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace markovcov {

double BinnedStatistics::max_second_moment() const {
  double m = 0.0;
  for (const auto& curve : per_curve)
    for (const auto& cell : curve)
      m = std::max(m, cell.sum_sq / cell.count);
  return m;
}

BinnedStatistics bin_observations(const ObservationSet& obs, int p) {
  if (p < 2) throw std::invalid_argument("bin_observations: need p >= 2 bins");
  BinnedStatistics stats;
  stats.bin_count = p;
  stats.curve_count = obs.curve_count();
  stats.regime = obs.regime;
  stats.per_curve.resize(static_cast<size_t>(stats.curve_count));
  stats.pair_counts.assign(static_cast<size_t>(p - 1), 0);

  for (int i = 0; i < stats.curve_count; ++i) {
    const Curve& c = obs.curves[static_cast<size_t>(i)];
    auto& cells = stats.per_curve[static_cast<size_t>(i)];
    int current = -1;
    for (size_t j = 0; j < c.times.size(); ++j) {
      const int bin = bin_index(c.times[j], p);
      if (bin != current) {
        cells.push_back(BinnedStatistics::BinCell{bin, 0, 0.0, 0.0});
        current = bin;
      }
      auto& cell = cells.back();
      cell.count += 1;
      cell.sum += c.values[j];
      cell.sum_sq += c.values[j] * c.values[j];
    }
    for (size_t a = 0; a + 1 < cells.size(); ++a)
      if (cells[a + 1].bin == cells[a].bin + 1)
        stats.pair_counts[static_cast<size_t>(cells[a].bin)] += 1;
  }
  return stats;
}

bool noise_identifiable(const BinnedStatistics& stats) {
  for (const auto& curve : stats.per_curve)
    for (const auto& cell : curve)
      if (cell.count >= 2) return true;
  return false;
}

double estimate_noise(const BinnedStatistics& stats) {
  double acc = 0.0;
  long terms = 0;
  for (const auto& curve : stats.per_curve) {
    for (const auto& cell : curve) {
      if (cell.count < 2) continue;
      const double m = cell.count;
      const double mean_sq = cell.sum_sq / m;
      const double cross = (cell.sum * cell.sum - cell.sum_sq) / (m * (m - 1.0));
      acc += mean_sq - cross;
      ++terms;
    }
  }
  if (terms == 0)
    throw std::runtime_error(
        "estimate_noise: no bin holds two observations of one curve; "
        "noise variance is not identifiable");
  return std::max(acc / static_cast<double>(terms), 0.0);
}

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::markov: return "markov";
    case EstimatorKind::empirical: return "empirical";
    case EstimatorKind::smoothed: return "smoothed";
    case EstimatorKind::triangular: return "triangular";
  }
  throw std::logic_error("estimator_name: unknown kind");
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "markov") return EstimatorKind::markov;
  if (name == "empirical") return EstimatorKind::empirical;
  if (name == "smoothed") return EstimatorKind::smoothed;
  if (name == "triangular") return EstimatorKind::triangular;
  throw std::invalid_argument("unknown estimator: " + name);
}

EstimatedKernel::EstimatedKernel(Grid nodes, Eigen::MatrixXd nodal,
                                 EstimatorKind kind, double noise_var,
                                 std::vector<int> clamped_bins)
    : nodes_(std::move(nodes)),
      nodal_(std::move(nodal)),
      kind_(kind),
      noise_var_(noise_var),
      clamped_bins_(std::move(clamped_bins)) {
  if (nodal_.rows() != nodal_.cols() || nodal_.rows() != nodes_.size())
    throw std::invalid_argument("EstimatedKernel: nodal matrix does not match nodes");
}

namespace {

// Cell index and weight of s within the node sequence, clamped to the hull.
inline void locate(const std::vector<double>& nodes, double s, int& j, double& alpha) {
  const int p = static_cast<int>(nodes.size());
  if (p == 1) {
    j = 0;
    alpha = 0.0;
    return;
  }
  auto it = std::upper_bound(nodes.begin(), nodes.end(), s);
  int hi = static_cast<int>(it - nodes.begin());
  if (hi <= 0) {
    j = 0;
    alpha = 0.0;
    return;
  }
  if (hi >= p) {
    j = p - 2;
    alpha = 1.0;
    return;
  }
  j = hi - 1;
  alpha = (s - nodes[static_cast<size_t>(j)]) /
          (nodes[static_cast<size_t>(j + 1)] - nodes[static_cast<size_t>(j)]);
  alpha = std::clamp(alpha, 0.0, 1.0);
}

}  // namespace

double EstimatedKernel::operator()(double s, double t) const {
  int j, k;
  double a, b;
  locate(nodes_.points(), s, j, a);
  locate(nodes_.points(), t, k, b);
  if (nodes_.size() == 1) return nodal_(0, 0);
  return (1.0 - a) * (1.0 - b) * nodal_(j, k) + a * (1.0 - b) * nodal_(j + 1, k) +
         (1.0 - a) * b * nodal_(j, k + 1) + a * b * nodal_(j + 1, k + 1);
}

EstimatedKernel markov_estimate(const BinnedStatistics& stats,
                                std::optional<double> noise_var) {
  const int p = stats.bin_count;
  if (p < 2) throw std::invalid_argument("markov_estimate: need p >= 2 bins");

  double nu2 = 0.0;
  if (noise_var) {
    if (*noise_var < 0.0)
      throw std::invalid_argument("markov_estimate: negative noise variance");
    nu2 = *noise_var;
  } else if (noise_identifiable(stats)) {
    nu2 = estimate_noise(stats);
  } else if (stats.regime == Regime::irregular) {
    estimate_noise(stats);  // surfaces the identifiability error
  }  // dense single-observation bins: proceed with zero noise

  // bin means per curve, aligned to bins
  struct Moments {
    double var_acc = 0.0;   // de-noised squared bin means
    long var_terms = 0;
    double cross_acc = 0.0; // products of adjacent bin means
    long cross_terms = 0;
  };
  std::vector<Moments> pair_moments(static_cast<size_t>(p - 1));
  std::vector<double> last_var_acc(1, 0.0);
  long last_var_terms = 0;

  for (const auto& curve : stats.per_curve) {
    for (size_t a = 0; a < curve.size(); ++a) {
      const auto& cell = curve[a];
      const double mean = cell.sum / cell.count;
      const bool has_next = a + 1 < curve.size() && curve[a + 1].bin == cell.bin + 1;
      if (cell.bin < p - 1) {
        if (has_next) {
          auto& m = pair_moments[static_cast<size_t>(cell.bin)];
          const auto& next = curve[a + 1];
          m.var_acc += mean * mean - nu2 / cell.count;
          m.var_terms += 1;
          m.cross_acc += mean * (next.sum / next.count);
          m.cross_terms += 1;
        }
      } else {
        last_var_acc[0] += mean * mean - nu2 / cell.count;
        last_var_terms += 1;
      }
    }
  }

  Eigen::VectorXd variances(p);
  Eigen::VectorXd links(p - 1);
  std::vector<int> clamped;
  const double floor_value = 1e-10 * std::max(stats.max_second_moment(), 1e-300);

  for (int k = 0; k < p - 1; ++k) {
    const auto& m = pair_moments[static_cast<size_t>(k)];
    if (m.var_terms == 0)
      throw std::runtime_error(
          "markov_estimate: no curve observes both bins " + std::to_string(k + 1) +
          " and " + std::to_string(k + 2) + "; use fewer bins");
    double v = m.var_acc / static_cast<double>(m.var_terms);
    if (v <= 0.0) {
      v = floor_value;
      clamped.push_back(k);
    }
    variances(k) = v;
    links(k) = (m.cross_acc / static_cast<double>(m.cross_terms)) / v;
  }
  if (last_var_terms == 0)
    throw std::runtime_error("markov_estimate: last bin is empty; use fewer bins");
  double v_last = last_var_acc[0] / static_cast<double>(last_var_terms);
  if (v_last <= 0.0) {
    v_last = floor_value;
    clamped.push_back(p - 1);
  }
  variances(p - 1) = v_last;

  Eigen::MatrixXd nodal(p, p);
  for (int j = 0; j < p; ++j) {
    nodal(j, j) = variances(j);
    double prod = variances(j);
    for (int k = j + 1; k < p; ++k) {
      prod *= links(k - 1);
      nodal(j, k) = prod;
      nodal(k, j) = prod;
    }
  }
  return EstimatedKernel(Grid::regular_midpoints(p), std::move(nodal),
                         EstimatorKind::markov, nu2, std::move(clamped));
}

namespace {

Eigen::MatrixXd empirical_nodal(const ObservationSet& obs) {
  if (obs.regime != Regime::dense)
    throw std::invalid_argument("empirical estimator requires the dense regime");
  const Eigen::MatrixXd X = obs.dense_matrix();
  return X.transpose() * X / static_cast<double>(X.rows());
}

Eigen::MatrixXd nw_smooth(const Eigen::MatrixXd& E, const std::vector<double>& grid,
                          double bandwidth, bool upper_only) {
  const int p = static_cast<int>(grid.size());
  Eigen::MatrixXd W(p, p);  // W(a, j): weight of source node j for target a
  for (int a = 0; a < p; ++a)
    for (int j = 0; j < p; ++j) {
      const double d = (grid[static_cast<size_t>(a)] - grid[static_cast<size_t>(j)]) /
                       bandwidth;
      W(a, j) = std::exp(-0.5 * d * d);
    }
  Eigen::MatrixXd S(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b) {
      double num = 0.0, den = 0.0;
      for (int j = 0; j < p; ++j) {
        const int k_start = upper_only ? j : 0;
        for (int k = k_start; k < p; ++k) {
          const double w = W(a, j) * W(b, k);
          num += w * E(j, k);
          den += w;
        }
      }
      S(a, b) = num / den;
      S(b, a) = S(a, b);
    }
  return S;
}

}  // namespace

EstimatedKernel empirical_estimate(const ObservationSet& obs) {
  if (obs.curve_count() < 1)
    throw std::invalid_argument("empirical_estimate: no curves");
  return EstimatedKernel(*obs.grid, empirical_nodal(obs), EstimatorKind::empirical);
}

EstimatedKernel smoothed_estimate(const ObservationSet& obs, double bandwidth) {
  if (bandwidth <= 0.0)
    throw std::invalid_argument("smoothed_estimate: bandwidth must be positive");
  const Eigen::MatrixXd E = empirical_nodal(obs);
  return EstimatedKernel(*obs.grid, nw_smooth(E, obs.grid->points(), bandwidth, false),
                         EstimatorKind::smoothed);
}

EstimatedKernel triangular_estimate(const ObservationSet& obs, double bandwidth) {
  if (bandwidth <= 0.0)
    throw std::invalid_argument("triangular_estimate: bandwidth must be positive");
  const Eigen::MatrixXd E = empirical_nodal(obs);
  return EstimatedKernel(*obs.grid, nw_smooth(E, obs.grid->points(), bandwidth, true),
                         EstimatorKind::triangular);
}

Eigen::MatrixXd kernel_on_midgrid(const KernelSpec& spec, int resolution, Exec exec) {
  return kernel_matrix(spec, Grid::regular_midpoints(resolution), exec).values;
}

double l2_error(const EstimatedKernel& est, const Eigen::MatrixXd& truth) {
  const int res = static_cast<int>(truth.rows());
  double acc = 0.0;
  for (int a = 0; a < res; ++a) {
    const double s = bin_midpoint(a, res);
    for (int b = 0; b < res; ++b) {
      const double d = est(s, bin_midpoint(b, res)) - truth(a, b);
      acc += d * d;
    }
  }
  return std::sqrt(acc / (static_cast<double>(res) * res));
}

double l2_error(const EstimatedKernel& est, const KernelSpec& truth, int resolution) {
  if (resolution < est.nodes().size())
    throw std::invalid_argument("l2_error: resolution below the estimation grid");
  return l2_error(est, kernel_on_midgrid(truth, resolution, Exec::serial));
}

}  // namespace markovcov
