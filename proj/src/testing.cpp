#include "markovcov/testing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "markovcov/rng.hpp"
#include "markovcov/stats.hpp"

namespace markovcov {

double fisher_z(double rho) {
  if (!(std::abs(rho) < 1.0))
    throw std::invalid_argument("fisher_z: |rho| must be below 1");
  return 0.5 * std::log((1.0 + rho) / (1.0 - rho));
}

namespace {

struct ResidualPair {
  Eigen::VectorXd standardized;  // residual / RMS
  double rms = 0.0;
};

ResidualPair regress_out(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                         bool center, const char* what) {
  Eigen::VectorXd yc = y, xc = x;
  if (center) {
    yc.array() -= yc.mean();
    xc.array() -= xc.mean();
  }
  const double denom = xc.squaredNorm();
  if (denom <= 0.0)
    throw std::runtime_error(std::string("partial_correlation: conditioning vector ") +
                             what + " is identically zero");
  const double slope = yc.dot(xc) / denom;
  Eigen::VectorXd resid = yc - slope * xc;
  const double rms = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
  if (!(rms > 0.0))
    throw std::runtime_error(std::string("partial_correlation: degenerate residual for ") +
                             what);
  ResidualPair out;
  out.standardized = resid / rms;
  out.rms = rms;
  return out;
}

}  // namespace

double partial_correlation(std::span<const double> x1, std::span<const double> xp,
                           std::span<const double> xj, bool center) {
  const auto n = x1.size();
  if (n != xp.size() || n != xj.size())
    throw std::invalid_argument("partial_correlation: length mismatch");
  if (n < 5) throw std::invalid_argument("partial_correlation: need n >= 5");
  Eigen::Map<const Eigen::VectorXd> v1(x1.data(), static_cast<long>(n));
  Eigen::Map<const Eigen::VectorXd> vp(xp.data(), static_cast<long>(n));
  Eigen::Map<const Eigen::VectorXd> vj(xj.data(), static_cast<long>(n));
  const ResidualPair e1 = regress_out(v1, vj, center, "x1 on xj");
  const ResidualPair ep = regress_out(vp, vj, center, "xp on xj");
  return e1.standardized.dot(ep.standardized) / static_cast<double>(n);
}

namespace {

struct TestStatistics {
  Eigen::VectorXd rho;
  Eigen::VectorXd z;
  Eigen::MatrixXd influence;  // n x (p-2), products of standardized residuals
};

TestStatistics endpoint_statistics(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  TestStatistics out;
  out.rho.resize(p - 2);
  out.z.resize(p - 2);
  out.influence.resize(n, p - 2);
  const Eigen::VectorXd x1 = X.col(0);
  const Eigen::VectorXd xp = X.col(p - 1);
  for (int j = 1; j + 1 < p; ++j) {
    const Eigen::VectorXd xj = X.col(j);
    ResidualPair e1 = regress_out(x1, xj, false, "x1 on interior node");
    ResidualPair ep = regress_out(xp, xj, false, "xp on interior node");
    Eigen::VectorXd prod = e1.standardized.cwiseProduct(ep.standardized);
    const double rho = prod.mean();
    if (!(std::abs(rho) < 1.0))
      throw std::runtime_error("markov_test: degenerate partial correlation at index " +
                               std::to_string(j + 1));
    out.influence.col(j - 1) = prod;
    out.rho(j - 1) = rho;
    out.z(j - 1) = fisher_z(rho);
  }
  return out;
}

// (1-alpha) quantile of max_j |Y_j| with Y ~ N(0, Sigma_hat), where
// Sigma_hat is the covariance of the influence columns. Gaussian multipliers
// on the centered influence matrix draw from that law exactly and keep each
// draw linear in p.
std::pair<double, double> multiplier_calibration(const Eigen::MatrixXd& influence,
                                                 double alpha, int draws,
                                                 double observed, std::uint64_t seed,
                                                 Exec exec) {
  const int n = static_cast<int>(influence.rows());
  Eigen::MatrixXd centered = influence.rowwise() - influence.colwise().mean();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  std::vector<double> maxima(static_cast<size_t>(draws));
  constexpr int kBlock = 256;
  const int blocks = (draws + kBlock - 1) / kBlock;
  parallel_for(blocks, exec, [&](std::int64_t blk) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(blk));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int lo = static_cast<int>(blk) * kBlock;
    const int hi = std::min(lo + kBlock, draws);
    Eigen::MatrixXd G(hi - lo, n);
    for (int a = 0; a < G.rows(); ++a)
      for (int b = 0; b < n; ++b) G(a, b) = gauss(rng);
    Eigen::MatrixXd Y = G * centered;  // (block x p-2)
    for (int a = 0; a < Y.rows(); ++a)
      maxima[static_cast<size_t>(lo + a)] = Y.row(a).cwiseAbs().maxCoeff() * scale;
  });

  const double crit = empirical_quantile(maxima, 1.0 - alpha);
  long exceed = 0;
  for (double m : maxima)
    if (m >= observed) ++exceed;
  const double p_value =
      static_cast<double>(exceed + 1) / static_cast<double>(draws + 1);
  return {crit, p_value};
}

}  // namespace

TestReport markov_test(const ObservationSet& dense_obs, double alpha,
                       const Calibration& calibration, std::uint64_t seed, Exec exec) {
  if (dense_obs.regime != Regime::dense)
    throw std::invalid_argument("markov_test: dense regime required");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("markov_test: alpha must lie in (0,1)");
  const Eigen::MatrixXd X = dense_obs.dense_matrix();
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (p < 3) throw std::invalid_argument("markov_test: need p >= 3 grid points");
  if (n < 8) throw std::invalid_argument("markov_test: need n >= 8 curves");

  TestStatistics stats = endpoint_statistics(X);

  TestReport report;
  report.alpha = alpha;
  report.n = n;
  report.p = p;
  report.partial_corr = stats.rho;
  report.z = stats.z;
  report.scaled_abs_z = std::sqrt(static_cast<double>(n)) * stats.z.cwiseAbs();
  report.statistic = report.scaled_abs_z.maxCoeff();
  report.indices.resize(static_cast<size_t>(p - 2));
  for (int j = 0; j + 2 < p; ++j) report.indices[static_cast<size_t>(j)] = j + 2;

  if (const auto* mc = std::get_if<GaussianMC>(&calibration)) {
    if (mc->draws < 100)
      throw std::invalid_argument("markov_test: need at least 100 calibration draws");
    auto [crit, pv] = multiplier_calibration(stats.influence, alpha, mc->draws,
                                             report.statistic, seed, exec);
    report.critical_value = crit;
    report.p_value = pv;
    report.calibration = "mc";
  } else {
    // per-index screening on the sqrt(n-4) scale, mapped to the statistic scale
    const double q = normal_quantile(1.0 - alpha / (2.0 * (p - 2)));
    const double ratio = std::sqrt(static_cast<double>(n) / (n - 4.0));
    report.critical_value = q * ratio;
    const double max_screen = report.statistic / ratio;
    report.p_value =
        std::min(1.0, 2.0 * (p - 2) * (1.0 - normal_cdf(max_screen)));
    report.calibration = "bonferroni";
  }
  report.reject = report.statistic > report.critical_value;
  return report;
}

namespace {

KernelSpec alternative_for(double h, int quadrature) {
  if (h <= 0.0) return BrownianMotion{};
  return KernelEmbeddedBM{h, quadrature};
}

}  // namespace

std::vector<PowerRow> power_curve(const std::vector<double>& bandwidths, int p, int n,
                                  double alpha, const Calibration& calibration,
                                  int replicates, std::uint64_t seed, Exec exec,
                                  int kebm_quadrature) {
  if (replicates < 1) throw std::invalid_argument("power_curve: need replicates >= 1");
  std::vector<PowerRow> rows;
  const Grid grid = Grid::regular_midpoints(p);
  for (size_t hi = 0; hi < bandwidths.size(); ++hi) {
    const double h = bandwidths[hi];
    const KernelSpec spec = alternative_for(h, kebm_quadrature);
    // factor once per bandwidth, replicate over derived seeds
    const KernelMatrix K = kernel_matrix(spec, grid, exec);
    const Eigen::MatrixXd L = psd_factor(K.values);
    std::vector<unsigned char> rejected(static_cast<size_t>(replicates), 0);
    parallel_for(replicates, exec, [&](std::int64_t r) {
      const std::uint64_t rep_seed =
          derive_seed(seed, static_cast<std::uint64_t>(hi), static_cast<std::uint64_t>(r));
      Rng rng = make_rng(rep_seed, 0);
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::MatrixXd X(n, p);
      Eigen::VectorXd z(p);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z(j) = gauss(rng);
        X.row(i) = (L * z).transpose();
      }
      ObservationSet obs;
      obs.regime = Regime::dense;
      obs.grid = grid;
      obs.curves.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        Curve& c = obs.curves[static_cast<size_t>(i)];
        c.times = grid.points();
        c.values.assign(X.row(i).begin(), X.row(i).end());
      }
      try {
        TestReport rep = markov_test(obs, alpha, calibration,
                                     derive_seed(rep_seed, 1), Exec::serial);
        rejected[static_cast<size_t>(r)] = rep.reject ? 1 : 0;
      } catch (const std::exception&) {
        rejected[static_cast<size_t>(r)] = 0;  // degenerate replicate counts as no call
      }
    });
    int count = 0;
    for (auto b : rejected) count += b;
    auto [lo, hi_ci] = wilson_interval(count, replicates);
    rows.push_back(PowerRow{h, static_cast<double>(count) / replicates, lo, hi_ci,
                            replicates});
  }
  return rows;
}

namespace {

std::vector<double> statistic_samples(const KernelSpec& spec, int p, int n,
                                      int replicates, std::uint64_t seed, Exec exec) {
  const Grid grid = Grid::regular_midpoints(p);
  const KernelMatrix K = kernel_matrix(spec, grid, exec);
  const Eigen::MatrixXd L = psd_factor(K.values);
  std::vector<double> stats(static_cast<size_t>(replicates), 0.0);
  parallel_for(replicates, exec, [&](std::int64_t r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd z(p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) z(j) = gauss(rng);
      X.row(i) = (L * z).transpose();
    }
    TestStatistics ts = endpoint_statistics(X);
    stats[static_cast<size_t>(r)] =
        std::sqrt(static_cast<double>(n)) * ts.z.cwiseAbs().maxCoeff();
  });
  return stats;
}

}  // namespace

std::vector<RocPoint> roc_curve(const KernelSpec& null_spec, const KernelSpec& alt_spec,
                                int p, int n, int replicates, std::uint64_t seed,
                                Exec exec) {
  if (replicates < 1) throw std::invalid_argument("roc_curve: need replicates >= 1");
  std::vector<double> null_stats =
      statistic_samples(null_spec, p, n, replicates, derive_seed(seed, 0), exec);
  std::vector<double> alt_stats =
      statistic_samples(alt_spec, p, n, replicates, derive_seed(seed, 1), exec);

  std::vector<double> thresholds;
  thresholds.reserve(null_stats.size() + alt_stats.size());
  thresholds.insert(thresholds.end(), null_stats.begin(), null_stats.end());
  thresholds.insert(thresholds.end(), alt_stats.begin(), alt_stats.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());

  std::sort(null_stats.begin(), null_stats.end());
  std::sort(alt_stats.begin(), alt_stats.end());
  auto frac_above = [](const std::vector<double>& sorted, double t) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
  };

  std::vector<RocPoint> roc;
  roc.push_back(RocPoint{0.0, 0.0});
  for (double t : thresholds) {
    RocPoint pt{frac_above(null_stats, t), frac_above(alt_stats, t)};
    if (pt.fpr != roc.back().fpr || pt.tpr != roc.back().tpr) roc.push_back(pt);
  }
  if (roc.back().fpr != 1.0 || roc.back().tpr != 1.0) roc.push_back(RocPoint{1.0, 1.0});
  return roc;
}

double roc_auc(const std::vector<RocPoint>& roc) {
  double auc = 0.0;
  for (size_t i = 1; i < roc.size(); ++i)
    auc += (roc[i].fpr - roc[i - 1].fpr) * 0.5 * (roc[i].tpr + roc[i - 1].tpr);
  return auc;
}

}  // namespace markovcov
