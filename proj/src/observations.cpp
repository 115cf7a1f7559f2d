#include "markovcov/observations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "markovcov/rng.hpp"

namespace markovcov {

Eigen::MatrixXd ObservationSet::dense_matrix() const {
  if (regime != Regime::dense || !grid)
    throw std::invalid_argument("dense_matrix: not a dense observation set");
  const int n = curve_count();
  const int p = grid->size();
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    const auto& c = curves[static_cast<size_t>(i)];
    if (static_cast<int>(c.values.size()) != p)
      throw std::invalid_argument("dense_matrix: curve length does not match grid");
    for (int j = 0; j < p; ++j) X(i, j) = c.values[static_cast<size_t>(j)];
  }
  return X;
}

ObservationSet sample_curves(const KernelSpec& spec, const Design& design, int n,
                             double noise_sd, std::uint64_t seed, Exec exec) {
  if (n < 1) throw std::invalid_argument("sample_curves: n must be positive");
  if (noise_sd < 0.0)
    throw std::invalid_argument("sample_curves: noise_sd must be nonnegative");

  ObservationSet out;
  out.noise_sd = noise_sd;
  out.curves.resize(static_cast<size_t>(n));

  if (const auto* dense = std::get_if<DenseDesign>(&design)) {
    const Grid& grid = dense->grid;
    if (grid.empty()) throw std::invalid_argument("sample_curves: empty dense grid");
    out.regime = Regime::dense;
    out.grid = grid;
    const int p = grid.size();
    const KernelMatrix K = kernel_matrix(spec, grid, exec);
    const Eigen::MatrixXd L = psd_factor(K.values);
    parallel_for(n, exec, [&](std::int64_t i) {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::VectorXd z(p);
      for (int j = 0; j < p; ++j) z(j) = gauss(rng);
      Eigen::VectorXd x = L * z;
      Curve& c = out.curves[static_cast<size_t>(i)];
      c.times = grid.points();
      c.values.resize(static_cast<size_t>(p));
      for (int j = 0; j < p; ++j) {
        double v = x(j);
        if (noise_sd > 0.0) v += noise_sd * gauss(rng);
        c.values[static_cast<size_t>(j)] = v;
      }
    });
    return out;
  }

  const auto& irregular = std::get<IrregularDesign>(design);
  const int r = irregular.per_curve;
  if (r < 2) throw std::invalid_argument("sample_curves: irregular design needs r >= 2");
  out.regime = Regime::irregular;
  parallel_for(n, exec, [&](std::int64_t i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> times(static_cast<size_t>(r));
    for (auto& t : times) t = unif(rng);
    std::sort(times.begin(), times.end());
    // duplicate times would make the joint law singular; nudge them apart
    for (size_t j = 1; j < times.size(); ++j)
      if (times[j] <= times[j - 1])
        times[j] = std::nextafter(times[j - 1], 2.0);
    Eigen::MatrixXd K(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = a; b < r; ++b) {
        K(a, b) = eval_kernel(spec, times[static_cast<size_t>(a)],
                              times[static_cast<size_t>(b)]);
        K(b, a) = K(a, b);
      }
    const Eigen::MatrixXd L = psd_factor(K);
    Eigen::VectorXd z(r);
    for (int j = 0; j < r; ++j) z(j) = gauss(rng);
    Eigen::VectorXd x = L * z;
    Curve& c = out.curves[static_cast<size_t>(i)];
    c.times = std::move(times);
    c.values.resize(static_cast<size_t>(r));
    for (int j = 0; j < r; ++j) {
      double v = x(j);
      if (noise_sd > 0.0) v += noise_sd * gauss(rng);
      c.values[static_cast<size_t>(j)] = v;
    }
  });
  return out;
}

}  // namespace markovcov
