#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "markovcov/grid.hpp"
#include "markovcov/kernels.hpp"
#include "markovcov/parallel.hpp"

namespace markovcov {

enum class Regime { dense, irregular };

struct Curve {
  std::vector<double> times;   // strictly increasing
  std::vector<double> values;  // same length
};

/// Per-curve (time, value) observations. Dense: every curve observed at the
/// shared grid. Irregular: per-curve i.i.d. uniform times, r per curve.
struct ObservationSet {
  Regime regime = Regime::dense;
  std::vector<Curve> curves;
  double noise_sd = 0.0;
  std::optional<Grid> grid;  // dense regime only

  int curve_count() const { return static_cast<int>(curves.size()); }

  /// Dense observations as an n x p matrix (rows = curves).
  Eigen::MatrixXd dense_matrix() const;
};

struct DenseDesign {
  Grid grid;
};

struct IrregularDesign {
  int per_curve = 2;  // r
};

using Design = std::variant<DenseDesign, IrregularDesign>;

/// Samples n independent mean-zero Gaussian curves with the spec's
/// covariance, plus i.i.d. N(0, noise_sd^2) measurement noise. Deterministic
/// given the seed; curve i draws from its own derived stream, so serial and
/// parallel execution agree bit for bit.
ObservationSet sample_curves(const KernelSpec& spec, const Design& design,
                             int n, double noise_sd, std::uint64_t seed,
                             Exec exec = Exec::parallel);

}  // namespace markovcov
