#pragma once

#include <stdexcept>
#include <vector>

namespace markovcov {

/// Ordered design points on [0,1].
///
/// When used as a partition of [0,1] into p equal bins B_1..B_p, bin k covers
/// ((k-1)/p, k/p] with t = 0 assigned to bin 1.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<double> points);

  /// Bin midpoints (2k-1)/(2p), k = 1..p. The default design grid: every
  /// point is interior and falls in its own bin under a p-bin partition.
  static Grid regular_midpoints(int p);

  /// Right bin edges k/p, k = 1..p.
  static Grid regular_right(int p);

  const std::vector<double>& points() const { return points_; }
  int size() const { return static_cast<int>(points_.size()); }
  bool empty() const { return points_.empty(); }
  double operator[](int j) const { return points_[static_cast<size_t>(j)]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  bool operator==(const Grid& other) const { return points_ == other.points_; }

 private:
  std::vector<double> points_;
};

/// Zero-based bin index of t under a p-bin partition of [0,1].
/// Matches ceil(t*p) with bin 1 for t = 0, shifted down by one.
int bin_index(double t, int p);

/// Midpoint of bin k (zero-based) under a p-bin partition.
inline double bin_midpoint(int k, int p) { return (2.0 * k + 1.0) / (2.0 * p); }

}  // namespace markovcov
