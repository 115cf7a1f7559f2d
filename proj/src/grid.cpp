#include "markovcov/grid.hpp"

#include <cmath>

namespace markovcov {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  for (size_t j = 0; j < points_.size(); ++j) {
    if (points_[j] < 0.0 || points_[j] > 1.0)
      throw std::invalid_argument("Grid: points must lie in [0,1]");
    if (j > 0 && points_[j] <= points_[j - 1])
      throw std::invalid_argument("Grid: points must be strictly increasing");
  }
}

Grid Grid::regular_midpoints(int p) {
  if (p < 1) throw std::invalid_argument("Grid: p must be positive");
  std::vector<double> pts(static_cast<size_t>(p));
  for (int k = 0; k < p; ++k) pts[static_cast<size_t>(k)] = bin_midpoint(k, p);
  return Grid(std::move(pts));
}

Grid Grid::regular_right(int p) {
  if (p < 1) throw std::invalid_argument("Grid: p must be positive");
  std::vector<double> pts(static_cast<size_t>(p));
  for (int k = 1; k <= p; ++k)
    pts[static_cast<size_t>(k - 1)] = static_cast<double>(k) / p;
  return Grid(std::move(pts));
}

int bin_index(double t, int p) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("bin_index: t outside [0,1]");
  if (p < 1) throw std::invalid_argument("bin_index: p must be positive");
  int k = static_cast<int>(std::ceil(t * p));
  if (k < 1) k = 1;
  if (k > p) k = p;
  return k - 1;
}

}  // namespace markovcov
