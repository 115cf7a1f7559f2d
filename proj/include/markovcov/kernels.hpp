#pragma once

#include <Eigen/Dense>
#include <variant>

#include "markovcov/grid.hpp"
#include "markovcov/parallel.hpp"

namespace markovcov {

struct BrownianMotion {};

struct OrnsteinUhlenbeck {
  double theta = 1.0;
  double sigma = 1.0;
};

/// Brownian-motion covariance embedded through a compactly supported
/// Wendland weight of bandwidth h: a controlled non-Markov process whose
/// dependence range is h. The double integral is evaluated with a composite
/// midpoint rule using `quadrature_nodes` nodes per axis, placed over the
/// weight's support intersected with [0,1].
struct KernelEmbeddedBM {
  double bandwidth = 0.1;
  int quadrature_nodes = 200;
};

using KernelSpec = std::variant<BrownianMotion, OrnsteinUhlenbeck, KernelEmbeddedBM>;

/// Compactly supported radial function max(1-r,0)^4 (4r+1).
double wendland(double r);

/// K(s,t) for s,t in [0,1]. Symmetric in its arguments.
double eval_kernel(const KernelSpec& spec, double s, double t);

/// Symmetric PSD covariance matrix on a grid.
struct KernelMatrix {
  Eigen::MatrixXd values;
  Grid grid;

  int size() const { return static_cast<int>(values.rows()); }
};

/// Evaluates the kernel on the grid and symmetrizes as (K + K^T)/2.
/// Fails if the result is not PSD within 1e-8 * trace.
KernelMatrix kernel_matrix(const KernelSpec& spec, const Grid& grid,
                           Exec exec = Exec::parallel);

/// Lower Cholesky factor of a symmetric PSD matrix, adding escalating
/// diagonal jitter (1e-12 * trace up to 1e-8 * trace) when the plain
/// factorization fails. Throws on failure after repair.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& matrix);

std::string kernel_name(const KernelSpec& spec);

}  // namespace markovcov
