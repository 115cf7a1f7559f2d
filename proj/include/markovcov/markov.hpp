#pragma once

#include <Eigen/Dense>
#include <utility>

#include "markovcov/kernels.hpp"

namespace markovcov {

/// Nodal variances and link coefficients encoding a Markov covariance:
/// entry (j,k) for j <= k reconstructs as variances[j] * prod of
/// links[j..k-1], where links[j] regresses node j+1 on node j.
struct MarkovFactorization {
  Eigen::VectorXd variances;  // size p, strictly positive
  Eigen::VectorXd links;      // size p-1
  Grid grid;

  int size() const { return static_cast<int>(variances.size()); }
};

/// Keeps the diagonal and first off-diagonal of K and extends by products of
/// successive regression coefficients. The result agrees with K on those two
/// bands exactly and has tridiagonal inverse; it is the closest covariance
/// with that structure in Kullback-Leibler divergence.
std::pair<MarkovFactorization, KernelMatrix> markov_transform(const KernelMatrix& kernel);

/// Covariance of the recursion Z_{j+1} = links[j] * Z_j + eps_{j+1} with
/// innovation variance variances[j+1] - links[j]^2 * variances[j] (clamped
/// at zero; materially negative values are rejected). Equals the
/// reconstructed transform matrix.
KernelMatrix ar1_covariance(const MarkovFactorization& factorization);

struct MisspecificationResult {
  double frobenius_sq = 0.0;  // squared Frobenius distance to the transform
  double normalized = 0.0;    // frobenius_sq / ||K||_F^2
};

/// Deviation from the multiplicative correlation structure:
/// 2 * sum_{j<k} K_jj K_kk (rho_jk - prod of adjacent rho)^2.
MisspecificationResult misspecification(const KernelMatrix& kernel);

/// For each interior node u: K[0,p-1] - K[0,u] * K[u,p-1] / K[u,u].
/// All-zero iff the matrix links its endpoints through every interior point.
Eigen::VectorXd endpoint_identity_residual(const KernelMatrix& kernel);

}  // namespace markovcov
