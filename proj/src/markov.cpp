#include "markovcov/markov.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace markovcov {

namespace {

void check_diagonal(const Eigen::MatrixXd& K) {
  for (int j = 0; j < K.rows(); ++j)
    if (!(K(j, j) > 0.0))
      throw std::invalid_argument("markov_transform: nonpositive diagonal at index " +
                                  std::to_string(j));
}

}  // namespace

std::pair<MarkovFactorization, KernelMatrix> markov_transform(const KernelMatrix& kernel) {
  const Eigen::MatrixXd& K = kernel.values;
  const int p = static_cast<int>(K.rows());
  if (p == 0) throw std::invalid_argument("markov_transform: empty matrix");
  check_diagonal(K);

  MarkovFactorization fact;
  fact.grid = kernel.grid;
  fact.variances = K.diagonal();
  fact.links.resize(std::max(0, p - 1));
  for (int j = 0; j + 1 < p; ++j) fact.links(j) = K(j, j + 1) / K(j, j);

  Eigen::MatrixXd M(p, p);
  for (int j = 0; j < p; ++j) {
    M(j, j) = K(j, j);
    double prod = K(j, j);
    for (int k = j + 1; k < p; ++k) {
      // the two agreement bands carry over exactly, not via the product
      prod = (k == j + 1) ? K(j, j + 1) : prod * fact.links(k - 1);
      M(j, k) = prod;
      M(k, j) = prod;
    }
  }
  return {std::move(fact), KernelMatrix{std::move(M), kernel.grid}};
}

KernelMatrix ar1_covariance(const MarkovFactorization& fact) {
  const int p = fact.size();
  if (p == 0) throw std::invalid_argument("ar1_covariance: empty factorization");
  if (fact.links.size() != p - 1)
    throw std::invalid_argument("ar1_covariance: links/variances size mismatch");

  // innovation variances of the recursion; Cauchy-Schwarz keeps them
  // nonnegative for factorizations of genuine covariances
  Eigen::VectorXd innovations(std::max(0, p - 1));
  for (int j = 0; j + 1 < p; ++j) {
    const double innov =
        fact.variances(j + 1) - fact.links(j) * fact.links(j) * fact.variances(j);
    if (innov < -1e-10)
      throw std::runtime_error("ar1_covariance: negative innovation variance at step " +
                               std::to_string(j + 1));
    innovations(j) = std::max(innov, 0.0);
  }

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, p);
  C(0, 0) = fact.variances(0);
  for (int k = 1; k < p; ++k) {
    const double beta = fact.links(k - 1);
    C(k, k) = beta * beta * C(k - 1, k - 1) + innovations(k - 1);
    for (int j = 0; j < k; ++j) {
      C(j, k) = beta * C(j, k - 1);
      C(k, j) = C(j, k);
    }
  }
  return KernelMatrix{std::move(C), fact.grid};
}

MisspecificationResult misspecification(const KernelMatrix& kernel) {
  const Eigen::MatrixXd& K = kernel.values;
  const int p = static_cast<int>(K.rows());
  check_diagonal(K);

  Eigen::VectorXd sd(p);
  for (int j = 0; j < p; ++j) sd(j) = std::sqrt(K(j, j));
  Eigen::VectorXd adj(std::max(0, p - 1));
  for (int j = 0; j + 1 < p; ++j) adj(j) = K(j, j + 1) / (sd(j) * sd(j + 1));

  double acc = 0.0;
  for (int j = 0; j < p; ++j) {
    double prod = 1.0;
    for (int k = j + 1; k < p; ++k) {
      prod *= adj(k - 1);
      const double rho = K(j, k) / (sd(j) * sd(k));
      const double dev = rho - prod;
      acc += K(j, j) * K(k, k) * dev * dev;
    }
  }
  const double fro_sq = 2.0 * acc;
  const double norm_sq = K.squaredNorm();
  return MisspecificationResult{fro_sq, norm_sq > 0.0 ? fro_sq / norm_sq : 0.0};
}

Eigen::VectorXd endpoint_identity_residual(const KernelMatrix& kernel) {
  const Eigen::MatrixXd& K = kernel.values;
  const int p = static_cast<int>(K.rows());
  if (p < 3)
    throw std::invalid_argument("endpoint_identity_residual: need at least 3 nodes");
  check_diagonal(K);
  Eigen::VectorXd res(p - 2);
  for (int u = 1; u + 1 < p; ++u)
    res(u - 1) = K(0, p - 1) - K(0, u) * K(u, p - 1) / K(u, u);
  return res;
}

}  // namespace markovcov
