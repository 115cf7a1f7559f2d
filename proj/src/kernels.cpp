#include "markovcov/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace markovcov {

double wendland(double r) {
  if (r < 0.0) throw std::invalid_argument("wendland: r must be nonnegative");
  if (r >= 1.0) return 0.0;
  const double u = 1.0 - r;
  const double u2 = u * u;
  return u2 * u2 * (4.0 * r + 1.0);
}

namespace {

// integral of wendland(|x|) over [-1,1]; the embedding weight is scaled so
// that it integrates to one away from the boundary and concentrates to a
// point mass as the bandwidth shrinks.
constexpr double kWendlandMass = 2.0 / 3.0;

double bm_cov(double s, double t) { return std::min(s, t); }

double ou_cov(const OrnsteinUhlenbeck& ou, double s, double t) {
  return ou.sigma * ou.sigma / (2.0 * ou.theta) * std::exp(-ou.theta * std::abs(s - t));
}

// Midpoint nodes and weights of the embedding integral for one evaluation
// point: q nodes over the weight's support intersected with [0,1].
struct EmbeddingRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

EmbeddingRule embedding_rule(double t, double h, int q) {
  const double lo = std::max(0.0, t - h);
  const double hi = std::min(1.0, t + h);
  const double step = (hi - lo) / q;
  EmbeddingRule rule;
  rule.nodes.resize(static_cast<size_t>(q));
  rule.weights.resize(static_cast<size_t>(q));
  for (int i = 0; i < q; ++i) {
    const double u = lo + (i + 0.5) * step;
    rule.nodes[static_cast<size_t>(i)] = u;
    rule.weights[static_cast<size_t>(i)] =
        wendland(std::abs(t - u) / h) / (kWendlandMass * h) * step;
  }
  return rule;
}

double kebm_entry(const EmbeddingRule& a, const EmbeddingRule& b) {
  double acc = 0.0;
  const size_t qa = a.nodes.size(), qb = b.nodes.size();
  for (size_t i = 0; i < qa; ++i) {
    const double u = a.nodes[i];
    double inner = 0.0;
    for (size_t j = 0; j < qb; ++j)
      inner += std::min(u, b.nodes[j]) * b.weights[j];
    acc += a.weights[i] * inner;
  }
  return acc;
}

void check_spec(const KernelSpec& spec) {
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec)) {
    if (ou->theta <= 0.0 || ou->sigma <= 0.0)
      throw std::invalid_argument("OrnsteinUhlenbeck: theta and sigma must be positive");
  } else if (const auto* ke = std::get_if<KernelEmbeddedBM>(&spec)) {
    if (ke->bandwidth < 0.0)
      throw std::invalid_argument("KernelEmbeddedBM: bandwidth must be nonnegative");
    if (ke->quadrature_nodes < 2)
      throw std::invalid_argument("KernelEmbeddedBM: need >= 2 quadrature nodes");
  }
}

}  // namespace

double eval_kernel(const KernelSpec& spec, double s, double t) {
  check_spec(spec);
  if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0)
    throw std::invalid_argument("eval_kernel: arguments must lie in [0,1]");
  if (std::holds_alternative<BrownianMotion>(spec)) return bm_cov(s, t);
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec)) return ou_cov(*ou, s, t);
  const auto& ke = std::get<KernelEmbeddedBM>(spec);
  if (ke.bandwidth == 0.0) return bm_cov(s, t);
  const EmbeddingRule ra = embedding_rule(s, ke.bandwidth, ke.quadrature_nodes);
  const EmbeddingRule rb = embedding_rule(t, ke.bandwidth, ke.quadrature_nodes);
  return kebm_entry(ra, rb);
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const Grid& grid, Exec exec) {
  check_spec(spec);
  const int p = grid.size();
  if (p == 0) throw std::invalid_argument("kernel_matrix: empty grid");
  Eigen::MatrixXd K(p, p);

  if (const auto* ke = std::get_if<KernelEmbeddedBM>(&spec); ke && ke->bandwidth > 0.0) {
    std::vector<EmbeddingRule> rules(static_cast<size_t>(p));
    for (int j = 0; j < p; ++j)
      rules[static_cast<size_t>(j)] = embedding_rule(grid[j], ke->bandwidth,
                                                     ke->quadrature_nodes);
    // upper triangle flattened so entries balance across threads
    const std::int64_t cells = static_cast<std::int64_t>(p) * (p + 1) / 2;
    parallel_for(cells, exec, [&](std::int64_t c) {
      // invert c -> (j,k), j <= k
      std::int64_t j = 0, offset = c;
      while (offset >= p - j) {
        offset -= p - j;
        ++j;
      }
      const std::int64_t k = j + offset;
      K(j, k) = kebm_entry(rules[static_cast<size_t>(j)], rules[static_cast<size_t>(k)]);
      K(k, j) = K(j, k);
    });
  } else {
    for (int j = 0; j < p; ++j)
      for (int k = j; k < p; ++k) {
        K(j, k) = eval_kernel(spec, grid[j], grid[k]);
        K(k, j) = K(j, k);
      }
  }

  K = ((K + K.transpose()) / 2.0).eval();
  const double trace = K.trace();
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  if (min_eig < -1e-8 * trace)
    throw std::runtime_error("kernel_matrix: matrix is not PSD (min eigenvalue " +
                             std::to_string(min_eig) + ")");
  return KernelMatrix{std::move(K), grid};
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& matrix) {
  const double trace = matrix.trace();
  double jitter = 0.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::MatrixXd work = matrix;
    if (jitter > 0.0)
      work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = (jitter == 0.0) ? 1e-12 * trace : jitter * 100.0;
    if (jitter > 1e-8 * trace && attempt >= 4) break;
  }
  throw std::runtime_error("psd_factor: factorization failed after jitter repair");
}

std::string kernel_name(const KernelSpec& spec) {
  if (std::holds_alternative<BrownianMotion>(spec)) return "bm";
  if (std::holds_alternative<OrnsteinUhlenbeck>(spec)) return "ou";
  return "kebm";
}

}  // namespace markovcov
