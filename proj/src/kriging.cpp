#include "markovcov/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "markovcov/rng.hpp"
#include "markovcov/stats.hpp"

namespace markovcov {

KrigingSystem solve_kriging(const CovarianceFn& cov, const Grid& nodes, double target,
                            double ridge) {
  const int p = nodes.size();
  if (p < 1) throw std::invalid_argument("solve_kriging: empty node set");
  if (target < 0.0 || target > 1.0)
    throw std::invalid_argument("solve_kriging: target must lie in [0,1]");
  if (ridge < 0.0) throw std::invalid_argument("solve_kriging: negative ridge");

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (int j = 0; j < p; ++j)
    for (int k = j; k < p; ++k) {
      const double v = cov(nodes[j], nodes[k]);
      A(j, k) = v;
      A(k, j) = v;
    }
  A.topLeftCorner(p, p).diagonal().array() += ridge;
  A.block(0, p, p, 1).setOnes();
  A.block(p, 0, 1, p).setOnes();

  Eigen::VectorXd b(p + 1);
  for (int j = 0; j < p; ++j) b(j) = cov(target, nodes[j]);
  b(p) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd sol = lu.solve(b);
  const double residual = (A * sol - b).norm();
  const double scale = A.norm();
  if (!sol.allFinite() || residual > 1e-8 * std::max(scale, 1.0)) {
    const double cond = scale * lu.inverse().norm();
    throw std::runtime_error("solve_kriging: singular bordered system (residual " +
                             std::to_string(residual) + ", condition estimate " +
                             std::to_string(cond) + ")");
  }

  KrigingSystem system;
  system.nodes = nodes;
  system.target = target;
  system.ridge = ridge;
  system.weights = sol.head(p);
  system.multiplier = sol(p);
  system.residual_norm = residual;
  system.variance =
      cov(target, target) - system.weights.dot(b.head(p)) - system.multiplier;
  return system;
}

KrigingSystem solve_kriging(const KernelSpec& spec, const Grid& nodes, double target,
                            double ridge) {
  return solve_kriging(
      [&spec](double s, double t) { return eval_kernel(spec, s, t); }, nodes, target,
      ridge);
}

KrigingSystem solve_kriging(const EstimatedKernel& est, const Grid& nodes,
                            double target, double ridge) {
  return solve_kriging([&est](double s, double t) { return est(s, t); }, nodes, target,
                       ridge);
}

double default_ridge(const Eigen::MatrixXd& node_cov) {
  return 1e-8 * node_cov.trace() / static_cast<double>(node_cov.rows());
}

std::vector<KrigingSummaryRow> KrigingErrorTable::summary() const {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> abs_errors;
  std::map<std::string, double> sq_sum;
  std::map<std::string, int> failures;
  for (const auto& row : rows) {
    if (!abs_errors.count(row.estimator)) order.push_back(row.estimator);
    if (std::isnan(row.error)) {
      failures[row.estimator] += 1;
      abs_errors[row.estimator];
      continue;
    }
    abs_errors[row.estimator].push_back(std::abs(row.error));
    sq_sum[row.estimator] += row.error * row.error;
  }
  std::vector<KrigingSummaryRow> out;
  for (const auto& name : order) {
    auto& abses = abs_errors[name];
    KrigingSummaryRow s;
    s.estimator = name;
    s.count = static_cast<int>(abses.size());
    s.failures = failures.count(name) ? failures[name] : 0;
    if (!abses.empty()) {
      s.mse = sq_sum[name] / static_cast<double>(abses.size());
      s.median_abs = median(abses);
      s.q25 = empirical_quantile(abses, 0.25);
      s.q75 = empirical_quantile(abses, 0.75);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

// Target curve grid: a 4x finer regular grid joined with the estimation
// nodes and the prediction targets, so node values and targets come from one
// exact joint draw.
std::vector<double> union_grid(const Grid& nodes, const std::vector<double>& targets) {
  std::set<double> pts(nodes.points().begin(), nodes.points().end());
  for (double t : targets) pts.insert(t);
  const int fine = 4 * nodes.size();
  for (int k = 0; k < fine; ++k) pts.insert(bin_midpoint(k, fine));
  return {pts.begin(), pts.end()};
}

}  // namespace

KrigingErrorTable kriging_error_benchmark(const KrigingBenchmarkConfig& config,
                                          Exec exec) {
  if (config.replicates < 1)
    throw std::invalid_argument("kriging_error_benchmark: need replicates >= 1");
  if (config.p < 3)
    throw std::invalid_argument("kriging_error_benchmark: need p >= 3");

  const Grid nodes = Grid::regular_midpoints(config.p);
  std::vector<double> targets;
  if (config.policy == TargetPolicy::midpoints) {
    for (int j = 0; j + 1 < config.p; ++j)
      targets.push_back(0.5 * (nodes[j] + nodes[j + 1]));
  } else {
    for (int j = 1; j + 1 < config.p; ++j) targets.push_back(nodes[j]);
  }

  const std::vector<double> joint = union_grid(nodes, targets);
  const Grid joint_grid{std::vector<double>(joint)};
  const KernelMatrix joint_cov = kernel_matrix(config.spec, joint_grid, exec);
  const Eigen::MatrixXd joint_factor = psd_factor(joint_cov.values);
  std::vector<int> node_pos(static_cast<size_t>(config.p));
  for (int j = 0; j < config.p; ++j)
    node_pos[static_cast<size_t>(j)] = static_cast<int>(
        std::lower_bound(joint.begin(), joint.end(), nodes[j]) - joint.begin());
  std::vector<int> target_pos(targets.size());
  for (size_t j = 0; j < targets.size(); ++j)
    target_pos[j] = static_cast<int>(
        std::lower_bound(joint.begin(), joint.end(), targets[j]) - joint.begin());

  const KernelMatrix train_cov = kernel_matrix(config.spec, nodes, exec);
  const Eigen::MatrixXd train_factor = psd_factor(train_cov.values);

  std::vector<std::string> names;
  if (config.include_oracle) names.push_back("oracle");
  for (auto kind : config.estimators) names.push_back(estimator_name(kind));

  const size_t per_rep = names.size() * targets.size();
  std::vector<KrigingErrorRow> rows(static_cast<size_t>(config.replicates) * per_rep);

  parallel_for(config.replicates, exec, [&](std::int64_t rep) {
    Rng rng = make_rng(config.seed, static_cast<std::uint64_t>(rep));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // training set on the estimation grid
    Eigen::MatrixXd X(config.n, config.p);
    Eigen::VectorXd z(config.p);
    for (int i = 0; i < config.n; ++i) {
      for (int j = 0; j < config.p; ++j) z(j) = gauss(rng);
      X.row(i) = (train_factor * z).transpose();
    }
    // fresh target curve on the joint grid
    Eigen::VectorXd zj(static_cast<int>(joint.size()));
    for (int j = 0; j < zj.size(); ++j) zj(j) = gauss(rng);
    const Eigen::VectorXd target_curve = joint_factor * zj;
    Eigen::VectorXd node_values(config.p);
    for (int j = 0; j < config.p; ++j) node_values(j) = target_curve(node_pos[static_cast<size_t>(j)]);

    ObservationSet obs;
    obs.regime = Regime::dense;
    obs.grid = nodes;
    obs.curves.resize(static_cast<size_t>(config.n));
    for (int i = 0; i < config.n; ++i) {
      Curve& c = obs.curves[static_cast<size_t>(i)];
      c.times = nodes.points();
      c.values.assign(X.row(i).begin(), X.row(i).end());
    }

    size_t slot = static_cast<size_t>(rep) * per_rep;
    for (const auto& name : names) {
      bool fitted = true;
      EstimatedKernel est;
      CovarianceFn cov;
      if (name == "oracle") {
        cov = [&](double s, double t) { return eval_kernel(config.spec, s, t); };
      } else {
        try {
          const EstimatorKind kind = estimator_from_name(name);
          switch (kind) {
            case EstimatorKind::markov:
              est = markov_estimate(bin_observations(obs, config.p), 0.0);
              break;
            case EstimatorKind::empirical:
              est = empirical_estimate(obs);
              break;
            case EstimatorKind::smoothed:
              est = smoothed_estimate(obs, config.smoother_bandwidth);
              break;
            case EstimatorKind::triangular:
              est = triangular_estimate(obs, config.smoother_bandwidth);
              break;
          }
          cov = [&est](double s, double t) { return est(s, t); };
        } catch (const std::exception&) {
          fitted = false;
        }
      }
      for (size_t ti = 0; ti < targets.size(); ++ti, ++slot) {
        KrigingErrorRow& row = rows[slot];
        row.estimator = name;
        row.replicate = static_cast<int>(rep);
        row.target = targets[ti];
        row.error = std::numeric_limits<double>::quiet_NaN();
        if (!fitted) continue;
        try {
          Grid sys_nodes = nodes;
          Eigen::VectorXd sys_values = node_values;
          if (config.policy == TargetPolicy::leave_node_out) {
            std::vector<double> kept;
            std::vector<double> vals;
            for (int j = 0; j < config.p; ++j) {
              if (nodes[j] == targets[ti]) continue;
              kept.push_back(nodes[j]);
              vals.push_back(node_values(j));
            }
            sys_nodes = Grid(std::move(kept));
            sys_values = Eigen::Map<Eigen::VectorXd>(vals.data(),
                                                     static_cast<long>(vals.size()));
          }
          Eigen::MatrixXd sys_cov(sys_nodes.size(), sys_nodes.size());
          for (int a = 0; a < sys_nodes.size(); ++a)
            for (int bcol = a; bcol < sys_nodes.size(); ++bcol) {
              sys_cov(a, bcol) = cov(sys_nodes[a], sys_nodes[bcol]);
              sys_cov(bcol, a) = sys_cov(a, bcol);
            }
          const double ridge =
              config.ridge_scale * sys_cov.trace() / sys_nodes.size();
          KrigingSystem system = solve_kriging(cov, sys_nodes, targets[ti], ridge);
          row.error = system.predict(sys_values) -
                      target_curve(target_pos[ti]);
        } catch (const std::exception&) {
          // recorded as NaN; the sweep keeps going
        }
      }
    }
  });

  KrigingErrorTable table;
  table.rows = std::move(rows);
  return table;
}

}  // namespace markovcov
