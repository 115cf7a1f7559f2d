#include "markovcov/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "markovcov/csv.hpp"
#include "markovcov/rng.hpp"
#include "markovcov/stats.hpp"
#include "markovcov/svg.hpp"

namespace markovcov {

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream out;
  for (size_t i = 0; i < v.size(); ++i) out << (i ? ";" : "") << v[i];
  return out.str();
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream out;
  for (size_t i = 0; i < v.size(); ++i) out << (i ? ";" : "") << csv::format_double(v[i]);
  return out.str();
}

std::string spec_string(const KernelSpec& spec) {
  if (std::holds_alternative<BrownianMotion>(spec)) return "bm";
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec)) {
    return "ou(theta=" + csv::format_double(ou->theta) +
           ",sigma=" + csv::format_double(ou->sigma) + ")";
  }
  const auto& ke = std::get<KernelEmbeddedBM>(spec);
  return "kebm(h=" + csv::format_double(ke.bandwidth) +
         ",q=" + std::to_string(ke.quadrature_nodes) + ")";
}

int default_replicates(const std::string& kind, int requested) {
  if (requested > 0) return requested;
  if (kind == "convergence") return 200;
  if (kind == "kriging") return 1000;
  return 500;  // power, roc
}

}  // namespace

std::map<std::string, std::string> ExperimentConfig::canonical() const {
  std::map<std::string, std::string> m;
  m["kind"] = kind;
  m["process"] = spec_string(process);
  m["n"] = join_ints(n_values);
  m["p"] = join_ints(p_values);
  if (per_curve > 0) m["r"] = std::to_string(per_curve);
  if (!h_values.empty()) m["h"] = join_doubles(h_values);
  m["alpha"] = csv::format_double(alpha);
  m["replicates"] = std::to_string(default_replicates(kind, replicates));
  m["seed"] = std::to_string(seed);
  std::string est;
  for (size_t i = 0; i < estimators.size(); ++i)
    est += (i ? ";" : "") + estimator_name(estimators[i]);
  if (include_oracle) est += est.empty() ? "oracle" : ";oracle";
  m["estimators"] = est;
  m["calibration"] = std::holds_alternative<GaussianMC>(calibration) ? "mc" : "bonferroni";
  m["noise_sd"] = csv::format_double(noise_sd);
  m["bandwidth"] = csv::format_double(smoother_bandwidth);
  m["t0_policy"] =
      kriging_policy == TargetPolicy::midpoints ? "midpoints" : "leave-node-out";
  return m;
}

ConvergenceResult run_convergence(const ExperimentConfig& config) {
  if (config.n_values.size() < 2)
    throw std::invalid_argument("run_convergence: need several n levels");
  const bool paired_p = config.p_values.size() == config.n_values.size();
  if (!paired_p && config.p_values.size() != 1)
    throw std::invalid_argument("run_convergence: p list must be scalar or match n list");
  const bool irregular = config.per_curve > 0;
  if (irregular)
    for (EstimatorKind kind : config.estimators)
      if (kind != EstimatorKind::markov)
        throw std::invalid_argument(
            "run_convergence: only the markov estimator handles irregular designs");
  const int replicates = default_replicates("convergence", config.replicates);

  ConvergenceResult result;
  std::map<int, Eigen::MatrixXd> truth_cache;  // resolution -> truth matrix

  for (size_t level = 0; level < config.n_values.size(); ++level) {
    const int n = config.n_values[level];
    const int p = paired_p ? config.p_values[level] : config.p_values.front();
    const Grid grid = Grid::regular_midpoints(p);
    Eigen::MatrixXd L;
    if (!irregular)
      L = psd_factor(kernel_matrix(config.process, grid, config.exec).values);
    const int resolution = std::max(64, 2 * p);
    if (!truth_cache.count(resolution))
      truth_cache[resolution] = kernel_on_midgrid(config.process, resolution, config.exec);
    const Eigen::MatrixXd& truth = truth_cache[resolution];

    struct Slot {
      std::map<std::string, double> err;
      std::set<std::string> failed;
    };
    std::vector<Slot> slots(static_cast<size_t>(replicates));

    parallel_for(replicates, config.exec, [&](std::int64_t rep) {
      const std::uint64_t rep_seed =
          derive_seed(derive_seed(config.seed, level), static_cast<std::uint64_t>(rep));
      ObservationSet obs;
      if (irregular) {
        obs = sample_curves(config.process, IrregularDesign{config.per_curve}, n,
                            config.noise_sd, rep_seed, Exec::serial);
      } else {
        Rng rng(rep_seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        obs.regime = Regime::dense;
        obs.grid = grid;
        obs.noise_sd = config.noise_sd;
        obs.curves.resize(static_cast<size_t>(n));
        Eigen::VectorXd z(p);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < p; ++j) z(j) = gauss(rng);
          Eigen::VectorXd x = L * z;
          Curve& c = obs.curves[static_cast<size_t>(i)];
          c.times = grid.points();
          c.values.resize(static_cast<size_t>(p));
          for (int j = 0; j < p; ++j) {
            double v = x(j);
            if (config.noise_sd > 0.0) v += config.noise_sd * gauss(rng);
            c.values[static_cast<size_t>(j)] = v;
          }
        }
      }
      Slot& slot = slots[static_cast<size_t>(rep)];
      for (EstimatorKind kind : config.estimators) {
        const std::string name = estimator_name(kind);
        try {
          EstimatedKernel est;
          switch (kind) {
            case EstimatorKind::markov: {
              // dense simulation declares its noise level; irregular designs
              // estimate it from the within-bin contrasts
              std::optional<double> nu;
              if (!irregular || config.noise_sd == 0.0)
                nu = config.noise_sd * config.noise_sd;
              est = markov_estimate(bin_observations(obs, p), nu);
              break;
            }
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
          slot.err[name] = l2_error(est, truth);
        } catch (const std::exception&) {
          slot.failed.insert(name);
        }
      }
    });

    for (EstimatorKind kind : config.estimators) {
      const std::string name = estimator_name(kind);
      std::vector<double> errs;
      int failures = 0;
      for (const auto& slot : slots) {
        if (slot.failed.count(name)) {
          ++failures;
        } else if (slot.err.count(name)) {
          errs.push_back(slot.err.at(name));
        }
      }
      ConvergenceCell cell;
      cell.estimator = name;
      cell.n = n;
      cell.replicates = static_cast<int>(errs.size());
      cell.failures = failures;
      if (!errs.empty()) {
        cell.mean_l2 = mean(errs);
        cell.se_l2 = errs.size() > 1
                         ? sample_sd(errs) / std::sqrt(static_cast<double>(errs.size()))
                         : 0.0;
      }
      result.cells.push_back(std::move(cell));
    }
  }

  for (EstimatorKind kind : config.estimators) {
    const std::string name = estimator_name(kind);
    std::vector<double> log_n, log_err;
    for (const auto& cell : result.cells) {
      if (cell.estimator != name || cell.replicates == 0 || cell.mean_l2 <= 0.0) continue;
      log_n.push_back(std::log(static_cast<double>(cell.n)));
      log_err.push_back(std::log(cell.mean_l2));
    }
    if (log_n.size() >= 2) result.slopes[name] = fit_slope(log_n, log_err);
  }
  return result;
}

SurfacesResult run_surfaces(const ExperimentConfig& config) {
  const int p = config.p_values.front();
  const int n = config.n_values.front();
  const ObservationSet obs =
      sample_curves(config.process, DenseDesign{Grid::regular_midpoints(p)}, n,
                    config.noise_sd, config.seed, config.exec);
  SurfacesResult result;
  std::optional<double> nu;
  if (config.noise_sd == 0.0) nu = 0.0;
  result.estimates.push_back(markov_estimate(bin_observations(obs, p), nu));
  result.estimates.push_back(empirical_estimate(obs));
  result.estimates.push_back(smoothed_estimate(obs, config.smoother_bandwidth));
  result.estimates.push_back(triangular_estimate(obs, config.smoother_bandwidth));
  return result;
}

KrigingErrorTable run_kriging(const ExperimentConfig& config) {
  KrigingBenchmarkConfig bench;
  bench.spec = config.process;
  bench.estimators = config.estimators;
  bench.include_oracle = config.include_oracle;
  bench.p = config.p_values.front();
  bench.n = config.n_values.front();
  bench.replicates = default_replicates("kriging", config.replicates);
  bench.policy = config.kriging_policy;
  bench.smoother_bandwidth = config.smoother_bandwidth;
  bench.seed = config.seed;
  return kriging_error_benchmark(bench, config.exec);
}

KrigingContourResult run_kriging_contour(const ExperimentConfig& config) {
  KrigingContourResult result;
  result.n_values = config.n_values;
  result.p_values = config.p_values;
  std::vector<std::string> names;
  if (config.include_oracle) names.push_back("oracle");
  for (auto kind : config.estimators) names.push_back(estimator_name(kind));
  for (const auto& name : names)
    result.mse[name] = Eigen::MatrixXd::Zero(
        static_cast<long>(config.n_values.size()),
        static_cast<long>(config.p_values.size()));

  for (size_t a = 0; a < config.n_values.size(); ++a)
    for (size_t b = 0; b < config.p_values.size(); ++b) {
      KrigingBenchmarkConfig bench;
      bench.spec = config.process;
      bench.estimators = config.estimators;
      bench.include_oracle = config.include_oracle;
      bench.p = config.p_values[b];
      bench.n = config.n_values[a];
      bench.replicates = config.replicates > 0 ? config.replicates : 200;
      bench.policy = config.kriging_policy;
      bench.smoother_bandwidth = config.smoother_bandwidth;
      bench.seed = derive_seed(config.seed, a, b);
      const auto table = kriging_error_benchmark(bench, config.exec);
      for (const auto& s : table.summary())
        if (result.mse.count(s.estimator))
          result.mse[s.estimator](static_cast<long>(a), static_cast<long>(b)) = s.mse;
    }
  return result;
}

std::vector<PowerRow> run_power(const ExperimentConfig& config) {
  std::vector<double> hs = config.h_values;
  if (hs.empty()) hs = {0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  const int replicates = default_replicates("power", config.replicates);
  return power_curve(hs, config.p_values.front(), config.n_values.front(), config.alpha,
                     config.calibration, replicates, config.seed, config.exec);
}

std::vector<RocPoint> run_roc(const ExperimentConfig& config) {
  const int replicates = default_replicates("roc", config.replicates);
  const KernelSpec null_spec = BrownianMotion{};
  KernelSpec alt_spec = config.process;
  if (std::holds_alternative<BrownianMotion>(alt_spec) && !config.h_values.empty())
    alt_spec = KernelEmbeddedBM{config.h_values.front(), 200};
  return roc_curve(null_spec, alt_spec, config.p_values.front(),
                   config.n_values.front(), replicates, config.seed, config.exec);
}

namespace {

std::filesystem::path write_output(const std::filesystem::path& dir,
                                   const std::string& name, const std::string& body) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  csv::write_text(path, body);
  return path;
}

}  // namespace

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config) {
  const std::string provenance = csv::provenance_block(config.canonical(), config.seed);
  std::vector<std::filesystem::path> written;

  if (config.kind == "convergence") {
    const auto result = run_convergence(config);
    std::ostringstream body;
    body << provenance << "estimator,n,mean_l2,se_l2,replicates,failures\n";
    for (const auto& c : result.cells)
      body << c.estimator << "," << c.n << "," << csv::format_double(c.mean_l2) << ","
           << csv::format_double(c.se_l2) << "," << c.replicates << "," << c.failures
           << "\n";
    written.push_back(write_output(config.out_dir, "convergence.csv", body.str()));

    std::ostringstream slopes;
    slopes << provenance << "estimator,loglog_slope\n";
    for (const auto& [name, slope] : result.slopes)
      slopes << name << "," << csv::format_double(slope) << "\n";
    written.push_back(write_output(config.out_dir, "convergence_slopes.csv", slopes.str()));

    std::vector<svg::Series> series;
    std::map<std::string, svg::Series> by_name;
    for (const auto& c : result.cells) {
      if (c.replicates == 0) continue;
      auto& s = by_name[c.estimator];
      s.label = c.estimator;
      s.x.push_back(c.n);
      s.y.push_back(c.mean_l2);
    }
    for (auto& [name, s] : by_name) {
      s.color = "";
      series.push_back(s);
    }
    written.push_back(write_output(
        config.out_dir, "convergence.svg",
        svg::line_plot(series, "L2 error vs n (" + spec_string(config.process) + ")",
                       "n", "L2 error", true, true)));
    return written;
  }

  if (config.kind == "surfaces") {
    const auto result = run_surfaces(config);
    std::vector<Eigen::MatrixXd> mats;
    std::vector<std::string> titles;
    for (const auto& est : result.estimates) {
      const std::string name = estimator_name(est.kind());
      written.push_back(write_output(config.out_dir, "surface_" + name + ".csv",
                                     provenance + csv::estimated_kernel_to_csv(est)));
      mats.push_back(est.nodal());
      titles.push_back(name);
    }
    written.push_back(write_output(
        config.out_dir, "surfaces.svg",
        svg::heatmap_grid(mats, titles,
                          "Estimated covariance (" + spec_string(config.process) + ")")));
    return written;
  }

  if (config.kind == "kriging") {
    const bool contour = config.n_values.size() > 1 || config.p_values.size() > 1;
    if (contour) {
      const auto result = run_kriging_contour(config);
      for (const auto& [name, mse] : result.mse) {
        std::ostringstream body;
        body << provenance << "n\\p";
        for (int p : result.p_values) body << "," << p;
        body << "\n";
        for (size_t a = 0; a < result.n_values.size(); ++a) {
          body << result.n_values[a];
          for (size_t b = 0; b < result.p_values.size(); ++b)
            body << "," << csv::format_double(mse(static_cast<long>(a), static_cast<long>(b)));
          body << "\n";
        }
        written.push_back(
            write_output(config.out_dir, "kriging_contour_" + name + ".csv", body.str()));
      }
      return written;
    }
    const auto table = run_kriging(config);
    std::ostringstream body;
    body << provenance << "estimator,replicate,t0,error\n";
    for (const auto& row : table.rows)
      body << row.estimator << "," << row.replicate << "," << csv::format_double(row.target)
           << "," << csv::format_double(row.error) << "\n";
    written.push_back(write_output(config.out_dir, "kriging_errors.csv", body.str()));

    std::ostringstream summary;
    summary << provenance << "estimator,mse,median_abs,q25,q75,count,failures\n";
    std::vector<svg::BoxStats> boxes;
    for (const auto& s : table.summary()) {
      summary << s.estimator << "," << csv::format_double(s.mse) << ","
              << csv::format_double(s.median_abs) << "," << csv::format_double(s.q25)
              << "," << csv::format_double(s.q75) << "," << s.count << "," << s.failures
              << "\n";
      std::vector<double> abses;
      for (const auto& row : table.rows)
        if (row.estimator == s.estimator && !std::isnan(row.error))
          abses.push_back(std::abs(row.error));
      if (!abses.empty()) {
        svg::BoxStats box;
        box.label = s.estimator;
        box.q25 = s.q25;
        box.median = s.median_abs;
        box.q75 = s.q75;
        box.lo = empirical_quantile(abses, 0.05);
        box.hi = empirical_quantile(abses, 0.95);
        boxes.push_back(box);
      }
    }
    written.push_back(write_output(config.out_dir, "kriging_summary.csv", summary.str()));
    written.push_back(write_output(
        config.out_dir, "kriging.svg",
        svg::boxplot(boxes, "Kriging |error| (" + spec_string(config.process) + ")",
                     "|prediction error|")));
    return written;
  }

  if (config.kind == "power") {
    const auto rows = run_power(config);
    std::ostringstream body;
    body << provenance << "h,power,wilson_lo,wilson_hi,replicates\n";
    svg::Series s;
    s.label = "power";
    for (const auto& r : rows) {
      body << csv::format_double(r.h) << "," << csv::format_double(r.power) << ","
           << csv::format_double(r.wilson_lo) << "," << csv::format_double(r.wilson_hi)
           << "," << r.replicates << "\n";
      s.x.push_back(r.h);
      s.y.push_back(r.power);
    }
    written.push_back(write_output(config.out_dir, "power.csv", body.str()));
    written.push_back(write_output(config.out_dir, "power.svg",
                                   svg::line_plot({s}, "Rejection rate vs bandwidth",
                                                  "h", "power")));
    return written;
  }

  if (config.kind == "roc") {
    const auto roc = run_roc(config);
    std::ostringstream body;
    body << provenance << "# auc=" << csv::format_double(roc_auc(roc)) << "\n"
         << "fpr,tpr\n";
    svg::Series s;
    s.label = "roc";
    for (const auto& pt : roc) {
      body << csv::format_double(pt.fpr) << "," << csv::format_double(pt.tpr) << "\n";
      s.x.push_back(pt.fpr);
      s.y.push_back(pt.tpr);
    }
    written.push_back(write_output(config.out_dir, "roc.csv", body.str()));
    written.push_back(write_output(config.out_dir, "roc.svg",
                                   svg::line_plot({s}, "ROC", "FPR", "TPR")));
    return written;
  }

  throw std::invalid_argument("unknown experiment kind: " + config.kind);
}

}  // namespace markovcov
