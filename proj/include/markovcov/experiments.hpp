#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "markovcov/estimation.hpp"
#include "markovcov/kernels.hpp"
#include "markovcov/kriging.hpp"
#include "markovcov/parallel.hpp"
#include "markovcov/testing.hpp"

namespace markovcov {

/// Shared configuration of the experiment drivers. Outputs are a pure
/// function of (config, seed); replicate cells run concurrently on derived
/// seeds and failed cells are recorded without aborting the sweep.
struct ExperimentConfig {
  std::string kind;  // convergence | surfaces | kriging | power | roc
  KernelSpec process = BrownianMotion{};
  std::vector<int> n_values{200};
  std::vector<int> p_values{20};
  int per_curve = 0;  // r > 0: irregular design (convergence experiment)
  std::vector<double> h_values;
  double alpha = 0.05;
  int replicates = 0;  // 0 -> per-kind default
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  std::vector<EstimatorKind> estimators{EstimatorKind::markov,
                                        EstimatorKind::empirical};
  bool include_oracle = true;
  Calibration calibration = GaussianMC{};
  double noise_sd = 0.0;
  double smoother_bandwidth = 0.1;
  TargetPolicy kriging_policy = TargetPolicy::midpoints;
  Exec exec = Exec::parallel;

  std::map<std::string, std::string> canonical() const;
};

struct ConvergenceCell {
  std::string estimator;
  int n = 0;
  double mean_l2 = 0.0;
  double se_l2 = 0.0;
  int replicates = 0;
  int failures = 0;
};

struct ConvergenceResult {
  std::vector<ConvergenceCell> cells;
  std::map<std::string, double> slopes;  // log-log slope per estimator
};

/// Mean and standard error of the continuum L2 error per (estimator, n),
/// plus a log-log slope fit per estimator. p follows n when several p values
/// are given (paired lists), otherwise stays fixed.
ConvergenceResult run_convergence(const ExperimentConfig& config);

/// Nodal matrices of the four estimators on one dataset plus a heat-map SVG.
struct SurfacesResult {
  std::vector<EstimatedKernel> estimates;
};
SurfacesResult run_surfaces(const ExperimentConfig& config);

KrigingErrorTable run_kriging(const ExperimentConfig& config);

/// MSE matrix over an (n, p) sweep, one per estimator.
struct KrigingContourResult {
  std::vector<int> n_values;
  std::vector<int> p_values;
  std::map<std::string, Eigen::MatrixXd> mse;  // rows = n, cols = p
};
KrigingContourResult run_kriging_contour(const ExperimentConfig& config);

std::vector<PowerRow> run_power(const ExperimentConfig& config);
std::vector<RocPoint> run_roc(const ExperimentConfig& config);

/// Runs the named experiment and writes its CSV/SVG outputs under
/// config.out_dir. Returns the list of files written.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config);

}  // namespace markovcov
