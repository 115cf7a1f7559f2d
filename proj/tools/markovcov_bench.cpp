// Times the OpenMP kernels against their serial reference paths and checks
// that both produce identical results.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "markovcov/estimation.hpp"
#include "markovcov/kernels.hpp"
#include "markovcov/kriging.hpp"
#include "markovcov/observations.hpp"
#include "markovcov/parallel.hpp"
#include "markovcov/testing.hpp"

namespace {

using namespace markovcov;
using Clock = std::chrono::steady_clock;

template <class F>
double time_ms(F&& fn) {
  const auto start = Clock::now();
  fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms,
            bool identical) {
  std::printf("%-34s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx   %s\n",
              name.c_str(), serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", max_threads());

  {
    const KernelSpec spec = KernelEmbeddedBM{0.1, 200};
    const Grid grid = Grid::regular_midpoints(100);
    KernelMatrix serial_out, parallel_out;
    const double ts = time_ms([&] { serial_out = kernel_matrix(spec, grid, Exec::serial); });
    const double tp = time_ms([&] { parallel_out = kernel_matrix(spec, grid, Exec::parallel); });
    report("embedded kernel matrix p=100", ts, tp,
           serial_out.values == parallel_out.values);
  }

  {
    const KernelSpec spec = BrownianMotion{};
    const DenseDesign design{Grid::regular_midpoints(100)};
    ObservationSet serial_out, parallel_out;
    const double ts =
        time_ms([&] { serial_out = sample_curves(spec, design, 20000, 0.0, 7, Exec::serial); });
    const double tp =
        time_ms([&] { parallel_out = sample_curves(spec, design, 20000, 0.0, 7, Exec::parallel); });
    bool same = serial_out.curve_count() == parallel_out.curve_count();
    for (int i = 0; same && i < serial_out.curve_count(); ++i)
      same = serial_out.curves[static_cast<size_t>(i)].values ==
             parallel_out.curves[static_cast<size_t>(i)].values;
    report("curve sampling n=20000 p=100", ts, tp, same);
  }

  {
    const ObservationSet obs = sample_curves(
        BrownianMotion{}, DenseDesign{Grid::regular_midpoints(100)}, 500, 0.0, 11,
        Exec::parallel);
    TestReport serial_out, parallel_out;
    const double ts = time_ms(
        [&] { serial_out = markov_test(obs, 0.05, GaussianMC{10000}, 3, Exec::serial); });
    const double tp = time_ms(
        [&] { parallel_out = markov_test(obs, 0.05, GaussianMC{10000}, 3, Exec::parallel); });
    report("markov test p=100 mc=10000", ts, tp,
           serial_out.statistic == parallel_out.statistic &&
               serial_out.critical_value == parallel_out.critical_value);
  }

  {
    KrigingBenchmarkConfig config;
    config.spec = BrownianMotion{};
    config.p = 20;
    config.n = 200;
    config.replicates = 200;
    config.seed = 5;
    KrigingErrorTable serial_out, parallel_out;
    const double ts =
        time_ms([&] { serial_out = kriging_error_benchmark(config, Exec::serial); });
    const double tp =
        time_ms([&] { parallel_out = kriging_error_benchmark(config, Exec::parallel); });
    bool same = serial_out.rows.size() == parallel_out.rows.size();
    for (size_t i = 0; same && i < serial_out.rows.size(); ++i) {
      const auto& a = serial_out.rows[i];
      const auto& b = parallel_out.rows[i];
      same = a.estimator == b.estimator &&
             ((std::isnan(a.error) && std::isnan(b.error)) || a.error == b.error);
    }
    report("kriging benchmark 200 reps", ts, tp, same);
  }

  return 0;
}
