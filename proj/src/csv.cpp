#include "markovcov/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "markovcov/version.hpp"

namespace markovcov::csv {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

double parse_double(const std::string& field) {
  try {
    return std::stod(field);
  } catch (const std::exception&) {
    throw std::runtime_error("csv: cannot parse number '" + field + "'");
  }
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string provenance_block(const std::map<std::string, std::string>& config,
                             std::uint64_t seed) {
  std::string canonical;
  for (const auto& [k, v] : config) canonical += k + "=" + v + ";";
  std::ostringstream out;
  out << "# markovcov " << kVersion << "\n";
  out << "# config: " << canonical << "\n";
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical)));
  out << "# config_hash=" << hash << " seed=" << seed << "\n";
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string dense_curves_to_csv(const ObservationSet& obs) {
  if (obs.regime != Regime::dense || !obs.grid)
    throw std::invalid_argument("dense_curves_to_csv: dense regime required");
  std::ostringstream out;
  const auto& pts = obs.grid->points();
  for (size_t j = 0; j < pts.size(); ++j)
    out << (j ? "," : "") << format_double(pts[j]);
  out << "\n";
  for (const auto& curve : obs.curves) {
    if (curve.values.size() != pts.size())
      throw std::invalid_argument("dense_curves_to_csv: ragged curve");
    for (size_t j = 0; j < curve.values.size(); ++j)
      out << (j ? "," : "") << format_double(curve.values[j]);
    out << "\n";
  }
  return out.str();
}

ObservationSet dense_curves_from_csv(const std::string& text) {
  const auto lines = data_lines(text);
  if (lines.size() < 2)
    throw std::runtime_error("dense curve csv: need a grid row and at least one curve");
  std::vector<double> grid_pts;
  for (const auto& f : split(lines[0], ',')) grid_pts.push_back(parse_double(f));
  ObservationSet obs;
  obs.regime = Regime::dense;
  obs.grid = Grid(grid_pts);
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != grid_pts.size())
      throw std::runtime_error("dense curve csv: row " + std::to_string(i) +
                               " does not match the grid (missing values?)");
    Curve c;
    c.times = grid_pts;
    for (const auto& f : fields) c.values.push_back(parse_double(f));
    obs.curves.push_back(std::move(c));
  }
  return obs;
}

std::string irregular_curves_to_csv(const ObservationSet& obs) {
  std::ostringstream out;
  out << "curve_id,t,y\n";
  for (size_t i = 0; i < obs.curves.size(); ++i) {
    const auto& c = obs.curves[i];
    for (size_t j = 0; j < c.times.size(); ++j)
      out << i << "," << format_double(c.times[j]) << ","
          << format_double(c.values[j]) << "\n";
  }
  return out.str();
}

ObservationSet irregular_curves_from_csv(const std::string& text) {
  const auto lines = data_lines(text);
  if (lines.empty()) throw std::runtime_error("irregular curve csv: empty");
  size_t start = 0;
  if (lines[0].rfind("curve_id", 0) == 0) start = 1;
  std::map<long, Curve> curves;
  for (size_t i = start; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != 3)
      throw std::runtime_error("irregular curve csv: expected curve_id,t,y");
    const long id = std::stol(fields[0]);
    curves[id].times.push_back(parse_double(fields[1]));
    curves[id].values.push_back(parse_double(fields[2]));
  }
  ObservationSet obs;
  obs.regime = Regime::irregular;
  for (auto& [id, curve] : curves) {
    // sort by time per curve
    std::vector<size_t> idx(curve.times.size());
    for (size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return curve.times[a] < curve.times[b]; });
    Curve sorted;
    for (size_t j : idx) {
      sorted.times.push_back(curve.times[j]);
      sorted.values.push_back(curve.values[j]);
    }
    obs.curves.push_back(std::move(sorted));
  }
  return obs;
}

std::string estimated_kernel_to_csv(const EstimatedKernel& est) {
  std::ostringstream out;
  out << "# estimated-kernel tag=" << estimator_name(est.kind())
      << " noise_var=" << format_double(est.noise_var());
  if (!est.clamped_bins().empty()) {
    out << " clamped_bins=";
    for (size_t i = 0; i < est.clamped_bins().size(); ++i)
      out << (i ? ";" : "") << est.clamped_bins()[i];
  }
  out << "\n";
  const auto& pts = est.nodes().points();
  for (size_t j = 0; j < pts.size(); ++j)
    out << (j ? "," : "") << format_double(pts[j]);
  out << "\n";
  for (int a = 0; a < est.nodal().rows(); ++a) {
    for (int b = 0; b < est.nodal().cols(); ++b)
      out << (b ? "," : "") << format_double(est.nodal()(a, b));
    out << "\n";
  }
  return out.str();
}

EstimatedKernel estimated_kernel_from_csv(const std::string& text) {
  EstimatorKind kind = EstimatorKind::empirical;
  double noise_var = 0.0;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("# estimated-kernel", 0) != 0) continue;
    std::stringstream fields(line);
    std::string tok;
    while (fields >> tok) {
      if (tok.rfind("tag=", 0) == 0) kind = estimator_from_name(tok.substr(4));
      if (tok.rfind("noise_var=", 0) == 0) noise_var = parse_double(tok.substr(10));
    }
  }
  const auto lines = data_lines(text);
  if (lines.size() < 2) throw std::runtime_error("estimated kernel csv: truncated");
  std::vector<double> pts;
  for (const auto& f : split(lines[0], ',')) pts.push_back(parse_double(f));
  const int p = static_cast<int>(pts.size());
  if (static_cast<int>(lines.size()) != p + 1)
    throw std::runtime_error("estimated kernel csv: expected " + std::to_string(p) +
                             " matrix rows");
  Eigen::MatrixXd nodal(p, p);
  for (int a = 0; a < p; ++a) {
    const auto fields = split(lines[static_cast<size_t>(a + 1)], ',');
    if (static_cast<int>(fields.size()) != p)
      throw std::runtime_error("estimated kernel csv: ragged matrix row");
    for (int b = 0; b < p; ++b) nodal(a, b) = parse_double(fields[static_cast<size_t>(b)]);
  }
  return EstimatedKernel(Grid(pts), std::move(nodal), kind, noise_var);
}

std::string test_report_to_csv(const TestReport& report) {
  std::ostringstream out;
  out << "j,rho,z,scaled_abs_z\n";
  for (size_t i = 0; i < report.indices.size(); ++i) {
    out << report.indices[i] << "," << format_double(report.partial_corr(static_cast<long>(i)))
        << "," << format_double(report.z(static_cast<long>(i))) << ","
        << format_double(report.scaled_abs_z(static_cast<long>(i))) << "\n";
  }
  out << "# summary\n";
  out << "statistic,critical_value,p_value,decision,calibration,alpha,n,p\n";
  out << format_double(report.statistic) << "," << format_double(report.critical_value)
      << "," << format_double(report.p_value) << ","
      << (report.reject ? "RejectMarkov" : "FailToReject") << "," << report.calibration
      << "," << format_double(report.alpha) << "," << report.n << "," << report.p
      << "\n";
  return out.str();
}

ObservationSet curves_from_csv_file(const std::filesystem::path& path, bool irregular) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return irregular ? irregular_curves_from_csv(buf.str())
                   : dense_curves_from_csv(buf.str());
}

}  // namespace markovcov::csv
