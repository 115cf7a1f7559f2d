#include "markovcov/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace markovcov::svg {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 440;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

struct Scale {
  double lo, hi;
  bool log;
  double to_unit(double v) const {
    const double a = log ? std::log10(v) : v;
    const double l = log ? std::log10(lo) : lo;
    const double h = log ? std::log10(hi) : hi;
    return (a - l) / (h - l);
  }
};

std::vector<double> ticks(const Scale& s, int count) {
  std::vector<double> out;
  if (s.log) {
    const int e_lo = static_cast<int>(std::floor(std::log10(s.lo)));
    const int e_hi = static_cast<int>(std::ceil(std::log10(s.hi)));
    for (int e = e_lo; e <= e_hi; ++e) out.push_back(std::pow(10.0, e));
  } else {
    for (int i = 0; i <= count; ++i)
      out.push_back(s.lo + (s.hi - s.lo) * i / count);
  }
  return out;
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      bool log_x, bool log_y) {
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  if (x_lo > x_hi) throw std::invalid_argument("line_plot: no data");
  if (x_lo == x_hi) { x_lo -= 0.5; x_hi += 0.5; }
  if (y_lo == y_hi) { y_lo -= 0.5; y_hi += 0.5; }
  if (!log_y) {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }
  const Scale xs{x_lo, x_hi, log_x};
  const Scale ys{y_lo, y_hi, log_y};
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double v) { return kMarginLeft + xs.to_unit(v) * plot_w; };
  auto py = [&](double v) { return kMarginTop + (1.0 - ys.to_unit(v)) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (double t : ticks(xs, 5)) {
    if (t < x_lo || t > x_hi) continue;
    out << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << kMarginTop + plot_h
        << "\" x2=\"" << fmt(px(t)) << "\" y2=\"" << kMarginTop + plot_h + 5
        << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(px(t)) << "\" y=\"" << kMarginTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t : ticks(ys, 5)) {
    if (t < y_lo || t > y_hi) continue;
    out << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << fmt(py(t)) << "\" x2=\""
        << kMarginLeft << "\" y2=\"" << fmt(py(t)) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(py(t) + 4)
        << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kHeight / 2 << ")\">"
      << y_label << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % 6] : s.color;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      out << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
    out << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i)
      out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << kMarginLeft + plot_w - 6 << "\" y=\""
        << kMarginTop + 16 + 16 * static_cast<int>(si)
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

namespace {

std::string heat_color(double t) {
  // blue -> white -> red
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = static_cast<int>(255 * u);
    g = static_cast<int>(255 * u);
    b = 255;
  } else {
    const double u = (t - 0.5) / 0.5;
    r = 255;
    g = static_cast<int>(255 * (1.0 - u));
    b = static_cast<int>(255 * (1.0 - u));
  }
  char buf[10];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string heatmap_grid(const std::vector<Eigen::MatrixXd>& matrices,
                         const std::vector<std::string>& titles,
                         const std::string& title) {
  if (matrices.empty()) throw std::invalid_argument("heatmap_grid: no matrices");
  const int cols = matrices.size() > 1 ? 2 : 1;
  const int rows = (static_cast<int>(matrices.size()) + cols - 1) / cols;
  const int panel = 260;
  const int gap = 30;
  const int width = cols * panel + (cols + 1) * gap;
  const int height = rows * (panel + 30) + (rows + 1) * gap + 30;

  double lo = 1e300, hi = -1e300;
  for (const auto& m : matrices) {
    lo = std::min(lo, m.minCoeff());
    hi = std::max(hi, m.maxCoeff());
  }
  if (lo == hi) hi = lo + 1.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

  for (size_t mi = 0; mi < matrices.size(); ++mi) {
    const auto& m = matrices[mi];
    const int cx = static_cast<int>(mi) % cols;
    const int cy = static_cast<int>(mi) / cols;
    const double x0 = gap + cx * (panel + gap);
    const double y0 = 30 + gap + cy * (panel + 30 + gap);
    const int p = static_cast<int>(m.rows());
    const double cell = static_cast<double>(panel) / p;
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) {
        const double t = (m(a, b) - lo) / (hi - lo);
        out << "<rect x=\"" << fmt(x0 + b * cell) << "\" y=\""
            << fmt(y0 + (p - 1 - a) * cell) << "\" width=\"" << fmt(cell + 0.5)
            << "\" height=\"" << fmt(cell + 0.5) << "\" fill=\"" << heat_color(t)
            << "\"/>\n";
      }
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << panel
        << "\" height=\"" << panel << "\" fill=\"none\" stroke=\"#333\"/>\n";
    if (mi < titles.size())
      out << "<text x=\"" << fmt(x0 + panel / 2.0) << "\" y=\"" << fmt(y0 + panel + 18)
          << "\" text-anchor=\"middle\">" << titles[mi] << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string boxplot(const std::vector<BoxStats>& boxes, const std::string& title,
                    const std::string& y_label) {
  if (boxes.empty()) throw std::invalid_argument("boxplot: no boxes");
  double lo = 1e300, hi = -1e300;
  for (const auto& b : boxes) {
    lo = std::min(lo, b.lo);
    hi = std::max(hi, b.hi);
  }
  if (lo == hi) hi = lo + 1.0;
  const double pad = 0.08 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto py = [&](double v) {
    return kMarginTop + (1.0 - (v - lo) / (hi - lo)) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kHeight / 2 << ")\">"
      << y_label << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = lo + (hi - lo) * i / 5;
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(py(v) + 4)
        << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }

  const double slot = plot_w / boxes.size();
  for (size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double cx = kMarginLeft + slot * (i + 0.5);
    const double half = std::min(36.0, slot * 0.3);
    const std::string color = kPalette[i % 6];
    out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(py(b.lo)) << "\" x2=\""
        << fmt(cx) << "\" y2=\"" << fmt(py(b.hi)) << "\" stroke=\"#333\"/>\n";
    out << "<rect x=\"" << fmt(cx - half) << "\" y=\"" << fmt(py(b.q75)) << "\" width=\""
        << fmt(2 * half) << "\" height=\"" << fmt(py(b.q25) - py(b.q75))
        << "\" fill=\"" << color << "\" fill-opacity=\"0.4\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << fmt(cx - half) << "\" y1=\"" << fmt(py(b.median))
        << "\" x2=\"" << fmt(cx + half) << "\" y2=\"" << fmt(py(b.median))
        << "\" stroke=\"#333\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << kMarginTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << b.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace markovcov::svg
