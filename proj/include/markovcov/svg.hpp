#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace markovcov::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

/// Minimal line plot with axes, tick labels and a legend.
std::string line_plot(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      bool log_x = false, bool log_y = false);

/// One heat map per matrix, laid out in a near-square grid of panels.
std::string heatmap_grid(const std::vector<Eigen::MatrixXd>& matrices,
                         const std::vector<std::string>& titles,
                         const std::string& title);

struct BoxStats {
  std::string label;
  double q25 = 0.0, median = 0.0, q75 = 0.0, lo = 0.0, hi = 0.0;
};

std::string boxplot(const std::vector<BoxStats>& boxes, const std::string& title,
                    const std::string& y_label);

}  // namespace markovcov::svg
