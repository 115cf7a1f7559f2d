#include <gtest/gtest.h>

#include <cmath>

#include "markovcov/csv.hpp"
#include "markovcov/estimation.hpp"
#include "markovcov/rng.hpp"
#include "markovcov/svg.hpp"
#include "markovcov/testing.hpp"

using namespace markovcov;

TEST(Csv, DenseCurveRoundTrip) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(6)}, 4, 0.0, 12);
  const std::string text = csv::dense_curves_to_csv(obs);
  const auto back = csv::dense_curves_from_csv(text);
  ASSERT_EQ(back.curve_count(), 4);
  EXPECT_EQ(back.grid->points(), obs.grid->points());
  for (int i = 0; i < 4; ++i)
    EXPECT_EQ(back.curves[static_cast<size_t>(i)].values,
              obs.curves[static_cast<size_t>(i)].values);
}

TEST(Csv, DenseRejectsRaggedRows) {
  EXPECT_THROW(csv::dense_curves_from_csv("0.1,0.2\n1.0\n"), std::runtime_error);
}

TEST(Csv, IrregularCurveRoundTrip) {
  const auto obs = sample_curves(OrnsteinUhlenbeck{}, IrregularDesign{5}, 3, 0.1, 9);
  const auto back = csv::irregular_curves_from_csv(csv::irregular_curves_to_csv(obs));
  ASSERT_EQ(back.curve_count(), 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back.curves[static_cast<size_t>(i)].times,
              obs.curves[static_cast<size_t>(i)].times);
    EXPECT_EQ(back.curves[static_cast<size_t>(i)].values,
              obs.curves[static_cast<size_t>(i)].values);
  }
}

TEST(Csv, EstimatedKernelRoundTripReproducesEvaluator) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(7)}, 40, 0.0, 3);
  const auto est = markov_estimate(bin_observations(obs, 7), 0.0);
  const auto back = csv::estimated_kernel_from_csv(csv::estimated_kernel_to_csv(est));
  EXPECT_EQ(back.kind(), EstimatorKind::markov);
  EXPECT_EQ(back.noise_var(), est.noise_var());
  Rng rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double s = unif(rng), t = unif(rng);
    EXPECT_NEAR(back(s, t), est(s, t), 1e-12 * std::max(1.0, std::abs(est(s, t))));
  }
}

TEST(Csv, TestReportContainsPerIndexRowsAndSummary) {
  const auto obs = sample_curves(BrownianMotion{},
                                 DenseDesign{Grid::regular_midpoints(6)}, 50, 0.0, 4);
  const auto report = markov_test(obs, 0.05, Bonferroni{}, 0);
  const std::string text = csv::test_report_to_csv(report);
  EXPECT_NE(text.find("j,rho,z,scaled_abs_z"), std::string::npos);
  EXPECT_NE(text.find("statistic,critical_value,p_value,decision"), std::string::npos);
  EXPECT_TRUE(text.find("RejectMarkov") != std::string::npos ||
              text.find("FailToReject") != std::string::npos);
  // one row per interior index
  size_t rows = 0;
  for (size_t pos = 0; (pos = text.find('\n', pos)) != std::string::npos; ++pos) ++rows;
  EXPECT_GE(rows, report.indices.size() + 3);
}

TEST(Csv, ProvenanceLeadsWithComments) {
  const std::string block = csv::provenance_block({{"kind", "power"}, {"p", "20"}}, 7);
  ASSERT_FALSE(block.empty());
  std::stringstream ss(block);
  std::string line;
  int lines = 0;
  while (std::getline(ss, line)) {
    EXPECT_EQ(line[0], '#');
    ++lines;
  }
  EXPECT_EQ(lines, 3);
  EXPECT_NE(block.find("seed=7"), std::string::npos);
  // identical config -> identical block
  EXPECT_EQ(block, csv::provenance_block({{"p", "20"}, {"kind", "power"}}, 7));
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-17, -1234.5678901234567, 0.0}) {
    const std::string s = csv::format_double(v);
    EXPECT_EQ(std::stod(s), v);
  }
}

TEST(Svg, EmittersProduceWellFormedDocuments) {
  svg::Series s;
  s.label = "demo";
  s.x = {1.0, 2.0, 3.0};
  s.y = {0.5, 0.25, 0.125};
  const std::string line = svg::line_plot({s}, "t", "x", "y", false, true);
  EXPECT_EQ(line.rfind("<svg", 0), 0u);
  EXPECT_NE(line.find("</svg>"), std::string::npos);
  EXPECT_NE(line.find("polyline"), std::string::npos);

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
  const std::string heat = svg::heatmap_grid({m, 2.0 * m}, {"a", "b"}, "heat");
  EXPECT_EQ(heat.rfind("<svg", 0), 0u);
  EXPECT_NE(heat.find("</svg>"), std::string::npos);

  svg::BoxStats box{"est", 0.1, 0.2, 0.3, 0.05, 0.4};
  const std::string boxes = svg::boxplot({box}, "boxes", "err");
  EXPECT_EQ(boxes.rfind("<svg", 0), 0u);
  EXPECT_NE(boxes.find("</svg>"), std::string::npos);
}
