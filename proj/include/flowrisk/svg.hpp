#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flowrisk/eval.hpp"
#include "flowrisk/matcher.hpp"

namespace flowrisk::svg {

std::string escape(std::string_view text);

/// Minimal SVG builder; coordinates are written with two decimals so output
/// is byte-stable.
class Document {
 public:
  Document(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none");
  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width = 1.0);
  void circle(double cx, double cy, double r, std::string_view fill);
  void text(double x, double y, std::string_view content, double size = 12.0, std::string_view anchor = "start");

  std::string str() const;

 private:
  double width_, height_;
  std::string body_;
};

inline constexpr std::string_view kLowRiskColor = "#4575b4";
inline constexpr std::string_view kHighRiskColor = "#d73027";

/// Flowlines in projected coordinates, coloured by risk, with a legend.
std::string map_figure(const std::vector<MergedFlowline>& lines, std::string_view title);

/// Grouped low/high-risk bars of cell proportions per category.
std::string bar_chart(const FrequencyTable& table, std::string_view title);

std::string line_chart(const std::vector<double>& xs, const std::vector<double>& ys, std::string_view title,
                       std::string_view x_label, std::string_view y_label);

/// Side-by-side scatter panels of the same points: coloured by cluster and
/// by actual label.
std::string scatter_panels(const std::vector<std::pair<double, double>>& points, const std::vector<int>& clusters,
                           const std::vector<int>& labels, std::string_view title);

}  // namespace flowrisk::svg
