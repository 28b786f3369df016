#include "flowrisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace flowrisk::svg {
namespace {

std::string num(double v) {
  if (!std::isfinite(v)) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

// Axis label: integers without decimals, other values to three places.
std::string tick_label(double v) {
  if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", std::isfinite(v) ? v : 0.0);
  return buf;
}

constexpr std::string_view kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

// Linear map of [lo, hi] onto [a, b].
struct Scale {
  double lo, hi, a, b;
  double operator()(double v) const { return hi > lo ? a + (v - lo) / (hi - lo) * (b - a) : 0.5 * (a + b); }
};

std::pair<double, double> padded_range(const std::vector<double>& v) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5;
  return {lo - pad, hi + pad};
}

void legend_entry(Document& doc, double x, double y, std::string_view colour, std::string_view label) {
  doc.rect(x, y - 9, 10, 10, colour);
  doc.text(x + 14, y, label, 11);
}

void axes(Document& doc, double left, double top, double right, double bottom) {
  doc.line(left, bottom, right, bottom, "#333");
  doc.line(left, top, left, bottom, "#333");
}

}  // namespace

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

Document::Document(double width, double height) : width_(width), height_(height) {
  rect(0, 0, width, height, "#ffffff");
}

void Document::rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"" + std::string(fill) + "\" stroke=\"" + std::string(stroke) + "\"/>\n";
}

void Document::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void Document::polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width) {
  std::string p;
  for (const auto& [x, y] : pts) {
    if (!p.empty()) p += ' ';
    p += num(x) + "," + num(y);
  }
  body_ += "<polyline points=\"" + p + "\" fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" +
           num(width) + "\"/>\n";
}

void Document::circle(double cx, double cy, double r, std::string_view fill) {
  body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + std::string(fill) +
           "\"/>\n";
}

void Document::text(double x, double y, std::string_view content, double size, std::string_view anchor) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" + num(size) +
           "\" text-anchor=\"" + std::string(anchor) + "\">" + escape(content) + "</text>\n";
}

std::string Document::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) +
         "\">\n" + body_ + "</svg>\n";
}

std::string map_figure(const std::vector<MergedFlowline>& lines, std::string_view title) {
  constexpr double W = 800, H = 800, M = 50;
  Document doc(W, H);
  doc.text(W / 2, 30, title, 16, "middle");
  std::vector<double> xs, ys;
  for (const auto& m : lines) {
    for (const auto& pl : m.geometry.lines) {
      for (const auto& v : pl.vertices) {
        xs.push_back(v.x());
        ys.push_back(v.y());
      }
    }
  }
  auto [x0, x1] = padded_range(xs);
  auto [y0, y1] = padded_range(ys);
  // Equal scale on both axes.
  const double span = std::max(x1 - x0, y1 - y0);
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const Scale sx{cx - span / 2, cx + span / 2, M, W - M};
  const Scale sy{cy - span / 2, cy + span / 2, H - M, M + 20};
  // High-risk lines are drawn last so they stay visible.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& m : lines) {
      if (m.risk != pass) continue;
      for (const auto& pl : m.geometry.lines) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& v : pl.vertices) pts.emplace_back(sx(v.x()), sy(v.y()));
        doc.polyline(pts, pass ? kHighRiskColor : kLowRiskColor, pass ? 2.5 : 1.0);
      }
    }
  }
  legend_entry(doc, W - 160, 60, kLowRiskColor, "Low risk");
  legend_entry(doc, W - 160, 78, kHighRiskColor, "High risk");
  return doc.str();
}

std::string bar_chart(const FrequencyTable& table, std::string_view title) {
  const double n = static_cast<double>(std::max<std::size_t>(table.rows.size(), 1));
  const double W = std::max(480.0, 90.0 + 48.0 * n), H = 420, L = 60, R = 20, T = 50, B = 110;
  Document doc(W, H);
  doc.text(W / 2, 28, title, 16, "middle");
  double peak = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) peak = std::max({peak, table.proportion(i, 0), table.proportion(i, 1)});
  if (peak <= 0.0) peak = 1.0;
  const Scale sy{0.0, peak, H - B, T};
  axes(doc, L, T, W - R, H - B);
  for (int t = 0; t <= 4; ++t) {
    const double v = peak * t / 4.0;
    doc.line(L - 4, sy(v), L, sy(v), "#333");
    doc.text(L - 6, sy(v) + 4, num(v), 10, "end");
  }
  const double slot = (W - L - R) / n;
  const double bar = std::min(18.0, slot * 0.35);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double x = L + slot * (static_cast<double>(i) + 0.5);
    const double lo = table.proportion(i, 0), hi = table.proportion(i, 1);
    doc.rect(x - bar, sy(lo), bar, sy(0.0) - sy(lo), kLowRiskColor);
    doc.rect(x, sy(hi), bar, sy(0.0) - sy(hi), kHighRiskColor);
    doc.text(x, H - B + 14, table.rows[i].category, 10, "middle");
  }
  doc.text(18, T - 12, "Proportion", 11);
  legend_entry(doc, W - 120, T, kLowRiskColor, "Low risk");
  legend_entry(doc, W - 120, T + 16, kHighRiskColor, "High risk");
  return doc.str();
}

std::string line_chart(const std::vector<double>& xs, const std::vector<double>& ys, std::string_view title,
                       std::string_view x_label, std::string_view y_label) {
  constexpr double W = 560, H = 400, L = 70, R = 30, T = 50, B = 60;
  Document doc(W, H);
  doc.text(W / 2, 28, title, 16, "middle");
  auto [x0, x1] = padded_range(xs);
  auto [y0, y1] = padded_range(ys);
  const Scale sx{x0, x1, L, W - R};
  const Scale sy{y0, y1, H - B, T};
  axes(doc, L, T, W - R, H - B);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    pts.emplace_back(sx(xs[i]), sy(ys[i]));
    doc.line(sx(xs[i]), H - B, sx(xs[i]), H - B + 4, "#333");
    doc.text(sx(xs[i]), H - B + 18, tick_label(xs[i]), 10, "middle");
    doc.text(L - 6, sy(ys[i]) + 4, tick_label(ys[i]), 10, "end");
  }
  doc.polyline(pts, "#1b9e77", 2.0);
  for (const auto& [x, y] : pts) doc.circle(x, y, 4, "#1b9e77");
  doc.text((L + W - R) / 2, H - 18, x_label, 12, "middle");
  doc.text(12, T - 14, y_label, 12);
  return doc.str();
}

std::string scatter_panels(const std::vector<std::pair<double, double>>& points, const std::vector<int>& clusters,
                           const std::vector<int>& labels, std::string_view title) {
  constexpr double PW = 420, H = 460, M = 45, T = 70;
  Document doc(2 * PW, H);
  doc.text(PW, 26, title, 16, "middle");
  std::vector<double> xs, ys;
  for (const auto& [x, y] : points) {
    xs.push_back(x);
    ys.push_back(y);
  }
  auto [x0, x1] = padded_range(xs);
  auto [y0, y1] = padded_range(ys);
  for (int panel = 0; panel < 2; ++panel) {
    const double off = panel * PW;
    const Scale sx{x0, x1, off + M, off + PW - 15};
    const Scale sy{y0, y1, H - M, T};
    axes(doc, off + M, T, off + PW - 15, H - M);
    doc.text(off + PW / 2, 52, panel == 0 ? "Predicted clusters" : "Actual labels", 13, "middle");
    doc.text(off + PW / 2, H - 12, "PC1", 11, "middle");
    doc.text(off + 8, T - 6, "PC2", 11);
    const auto& colour_of = panel == 0 ? clusters : labels;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = i < colour_of.size() ? colour_of[i] : 0;
      std::string_view colour = panel == 0 ? kPalette[static_cast<std::size_t>(std::abs(c)) % std::size(kPalette)]
                                           : (c ? kHighRiskColor : kLowRiskColor);
      doc.circle(sx(points[i].first), sy(points[i].second), 2.5, colour);
    }
  }
  legend_entry(doc, 2 * PW - 110, 60, kLowRiskColor, "Low risk");
  legend_entry(doc, 2 * PW - 110, 76, kHighRiskColor, "High risk");
  return doc.str();
}

}  // namespace flowrisk::svg
