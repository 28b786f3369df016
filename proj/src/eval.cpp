#include "flowrisk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "flowrisk/csv.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/features.hpp"

namespace flowrisk {
namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

// Precision/recall/F1 treating `positive_is_one` as the class of interest.
struct ClassScores {
  double precision, recall, f1;
  bool undefined;
  std::size_t support;
};

ClassScores class_scores(const ConfusionMatrix& cm, bool positive_is_one) {
  const std::size_t tp = positive_is_one ? cm.tp : cm.tn;
  const std::size_t fp = positive_is_one ? cm.fp : cm.fn;
  const std::size_t fn = positive_is_one ? cm.fn : cm.fp;
  bool up = false, ur = false;
  const double p = ratio(tp, tp + fp, up);
  const double r = ratio(tp, tp + fn, ur);
  return {p, r, f1_score(p, r), up || ur || (p + r == 0.0), tp + fn};
}

}  // namespace

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorKind::LengthMismatch, "y_true and y_pred differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw Error(ErrorKind::InvalidArgument, "labels must be 0 or 1");
    if (t == 1) (p == 1 ? cm.tp : cm.fn)++;
    else (p == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

Metrics metrics(const ConfusionMatrix& cm) {
  Metrics m;
  bool acc_undefined = false;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total(), acc_undefined);
  m.precision = ratio(cm.tp, cm.tp + cm.fp, m.precision_undefined);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, m.recall_undefined);
  m.f1_undefined = m.precision + m.recall == 0.0;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

std::string_view to_string(Averaging a) noexcept {
  switch (a) {
    case Averaging::PositiveClass: return "positive-class";
    case Averaging::Macro: return "macro";
    case Averaging::Weighted: return "weighted";
  }
  return "?";
}

nlohmann::json MetricRow::to_json() const {
  return {{"model", model},       {"pca", pca},       {"averaging", std::string(flowrisk::to_string(averaging))},
          {"accuracy", accuracy}, {"precision", precision}, {"recall", recall},
          {"f1", f1},             {"undefined", undefined}};
}

std::vector<MetricRow> metric_rows(const std::string& model, bool pca, const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred) {
  const ConfusionMatrix cm = confusion(y_true, y_pred);
  const Metrics pos = metrics(cm);
  const ClassScores one = class_scores(cm, true);
  const ClassScores zero = class_scores(cm, false);

  std::vector<MetricRow> rows;
  rows.push_back({model, pca, Averaging::PositiveClass, pos.accuracy, pos.precision, pos.recall, pos.f1,
                  pos.any_undefined()});
  rows.push_back({model, pca, Averaging::Macro, pos.accuracy, 0.5 * (one.precision + zero.precision),
                  0.5 * (one.recall + zero.recall), 0.5 * (one.f1 + zero.f1), one.undefined || zero.undefined});
  const double total = static_cast<double>(one.support + zero.support);
  const double w1 = total > 0 ? static_cast<double>(one.support) / total : 0.0;
  const double w0 = total > 0 ? static_cast<double>(zero.support) / total : 0.0;
  rows.push_back({model, pca, Averaging::Weighted, pos.accuracy, w1 * one.precision + w0 * zero.precision,
                  w1 * one.recall + w0 * zero.recall, w1 * one.f1 + w0 * zero.f1, one.undefined || zero.undefined});
  return rows;
}

std::vector<MetricRow> metric_table(const std::vector<const ml::Classifier*>& models, const DenseMatrix& X_test,
                                    const std::vector<int>& y_test, bool pca) {
  const bool has0 = std::find(y_test.begin(), y_test.end(), 0) != y_test.end();
  const bool has1 = std::find(y_test.begin(), y_test.end(), 1) != y_test.end();
  if (!has0 || !has1) throw Error(ErrorKind::SingleClassTest, "test labels contain a single class");
  std::vector<MetricRow> table;
  for (const auto* model : models) {
    auto rows = metric_rows(std::string(ml::to_string(model->kind())), pca, y_test, model->predict(X_test));
    table.insert(table.end(), rows.begin(), rows.end());
  }
  return table;
}

double silhouette(const DenseMatrix& X, const std::vector<int>& assignments) {
  if (static_cast<std::size_t>(X.rows()) != assignments.size()) {
    throw Error(ErrorKind::LengthMismatch, "assignments do not match rows");
  }
  std::map<int, std::size_t> cluster_index;
  for (int a : assignments) cluster_index.emplace(a, 0);
  if (cluster_index.size() < 2) throw Error(ErrorKind::SingleCluster, "silhouette needs at least two clusters");
  std::size_t next = 0;
  for (auto& [label, idx] : cluster_index) idx = next++;

  const std::size_t k = cluster_index.size();
  std::vector<std::size_t> label(assignments.size()), size(k, 0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    label[i] = cluster_index[assignments[i]];
    ++size[label[i]];
  }

  double total = 0.0;
  std::vector<double> sum(k);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const std::size_t own = label[static_cast<std::size_t>(i)];
    if (size[own] == 1) continue;  // singleton convention: s(i) = 0
    std::fill(sum.begin(), sum.end(), 0.0);
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      if (j == i) continue;
      sum[label[static_cast<std::size_t>(j)]] += (X.row(i) - X.row(j)).norm();
    }
    const double a = sum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sum[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(X.rows());
}

SilhouetteSweep silhouette_sweep(const DenseMatrix& X, int k_min, int k_max, std::uint64_t seed, int n_init,
                                 int max_iter) {
  if (k_min < 2 || k_max < k_min) throw Error(ErrorKind::InvalidArgument, "silhouette sweep needs 2 <= k_min <= k_max");
  if (k_max > X.rows()) throw Error(ErrorKind::KTooLarge, "k_max exceeds the number of rows");
  SilhouetteSweep sweep;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    auto fit = ml::fit_kmeans(X, {k, derive_seed(seed, static_cast<std::uint64_t>(k)), max_iter, n_init});
    const double score = silhouette(X, fit.assignments);
    sweep.ks.push_back(k);
    sweep.scores.push_back(score);
    sweep.fits.push_back(std::move(fit));
    if (score > best) {
      best = score;
      sweep.best_k = k;
    }
  }
  return sweep;
}

std::size_t FrequencyTable::total() const {
  std::size_t t = 0;
  for (const auto& r : rows) t += r.low + r.high;
  return t;
}

double FrequencyTable::proportion(std::size_t row, int risk) const {
  const std::size_t t = total();
  if (t == 0) return 0.0;
  return static_cast<double>(risk ? rows[row].high : rows[row].low) / static_cast<double>(t);
}

nlohmann::json FrequencyTable::to_json() const {
  nlohmann::json out = {{"name", name}, {"total", total()}, {"rows", nlohmann::json::array()}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out["rows"].push_back({{"category", rows[i].category},
                           {"low", rows[i].low},
                           {"high", rows[i].high},
                           {"low_proportion", proportion(i, 0)},
                           {"high_proportion", proportion(i, 1)}});
  }
  return out;
}

std::vector<FrequencyTable> eda_summaries(const std::vector<MergedFlowline>& merged, const EdaConfig& config) {
  if (!(config.age_bin_years > 0.0)) throw Error(ErrorKind::InvalidArgument, "age bin width must be > 0");

  // Keys sort numerically where they look like numbers.
  struct KeyLess {
    bool operator()(const std::pair<double, std::string>& a, const std::pair<double, std::string>& b) const {
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    }
  };
  using Counts = std::map<std::pair<double, std::string>, FrequencyRow, KeyLess>;

  auto tally = [&](const std::string& name, auto key_of) {
    Counts counts;
    for (const auto& m : merged) {
      auto key = key_of(m);
      auto& row = counts[key];
      row.category = key.second;
      (m.risk ? row.high : row.low)++;
    }
    FrequencyTable table{name, {}};
    for (auto& [_, row] : counts) table.rows.push_back(row);
    return table;
  };
  auto text_key = [](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    const bool numeric = !s.empty() && end == s.c_str() + s.size() && std::isfinite(v);
    return std::make_pair(numeric ? v : std::numeric_limits<double>::infinity(), s);
  };

  std::vector<FrequencyTable> tables;
  tables.push_back(tally("risk", [](const MergedFlowline&) { return std::make_pair(0.0, std::string("all")); }));
  tables.push_back(tally("line_age", [&](const MergedFlowline& m) {
    const double age = line_age(m.operational.construction_date, config.reference_date);
    const double lo = std::floor(age / config.age_bin_years) * config.age_bin_years;
    return std::make_pair(lo, "[" + csv::format_double(lo) + "," + csv::format_double(lo + config.age_bin_years) + ")");
  }));
  tables.push_back(tally("diameter", [](const MergedFlowline& m) {
    return std::make_pair(m.operational.diameter_inches, csv::format_double(m.operational.diameter_inches));
  }));
  tables.push_back(tally("fluid_type", [&](const MergedFlowline& m) { return text_key(m.operational.fluid_type); }));
  tables.push_back(tally("material", [&](const MergedFlowline& m) { return text_key(m.operational.material); }));
  tables.push_back(
      tally("operator_number", [&](const MergedFlowline& m) { return text_key(m.operational.operator_number); }));
  return tables;
}

}  // namespace flowrisk
