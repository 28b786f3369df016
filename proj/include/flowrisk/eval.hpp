#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowrisk/date.hpp"
#include "flowrisk/matcher.hpp"
#include "flowrisk/ml.hpp"
#include "flowrisk/numerics.hpp"

namespace flowrisk {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws Error(LengthMismatch) or Error(InvalidArgument) for labels outside {0, 1}.
ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

/// Positive-class metrics. A 0/0 ratio evaluates to 0 and sets its flag.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  bool any_undefined() const noexcept { return precision_undefined || recall_undefined || f1_undefined; }
};

Metrics metrics(const ConfusionMatrix& cm);

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

enum class Averaging { PositiveClass, Macro, Weighted };
std::string_view to_string(Averaging a) noexcept;

struct MetricRow {
  std::string model;
  bool pca = false;
  Averaging averaging = Averaging::PositiveClass;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool undefined = false;  // some 0/0 was replaced by 0

  nlohmann::json to_json() const;
};

/// One row per averaging mode for a single model's predictions.
std::vector<MetricRow> metric_rows(const std::string& model, bool pca, const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred);

/// Rows for every model (in the given order) under all three averaging modes.
/// Throws Error(SingleClassTest) unless y_test holds both classes.
std::vector<MetricRow> metric_table(const std::vector<const ml::Classifier*>& models, const DenseMatrix& X_test,
                                    const std::vector<int>& y_test, bool pca);

/// Mean silhouette over all points. Singleton-cluster points score 0. Throws
/// Error(SingleCluster) with fewer than two clusters.
double silhouette(const DenseMatrix& X, const std::vector<int>& assignments);

struct SilhouetteSweep {
  int best_k = 0;
  std::vector<int> ks;
  std::vector<double> scores;
  std::vector<ml::KMeansModel> fits;
};

/// k-means + silhouette for every k in [k_min, k_max]; ties go to the smaller k.
SilhouetteSweep silhouette_sweep(const DenseMatrix& X, int k_min, int k_max, std::uint64_t seed, int n_init = 10,
                                 int max_iter = 300);

struct FrequencyRow {
  std::string category;
  std::size_t low = 0;
  std::size_t high = 0;
};

/// Risk counts cross-tabulated by one attribute; proportions are cell counts
/// over the table total.
struct FrequencyTable {
  std::string name;
  std::vector<FrequencyRow> rows;

  std::size_t total() const;
  double proportion(std::size_t row, int risk) const;
  nlohmann::json to_json() const;
};

struct EdaConfig {
  Date reference_date = Date::today();
  double age_bin_years = 5.0;
};

/// Overall risk frequency followed by risk by line age bin, diameter, fluid
/// type, material and operator number.
std::vector<FrequencyTable> eda_summaries(const std::vector<MergedFlowline>& merged, const EdaConfig& config);

}  // namespace flowrisk
