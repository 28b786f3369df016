#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowrisk/date.hpp"
#include "flowrisk/geometry.hpp"
#include "flowrisk/matcher.hpp"
#include "flowrisk/numerics.hpp"

namespace flowrisk {

struct ColumnMeta {
  enum class Kind { Numeric, OneHot };

  std::string name;
  Kind kind = Kind::Numeric;
  std::string source_column;  // one-hot only
  std::string category;       // one-hot only

  friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

struct Dataset {
  DenseMatrix X;
  std::vector<int> y;
  std::vector<ColumnMeta> columns;
  std::vector<std::string> row_ids;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  /// Rows selected by position, preserving the given order.
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
};

/// Fractional years between the dates: days / 365.25. Throws
/// Error(FutureDate) when construction is after the reference.
double line_age(const Date& construction, const Date& reference);

struct GeometryFeatures {
  double length_m = 0.0;
  double n_lines = 0.0;
  double bbox_area_m2 = 0.0;
};

GeometryFeatures geometry_features(const MultiLine& g, LineCountMode mode = LineCountMode::Polylines);

/// One-hot encoder with first-appearance category order per column.
class OneHotEncoder {
 public:
  /// `table[c][r]` is the value of column c at row r. Throws
  /// Error(EmptyColumn) for a column with no rows.
  void fit(const std::vector<std::string>& names, const std::vector<std::vector<std::string>>& table);
  /// Unseen categories encode as all zeros and log a warning.
  DenseMatrix transform(const std::vector<std::vector<std::string>>& table) const;
  std::vector<ColumnMeta> columns() const;

  const std::vector<std::vector<std::string>>& categories() const { return categories_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> categories_;
};

inline constexpr const char* kNumericColumns[] = {"diameter_in", "length_ft",      "max_op_pressure", "line_age",
                                                  "geom_length_m", "n_lines",      "bbox_area_m2"};
inline constexpr const char* kCategoricalColumns[] = {"operator_number", "flowline_id",     "location_id",
                                                      "status",          "flowline_action", "location_type",
                                                      "fluid_type",      "material"};

struct FeatureConfig {
  std::vector<std::string> categorical{std::begin(kCategoricalColumns), std::end(kCategoricalColumns)};
  bool drop_id_like = false;  // drops flowline_id and location_id
  Date reference_date = Date::today();
  LineCountMode line_count_mode = LineCountMode::Polylines;
};

/// Design matrix: the seven numeric columns followed by one-hot groups in
/// `config.categorical` order; y = risk. Throws Error(EmptyInput).
Dataset assemble(const std::vector<MergedFlowline>& merged, const FeatureConfig& config);

/// Per-class seeded shuffle and largest-remainder allocation; every class
/// with >= 2 rows lands on both sides. Throws Error(DegenerateClass) for a
/// class with a single row.
SplitPair stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

struct Standardizer {
  DenseVector means;
  DenseVector sds;            // population standard deviation
  std::vector<bool> scaled;   // false for zero-variance columns

  /// Train statistics; zero-variance columns pass through with a warning.
  static Standardizer fit(const DenseMatrix& X);
  DenseMatrix transform(const DenseMatrix& X) const;
};

struct StandardizedSplit {
  Dataset train;
  Dataset test;
  Standardizer scaler;
};

StandardizedSplit standardize(const Dataset& train, const Dataset& test);

/// 64-bit FNV-1a over the column names and kinds.
std::uint64_t schema_hash(const std::vector<ColumnMeta>& columns);

/// CSV (row_id, y, columns...) plus a JSON sidecar <path>.json carrying the
/// column metadata, seed and schema hash.
void write_dataset(const std::filesystem::path& csv_path, const Dataset& ds, std::uint64_t seed);
Dataset read_dataset(const std::filesystem::path& csv_path, std::uint64_t* seed = nullptr);

}  // namespace flowrisk
