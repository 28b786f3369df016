#include "flowrisk/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "flowrisk/csv.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/log.hpp"
#include "flowrisk/rng.hpp"

namespace flowrisk {
namespace {

using nlohmann::json;

const std::string& categorical_value(const OperationalFlowline& r, const std::string& column) {
  if (column == "operator_number") return r.operator_number;
  if (column == "flowline_id") return r.flowline_id;
  if (column == "location_id") return r.location_id;
  if (column == "status") return r.status;
  if (column == "flowline_action") return r.flowline_action;
  if (column == "location_type") return r.location_type;
  if (column == "fluid_type") return r.fluid_type;
  if (column == "material") return r.material;
  throw Error(ErrorKind::UnknownColumn, column + " is not a categorical predictor");
}

bool id_like(const std::string& column) { return column == "flowline_id" || column == "location_id"; }

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return out;
}

}  // namespace

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.columns = columns;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    out.y.push_back(y[rows[i]]);
    out.row_ids.push_back(row_ids[rows[i]]);
  }
  return out;
}

double line_age(const Date& construction, const Date& reference) {
  if (construction > reference) {
    throw Error(ErrorKind::FutureDate,
                "construction date " + construction.to_string() + " is after " + reference.to_string());
  }
  return static_cast<double>(reference.days_since_epoch() - construction.days_since_epoch()) / 365.25;
}

GeometryFeatures geometry_features(const MultiLine& g, LineCountMode mode) {
  return {multiline_length(g), static_cast<double>(line_count(g, mode)), bbox_area(bounding_box(g))};
}

void OneHotEncoder::fit(const std::vector<std::string>& names, const std::vector<std::vector<std::string>>& table) {
  if (names.size() != table.size()) throw Error(ErrorKind::InvalidArgument, "column name/table size mismatch");
  names_ = names;
  categories_.assign(names.size(), {});
  for (std::size_t c = 0; c < table.size(); ++c) {
    if (table[c].empty()) throw Error(ErrorKind::EmptyColumn, names[c]);
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& v : table[c]) {
      if (seen.emplace(v, categories_[c].size()).second) categories_[c].push_back(v);
    }
  }
}

DenseMatrix OneHotEncoder::transform(const std::vector<std::vector<std::string>>& table) const {
  if (table.size() != names_.size()) throw Error(ErrorKind::InvalidArgument, "one-hot column count mismatch");
  const std::size_t n = table.empty() ? 0 : table.front().size();
  Eigen::Index width = 0;
  for (const auto& cats : categories_) width += static_cast<Eigen::Index>(cats.size());
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n), width);

  Eigen::Index offset = 0;
  for (std::size_t c = 0; c < table.size(); ++c) {
    std::unordered_map<std::string, Eigen::Index> position;
    for (std::size_t k = 0; k < categories_[c].size(); ++k) position[categories_[c][k]] = static_cast<Eigen::Index>(k);
    std::size_t unseen = 0;
    for (std::size_t r = 0; r < n; ++r) {
      auto it = position.find(table[c][r]);
      if (it == position.end()) {
        ++unseen;
        continue;
      }
      out(static_cast<Eigen::Index>(r), offset + it->second) = 1.0;
    }
    if (unseen) log::warn(std::to_string(unseen) + " unseen " + names_[c] + " value(s) encoded as all zeros");
    offset += static_cast<Eigen::Index>(categories_[c].size());
  }
  return out;
}

std::vector<ColumnMeta> OneHotEncoder::columns() const {
  std::vector<ColumnMeta> out;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    for (const auto& cat : categories_[c]) {
      out.push_back({names_[c] + "=" + cat, ColumnMeta::Kind::OneHot, names_[c], cat});
    }
  }
  return out;
}

Dataset assemble(const std::vector<MergedFlowline>& merged, const FeatureConfig& config) {
  if (merged.empty()) throw Error(ErrorKind::EmptyInput, "no merged flowlines to featurize");

  std::vector<std::string> categorical;
  for (const auto& c : config.categorical) {
    if (config.drop_id_like && id_like(c)) continue;
    categorical.push_back(c);
  }
  if (std::any_of(categorical.begin(), categorical.end(), id_like)) {
    log::warn("one-hot encoding identifier columns (flowline_id/location_id) yields near-unique, leakage-prone "
              "columns; set drop_id_like to exclude them");
  }

  const auto n = static_cast<Eigen::Index>(merged.size());
  std::vector<std::vector<std::string>> table(categorical.size());
  DenseMatrix numeric(n, static_cast<Eigen::Index>(std::size(kNumericColumns)));
  Dataset ds;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = merged[static_cast<std::size_t>(i)];
    const auto geo = geometry_features(m.geometry, config.line_count_mode);
    numeric.row(i) << m.operational.diameter_inches, m.operational.length_feet,
        m.operational.max_operating_pressure, line_age(m.operational.construction_date, config.reference_date),
        geo.length_m, geo.n_lines, geo.bbox_area_m2;
    for (std::size_t c = 0; c < categorical.size(); ++c) {
      table[c].push_back(categorical_value(m.operational, categorical[c]));
    }
    ds.y.push_back(m.risk);
    ds.row_ids.push_back(m.id());
  }

  OneHotEncoder encoder;
  DenseMatrix encoded(n, 0);
  if (!categorical.empty()) {
    encoder.fit(categorical, table);
    encoded = encoder.transform(table);
  }

  ds.X.resize(n, numeric.cols() + encoded.cols());
  ds.X << numeric, encoded;
  for (const char* name : kNumericColumns) ds.columns.push_back({name, ColumnMeta::Kind::Numeric, "", ""});
  if (!categorical.empty()) {
    for (auto& c : encoder.columns()) ds.columns.push_back(std::move(c));
  }
  if (!ds.X.allFinite()) throw Error(ErrorKind::SchemaViolation, "non-finite value in assembled features");
  return ds;
}

SplitPair stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train fraction must be in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.y.size(); ++i) by_class[ds.y[i]].push_back(i);
  for (const auto& [label, rows] : by_class) {
    if (rows.size() < 2) {
      throw Error(ErrorKind::DegenerateClass, "class " + std::to_string(label) + " has fewer than 2 rows");
    }
  }

  // Largest-remainder allocation of round(f*n) training rows across classes.
  const auto n = static_cast<double>(ds.y.size());
  const auto target = static_cast<std::size_t>(std::llround(train_fraction * n));
  struct Share {
    int label;
    std::size_t size;
    std::size_t train;
    double remainder;
  };
  std::vector<Share> shares;
  std::size_t allocated = 0;
  for (const auto& [label, rows] : by_class) {
    const double quota = train_fraction * static_cast<double>(rows.size());
    const auto base = static_cast<std::size_t>(std::floor(quota));
    shares.push_back({label, rows.size(), base, quota - static_cast<double>(base)});
    allocated += base;
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return shares[a].remainder > shares[b].remainder; });
  for (std::size_t k = 0; allocated < target && k < order.size(); ++k, ++allocated) ++shares[order[k]].train;
  for (auto& s : shares) s.train = std::clamp<std::size_t>(s.train, 1, s.size - 1);

  std::vector<std::size_t> train_rows, test_rows;
  for (const auto& s : shares) {
    auto rows = by_class[s.label];
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(s.label))));
    rng.shuffle(rows);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(s.train));
    test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(s.train), rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {ds.subset(train_rows), ds.subset(test_rows), seed};
}

Standardizer Standardizer::fit(const DenseMatrix& X) {
  if (X.rows() == 0) throw Error(ErrorKind::EmptyInput, "cannot standardize an empty training set");
  Standardizer s;
  s.means = X.colwise().mean().transpose();
  s.sds.resize(X.cols());
  s.scaled.assign(static_cast<std::size_t>(X.cols()), true);
  std::size_t constant = 0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double sd = std::sqrt((X.col(c).array() - s.means(c)).square().mean());
    s.sds(c) = sd;
    if (!(sd > 1e-12 * std::max(1.0, std::abs(s.means(c))))) {
      s.scaled[static_cast<std::size_t>(c)] = false;
      ++constant;
    }
  }
  if (constant) log::warn(std::to_string(constant) + " zero-variance column(s) passed through unscaled");
  return s;
}

DenseMatrix Standardizer::transform(const DenseMatrix& X) const {
  if (X.cols() != means.size()) throw Error(ErrorKind::InvalidArgument, "standardizer width mismatch");
  DenseMatrix out = X;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (!scaled[static_cast<std::size_t>(c)]) continue;
    out.col(c) = (X.col(c).array() - means(c)) / sds(c);
  }
  return out;
}

StandardizedSplit standardize(const Dataset& train, const Dataset& test) {
  StandardizedSplit out{train, test, Standardizer::fit(train.X)};
  out.train.X = out.scaler.transform(train.X);
  out.test.X = out.scaler.transform(test.X);
  return out;
}

std::uint64_t schema_hash(const std::vector<ColumnMeta>& columns) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& c : columns) {
    feed(c.name);
    feed(c.kind == ColumnMeta::Kind::Numeric ? "numeric" : "one-hot");
    feed(c.source_column);
    feed(c.category);
  }
  return h;
}

void write_dataset(const std::filesystem::path& csv_path, const Dataset& ds, std::uint64_t seed) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::FileUnreadable, "cannot write " + csv_path.string());
    std::vector<std::string> header{"row_id", "y"};
    for (const auto& c : ds.columns) header.push_back(c.name);
    csv::write_row(out, header);
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
      std::vector<std::string> row{ds.row_ids[static_cast<std::size_t>(r)],
                                   std::to_string(ds.y[static_cast<std::size_t>(r)])};
      for (Eigen::Index c = 0; c < ds.X.cols(); ++c) row.push_back(csv::format_double(ds.X(r, c)));
      csv::write_row(out, row);
    }
  }
  json cols = json::array();
  for (const auto& c : ds.columns) {
    cols.push_back({{"name", c.name},
                    {"kind", c.kind == ColumnMeta::Kind::Numeric ? "numeric" : "one-hot"},
                    {"source_column", c.source_column},
                    {"category", c.category}});
  }
  json meta = {{"columns", cols},
               {"seed", seed},
               {"n_rows", ds.X.rows()},
               {"schema_hash", hex64(schema_hash(ds.columns))}};
  std::ofstream side(csv_path.string() + ".json", std::ios::binary);
  side << meta.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& csv_path, std::uint64_t* seed) {
  std::ifstream side(csv_path.string() + ".json", std::ios::binary);
  if (!side) throw Error(ErrorKind::FileUnreadable, "missing dataset sidecar for " + csv_path.string());
  json meta;
  try {
    meta = json::parse(side);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("dataset sidecar: ") + e.what());
  }
  Dataset ds;
  for (const auto& c : meta.at("columns")) {
    const bool numeric = c.at("kind").get<std::string>() == "numeric";
    ds.columns.push_back({c.at("name").get<std::string>(), numeric ? ColumnMeta::Kind::Numeric : ColumnMeta::Kind::OneHot,
                          c.at("source_column").get<std::string>(), c.at("category").get<std::string>()});
  }
  if (hex64(schema_hash(ds.columns)) != meta.at("schema_hash").get<std::string>()) {
    throw Error(ErrorKind::SchemaHashMismatch, "dataset sidecar column metadata does not match its hash");
  }
  if (seed) *seed = meta.at("seed").get<std::uint64_t>();

  const auto table = csv::read(csv_path);
  if (table.header.size() != ds.columns.size() + 2) {
    throw Error(ErrorKind::SchemaHashMismatch, "dataset CSV width does not match sidecar");
  }
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    if (table.header[c + 2] != ds.columns[c].name) {
      throw Error(ErrorKind::SchemaHashMismatch, "dataset CSV column " + table.header[c + 2] + " not in sidecar");
    }
  }
  ds.X.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(ds.columns.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r].fields;
    if (f.size() != table.header.size()) throw Error(ErrorKind::SchemaViolation, "dataset row width mismatch");
    ds.row_ids.push_back(f[0]);
    ds.y.push_back(std::stoi(f[1]));
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
      ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::stod(f[c + 2]);
    }
  }
  return ds;
}

}  // namespace flowrisk
