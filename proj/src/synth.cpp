#include "flowrisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "flowrisk/csv.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/rng.hpp"
#include "flowrisk/spatial_index.hpp"

namespace flowrisk {
namespace {

// Endpoint registry for separation checks.
class EndpointGrid {
 public:
  explicit EndpointGrid(double cell) : cell_(std::max(cell, 1.0)) {}

  bool clear_of(const Point2D& p, double radius) const {
    if (radius <= 0.0) return true;
    const auto [cx, cy] = cell_of(p);
    const long long reach = static_cast<long long>(std::ceil(radius / cell_));
    for (long long dx = -reach; dx <= reach; ++dx) {
      for (long long dy = -reach; dy <= reach; ++dy) {
        auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto& q : it->second) {
          if ((p - q).norm() < radius) return false;
        }
      }
    }
    return true;
  }

  void insert(const Point2D& p) {
    const auto [cx, cy] = cell_of(p);
    cells_[key(cx, cy)].push_back(p);
  }

 private:
  std::pair<long long, long long> cell_of(const Point2D& p) const {
    return {static_cast<long long>(std::floor(p.x() / cell_)), static_cast<long long>(std::floor(p.y() / cell_))};
  }
  static std::uint64_t key(long long x, long long y) {
    return (static_cast<std::uint64_t>(x) << 32) ^ (static_cast<std::uint64_t>(y) & 0xffffffffULL);
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<Point2D>> cells_;
};

std::vector<Point2D> random_walk(Rng& rng, const SynthConfig& cfg) {
  const std::size_t n_vertices = 3 + static_cast<std::size_t>(rng.below(6));
  Point2D p(cfg.origin_x + rng.uniform(0.0, cfg.area), cfg.origin_y + rng.uniform(0.0, cfg.area));
  double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Point2D> chain{p};
  for (std::size_t i = 1; i < n_vertices; ++i) {
    heading += rng.uniform(-0.5, 0.5);
    const double step = cfg.segment_length * rng.uniform(0.5, 1.5);
    p += step * Point2D(std::cos(heading), std::sin(heading));
    chain.push_back(p);
  }
  return chain;
}

// Splits a vertex chain into 1..3 member polylines sharing junction vertices.
MultiLine split_chain(Rng& rng, const std::vector<Point2D>& chain) {
  const std::size_t segments = chain.size() - 1;
  const std::size_t k = 1 + static_cast<std::size_t>(rng.below(std::min<std::size_t>(3, segments)));
  std::vector<std::size_t> interior(segments - 1);
  std::iota(interior.begin(), interior.end(), std::size_t{1});
  rng.shuffle(interior);
  std::vector<std::size_t> cuts(interior.begin(), interior.begin() + static_cast<std::ptrdiff_t>(k - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), 0);
  cuts.push_back(chain.size() - 1);
  MultiLine g;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    g.lines.push_back(PolyLine{{chain.begin() + static_cast<std::ptrdiff_t>(cuts[i]),
                                chain.begin() + static_cast<std::ptrdiff_t>(cuts[i + 1] + 1)}});
  }
  return g;
}

// Descriptive and operational spellings that normalize to the same name.
std::string operator_spelling(std::size_t op, int style) {
  const std::string n = std::to_string(op + 1);
  switch (style) {
    case 0: return "Operator " + n + " Energy, LLC.";
    case 1: return "OPERATOR " + n + " ENERGY LLC";
    default: return "operator  " + n + " energy llc";
  }
}

template <typename T, std::size_t N>
const T& pick(Rng& rng, const T (&options)[N]) {
  return options[rng.below(N)];
}

Date random_date(Rng& rng, const Date& lo, const Date& hi) {
  const auto a = lo.days_since_epoch();
  const auto b = hi.days_since_epoch();
  return Date::from_days(a + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(b - a + 1))));
}

// Uniform point along the geometry and the unit normal of its segment.
std::pair<Point2D, Point2D> point_on_line(Rng& rng, const MultiLine& g) {
  const double total = multiline_length(g);
  double target = rng.uniform(0.0, total);
  const PolyLine* last_line = nullptr;
  std::size_t last_seg = 0;
  for (const auto& line : g.lines) {
    for (std::size_t i = 0; i + 1 < line.vertices.size(); ++i) {
      const Point2D d = line.vertices[i + 1] - line.vertices[i];
      const double len = d.norm();
      if (len <= 0.0) continue;
      last_line = &line;
      last_seg = i;
      if (target <= len) {
        return {line.vertices[i] + (target / len) * d, Point2D(-d.y(), d.x()) / len};
      }
      target -= len;
    }
  }
  const Point2D d = last_line->vertices[last_seg + 1] - last_line->vertices[last_seg];
  return {last_line->vertices[last_seg + 1], Point2D(-d.y(), d.x()) / d.norm()};
}

}  // namespace

void SynthConfig::validate() const {
  auto fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be in [0,1]");
  };
  fraction(spill_rate, "spill_rate");
  fraction(operator_reuse_clustering, "operator_reuse_clustering");
  fraction(operational_fraction, "operational_fraction");
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be >= 0");
  };
  nonneg(min_separation, "min_separation");
  nonneg(endpoint_jitter_sigma, "endpoint_jitter_sigma");
  nonneg(spill_lateral_sigma, "spill_lateral_sigma");
  if (!(area > 0.0)) throw Error(ErrorKind::InvalidArgument, "area must be > 0");
  if (!(segment_length > 0.0)) throw Error(ErrorKind::InvalidArgument, "segment_length must be > 0");
  if (n_lines == 0) throw Error(ErrorKind::InvalidArgument, "n_lines must be > 0");
  if (n_operators == 0) throw Error(ErrorKind::InvalidArgument, "n_operators must be > 0");
  projection.validate();
}

void GroundTruth::write(std::ostream& out) const {
  csv::write_row(out, {"kind", "source_id", "true_target_id"});
  for (const auto& [op, desc] : operational) csv::write_row(out, {"operational", op, desc});
  for (const auto& [spill, target] : spills) csv::write_row(out, {"spill", spill, target.value_or("NONE")});
}

GroundTruth GroundTruth::read(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  auto require = [&](const char* name) {
    auto c = table.column(name);
    if (!c) throw Error(ErrorKind::MissingColumn, std::string("ground truth lacks column ") + name);
    return *c;
  };
  const auto kind = require("kind");
  const auto source = require("source_id");
  const auto target = require("true_target_id");
  GroundTruth truth;
  for (const auto& row : table.rows) {
    const auto& k = row.fields.at(kind);
    if (k == "operational") {
      truth.operational.emplace_back(row.fields.at(source), row.fields.at(target));
    } else if (k == "spill") {
      const auto& t = row.fields.at(target);
      truth.spills.emplace_back(row.fields.at(source), t == "NONE" ? std::nullopt : std::optional<std::string>(t));
    } else {
      throw Error(ErrorKind::SchemaViolation, "unknown ground truth kind '" + k + "'");
    }
  }
  return truth;
}

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 0x5e7));
  const double sep = cfg.min_separation;

  // Line placement.
  std::vector<MultiLine> lines;
  std::vector<std::size_t> line_operator;
  EndpointGrid grid(sep);
  for (std::size_t n = 0; n < cfg.n_lines; ++n) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < SynthConfig::kMaxAttempts && !placed; ++attempt) {
      MultiLine g;
      std::size_t op = 0;
      if (!lines.empty() && rng.uniform() < cfg.operator_reuse_clustering) {
        const std::size_t j = static_cast<std::size_t>(rng.below(lines.size()));
        const double lo = std::max(sep, 1.0);
        const double dist = rng.uniform(lo, 3.0 * lo);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Point2D shift = dist * Point2D(std::cos(angle), std::sin(angle));
        g = lines[j];
        for (auto& line : g.lines) {
          for (auto& v : line.vertices) v += shift;
        }
        op = line_operator[j];
      } else {
        g = split_chain(rng, random_walk(rng, cfg));
        op = static_cast<std::size_t>(rng.below(cfg.n_operators));
      }
      const Point2D first = g.lines.front().vertices.front();
      const Point2D last = g.lines.back().vertices.back();
      if ((first - last).norm() < 1.0) continue;
      const auto ends = endpoint_set(g);
      if (!std::all_of(ends.begin(), ends.end(), [&](const Point2D& p) { return grid.clear_of(p, sep); })) continue;
      for (const auto& p : ends) grid.insert(p);
      lines.push_back(std::move(g));
      line_operator.push_back(op);
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorKind::InfeasiblePacking,
                  "could not place line " + std::to_string(n + 1) + " with separation " + csv::format_double(sep));
    }
  }

  // Snap vertices onto the projection round trip so that geographic
  // exports re-project exactly onto the descriptive coordinates.
  std::vector<std::pair<GeoPoint, GeoPoint>> true_ends;
  for (auto& g : lines) {
    GeoPoint start_geo, end_geo;
    for (std::size_t li = 0; li < g.lines.size(); ++li) {
      auto& vs = g.lines[li].vertices;
      for (std::size_t vi = 0; vi < vs.size(); ++vi) {
        const GeoPoint geo = unproject(vs[vi], cfg.projection);
        vs[vi] = project(geo, cfg.projection);
        if (li == 0 && vi == 0) start_geo = geo;
        if (li + 1 == g.lines.size() && vi + 1 == vs.size()) end_geo = geo;
      }
    }
    true_ends.emplace_back(start_geo, end_geo);
  }

  SynthOutput out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.descriptive.push_back(DescriptiveFlowline{std::to_string(i + 1),
                                                  operator_spelling(line_operator[i], static_cast<int>(i % 3)),
                                                  lines[i]});
  }

  // Operational subset in shuffled order.
  std::vector<std::size_t> order(lines.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const auto n_op = static_cast<std::size_t>(std::llround(cfg.operational_fraction * static_cast<double>(lines.size())));
  order.resize(n_op);

  const auto n_sources = static_cast<std::size_t>(std::llround(cfg.spill_rate * static_cast<double>(n_op)));
  std::vector<std::size_t> source_slots(n_op);
  std::iota(source_slots.begin(), source_slots.end(), std::size_t{0});
  rng.shuffle(source_slots);
  source_slots.resize(n_sources);
  std::sort(source_slots.begin(), source_slots.end());
  std::vector<bool> is_source(n_op, false);
  for (auto s : source_slots) is_source[s] = true;

  static const char* kStatus[] = {"ACTIVE", "ACTIVE", "ACTIVE", "ABANDONED", "OUT OF SERVICE"};
  static const char* kAction[] = {"REGISTRATION", "REALIGNMENT", "PRE-ABANDONMENT"};
  static const char* kLocationType[] = {"WELL", "PRODUCTION FACILITY", "COMPRESSOR STATION"};
  static const char* kFluid[] = {"Crude Oil", "crude oil", "Produced Water", "Natural Gas", "Multiphase", "crud oil", "Other"};
  static const char* kMaterial[] = {"Carbon Steel", "Steel", "HDPE", "Fiberglass", "PVC", "poly"};
  static const double kDiameter[] = {2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0};
  static const double kPressure[] = {100.0, 250.0, 500.0, 740.0, 1000.0, 1440.0};
  const Date young_from{1980, 1, 1};
  const Date old_from{1965, 1, 1};
  const Date old_to{2005, 12, 31};
  const Date last = Date::from_days(cfg.reference_date.days_since_epoch() - 365);

  const double sigma = cfg.endpoint_jitter_sigma;
  auto jittered = [&](const GeoPoint& truth) {
    if (sigma == 0.0) return truth;
    const Point2D q = project(truth, cfg.projection);
    const Point2D offset(rng.truncated_normal(0.0, sigma, 3.0), rng.truncated_normal(0.0, sigma, 3.0));
    return unproject(q + offset, cfg.projection);
  };

  for (std::size_t slot = 0; slot < n_op; ++slot) {
    const std::size_t i = order[slot];
    const bool source = is_source[slot];
    OperationalFlowline r;
    r.source_row_id = std::to_string(slot + 1);
    r.operator_number = std::to_string(10000 + line_operator[i]);
    r.flowline_id = std::to_string(500000 + i);
    r.location_id = std::to_string(300000 + i / 5);
    r.status = pick(rng, kStatus);
    r.flowline_action = pick(rng, kAction);
    r.location_type = pick(rng, kLocationType);
    r.fluid_type = source && rng.uniform() < 0.5 ? "Crude Oil" : pick(rng, kFluid);
    r.material = pick(rng, kMaterial);
    r.diameter_inches = source ? kDiameter[3 + rng.below(4)] : pick(rng, kDiameter);
    r.length_feet = std::round(multiline_length(lines[i]) * 3.28084 * 10.0) / 10.0;
    r.max_operating_pressure = pick(rng, kPressure);
    r.construction_date = source ? random_date(rng, old_from, std::min(old_to, last)) : random_date(rng, young_from, last);
    r.operator_name = operator_spelling(line_operator[i], static_cast<int>((i + 1) % 3));
    r.start = jittered(true_ends[i].first);
    r.end = jittered(true_ends[i].second);
    out.operational.push_back(std::move(r));
    out.truth.operational.emplace_back(std::to_string(slot + 1), std::to_string(i + 1));
  }

  static const char* kRootCause[] = {"Equipment Failure", "Corrosion", "Human Error", "Unknown"};
  std::size_t spill_no = 0;
  for (auto slot : source_slots) {
    const auto& rec = out.operational[slot];
    const std::size_t i = order[slot];
    const auto [on_line, normal] = point_on_line(rng, lines[i]);
    const Point2D p = on_line + rng.truncated_normal(0.0, cfg.spill_lateral_sigma, 3.0) * normal;
    SpillRecord s;
    s.spill_id = std::to_string(++spill_no);
    s.operator_name = operator_spelling(line_operator[i], static_cast<int>(spill_no % 3));
    s.location = unproject(p, cfg.projection);
    s.root_cause_type = pick(rng, kRootCause);
    s.report_date = random_date(rng, rec.construction_date, cfg.reference_date);
    out.truth.spills.emplace_back(s.spill_id, rec.source_row_id);
    out.spills.push_back(std::move(s));
  }

  if (cfg.n_orphan_spills > 0) {
    std::vector<IndexEntry> entries;
    for (std::size_t i = 0; i < lines.size(); ++i) entries.push_back({i, bounding_box(lines[i])});
    const SpatialIndex index(std::move(entries));
    const double clearance = SynthConfig::kOrphanClearance;
    for (std::size_t k = 0; k < cfg.n_orphan_spills; ++k) {
      std::optional<Point2D> found;
      for (std::size_t attempt = 0; attempt < SynthConfig::kMaxAttempts && !found; ++attempt) {
        const Point2D p(cfg.origin_x + rng.uniform(0.0, cfg.area), cfg.origin_y + rng.uniform(0.0, cfg.area));
        const auto near = index.query_radius(p, clearance);
        if (std::all_of(near.begin(), near.end(),
                        [&](auto id) { return point_to_multiline_distance(p, lines[id]) >= clearance; })) {
          found = p;
        }
      }
      if (!found) throw Error(ErrorKind::InfeasiblePacking, "no room for an orphan spill");
      SpillRecord s;
      s.spill_id = std::to_string(++spill_no);
      s.operator_name = operator_spelling(static_cast<std::size_t>(rng.below(cfg.n_operators)), 0);
      s.location = unproject(*found, cfg.projection);
      s.root_cause_type = pick(rng, kRootCause);
      s.report_date = random_date(rng, young_from, cfg.reference_date);
      out.truth.spills.emplace_back(s.spill_id, std::nullopt);
      out.spills.push_back(std::move(s));
    }
  }
  return out;
}

SynthPaths synth_paths(const std::filesystem::path& dir) {
  return {dir / "descriptive.geojson", dir / "operational.csv", dir / "spills.csv", dir / "ground_truth.csv"};
}

SynthPaths write_synth(const std::filesystem::path& dir, const SynthOutput& output) {
  std::filesystem::create_directories(dir);
  const SynthPaths paths = synth_paths(dir);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::FileUnreadable, "cannot write " + p.string());
    return f;
  };
  {
    auto f = open(paths.descriptive);
    write_descriptive(f, output.descriptive);
  }
  {
    auto f = open(paths.operational);
    write_operational(f, output.operational);
  }
  {
    auto f = open(paths.spills);
    write_spills(f, output.spills);
  }
  {
    auto f = open(paths.truth);
    output.truth.write(f);
  }
  return paths;
}

}  // namespace flowrisk
