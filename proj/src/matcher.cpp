#include "flowrisk/matcher.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "flowrisk/csv.hpp"
#include "flowrisk/error.hpp"
#include "flowrisk/spatial_index.hpp"

namespace flowrisk {
namespace {

constexpr double kDegenerateEps = 1e-6;

// Smallest ladder step >= d, or nullopt when d exceeds the ladder.
std::optional<std::size_t> first_step_covering(const ToleranceLadder& ladder, double d) {
  auto it = std::lower_bound(ladder.steps.begin(), ladder.steps.end(), d);
  if (it == ladder.steps.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ladder.steps.begin());
}

std::optional<long long> as_integer(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

void ToleranceLadder::validate() const {
  if (steps.empty()) throw Error(ErrorKind::InvalidArgument, "tolerance ladder is empty");
  if (!(steps.front() >= 0.0)) throw Error(ErrorKind::InvalidArgument, "first ladder step must be >= 0");
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i] > steps[i - 1])) throw Error(ErrorKind::InvalidArgument, "ladder steps must be strictly ascending");
  }
  for (double s : steps) {
    if (!std::isfinite(s)) throw Error(ErrorKind::InvalidArgument, "ladder steps must be finite");
  }
}

ToleranceLadder ToleranceLadder::parse(std::string_view text) {
  ToleranceLadder ladder;
  ladder.steps.clear();
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
      throw Error(ErrorKind::InvalidArgument, "bad ladder step '" + t + "'");
    }
    ladder.steps.push_back(v);
  }
  ladder.validate();
  return ladder;
}

std::string ToleranceLadder::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += ',';
    out += csv::format_double(steps[i]);
  }
  return out;
}

bool id_less(std::string_view a, std::string_view b) {
  auto ia = as_integer(a);
  auto ib = as_integer(b);
  if (ia && ib) return *ia < *ib;
  return a < b;
}

PolyLine interpolate_line(const OperationalFlowline& rec, const ProjectionParams& params) {
  const Point2D a = project(rec.start, params);
  const Point2D b = project(rec.end, params);
  if ((a - b).norm() <= kDegenerateEps) {
    throw Error(ErrorKind::DegenerateLine, "record " + rec.source_row_id + " has coincident endpoints");
  }
  return PolyLine{{a, b}};
}

MatchResult match_flowlines(const std::vector<OperationalFlowline>& operational,
                            const std::vector<DescriptiveFlowline>& descriptive, const ToleranceLadder& ladder,
                            const MatchOptions& options) {
  ladder.validate();
  const double max_tol = ladder.max();

  std::vector<IndexEntry> entries;
  std::vector<std::string> desc_operator;
  desc_operator.reserve(descriptive.size());
  for (std::size_t i = 0; i < descriptive.size(); ++i) {
    const auto& g = descriptive[i].geometry;
    if (options.mode == ProximityMode::Endpoints) {
      for (const auto& p : endpoint_set(g)) entries.push_back({i, BoundingBox::around(p)});
    } else {
      entries.push_back({i, bounding_box(g)});
    }
    desc_operator.push_back(normalize_operator_name(descriptive[i].operator_name));
  }
  const SpatialIndex index(std::move(entries));

  auto distance = [&](const Point2D& p, const MultiLine& g) {
    return options.mode == ProximityMode::Endpoints ? point_to_endpoint_distance(p, g)
                                                    : point_to_multiline_distance(p, g);
  };

  MatchResult result;
  for (const auto& rec : operational) {
    MatchAuditEntry audit{rec.source_row_id, max_tol, 0, std::nullopt, 0.0, 0.0};

    PolyLine line;
    try {
      line = interpolate_line(rec, options.projection);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateLine) throw;
      result.unmatched.push_back(rec.source_row_id);
      result.audit.push_back(audit);
      continue;
    }
    const Point2D start = line.vertices.front();
    const Point2D end = line.vertices.back();
    const std::string op = normalize_operator_name(rec.operator_name);

    struct Candidate {
      std::size_t desc;
      double d_start;
      double d_end;
      std::size_t step;
      bool operator_ok;
    };
    std::vector<Candidate> candidates;
    for (auto id : index.query_radius(start, max_tol)) {
      const auto& g = descriptive[id].geometry;
      const double ds = distance(start, g);
      const double de = distance(end, g);
      auto step = first_step_covering(ladder, std::max(ds, de));
      if (!step) continue;
      candidates.push_back({static_cast<std::size_t>(id), ds, de, *step, desc_operator[id] == op});
    }

    std::optional<std::size_t> reached;
    for (const auto& c : candidates) {
      if (c.operator_ok && (!reached || c.step < *reached)) reached = c.step;
    }
    const std::size_t step = reached.value_or(ladder.steps.size() - 1);
    audit.step_reached = ladder.steps[step];
    audit.n_candidates = static_cast<std::size_t>(
        std::count_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.step <= step; }));

    if (!reached) {
      result.unmatched.push_back(rec.source_row_id);
      result.audit.push_back(audit);
      continue;
    }

    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
      if (!c.operator_ok || c.step > step) continue;
      if (!best) {
        best = &c;
        continue;
      }
      const double sum = c.d_start + c.d_end;
      const double best_sum = best->d_start + best->d_end;
      if (sum < best_sum ||
          (sum == best_sum && id_less(descriptive[c.desc].source_row_id, descriptive[best->desc].source_row_id))) {
        best = &c;
      }
    }

    const auto& desc = descriptive[best->desc];
    audit.chosen_id = desc.source_row_id;
    audit.d_start = best->d_start;
    audit.d_end = best->d_end;
    result.audit.push_back(audit);
    result.merged.push_back(MergedFlowline{rec, desc.source_row_id, desc.geometry, rec.operator_name,
                                           ladder.steps[step], best->d_start, best->d_end, 0});
  }
  return result;
}

std::vector<SpillAttribution> match_spills(const std::vector<SpillRecord>& spills,
                                           const std::vector<MergedFlowline>& merged, const ToleranceLadder& ladder,
                                           const ProjectionParams& params) {
  ladder.validate();
  const double max_tol = ladder.max();

  std::vector<IndexEntry> entries;
  std::vector<std::string> merged_operator;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    entries.push_back({i, bounding_box(merged[i].geometry)});
    merged_operator.push_back(normalize_operator_name(merged[i].operator_name));
  }
  const SpatialIndex index(std::move(entries));

  std::vector<SpillAttribution> out;
  out.reserve(spills.size());
  for (const auto& spill : spills) {
    SpillAttribution attr{spill.spill_id, std::nullopt, std::numeric_limits<double>::quiet_NaN(), max_tol};
    const Point2D p = project(spill.location, params);
    const std::string op = normalize_operator_name(spill.operator_name);

    std::optional<std::size_t> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (auto id : index.query_radius(p, max_tol)) {
      if (merged_operator[id] != op) continue;
      const double d = point_to_multiline_distance(p, merged[id].geometry);
      if (d > max_tol) continue;
      // Minimal distance also minimizes the covering step; ties keep input order.
      if (d < best_distance || (d == best_distance && id < *best)) {
        best = static_cast<std::size_t>(id);
        best_distance = d;
      }
    }
    if (best) {
      attr.flowline_id = merged[*best].id();
      attr.distance = best_distance;
      attr.tolerance_used = ladder.steps[*first_step_covering(ladder, best_distance)];
    }
    out.push_back(std::move(attr));
  }
  return out;
}

std::vector<MergedFlowline> assign_risk(std::vector<MergedFlowline> merged,
                                        const std::vector<SpillAttribution>& attributions) {
  std::unordered_map<std::string, std::vector<std::size_t>> by_id;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    merged[i].risk = 0;
    by_id[merged[i].id()].push_back(i);
  }
  for (const auto& a : attributions) {
    if (!a.flowline_id) continue;
    auto it = by_id.find(*a.flowline_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::DanglingReference, "spill " + a.spill_id + " references unknown flowline " + *a.flowline_id);
    }
    for (auto i : it->second) merged[i].risk = 1;
  }
  return merged;
}

void write_audit(std::ostream& out, const std::vector<MatchAuditEntry>& audit) {
  csv::write_row(out, {"record_id", "step_reached", "n_candidates", "chosen_id", "d_start", "d_end"});
  for (const auto& a : audit) {
    csv::write_row(out, {a.record_id, csv::format_double(a.step_reached), std::to_string(a.n_candidates),
                         a.chosen_id.value_or(""), a.chosen_id ? csv::format_double(a.d_start) : "",
                         a.chosen_id ? csv::format_double(a.d_end) : ""});
  }
}

void write_attributions(std::ostream& out, const std::vector<SpillAttribution>& attributions) {
  csv::write_row(out, {"spill_id", "flowline_id", "distance", "tolerance_used"});
  for (const auto& a : attributions) {
    csv::write_row(out, {a.spill_id, a.flowline_id.value_or(""), a.flowline_id ? csv::format_double(a.distance) : "",
                         csv::format_double(a.tolerance_used)});
  }
}

}  // namespace flowrisk
