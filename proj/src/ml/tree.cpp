#include <algorithm>
#include <numeric>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/tree.hpp"

namespace flowrisk::ml {
namespace {

struct GiniStats {
  double weight = 0.0;
  double positive = 0.0;
  std::size_t count = 0;
  GiniStats operator-(const GiniStats& o) const { return {weight - o.weight, positive - o.positive, count - o.count}; }
};

// Gini impurity scaled by node weight: W - (W1^2 + W0^2) / W.
struct GiniCriterion {
  using Stats = GiniStats;
  const Labels& y;
  const DenseVector& w;

  void add(Stats& s, std::size_t r) const {
    const double wr = w(static_cast<Eigen::Index>(r));
    s.weight += wr;
    s.positive += y[r] == 1 ? wr : 0.0;
    ++s.count;
  }
  double impurity(const Stats& s) const {
    if (s.weight <= 0.0) return 0.0;
    const double negative = s.weight - s.positive;
    return s.weight - (s.positive * s.positive + negative * negative) / s.weight;
  }
  bool pure(const std::vector<std::size_t>& rows) const {
    return std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y[r] == y[rows.front()]; });
  }
};

struct SseStats {
  double n = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  SseStats operator-(const SseStats& o) const { return {n - o.n, sum - o.sum, sum_sq - o.sum_sq, count - o.count}; }
};

struct SseCriterion {
  using Stats = SseStats;
  const DenseVector& target;

  void add(Stats& s, std::size_t r) const {
    const double v = target(static_cast<Eigen::Index>(r));
    s.n += 1.0;
    s.sum += v;
    s.sum_sq += v * v;
    ++s.count;
  }
  double impurity(const Stats& s) const { return s.n > 0.0 ? std::max(0.0, s.sum_sq - s.sum * s.sum / s.n) : 0.0; }
  bool pure(const std::vector<std::size_t>& rows) const {
    const double first = target(static_cast<Eigen::Index>(rows.front()));
    return std::all_of(rows.begin(), rows.end(),
                       [&](std::size_t r) { return target(static_cast<Eigen::Index>(r)) == first; });
  }
};

template <typename Criterion>
Split find_split(const Criterion& crit, const DenseMatrix& X, const std::vector<std::size_t>& rows,
                 const std::vector<int>& features, int min_leaf) {
  Split best;
  typename Criterion::Stats total;
  for (auto r : rows) crit.add(total, r);

  std::vector<std::pair<double, std::size_t>> sorted(rows.size());
  const auto min_count = static_cast<std::size_t>(std::max(1, min_leaf));
  for (int f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sorted[i] = {X(static_cast<Eigen::Index>(rows[i]), f), rows[i]};
    }
    std::sort(sorted.begin(), sorted.end());
    typename Criterion::Stats left;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      crit.add(left, sorted[k].second);
      const double lo = sorted[k].first;
      const double hi = sorted[k + 1].first;
      if (lo == hi) continue;
      if (left.count < min_count || rows.size() - left.count < min_count) continue;
      const double impurity = crit.impurity(left) + crit.impurity(total - left);
      if (best.feature < 0 || impurity < best.impurity) {
        double threshold = 0.5 * (lo + hi);
        if (!(threshold < hi)) threshold = lo;
        best = {f, threshold, impurity};
      }
    }
  }
  return best;
}

std::vector<int> candidate_features(int p, int mtry, Rng* rng) {
  std::vector<int> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), 0);
  if (mtry <= 0 || mtry >= p || rng == nullptr) return all;
  for (int i = 0; i < mtry; ++i) {
    const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng->below(static_cast<std::uint64_t>(p - i)));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  all.resize(static_cast<std::size_t>(mtry));
  std::sort(all.begin(), all.end());
  return all;
}

template <typename Criterion, typename LeafValue>
int grow(Tree& tree, const Criterion& crit, const DenseMatrix& X, std::vector<std::size_t> rows, int depth,
         const TreeGrowth& growth, Rng* rng, const LeafValue& leaf_value) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});

  Split split;
  const auto min_leaf = static_cast<std::size_t>(std::max(1, growth.min_leaf));
  if (depth < growth.max_depth && rows.size() >= 2 * min_leaf && !crit.pure(rows)) {
    split = find_split(crit, X, rows, candidate_features(static_cast<int>(X.cols()), growth.mtry, rng),
                       growth.min_leaf);
  }
  if (split.feature < 0) {
    tree.nodes[static_cast<std::size_t>(index)].value = leaf_value(rows);
    return index;
  }

  std::vector<std::size_t> left, right;
  for (auto r : rows) {
    (X(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();
  const int l = grow(tree, crit, X, std::move(left), depth + 1, growth, rng, leaf_value);
  const int r = grow(tree, crit, X, std::move(right), depth + 1, growth, rng, leaf_value);
  auto& node = tree.nodes[static_cast<std::size_t>(index)];
  node.feature = split.feature;
  node.threshold = split.threshold;
  node.left = l;
  node.right = r;
  return index;
}

}  // namespace

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature < 0) continue;
    d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
    d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

std::size_t Tree::leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

nlohmann::json Tree::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& n : nodes) arr.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return arr;
}

Tree Tree::from_json(const nlohmann::json& j) {
  Tree t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>()});
  }
  return t;
}

Split best_gini_split(const DenseMatrix& X, const Labels& y, const DenseVector& w,
                      const std::vector<std::size_t>& rows, const std::vector<int>& features, int min_leaf) {
  return find_split(GiniCriterion{y, w}, X, rows, features, min_leaf);
}

Tree grow_classification_tree(const DenseMatrix& X, const Labels& y, const DenseVector& w,
                              std::vector<std::size_t> rows, const TreeGrowth& growth, Rng* rng) {
  if (growth.max_depth < 0) throw Error(ErrorKind::InvalidArgument, "max_depth must be >= 0");
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, "cannot grow a tree on zero rows");
  Tree tree;
  auto leaf = [&](const std::vector<std::size_t>& rs) {
    double total = 0.0, positive = 0.0;
    for (auto r : rs) {
      const double wr = w(static_cast<Eigen::Index>(r));
      total += wr;
      positive += y[r] == 1 ? wr : 0.0;
    }
    return total > 0.0 ? positive / total : 0.0;
  };
  grow(tree, GiniCriterion{y, w}, X, std::move(rows), 0, growth, rng, leaf);
  return tree;
}

Tree grow_regression_tree(const DenseMatrix& X, const DenseVector& target, std::vector<std::size_t> rows,
                          const TreeGrowth& growth,
                          const std::function<double(const std::vector<std::size_t>&)>& leaf_value) {
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, "cannot grow a tree on zero rows");
  Tree tree;
  grow(tree, SseCriterion{target}, X, std::move(rows), 0, growth, nullptr, leaf_value);
  return tree;
}

void DecisionTree::fit(const DenseMatrix& X, const Labels& y) {
  check_binary_training_set(X, y);
  if (params_.max_depth < 1) throw Error(ErrorKind::InvalidArgument, "max_depth must be >= 1");
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  tree_ = grow_classification_tree(X, y, sample_weights(y, params_.class_weight), std::move(rows),
                                   {params_.max_depth, params_.min_leaf, 0});
  mark_fitted();
}

DenseVector DecisionTree::predict_proba(const DenseMatrix& X) const {
  require_fitted();
  DenseVector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = tree_.evaluate(X.row(i));
  return out;
}

nlohmann::json DecisionTree::hyperparameters() const {
  return {{"max_depth", params_.max_depth},
          {"min_leaf", params_.min_leaf},
          {"class_weight", std::string(to_string(params_.class_weight))}};
}

nlohmann::json DecisionTree::parameters() const { return {{"tree", tree_.to_json()}}; }

void DecisionTree::load_parameters(const nlohmann::json& p) {
  tree_ = Tree::from_json(p.at("tree"));
  mark_fitted();
}

}  // namespace flowrisk::ml
