#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "flowrisk/ml/classifier.hpp"
#include "flowrisk/rng.hpp"

namespace flowrisk::ml {

/// Flat binary tree; rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output (class-1 probability or regression value)
};

struct Tree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double evaluate(const Row& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
  int depth() const;
  std::size_t leaves() const;

  nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& j);
};

struct TreeGrowth {
  int max_depth = 6;
  int min_leaf = 1;
  int mtry = 0;  // features tried per split; 0 = all
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity (Gini mass or SSE)
};

/// Best weighted-Gini split of `rows` over `features` (exhaustive scan of
/// midpoints between sorted unique values). feature == -1 when none is valid.
Split best_gini_split(const DenseMatrix& X, const Labels& y, const DenseVector& w,
                      const std::vector<std::size_t>& rows, const std::vector<int>& features, int min_leaf);

/// CART classification tree; leaves store the weighted class-1 fraction.
Tree grow_classification_tree(const DenseMatrix& X, const Labels& y, const DenseVector& w,
                              std::vector<std::size_t> rows, const TreeGrowth& growth, Rng* rng = nullptr);

/// Regression tree on `target` by SSE; leaf values from `leaf_value(rows)`.
Tree grow_regression_tree(const DenseMatrix& X, const DenseVector& target, std::vector<std::size_t> rows,
                          const TreeGrowth& growth,
                          const std::function<double(const std::vector<std::size_t>&)>& leaf_value);

struct TreeParams {
  int max_depth = 6;
  int min_leaf = 2;
  ClassWeight class_weight = ClassWeight::None;
};

class DecisionTree final : public Classifier {
 public:
  explicit DecisionTree(TreeParams params = {}) : params_(params) {}

  ModelKind kind() const noexcept override { return ModelKind::TREE; }
  void fit(const DenseMatrix& X, const Labels& y) override;
  DenseVector predict_proba(const DenseMatrix& X) const override;
  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load_parameters(const nlohmann::json& params) override;

  const Tree& tree() const { return tree_; }

 private:
  TreeParams params_;
  Tree tree_;
};

struct GbdtParams {
  int n_trees = 100;
  int max_depth = 3;
  double shrinkage = 0.1;
  int min_leaf = 1;
};

/// Binary log-loss gradient boosting: each stage fits a regression tree to
/// the residuals y - p with Newton leaf values sum(r) / sum(p(1-p)).
class GradientBoosting final : public Classifier {
 public:
  explicit GradientBoosting(GbdtParams params = {}) : params_(params) {}

  ModelKind kind() const noexcept override { return ModelKind::GBDT; }
  void fit(const DenseMatrix& X, const Labels& y) override;
  DenseVector predict_proba(const DenseMatrix& X) const override;
  DenseVector raw_score(const DenseMatrix& X) const;
  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load_parameters(const nlohmann::json& params) override;

  /// Mean training log-loss before the first stage and after each stage.
  const std::vector<double>& loss_trace() const { return loss_trace_; }
  std::size_t stages() const { return trees_.size(); }

 private:
  GbdtParams params_;
  double prior_log_odds_ = 0.0;
  std::vector<Tree> trees_;
  std::vector<double> loss_trace_;
};

struct AdaBoostParams {
  int n_stumps = 100;
};

struct Stump {
  int feature = 0;
  double threshold = 0.0;
  int left = 1;  // +1 / -1 output for x[feature] <= threshold; right is -left
};

struct AdaBoostRound {
  double error = 0.0;
  double alpha = 0.0;
  double training_error = 0.0;  // ensemble error on the training set after this round
  double bound = 1.0;           // prod_m 2 sqrt(err_m (1 - err_m))
};

/// Discrete AdaBoost over decision stumps. Stops early when a round's weighted
/// error is >= 0.5 (round discarded) or exactly 0 (round kept).
class AdaBoost final : public Classifier {
 public:
  explicit AdaBoost(AdaBoostParams params = {}) : params_(params) {}

  ModelKind kind() const noexcept override { return ModelKind::ADABOOST; }
  void fit(const DenseMatrix& X, const Labels& y) override;
  DenseVector predict_proba(const DenseMatrix& X) const override;
  DenseVector decision_function(const DenseMatrix& X) const;
  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load_parameters(const nlohmann::json& params) override;

  const std::vector<AdaBoostRound>& rounds() const { return rounds_; }
  const std::vector<double>& initial_weights() const { return initial_weights_; }
  std::size_t size() const { return stumps_.size(); }

  /// Minimum weighted-error stump over all features, thresholds and polarities.
  static Stump best_stump(const DenseMatrix& X, const std::vector<int>& signs, const DenseVector& w, double* error);

 private:
  AdaBoostParams params_;
  std::vector<Stump> stumps_;
  std::vector<double> alphas_;
  std::vector<AdaBoostRound> rounds_;
  std::vector<double> initial_weights_;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 8;
  int min_leaf = 1;
  int mtry = 0;  // 0 = ceil(sqrt(p))
  bool bootstrap = true;
  std::uint64_t seed = 0;
  ClassWeight class_weight = ClassWeight::None;
  unsigned threads = 1;
};

/// Bagged CART trees with per-split feature subsampling; majority vote, ties
/// to class 0. Tree t draws from its own stream derive_seed(seed, t), so the
/// forest is identical for any thread count.
class RandomForest final : public Classifier {
 public:
  explicit RandomForest(ForestParams params = {}) : params_(params) {}

  ModelKind kind() const noexcept override { return ModelKind::RF; }
  void fit(const DenseMatrix& X, const Labels& y) override;
  DenseVector predict_proba(const DenseMatrix& X) const override;
  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load_parameters(const nlohmann::json& params) override;

  const std::vector<Tree>& trees() const { return trees_; }

 private:
  ForestParams params_;
  std::vector<Tree> trees_;
};

}  // namespace flowrisk::ml
