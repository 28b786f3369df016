#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/tree.hpp"

namespace flowrisk::ml {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mean_log_loss(const DenseVector& score, const Labels& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < score.size(); ++i) {
    const double z = score(i);
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y[static_cast<std::size_t>(i)] * z;
  }
  return total / static_cast<double>(score.size());
}

// Newton leaves can blow up on near-pure leaves whose hessian mass vanishes.
constexpr double kMaxLeafValue = 20.0;

}  // namespace

void GradientBoosting::fit(const DenseMatrix& X, const Labels& y) {
  check_binary_training_set(X, y);
  if (params_.n_trees < 1) throw Error(ErrorKind::InvalidArgument, "n_trees must be >= 1");
  const Eigen::Index n = X.rows();
  const double positive_rate =
      static_cast<double>(std::accumulate(y.begin(), y.end(), 0)) / static_cast<double>(n);
  prior_log_odds_ = std::log(positive_rate / (1.0 - positive_rate));

  DenseVector score = DenseVector::Constant(n, prior_log_odds_);
  DenseVector prob(n), residual(n);
  trees_.clear();
  loss_trace_ = {mean_log_loss(score, y)};

  std::vector<std::size_t> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), std::size_t{0});
  const TreeGrowth growth{params_.max_depth, params_.min_leaf, 0};

  for (int m = 0; m < params_.n_trees; ++m) {
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(score(i));
      residual(i) = y[static_cast<std::size_t>(i)] - prob(i);
    }
    auto newton_leaf = [&](const std::vector<std::size_t>& rows) {
      double num = 0.0, den = 0.0;
      for (auto r : rows) {
        const auto i = static_cast<Eigen::Index>(r);
        num += residual(i);
        den += prob(i) * (1.0 - prob(i));
      }
      if (den < 1e-12) den = 1e-12;
      return std::clamp(num / den, -kMaxLeafValue, kMaxLeafValue);
    };
    Tree tree = grow_regression_tree(X, residual, all, growth, newton_leaf);
    for (Eigen::Index i = 0; i < n; ++i) score(i) += params_.shrinkage * tree.evaluate(X.row(i));
    trees_.push_back(std::move(tree));
    loss_trace_.push_back(mean_log_loss(score, y));
  }
  mark_fitted();
}

DenseVector GradientBoosting::raw_score(const DenseMatrix& X) const {
  require_fitted();
  DenseVector score = DenseVector::Constant(X.rows(), prior_log_odds_);
  for (const auto& tree : trees_) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) score(i) += params_.shrinkage * tree.evaluate(X.row(i));
  }
  return score;
}

DenseVector GradientBoosting::predict_proba(const DenseMatrix& X) const {
  return raw_score(X).unaryExpr([](double z) { return sigmoid(z); });
}

nlohmann::json GradientBoosting::hyperparameters() const {
  return {{"n_trees", params_.n_trees},
          {"max_depth", params_.max_depth},
          {"shrinkage", params_.shrinkage},
          {"min_leaf", params_.min_leaf}};
}

nlohmann::json GradientBoosting::parameters() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"prior_log_odds", prior_log_odds_}, {"trees", std::move(trees)}};
}

void GradientBoosting::load_parameters(const nlohmann::json& p) {
  prior_log_odds_ = p.at("prior_log_odds").get<double>();
  trees_.clear();
  for (const auto& t : p.at("trees")) trees_.push_back(Tree::from_json(t));
  mark_fitted();
}

}  // namespace flowrisk::ml
