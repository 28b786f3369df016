#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/tree.hpp"

namespace flowrisk::ml {

void RandomForest::fit(const DenseMatrix& X, const Labels& y) {
  check_binary_training_set(X, y);
  if (params_.n_trees < 1) throw Error(ErrorKind::InvalidArgument, "n_trees must be >= 1");
  const int p = static_cast<int>(X.cols());
  int mtry = params_.mtry == 0 ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))) : params_.mtry;
  if (mtry < 1 || mtry > p) throw Error(ErrorKind::InvalidArgument, "mtry must be in [1, p]");

  const DenseVector w = sample_weights(y, params_.class_weight);
  const auto n = static_cast<std::size_t>(X.rows());
  const TreeGrowth growth{params_.max_depth, params_.min_leaf, mtry};
  trees_.assign(static_cast<std::size_t>(params_.n_trees), Tree{});

  auto build = [&](std::size_t t) {
    Rng rng(derive_seed(params_.seed, t));
    std::vector<std::size_t> rows(n);
    if (params_.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    trees_[t] = grow_classification_tree(X, y, w, std::move(rows), growth, &rng);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(params_.threads, static_cast<unsigned>(params_.n_trees)));
  if (threads == 1) {
    for (std::size_t t = 0; t < trees_.size(); ++t) build(t);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) {
      pool.emplace_back([&, k] {
        for (std::size_t t = k; t < trees_.size(); t += threads) build(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  mark_fitted();
}

DenseVector RandomForest::predict_proba(const DenseMatrix& X) const {
  require_fitted();
  DenseVector votes = DenseVector::Zero(X.rows());
  for (const auto& tree : trees_) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) votes(i) += tree.evaluate(X.row(i)) > 0.5 ? 1.0 : 0.0;
  }
  return votes / static_cast<double>(trees_.size());
}

nlohmann::json RandomForest::hyperparameters() const {
  return {{"n_trees", params_.n_trees},     {"max_depth", params_.max_depth},
          {"min_leaf", params_.min_leaf},   {"mtry", params_.mtry},
          {"bootstrap", params_.bootstrap}, {"seed", params_.seed},
          {"class_weight", std::string(to_string(params_.class_weight))}};
}

nlohmann::json RandomForest::parameters() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"trees", std::move(trees)}};
}

void RandomForest::load_parameters(const nlohmann::json& p) {
  trees_.clear();
  for (const auto& t : p.at("trees")) trees_.push_back(Tree::from_json(t));
  mark_fitted();
}

}  // namespace flowrisk::ml
