#include <algorithm>
#include <string>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/neighbors.hpp"

namespace flowrisk::ml {

void KNearestNeighbors::fit(const DenseMatrix& X, const Labels& y) {
  check_binary_training_set(X, y);
  if (params_.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (params_.k > X.rows()) {
    throw Error(ErrorKind::KTooLarge, "k = " + std::to_string(params_.k) + " exceeds " +
                                          std::to_string(X.rows()) + " training rows");
  }
  X_ = X;
  y_ = y;
  mark_fitted();
}

DenseVector KNearestNeighbors::predict_proba(const DenseMatrix& X) const {
  require_fitted();
  if (X.cols() != X_.cols()) throw Error(ErrorKind::InvalidArgument, "KNN input width mismatch");
  const auto k = static_cast<std::size_t>(params_.k);
  DenseVector out(X.rows());
  std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(X_.rows()));
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    for (Eigen::Index i = 0; i < X_.rows(); ++i) {
      dist[static_cast<std::size_t>(i)] = {(X_.row(i) - X.row(q)).squaredNorm(), static_cast<std::size_t>(i)};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::size_t positive = 0;
    for (std::size_t j = 0; j < k; ++j) positive += y_[dist[j].second] == 1 ? 1 : 0;
    out(q) = static_cast<double>(positive) / static_cast<double>(k);
  }
  return out;
}

nlohmann::json KNearestNeighbors::hyperparameters() const { return {{"k", params_.k}}; }

nlohmann::json KNearestNeighbors::parameters() const { return {{"X", matrix_to_json(X_)}, {"y", y_}}; }

void KNearestNeighbors::load_parameters(const nlohmann::json& p) {
  X_ = matrix_from_json(p.at("X"));
  y_ = p.at("y").get<Labels>();
  mark_fitted();
}

}  // namespace flowrisk::ml
