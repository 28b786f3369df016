#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/linear.hpp"
#include "flowrisk/rng.hpp"

namespace flowrisk::ml {

double LinearSvm::objective(const DenseMatrix& X, const Labels& y, const DenseVector& w, double b) const {
  const DenseVector sw = sample_weights(y, params_.class_weight);
  const DenseVector margin = (X * w).array() + b;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    const double s = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    hinge += sw(i) * std::max(0.0, 1.0 - s * margin(i));
  }
  return 0.5 * (w.squaredNorm() + b * b) + params_.C * hinge;
}

void LinearSvm::fit(const DenseMatrix& X, const Labels& y) {
  check_binary_training_set(X, y);
  if (!(params_.C > 0.0)) throw Error(ErrorKind::InvalidArgument, "SVM C must be > 0");
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const DenseVector sw = sample_weights(y, params_.class_weight);

  // Dividing the objective by C*n gives Pegasos' (lambda/2)||v||^2 + mean hinge
  // with lambda = 1 / (C n); v = (w, b).
  const double lambda = 1.0 / (params_.C * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  DenseVector v = DenseVector::Zero(p + 1);
  DenseVector avg = DenseVector::Zero(p + 1);
  DenseVector xi(p + 1);
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(params_.seed);
  trace_.clear();

  std::uint64_t t = 0;
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const auto row = static_cast<Eigen::Index>(i);
      xi.head(p) = X.row(row).transpose();
      xi(p) = 1.0;
      const double s = y[i] == 1 ? 1.0 : -1.0;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const bool violated = s * v.dot(xi) < 1.0;
      v *= 1.0 - eta * lambda;
      if (violated) v += eta * sw(row) * s * xi;
      const double norm = v.norm();
      if (norm > radius) v *= radius / norm;
      avg += (v - avg) / static_cast<double>(t);
    }
    trace_.push_back(objective(X, y, avg.head(p), avg(p)));
  }
  w_ = avg.head(p);
  b_ = avg(p);
  mark_fitted();
}

DenseVector LinearSvm::decision_function(const DenseMatrix& X) const {
  require_fitted();
  if (X.cols() != w_.size()) throw Error(ErrorKind::InvalidArgument, "SVM input width mismatch");
  return (X * w_).array() + b_;
}

DenseVector LinearSvm::predict_proba(const DenseMatrix& X) const {
  // Logistic squashing of the margin: a monotone score, not a calibrated probability.
  return decision_function(X).unaryExpr([](double m) { return 1.0 / (1.0 + std::exp(-m)); });
}

nlohmann::json LinearSvm::hyperparameters() const {
  return {{"C", params_.C},
          {"epochs", params_.epochs},
          {"seed", params_.seed},
          {"class_weight", std::string(to_string(params_.class_weight))}};
}

nlohmann::json LinearSvm::parameters() const { return {{"weights", vector_to_json(w_)}, {"bias", b_}}; }

void LinearSvm::load_parameters(const nlohmann::json& p) {
  w_ = vector_from_json(p.at("weights"));
  b_ = p.at("bias").get<double>();
  mark_fitted();
}

}  // namespace flowrisk::ml
