#include <cmath>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/linear.hpp"

namespace flowrisk::ml {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double LogisticRegression::loss(const DenseMatrix& X, const Labels& y, const DenseVector& sample_w, double l2,
                                const DenseVector& w, double b) {
  const DenseVector z = (X * w).array() + b;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    total += sample_w(i) * (softplus(z(i)) - y[static_cast<std::size_t>(i)] * z(i));
  }
  return total / sample_w.sum() + 0.5 * l2 * w.squaredNorm();
}

DenseVector LogisticRegression::gradient(const DenseMatrix& X, const Labels& y, const DenseVector& sample_w,
                                         double l2, const DenseVector& w, double b) {
  const DenseVector z = (X * w).array() + b;
  DenseVector residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    residual(i) = sample_w(i) * (sigmoid(z(i)) - y[static_cast<std::size_t>(i)]);
  }
  const double norm = sample_w.sum();
  DenseVector g(w.size() + 1);
  g.head(w.size()) = X.transpose() * residual / norm + l2 * w;
  g(w.size()) = residual.sum() / norm;
  return g;
}

void LogisticRegression::fit(const DenseMatrix& X, const Labels& y) {
  check_binary_training_set(X, y);
  const DenseVector sw = sample_weights(y, params_.class_weight);
  w_ = DenseVector::Zero(X.cols());
  b_ = 0.0;
  for (int epoch = 0; epoch < params_.epochs; ++epoch) {
    const DenseVector g = gradient(X, y, sw, params_.l2, w_, b_);
    w_ -= params_.learning_rate * g.head(w_.size());
    b_ -= params_.learning_rate * g(w_.size());
  }
  mark_fitted();
}

DenseVector LogisticRegression::predict_proba(const DenseMatrix& X) const {
  require_fitted();
  if (X.cols() != w_.size()) throw Error(ErrorKind::InvalidArgument, "LR input width mismatch");
  DenseVector z = (X * w_).array() + b_;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

nlohmann::json LogisticRegression::hyperparameters() const {
  return {{"learning_rate", params_.learning_rate},
          {"epochs", params_.epochs},
          {"l2", params_.l2},
          {"class_weight", std::string(to_string(params_.class_weight))}};
}

nlohmann::json LogisticRegression::parameters() const { return {{"weights", vector_to_json(w_)}, {"intercept", b_}}; }

void LogisticRegression::load_parameters(const nlohmann::json& p) {
  w_ = vector_from_json(p.at("weights"));
  b_ = p.at("intercept").get<double>();
  mark_fitted();
}

}  // namespace flowrisk::ml
