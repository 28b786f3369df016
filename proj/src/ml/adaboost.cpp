#include <algorithm>
#include <cmath>
#include <limits>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/tree.hpp"

namespace flowrisk::ml {
namespace {

// Error floor used when a stump is perfect, so alpha stays finite.
constexpr double kMinError = 1e-10;

int stump_output(const Stump& s, double x) { return x <= s.threshold ? s.left : -s.left; }

}  // namespace

Stump AdaBoost::best_stump(const DenseMatrix& X, const std::vector<int>& signs, const DenseVector& w, double* error) {
  const Eigen::Index n = X.rows();
  double total_pos = 0.0, total_neg = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) (signs[static_cast<std::size_t>(i)] > 0 ? total_pos : total_neg) += w(i);

  Stump best{0, -std::numeric_limits<double>::infinity(), 1};
  // Everything on the right: constant prediction -left.
  double best_err = std::min(total_pos, total_neg);
  best.left = total_pos <= total_neg ? 1 : -1;
  if (X.rows() > 0) best.threshold = X.col(0).minCoeff() - 1.0;

  std::vector<std::pair<double, Eigen::Index>> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = {X(i, f), i};
    std::sort(sorted.begin(), sorted.end());
    double left_pos = 0.0, left_neg = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      const Eigen::Index i = sorted[k].second;
      (signs[static_cast<std::size_t>(i)] > 0 ? left_pos : left_neg) += w(i);
      if (k + 1 < sorted.size() && sorted[k].first == sorted[k + 1].first) continue;
      if (k + 1 == sorted.size()) continue;
      const double err_plus = left_neg + (total_pos - left_pos);   // left predicts +1
      const double err_minus = left_pos + (total_neg - left_neg);  // left predicts -1
      double threshold = 0.5 * (sorted[k].first + sorted[k + 1].first);
      if (!(threshold < sorted[k + 1].first)) threshold = sorted[k].first;
      if (err_plus < best_err) {
        best_err = err_plus;
        best = {static_cast<int>(f), threshold, 1};
      }
      if (err_minus < best_err) {
        best_err = err_minus;
        best = {static_cast<int>(f), threshold, -1};
      }
    }
  }
  if (error) *error = std::max(0.0, best_err);
  return best;
}

void AdaBoost::fit(const DenseMatrix& X, const Labels& y) {
  check_binary_training_set(X, y);
  if (params_.n_stumps < 1) throw Error(ErrorKind::InvalidArgument, "n_stumps must be >= 1");
  const Eigen::Index n = X.rows();
  std::vector<int> signs(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) signs[i] = y[i] == 1 ? 1 : -1;

  DenseVector w = DenseVector::Constant(n, 1.0 / static_cast<double>(n));
  initial_weights_.assign(w.data(), w.data() + n);
  stumps_.clear();
  alphas_.clear();
  rounds_.clear();
  DenseVector ensemble = DenseVector::Zero(n);
  double bound = 1.0;

  for (int m = 0; m < params_.n_stumps; ++m) {
    double err = 0.0;
    const Stump stump = best_stump(X, signs, w, &err);
    err = std::min(err / w.sum(), 1.0);
    if (err >= 0.5) break;
    const double clipped = std::max(err, kMinError);
    const double alpha = 0.5 * std::log((1.0 - clipped) / clipped);

    std::size_t wrong = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int h = stump_output(stump, X(i, stump.feature));
      w(i) *= std::exp(-alpha * signs[static_cast<std::size_t>(i)] * h);
      ensemble(i) += alpha * h;
      const int predicted = ensemble(i) > 0.0 ? 1 : -1;
      if (predicted != signs[static_cast<std::size_t>(i)]) ++wrong;
    }
    w /= w.sum();
    bound *= 2.0 * std::sqrt(err * (1.0 - err));
    stumps_.push_back(stump);
    alphas_.push_back(alpha);
    rounds_.push_back({err, alpha, static_cast<double>(wrong) / static_cast<double>(n), bound});
    if (err == 0.0) break;
  }
  mark_fitted();
}

DenseVector AdaBoost::decision_function(const DenseMatrix& X) const {
  require_fitted();
  DenseVector f = DenseVector::Zero(X.rows());
  for (std::size_t m = 0; m < stumps_.size(); ++m) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) f(i) += alphas_[m] * stump_output(stumps_[m], X(i, stumps_[m].feature));
  }
  return f;
}

DenseVector AdaBoost::predict_proba(const DenseMatrix& X) const {
  // Additive-logistic link: P(y=1|x) = 1 / (1 + exp(-2F)).
  return decision_function(X).unaryExpr([](double f) { return 1.0 / (1.0 + std::exp(-2.0 * f)); });
}

nlohmann::json AdaBoost::hyperparameters() const { return {{"n_stumps", params_.n_stumps}}; }

nlohmann::json AdaBoost::parameters() const {
  nlohmann::json stumps = nlohmann::json::array();
  for (std::size_t m = 0; m < stumps_.size(); ++m) {
    stumps.push_back({stumps_[m].feature, stumps_[m].threshold, stumps_[m].left, alphas_[m]});
  }
  return {{"stumps", std::move(stumps)}};
}

void AdaBoost::load_parameters(const nlohmann::json& p) {
  stumps_.clear();
  alphas_.clear();
  for (const auto& s : p.at("stumps")) {
    stumps_.push_back({s.at(0).get<int>(), s.at(1).get<double>(), s.at(2).get<int>()});
    alphas_.push_back(s.at(3).get<double>());
  }
  mark_fitted();
}

}  // namespace flowrisk::ml
