#pragma once

#include "flowrisk/ml/classifier.hpp"

namespace flowrisk::ml {

struct LogisticParams {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
  ClassWeight class_weight = ClassWeight::None;
};

/// L2-regularized logistic regression by full-batch gradient descent. The
/// intercept is not penalized.
class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(LogisticParams params = {}) : params_(params) {}

  ModelKind kind() const noexcept override { return ModelKind::LR; }
  void fit(const DenseMatrix& X, const Labels& y) override;
  DenseVector predict_proba(const DenseMatrix& X) const override;
  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load_parameters(const nlohmann::json& params) override;

  /// Weighted mean log-loss plus (l2/2)||w||^2.
  static double loss(const DenseMatrix& X, const Labels& y, const DenseVector& sample_w, double l2,
                     const DenseVector& w, double b);
  /// Analytic gradient of loss(); the last entry is d/db.
  static DenseVector gradient(const DenseMatrix& X, const Labels& y, const DenseVector& sample_w, double l2,
                              const DenseVector& w, double b);

  const DenseVector& weights() const { return w_; }
  double intercept() const { return b_; }

 private:
  LogisticParams params_;
  DenseVector w_;
  double b_ = 0.0;
};

struct SvmParams {
  double C = 1.0;
  int epochs = 200;
  std::uint64_t seed = 0;
  ClassWeight class_weight = ClassWeight::None;
};

/// Linear SVM trained in the primal with Pegasos steps on
/// 0.5||w||^2 + C * sum(hinge). The bias is an extra always-one feature; the
/// returned model is the average of all iterates.
class LinearSvm final : public Classifier {
 public:
  explicit LinearSvm(SvmParams params = {}) : params_(params) {}

  ModelKind kind() const noexcept override { return ModelKind::SVM; }
  void fit(const DenseMatrix& X, const Labels& y) override;
  DenseVector predict_proba(const DenseMatrix& X) const override;
  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load_parameters(const nlohmann::json& params) override;

  DenseVector decision_function(const DenseMatrix& X) const;
  /// Primal objective of (w, b) on X, y.
  double objective(const DenseMatrix& X, const Labels& y, const DenseVector& w, double b) const;
  /// Objective of the averaged iterate at the end of each epoch.
  const std::vector<double>& objective_trace() const { return trace_; }

  const DenseVector& weights() const { return w_; }
  double bias() const { return b_; }

 private:
  SvmParams params_;
  DenseVector w_;
  double b_ = 0.0;
  std::vector<double> trace_;
};

}  // namespace flowrisk::ml
