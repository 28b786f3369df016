#pragma once

#include "flowrisk/ml/classifier.hpp"

namespace flowrisk::ml {

struct KnnParams {
  int k = 5;
};

/// Brute-force Euclidean k-nearest-neighbours vote. Equidistant neighbours are
/// ranked by training-row order; a tied vote goes to class 0.
class KNearestNeighbors final : public Classifier {
 public:
  explicit KNearestNeighbors(KnnParams params = {}) : params_(params) {}

  ModelKind kind() const noexcept override { return ModelKind::KNN; }
  /// Throws Error(KTooLarge) when k exceeds the training rows.
  void fit(const DenseMatrix& X, const Labels& y) override;
  DenseVector predict_proba(const DenseMatrix& X) const override;
  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load_parameters(const nlohmann::json& params) override;

 private:
  KnnParams params_;
  DenseMatrix X_;
  Labels y_;
};

}  // namespace flowrisk::ml
