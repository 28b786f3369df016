#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowrisk/numerics.hpp"

namespace flowrisk::ml {

enum class ModelKind { LR, KNN, SVM, TREE, GBDT, ADABOOST, RF };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

/// The six models reported in the metric tables, singles then ensembles.
inline constexpr ModelKind kReportedModels[] = {ModelKind::LR,   ModelKind::KNN,      ModelKind::SVM,
                                                ModelKind::GBDT, ModelKind::ADABOOST, ModelKind::RF};

enum class ClassWeight { None, Balanced };

using Labels = std::vector<int>;

/// Binary classifier over rows of a standardized design matrix. Labels are
/// {0, 1}; every vote or score tie resolves to class 0.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const noexcept = 0;
  virtual void fit(const DenseMatrix& X, const Labels& y) = 0;
  /// Score in [0, 1] for class 1.
  virtual DenseVector predict_proba(const DenseMatrix& X) const = 0;
  /// 1 where predict_proba > 0.5, else 0.
  virtual Labels predict(const DenseMatrix& X) const;

  virtual nlohmann::json hyperparameters() const = 0;
  virtual nlohmann::json parameters() const = 0;
  virtual void load_parameters(const nlohmann::json& params) = 0;

  bool fitted() const noexcept { return fitted_; }
  /// {"kind", "hyperparameters", "parameters"}.
  nlohmann::json to_json() const;

 protected:
  void require_fitted() const;
  void mark_fitted() noexcept { fitted_ = true; }

 private:
  bool fitted_ = false;
};

/// Throws Error(SingleClass) unless both labels occur; Error(LengthMismatch)
/// when sizes differ; Error(InvalidArgument) for labels outside {0, 1}.
void check_binary_training_set(const DenseMatrix& X, const Labels& y);

/// Per-sample weights: all ones, or n / (2 * n_class) for Balanced.
DenseVector sample_weights(const Labels& y, ClassWeight mode);

std::string_view to_string(ClassWeight w) noexcept;
ClassWeight parse_class_weight(std::string_view s);

nlohmann::json matrix_to_json(const DenseMatrix& M);
DenseMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const DenseVector& v);
DenseVector vector_from_json(const nlohmann::json& j);

}  // namespace flowrisk::ml
