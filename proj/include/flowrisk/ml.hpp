#pragma once

#include <memory>

#include "flowrisk/ml/classifier.hpp"
#include "flowrisk/ml/kmeans.hpp"
#include "flowrisk/ml/linear.hpp"
#include "flowrisk/ml/neighbors.hpp"
#include "flowrisk/ml/tree.hpp"

namespace flowrisk::ml {

/// Hyperparameters for every model kind, with the project defaults.
struct ModelSettings {
  LogisticParams lr;
  KnnParams knn;
  SvmParams svm;
  TreeParams tree;
  GbdtParams gbdt;
  AdaBoostParams adaboost;
  ForestParams rf;
};

std::unique_ptr<Classifier> make_classifier(ModelKind kind, const ModelSettings& settings = {});

/// Rebuilds a fitted classifier from Classifier::to_json() output.
std::unique_ptr<Classifier> load_classifier(const nlohmann::json& doc);

}  // namespace flowrisk::ml
