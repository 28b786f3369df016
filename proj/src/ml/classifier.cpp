#include <string>

#include "flowrisk/error.hpp"
#include "flowrisk/ml.hpp"

namespace flowrisk::ml {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::LR: return "LR";
    case ModelKind::KNN: return "KNN";
    case ModelKind::SVM: return "SVM";
    case ModelKind::TREE: return "TREE";
    case ModelKind::GBDT: return "GBDT";
    case ModelKind::ADABOOST: return "ADABOOST";
    case ModelKind::RF: return "RF";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::LR, ModelKind::KNN, ModelKind::SVM, ModelKind::TREE, ModelKind::GBDT,
                 ModelKind::ADABOOST, ModelKind::RF}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(ClassWeight w) noexcept { return w == ClassWeight::Balanced ? "balanced" : "none"; }

ClassWeight parse_class_weight(std::string_view s) {
  if (s == "none") return ClassWeight::None;
  if (s == "balanced") return ClassWeight::Balanced;
  throw Error(ErrorKind::InvalidArgument, "class weight must be none or balanced");
}

Labels Classifier::predict(const DenseMatrix& X) const {
  const DenseVector p = predict_proba(X);
  Labels out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p(i) > 0.5 ? 1 : 0;
  return out;
}

nlohmann::json Classifier::to_json() const {
  require_fitted();
  return {{"kind", std::string(to_string(kind()))}, {"hyperparameters", hyperparameters()}, {"parameters", parameters()}};
}

void Classifier::require_fitted() const {
  if (!fitted_) throw Error(ErrorKind::NotFitted, std::string(to_string(kind())) + " used before fit");
}

void check_binary_training_set(const DenseMatrix& X, const Labels& y) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw Error(ErrorKind::LengthMismatch, "X rows != y size");
  bool zero = false, one = false;
  for (int v : y) {
    if (v == 0) zero = true;
    else if (v == 1) one = true;
    else throw Error(ErrorKind::InvalidArgument, "labels must be 0 or 1");
  }
  if (!zero || !one) throw Error(ErrorKind::SingleClass, "training labels contain a single class");
}

DenseVector sample_weights(const Labels& y, ClassWeight mode) {
  DenseVector w = DenseVector::Ones(static_cast<Eigen::Index>(y.size()));
  if (mode == ClassWeight::None) return w;
  double count[2] = {0, 0};
  for (int v : y) count[v] += 1;
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w(static_cast<Eigen::Index>(i)) = n / (2.0 * count[y[i]]);
  return w;
}

nlohmann::json matrix_to_json(const DenseMatrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(rows)}};
}

DenseMatrix matrix_from_json(const nlohmann::json& j) {
  DenseMatrix M(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) M(r, c) = data.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
  return M;
}

nlohmann::json vector_to_json(const DenseVector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

DenseVector vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const DenseVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::unique_ptr<Classifier> make_classifier(ModelKind kind, const ModelSettings& s) {
  switch (kind) {
    case ModelKind::LR: return std::make_unique<LogisticRegression>(s.lr);
    case ModelKind::KNN: return std::make_unique<KNearestNeighbors>(s.knn);
    case ModelKind::SVM: return std::make_unique<LinearSvm>(s.svm);
    case ModelKind::TREE: return std::make_unique<DecisionTree>(s.tree);
    case ModelKind::GBDT: return std::make_unique<GradientBoosting>(s.gbdt);
    case ModelKind::ADABOOST: return std::make_unique<AdaBoost>(s.adaboost);
    case ModelKind::RF: return std::make_unique<RandomForest>(s.rf);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model kind");
}

std::unique_ptr<Classifier> load_classifier(const nlohmann::json& doc) {
  const auto kind = parse_model_kind(doc.at("kind").get<std::string>());
  const auto& h = doc.at("hyperparameters");
  ModelSettings s;
  switch (kind) {
    case ModelKind::LR:
      s.lr = {h.at("learning_rate"), h.at("epochs"), h.at("l2"), parse_class_weight(h.at("class_weight").get<std::string>())};
      break;
    case ModelKind::KNN:
      s.knn = {h.at("k")};
      break;
    case ModelKind::SVM:
      s.svm = {h.at("C"), h.at("epochs"), h.at("seed"), parse_class_weight(h.at("class_weight").get<std::string>())};
      break;
    case ModelKind::TREE:
      s.tree = {h.at("max_depth"), h.at("min_leaf"), parse_class_weight(h.at("class_weight").get<std::string>())};
      break;
    case ModelKind::GBDT:
      s.gbdt = {h.at("n_trees"), h.at("max_depth"), h.at("shrinkage"), h.at("min_leaf")};
      break;
    case ModelKind::ADABOOST:
      s.adaboost = {h.at("n_stumps")};
      break;
    case ModelKind::RF:
      s.rf = {h.at("n_trees"), h.at("max_depth"), h.at("min_leaf"), h.at("mtry"), h.at("bootstrap"), h.at("seed"),
              parse_class_weight(h.at("class_weight").get<std::string>()), 1};
      break;
  }
  auto model = make_classifier(kind, s);
  model->load_parameters(doc.at("parameters"));
  return model;
}

}  // namespace flowrisk::ml
