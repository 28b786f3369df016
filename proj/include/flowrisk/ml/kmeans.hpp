#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "flowrisk/numerics.hpp"

namespace flowrisk::ml {

struct KMeansParams {
  int k = 2;
  std::uint64_t seed = 0;
  int max_iter = 300;
  int n_init = 10;
};

struct KMeansModel {
  DenseMatrix centroids;  // k x p
  double inertia = 0.0;
  std::vector<int> assignments;
  int iterations = 0;
  std::vector<double> inertia_trace;  // after each assignment step of the winning restart

  /// Nearest centroid per row; ties to the lower index.
  std::vector<int> predict(const DenseMatrix& X) const;
  nlohmann::json to_json() const;
};

/// k-means++ seeding, Lloyd iterations to an assignment fixpoint, best of
/// n_init restarts by inertia. An emptied cluster is re-seeded at the point
/// farthest from its centroid. Throws Error(KTooLarge) when k > n.
KMeansModel fit_kmeans(const DenseMatrix& X, const KMeansParams& params);

}  // namespace flowrisk::ml
