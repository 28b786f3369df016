#include <limits>
#include <string>

#include "flowrisk/error.hpp"
#include "flowrisk/ml/classifier.hpp"
#include "flowrisk/ml/kmeans.hpp"
#include "flowrisk/rng.hpp"

namespace flowrisk::ml {
namespace {

struct Assignment {
  std::vector<int> labels;
  std::vector<double> sq_dist;
  double inertia = 0.0;
};

Assignment assign(const DenseMatrix& X, const DenseMatrix& centroids) {
  Assignment a;
  a.labels.resize(static_cast<std::size_t>(X.rows()));
  a.sq_dist.resize(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (X.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    a.labels[static_cast<std::size_t>(i)] = best;
    a.sq_dist[static_cast<std::size_t>(i)] = best_d;
    a.inertia += best_d;
  }
  return a;
}

DenseMatrix plus_plus_seeds(const DenseMatrix& X, int k, Rng& rng) {
  const Eigen::Index n = X.rows();
  DenseMatrix centroids(k, X.cols());
  centroids.row(0) = X.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (X.row(i) - centroids.row(0)).squaredNorm();

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = X.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], (X.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

KMeansModel lloyd(const DenseMatrix& X, DenseMatrix centroids, int max_iter) {
  const auto k = centroids.rows();
  KMeansModel model;
  Assignment a = assign(X, centroids);
  model.inertia_trace.push_back(a.inertia);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    DenseMatrix sums = DenseMatrix::Zero(k, X.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      sums.row(a.labels[static_cast<std::size_t>(i)]) += X.row(i);
      ++counts[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)])];
    }
    std::vector<bool> taken(static_cast<std::size_t>(X.rows()), false);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the worst-served point not already used.
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (far < 0 || a.sq_dist[static_cast<std::size_t>(i)] > a.sq_dist[static_cast<std::size_t>(far)]) far = i;
      }
      taken[static_cast<std::size_t>(far)] = true;
      centroids.row(c) = X.row(far);
    }
    Assignment next = assign(X, centroids);
    model.inertia_trace.push_back(next.inertia);
    const bool fixpoint = next.labels == a.labels;
    a = std::move(next);
    if (fixpoint) {
      ++iter;
      break;
    }
  }
  model.centroids = std::move(centroids);
  model.assignments = std::move(a.labels);
  model.inertia = a.inertia;
  model.iterations = iter;
  return model;
}

}  // namespace

std::vector<int> KMeansModel::predict(const DenseMatrix& X) const { return assign(X, centroids).labels; }

nlohmann::json KMeansModel::to_json() const {
  return {{"centroids", matrix_to_json(centroids)}, {"inertia", inertia}, {"iterations", iterations}};
}

KMeansModel fit_kmeans(const DenseMatrix& X, const KMeansParams& params) {
  if (params.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (params.k > X.rows()) {
    throw Error(ErrorKind::KTooLarge, "k = " + std::to_string(params.k) + " exceeds " + std::to_string(X.rows()) + " rows");
  }
  KMeansModel best;
  bool have = false;
  for (int init = 0; init < std::max(1, params.n_init); ++init) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(init)));
    KMeansModel run = lloyd(X, plus_plus_seeds(X, params.k, rng), params.max_iter);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

}  // namespace flowrisk::ml
