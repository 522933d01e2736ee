#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "t20/rng.hpp"

namespace t20 {

struct KMeansModel {
  int k = 0;
  std::vector<std::vector<double>> centroids;
  double inertia = 0;
  int iterations_run = 0;
  std::vector<double> inertia_history;  // one entry per Lloyd assignment pass
  std::uint64_t seed = 0;
};

namespace kmeans_detail {

inline double sq_dist(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double diff = x[i] - y[i];
    d += diff * diff;
  }
  return d;
}

inline std::size_t nearest(const std::vector<std::vector<double>>& centroids,
                           const std::vector<double>& point, double* out_dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    double d = sq_dist(centroids[c], point);
    if (d < best_d) {  // ties keep the lowest centroid index
      best_d = d;
      best = c;
    }
  }
  if (out_dist) *out_dist = best_d;
  return best;
}

}  // namespace kmeans_detail

inline std::size_t nearest_centroid(const KMeansModel& model, const std::vector<double>& point) {
  if (point.size() != model.centroids.at(0).size())
    throw std::invalid_argument("nearest_centroid: width mismatch");
  return kmeans_detail::nearest(model.centroids, point);
}

/// Lloyd's algorithm with k-means++ seeding. The ++ selection draws a uniform
/// in [0,1) and walks the normalized D^2 mass, so uniformly rescaling all
/// inputs picks the same centroid sequence. Terminates when assignments are
/// stable or max_iter passes run; clusters that go empty keep their previous
/// centroid so the recorded inertia never increases between passes.
inline KMeansModel kmeans_fit(const std::vector<std::vector<double>>& points, int k,
                              std::uint64_t seed, int max_iter = 100) {
  if (points.empty()) throw std::invalid_argument("kmeans_fit: empty input");
  if (k < 1) throw std::invalid_argument("kmeans_fit: k must be >= 1");
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim) throw std::invalid_argument("kmeans_fit: ragged input");
  std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (static_cast<std::size_t>(k) > distinct.size())
    throw std::invalid_argument("kmeans_fit: k exceeds number of distinct points");

  Rng rng(seed);
  KMeansModel model;
  model.k = k;
  model.seed = seed;

  // k-means++ seeding
  model.centroids.push_back(points[rng.uniform_int(n)]);
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      kmeans_detail::nearest(model.centroids, points[i], &d2[i]);
      total += d2[i];
    }
    double u = rng.uniform();
    double target = u * total;
    double acc = 0;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0) {
        pick = i;
        break;
      }
    }
    model.centroids.push_back(points[pick]);
  }

  // Lloyd iterations
  std::vector<std::size_t> assignment(n, 0), previous(n, n);
  for (int iter = 0; iter < max_iter; ++iter) {
    double inertia = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d;
      assignment[i] = kmeans_detail::nearest(model.centroids, points[i], &d);
      inertia += d;
    }
    model.inertia = inertia;
    model.inertia_history.push_back(inertia);
    model.iterations_run = iter + 1;
    if (assignment == previous) break;
    previous = assignment;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
      ++counts[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dim; ++d) model.centroids[c][d] = sums[c][d] / counts[c];
    }
  }
  return model;
}

}  // namespace t20
