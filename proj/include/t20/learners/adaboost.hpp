#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "t20/learners/dataset.hpp"

namespace t20 {

/// SAMME stage weight: ln((1 - eps)/eps) + ln(K - 1).
inline double samme_alpha(double weighted_error, int n_classes = 2) {
  if (!(weighted_error > 0.0 && weighted_error < 1.0))
    throw std::invalid_argument("samme_alpha: weighted error must be in (0, 1)");
  if (n_classes < 2) throw std::invalid_argument("samme_alpha: need at least 2 classes");
  return std::log((1.0 - weighted_error) / weighted_error) + std::log(n_classes - 1.0);
}

/// Axis-aligned threshold rule: polarity +1 predicts 1 when x[feature] >=
/// threshold, polarity -1 predicts the complement.
struct Stump {
  int feature = 0;
  double threshold = 0;
  int polarity = 1;

  int predict(const double* x) const {
    bool hi = x[feature] >= threshold;
    return polarity > 0 ? (hi ? 1 : 0) : (hi ? 0 : 1);
  }
};

struct AdaBoostParams {
  int rounds = 100;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  std::vector<double> round_errors;  // weighted error per accepted round
};

namespace ada_detail {

struct StumpFit {
  Stump stump;
  double error = 1.0;
  bool found = false;
};

/// Minimum weighted error stump; thresholds at midpoints of consecutive
/// distinct per-feature values, both polarities. Ties keep the first
/// candidate in (feature, threshold, +polarity) scan order. The two polarity
/// errors come from separate per-class accumulators so that flipping every
/// label swaps them bit-for-bit.
inline StumpFit best_stump(const Dataset& data, const std::vector<double>& weights) {
  StumpFit best;
  const std::size_t n = data.n;
  std::vector<std::pair<double, std::size_t>> col(n);
  double total[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) total[data.y[i]] += weights[i];
  for (std::size_t f = 0; f < data.width; ++f) {
    for (std::size_t i = 0; i < n; ++i) col[i] = {data.row(i)[f], i};
    std::sort(col.begin(), col.end());
    double left[2] = {0, 0};  // class weight strictly below the threshold
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left[data.y[col[i].second]] += weights[col[i].second];
      if (col[i].first == col[i + 1].first) continue;
      // polarity +1: >= thr -> 1. Errors: label-1 on the left, label-0 right.
      double err_pos = left[1] + (total[0] - left[0]);
      double err_neg = left[0] + (total[1] - left[1]);
      for (int polarity : {+1, -1}) {
        double err = polarity > 0 ? err_pos : err_neg;
        if (!best.found || err < best.error) {
          best.found = true;
          best.error = err;
          best.stump = {static_cast<int>(f), 0.5 * (col[i].first + col[i + 1].first), polarity};
        }
      }
    }
  }
  return best;
}

}  // namespace ada_detail

/// AdaBoost-SAMME over depth-1 stumps (K = 2). A round with weighted error
/// >= 1 - 1/K rejects the learner and stops; a perfect stump gets a capped
/// weight and also stops, since reweighting would change nothing.
inline AdaBoostModel train_adaboost(const Dataset& data, const AdaBoostParams& params = {}) {
  AdaBoostModel model;
  std::vector<double> weights(data.n, 1.0 / data.n);
  for (int round = 0; round < params.rounds; ++round) {
    ada_detail::StumpFit fit = ada_detail::best_stump(data, weights);
    if (!fit.found) break;  // no usable threshold anywhere
    double eps = std::max(fit.error, 0.0);
    if (eps >= 0.5) break;  // no better than chance: reject round
    constexpr double kEpsFloor = 1e-12;
    double alpha = samme_alpha(std::max(eps, kEpsFloor));
    model.stumps.push_back(fit.stump);
    model.alphas.push_back(alpha);
    model.round_errors.push_back(eps);
    if (eps < kEpsFloor) break;  // perfect stump

    double wsum = 0;
    for (std::size_t i = 0; i < data.n; ++i) {
      if (fit.stump.predict(data.row(i)) != data.y[i]) weights[i] *= std::exp(alpha);
      wsum += weights[i];
    }
    for (double& w : weights) w /= wsum;
  }
  return model;
}

/// Weighted vote margin in [-1, 1]; positive means class 1.
inline double adaboost_margin(const AdaBoostModel& model, const double* x) {
  if (model.stumps.empty()) return 0.0;
  double vote = 0, total = 0;
  for (std::size_t t = 0; t < model.stumps.size(); ++t) {
    vote += model.alphas[t] * (model.stumps[t].predict(x) == 1 ? 1.0 : -1.0);
    total += model.alphas[t];
  }
  return vote / total;
}

}  // namespace t20
