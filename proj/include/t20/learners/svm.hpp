#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "t20/learners/dataset.hpp"
#include "t20/rng.hpp"

namespace t20 {

/// One subgradient step on the L2-regularized hinge loss, in place. label is
/// -1/+1. When the margin is >= 1 only the shrink applies and the bias stays
/// put; the bias is not regularized.
inline void hinge_step(std::vector<double>& weights, double& bias, const double* x, int label,
                       double learning_rate, double regularization) {
  double margin = bias;
  for (std::size_t f = 0; f < weights.size(); ++f) margin += weights[f] * x[f];
  margin *= label;
  const double shrink = 1.0 - learning_rate * regularization;
  for (double& w : weights) w *= shrink;
  if (margin < 1.0) {
    for (std::size_t f = 0; f < weights.size(); ++f) weights[f] += learning_rate * label * x[f];
    bias += learning_rate * label;
  }
}

struct LinearSvmParams {
  double lambda = 1e-3;
  int epochs = 50;
};

struct LinearSvmModel {
  std::vector<double> weights;
  double bias = 0;
};

/// Pegasos-style primal solver: eta_t = 1/(lambda * t) over seeded shuffles.
/// The intercept is trained as an augmented constant feature, so it shares the
/// weight regularization instead of random-walking under the big early steps
/// of the schedule. The returned model is the tail average of the second half
/// of the iterates.
inline LinearSvmModel train_linear_svm(const Dataset& data, const LinearSvmParams& params,
                                       std::uint64_t seed) {
  std::vector<double> w(data.width + 1, 0.0);  // w[width] is the intercept weight
  double unused_bias = 0;
  std::vector<double> row(data.width + 1);
  Rng rng(seed);
  std::vector<std::size_t> order(data.n);
  for (std::size_t i = 0; i < data.n; ++i) order[i] = i;
  const long total_steps = static_cast<long>(params.epochs) * static_cast<long>(data.n);
  const long tail_start = total_steps / 2;
  std::vector<double> w_sum(data.width + 1, 0.0);
  long tail_count = 0;
  long t = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      double eta = 1.0 / (params.lambda * t);
      const double* x = data.row(i);
      std::copy(x, x + data.width, row.begin());
      row[data.width] = 1.0;
      unused_bias = 0;  // the intercept lives in w[width]; the raw bias is discarded
      hinge_step(w, unused_bias, row.data(), data.y[i] == 1 ? 1 : -1, eta, params.lambda);
      if (t > tail_start) {
        for (std::size_t f = 0; f <= data.width; ++f) w_sum[f] += w[f];
        ++tail_count;
      }
    }
  }
  if (tail_count > 0)
    for (std::size_t f = 0; f <= data.width; ++f) w[f] = w_sum[f] / tail_count;
  LinearSvmModel model;
  model.weights.assign(w.begin(), w.begin() + data.width);
  model.bias = w[data.width];
  return model;
}

inline double linear_svm_value(const LinearSvmModel& model, const double* x) {
  double v = model.bias;
  for (std::size_t f = 0; f < model.weights.size(); ++f) v += model.weights[f] * x[f];
  return v;
}

/// exp(-gamma * ||x - y||^2)
inline double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma) {
  if (x.size() != y.size()) throw std::invalid_argument("rbf_kernel: width mismatch");
  if (gamma <= 0) throw std::invalid_argument("rbf_kernel: gamma must be > 0");
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double diff = x[i] - y[i];
    d += diff * diff;
  }
  return std::exp(-gamma * d);
}

struct KernelSvmParams {
  double C = 1.0;
  double gamma = 0;  // 0 -> 1/width
  double tol = 1e-3;
  int max_quiet_passes = 5;  // consecutive change-free passes before stopping
  int max_total_passes = 100;
};

struct KernelSvmModel {
  std::size_t width = 0;
  double gamma = 0;
  double bias = 0;
  std::vector<double> support_vectors;  // row-major
  std::vector<double> coefficients;     // alpha_i * y_i per support vector
};

/// Simplified SMO (random second coordinate, seeded). The kernel matrix is
/// cached when it fits in a few tens of MB; above that entries are recomputed
/// on demand.
inline KernelSvmModel train_kernel_svm(const Dataset& data, const KernelSvmParams& params,
                                       std::uint64_t seed) {
  const std::size_t n = data.n;
  const double gamma = params.gamma > 0 ? params.gamma : 1.0 / data.width;
  const double C = params.C;
  Rng rng(seed);

  auto kernel_at = [&](std::size_t i, std::size_t j) {
    double d = 0;
    const double* xi = data.row(i);
    const double* xj = data.row(j);
    for (std::size_t f = 0; f < data.width; ++f) {
      double diff = xi[f] - xj[f];
      d += diff * diff;
    }
    return std::exp(-gamma * d);
  };
  const bool cache = n <= 4096;  // 4096^2 floats = 64 MB
  std::vector<float> K;
  if (cache) {
    K.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        float v = static_cast<float>(kernel_at(i, j));
        K[i * n + j] = v;
        K[j * n + i] = v;
      }
  }
  auto kval = [&](std::size_t i, std::size_t j) -> double {
    return cache ? static_cast<double>(K[i * n + j]) : kernel_at(i, j);
  };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = data.y[i] == 1 ? 1.0 : -1.0;
  double b = 0;

  auto decision = [&](std::size_t i) {
    double v = b;
    for (std::size_t j = 0; j < n; ++j)
      if (alpha[j] > 0) v += alpha[j] * y[j] * kval(j, i);
    return v;
  };

  int quiet = 0, total = 0;
  while (quiet < params.max_quiet_passes && total < params.max_total_passes) {
    ++total;
    int changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double Ei = decision(i) - y[i];
      if (!((y[i] * Ei < -params.tol && alpha[i] < C) || (y[i] * Ei > params.tol && alpha[i] > 0)))
        continue;
      std::size_t j = rng.uniform_int(n - 1);
      if (j >= i) ++j;
      double Ej = decision(j) - y[j];
      double ai_old = alpha[i], aj_old = alpha[j];
      double L, H;
      if (y[i] != y[j]) {
        L = std::max(0.0, aj_old - ai_old);
        H = std::min(C, C + aj_old - ai_old);
      } else {
        L = std::max(0.0, ai_old + aj_old - C);
        H = std::min(C, ai_old + aj_old);
      }
      if (L >= H) continue;
      double eta = 2.0 * kval(i, j) - kval(i, i) - kval(j, j);
      if (eta >= 0) continue;
      double aj = aj_old - y[j] * (Ei - Ej) / eta;
      aj = std::min(H, std::max(L, aj));
      if (std::abs(aj - aj_old) < 1e-5) continue;
      double ai = ai_old + y[i] * y[j] * (aj_old - aj);
      double b1 = b - Ei - y[i] * (ai - ai_old) * kval(i, i) - y[j] * (aj - aj_old) * kval(i, j);
      double b2 = b - Ej - y[i] * (ai - ai_old) * kval(i, j) - y[j] * (aj - aj_old) * kval(j, j);
      if (ai > 0 && ai < C)
        b = b1;
      else if (aj > 0 && aj < C)
        b = b2;
      else
        b = 0.5 * (b1 + b2);
      alpha[i] = ai;
      alpha[j] = aj;
      ++changed;
    }
    quiet = changed == 0 ? quiet + 1 : 0;
  }

  KernelSvmModel model;
  model.width = data.width;
  model.gamma = gamma;
  model.bias = b;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] <= 0) continue;
    const double* r = data.row(i);
    model.support_vectors.insert(model.support_vectors.end(), r, r + data.width);
    model.coefficients.push_back(alpha[i] * y[i]);
  }
  return model;
}

inline double kernel_svm_value(const KernelSvmModel& model, const double* x) {
  double v = model.bias;
  for (std::size_t s = 0; s < model.coefficients.size(); ++s) {
    const double* sv = model.support_vectors.data() + s * model.width;
    double d = 0;
    for (std::size_t f = 0; f < model.width; ++f) {
      double diff = sv[f] - x[f];
      d += diff * diff;
    }
    v += model.coefficients[s] * std::exp(-model.gamma * d);
  }
  return v;
}

}  // namespace t20
