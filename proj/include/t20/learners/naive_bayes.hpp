#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "t20/learners/dataset.hpp"

namespace t20 {

/// The multinomial event model discretizes each [0,1] feature into equal-width
/// bins and does Laplace-smoothed counting; the gaussian variant fits a normal
/// per class and feature.
struct NaiveBayesParams {
  int bins = 10;
  double alpha = 1.0;
  bool gaussian = false;
};

struct NaiveBayesModel {
  NaiveBayesParams params;
  std::size_t width = 0;
  double log_prior[2] = {0, 0};
  std::vector<double> log_likelihood;  // multinomial: [cls * width * bins + f * bins + bin]
  std::vector<double> mean, var;       // gaussian: [cls * width + f]
};

namespace nb_detail {

inline int bin_of(double v, int bins) {
  double clamped = std::min(1.0, std::max(0.0, v));
  int b = static_cast<int>(clamped * bins);
  return std::min(b, bins - 1);
}

}  // namespace nb_detail

inline NaiveBayesModel train_naive_bayes(const Dataset& data, const NaiveBayesParams& params) {
  NaiveBayesModel model;
  model.params = params;
  model.width = data.width;
  std::size_t count[2] = {0, 0};
  for (int label : data.y) ++count[label];
  for (int c = 0; c < 2; ++c)
    model.log_prior[c] = std::log(static_cast<double>(count[c]) / data.n);

  if (params.gaussian) {
    model.mean.assign(2 * data.width, 0.0);
    model.var.assign(2 * data.width, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
      const double* r = data.row(i);
      for (std::size_t f = 0; f < data.width; ++f) model.mean[data.y[i] * data.width + f] += r[f];
    }
    for (int c = 0; c < 2; ++c)
      for (std::size_t f = 0; f < data.width; ++f) model.mean[c * data.width + f] /= count[c];
    for (std::size_t i = 0; i < data.n; ++i) {
      const double* r = data.row(i);
      for (std::size_t f = 0; f < data.width; ++f) {
        double d = r[f] - model.mean[data.y[i] * data.width + f];
        model.var[data.y[i] * data.width + f] += d * d;
      }
    }
    for (int c = 0; c < 2; ++c)
      for (std::size_t f = 0; f < data.width; ++f) {
        model.var[c * data.width + f] /= count[c];
        model.var[c * data.width + f] = std::max(model.var[c * data.width + f], 1e-9);
      }
  } else {
    const int bins = params.bins;
    model.log_likelihood.assign(2 * data.width * bins, 0.0);
    std::vector<double>& ll = model.log_likelihood;
    for (std::size_t i = 0; i < data.n; ++i) {
      const double* r = data.row(i);
      for (std::size_t f = 0; f < data.width; ++f)
        ll[data.y[i] * data.width * bins + f * bins + nb_detail::bin_of(r[f], bins)] += 1.0;
    }
    for (int c = 0; c < 2; ++c)
      for (std::size_t f = 0; f < data.width; ++f)
        for (int b = 0; b < bins; ++b) {
          double& cell = ll[c * data.width * bins + f * bins + b];
          cell = std::log((cell + params.alpha) / (count[c] + params.alpha * bins));
        }
  }
  return model;
}

/// Class posteriors (p0, p1), normalized in log space; they sum to 1 up to
/// rounding.
inline std::pair<double, double> nb_posteriors(const NaiveBayesModel& model, const double* x) {
  double logp[2] = {model.log_prior[0], model.log_prior[1]};
  if (model.params.gaussian) {
    for (int c = 0; c < 2; ++c)
      for (std::size_t f = 0; f < model.width; ++f) {
        double m = model.mean[c * model.width + f];
        double v = model.var[c * model.width + f];
        logp[c] += -0.5 * std::log(2.0 * 3.141592653589793 * v) - (x[f] - m) * (x[f] - m) / (2.0 * v);
      }
  } else {
    const int bins = model.params.bins;
    for (int c = 0; c < 2; ++c)
      for (std::size_t f = 0; f < model.width; ++f)
        logp[c] += model.log_likelihood[c * model.width * bins + f * bins +
                                        nb_detail::bin_of(x[f], bins)];
  }
  double hi = std::max(logp[0], logp[1]);
  double e0 = std::exp(logp[0] - hi), e1 = std::exp(logp[1] - hi);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

}  // namespace t20
