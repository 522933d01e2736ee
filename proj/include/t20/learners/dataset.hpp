#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "t20/features.hpp"

namespace t20 {

/// Row-major training matrix extracted from match instances.
struct Dataset {
  std::size_t n = 0;
  std::size_t width = 0;
  std::vector<double> x;
  std::vector<int> y;

  const double* row(std::size_t i) const { return x.data() + i * width; }

  static Dataset from_instances(const std::vector<MatchInstance>& instances) {
    Dataset d;
    d.n = instances.size();
    if (d.n == 0) return d;
    d.width = instances[0].features.size();
    d.x.reserve(d.n * d.width);
    d.y.reserve(d.n);
    for (const auto& inst : instances) {
      if (inst.features.size() != d.width)
        throw std::invalid_argument("dataset: instance width mismatch");
      d.x.insert(d.x.end(), inst.features.begin(), inst.features.end());
      d.y.push_back(inst.label);
    }
    return d;
  }

  Dataset subset(const std::vector<std::size_t>& indices) const {
    Dataset d;
    d.n = indices.size();
    d.width = width;
    d.x.reserve(d.n * width);
    d.y.reserve(d.n);
    for (std::size_t i : indices) {
      const double* r = row(i);
      d.x.insert(d.x.end(), r, r + width);
      d.y.push_back(y[i]);
    }
    return d;
  }
};

}  // namespace t20
