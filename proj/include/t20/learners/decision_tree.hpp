#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "t20/learners/dataset.hpp"
#include "t20/rng.hpp"

namespace t20 {

/// 1 - p0^2 - p1^2 over a 0/1 label multiset.
inline double gini_impurity(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("gini_impurity: empty label set");
  double n1 = 0;
  for (int l : labels) n1 += l;
  double p1 = n1 / labels.size();
  double p0 = 1.0 - p1;
  return 1.0 - p0 * p0 - p1 * p1;
}

inline double gini_from_counts(double n0, double n1) {
  double n = n0 + n1;
  if (n == 0) return 0;
  double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeParams {
  int max_depth = 10;       // <= 0 means unlimited
  int min_leaf = 2;
  int feature_subsample = 0;  // 0 = consider all features (set by random forest)
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;   // x[feature] < threshold
  int right = -1;  // x[feature] >= threshold
  double p1 = 0;   // Laplace-smoothed leaf class-1 probability, (n1+1)/(n+2)
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

namespace tree_detail {

struct SplitChoice {
  bool found = false;
  int feature = 0;
  double threshold = 0;
  double impurity_sum = 0;  // nL*giniL + nR*giniR, minimized
};

/// Exhaustive threshold search at midpoints of consecutive distinct values.
/// Ties in impurity keep the lowest (feature, threshold) by scan order.
inline SplitChoice best_split(const Dataset& data, const std::vector<std::size_t>& idx,
                              const std::vector<int>& features, int min_leaf) {
  SplitChoice best;
  const std::size_t n = idx.size();
  std::vector<std::pair<double, int>> col(n);
  for (int f : features) {
    for (std::size_t i = 0; i < n; ++i) col[i] = {data.row(idx[i])[f], data.y[idx[i]]};
    std::sort(col.begin(), col.end());
    double left0 = 0, left1 = 0, total0 = 0, total1 = 0;
    for (const auto& [v, l] : col) (l ? total1 : total0) += 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      (col[i].second ? left1 : left0) += 1.0;
      if (col[i].first == col[i + 1].first) continue;
      double nl = left0 + left1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      double impurity = nl * gini_from_counts(left0, left1) +
                        nr * gini_from_counts(total0 - left0, total1 - left1);
      if (!best.found || impurity < best.impurity_sum) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (col[i].first + col[i + 1].first);
        best.impurity_sum = impurity;
      }
    }
  }
  return best;
}

inline int build(const Dataset& data, std::vector<std::size_t>& idx, int depth,
                 const TreeParams& params, Rng* rng, TreeModel& model) {
  double n1 = 0;
  for (std::size_t i : idx) n1 += data.y[i];
  const bool pure = n1 == 0.0 || n1 == static_cast<double>(idx.size());

  auto make_leaf = [&]() {
    TreeNode leaf;
    leaf.p1 = (n1 + 1.0) / (idx.size() + 2.0);
    model.nodes.push_back(leaf);
    return static_cast<int>(model.nodes.size() - 1);
  };
  if (pure) return make_leaf();
  if (params.max_depth > 0 && depth >= params.max_depth) return make_leaf();
  if (idx.size() < static_cast<std::size_t>(2 * params.min_leaf)) return make_leaf();

  std::vector<int> features;
  if (params.feature_subsample > 0 &&
      params.feature_subsample < static_cast<int>(data.width)) {
    std::vector<int> all(data.width);
    for (std::size_t f = 0; f < data.width; ++f) all[f] = static_cast<int>(f);
    rng->shuffle(all);
    features.assign(all.begin(), all.begin() + params.feature_subsample);
    std::sort(features.begin(), features.end());
  } else {
    features.resize(data.width);
    for (std::size_t f = 0; f < data.width; ++f) features[f] = static_cast<int>(f);
  }

  SplitChoice split = best_split(data, idx, features, params.min_leaf);
  if (!split.found) return make_leaf();

  std::vector<std::size_t> left_idx, right_idx;
  for (std::size_t i : idx)
    (data.row(i)[split.feature] < split.threshold ? left_idx : right_idx).push_back(i);
  idx.clear();
  idx.shrink_to_fit();

  TreeNode node;
  node.feature = split.feature;
  node.threshold = split.threshold;
  model.nodes.push_back(node);
  int self = static_cast<int>(model.nodes.size() - 1);
  int left = build(data, left_idx, depth + 1, params, rng, model);
  int right = build(data, right_idx, depth + 1, params, rng, model);
  model.nodes[self].left = left;
  model.nodes[self].right = right;
  return self;
}

}  // namespace tree_detail

/// CART with the Gini criterion over the given row subset (all rows if empty).
inline TreeModel train_tree(const Dataset& data, std::vector<std::size_t> indices,
                            const TreeParams& params = {}, Rng* rng = nullptr) {
  if (indices.empty()) {
    indices.resize(data.n);
    for (std::size_t i = 0; i < data.n; ++i) indices[i] = i;
  }
  TreeModel model;
  model.nodes.reserve(64);
  tree_detail::build(data, indices, 0, params, rng, model);
  return model;
}

inline double tree_p1(const TreeModel& model, const double* x) {
  int node = 0;
  while (model.nodes[node].feature >= 0) {
    const TreeNode& nd = model.nodes[node];
    node = x[nd.feature] < nd.threshold ? nd.left : nd.right;
  }
  return model.nodes[node].p1;
}

}  // namespace t20
