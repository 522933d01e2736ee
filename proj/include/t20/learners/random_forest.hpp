#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "t20/learners/decision_tree.hpp"
#include "t20/rng.hpp"

namespace t20 {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 10;
  int min_leaf = 2;
  int features_per_split = 0;  // 0 -> floor(sqrt(width))
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

/// Bagged CART ensemble with per-split feature subsampling. Tree t consumes
/// its own derived seed so trees could be trained in any order with the same
/// result.
inline ForestModel train_random_forest(const Dataset& data, const ForestParams& params,
                                       std::uint64_t seed) {
  ForestModel model;
  model.trees.reserve(params.n_trees);
  TreeParams tree_params;
  tree_params.max_depth = params.max_depth;
  tree_params.min_leaf = params.min_leaf;
  tree_params.feature_subsample =
      params.features_per_split > 0
          ? params.features_per_split
          : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(data.width))));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(Rng::mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> bootstrap(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
      bootstrap[i] = static_cast<std::size_t>(rng.uniform_int(data.n));
    model.trees.push_back(train_tree(data, std::move(bootstrap), tree_params, &rng));
  }
  return model;
}

/// Fraction of trees voting class 1; a tree whose leaf is exactly split
/// abstains with half a vote, which keeps label flips exactly symmetric.
inline double forest_vote_fraction(const ForestModel& model, const double* x) {
  double votes = 0;
  for (const TreeModel& tree : model.trees) {
    double p1 = tree_p1(tree, x);
    votes += p1 > 0.5 ? 1.0 : (p1 < 0.5 ? 0.0 : 0.5);
  }
  return votes / model.trees.size();
}

}  // namespace t20
