#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "t20/learners/adaboost.hpp"
#include "t20/learners/dataset.hpp"
#include "t20/learners/decision_tree.hpp"
#include "t20/learners/naive_bayes.hpp"
#include "t20/learners/random_forest.hpp"
#include "t20/learners/svm.hpp"

namespace t20 {

enum class LearnerKind {
  naive_bayes,
  decision_tree,
  random_forest,
  adaboost,
  linear_svm,
  kernel_svm,
  ensemble,
};

inline constexpr int kBaseLearnerCount = 6;

inline const char* to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::naive_bayes: return "naive_bayes";
    case LearnerKind::decision_tree: return "decision_tree";
    case LearnerKind::random_forest: return "random_forest";
    case LearnerKind::adaboost: return "adaboost";
    case LearnerKind::linear_svm: return "linear_svm";
    case LearnerKind::kernel_svm: return "kernel_svm";
    case LearnerKind::ensemble: return "ensemble";
  }
  throw std::invalid_argument("bad learner kind");
}

inline LearnerKind learner_kind_from_string(const std::string& s) {
  for (LearnerKind k : {LearnerKind::naive_bayes, LearnerKind::decision_tree,
                        LearnerKind::random_forest, LearnerKind::adaboost, LearnerKind::linear_svm,
                        LearnerKind::kernel_svm, LearnerKind::ensemble})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown learner kind '" + s + "'");
}

/// What to train. `hyper` holds kind-specific overrides; anything absent uses
/// the defaults baked into the per-kind parameter structs.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::decision_tree;
  bool bagged = false;
  nlohmann::json hyper = nlohmann::json::object();
  std::uint64_t seed = 1;
};

struct Prediction {
  int label = 0;
  double score = 0;  // higher means class 1; probability-like or margin per kind
};

struct Model;

struct BaggedModel {
  std::vector<Model> members;
};

struct EnsembleModel {
  std::vector<Model> members;  // the six base kinds, in enum order
};

using ModelState = std::variant<NaiveBayesModel, TreeModel, ForestModel, AdaBoostModel,
                                LinearSvmModel, KernelSvmModel, BaggedModel, EnsembleModel>;

struct Model {
  LearnerSpec spec;
  std::size_t n = 0;      // training rows
  std::size_t width = 0;  // feature width the model accepts
  ModelState state;
};

namespace learner_detail {

template <typename T>
T hyper_get(const nlohmann::json& hyper, const char* key, T fallback) {
  if (hyper.contains(key)) return hyper.at(key).get<T>();
  return fallback;
}

/// Flat keys apply to whichever kind reads them; a nested object keyed by the
/// kind name overrides them for that kind only (so e.g. the tree and the
/// forest can take different depths inside one ensemble).
inline nlohmann::json effective_hyper(const nlohmann::json& hyper, const char* kind_name) {
  if (!hyper.contains(kind_name)) return hyper;
  nlohmann::json merged = hyper;
  for (const auto& [key, value] : hyper.at(kind_name).items()) merged[key] = value;
  return merged;
}

inline NaiveBayesParams nb_params(const nlohmann::json& hyper) {
  NaiveBayesParams p;
  p.bins = hyper_get(hyper, "bins", p.bins);
  p.alpha = hyper_get(hyper, "alpha", p.alpha);
  p.gaussian = hyper_get<std::string>(hyper, "event_model", "multinomial") == "gaussian";
  return p;
}

inline TreeParams tree_params(const nlohmann::json& hyper) {
  TreeParams p;
  p.max_depth = hyper_get(hyper, "max_depth", p.max_depth);
  p.min_leaf = hyper_get(hyper, "min_leaf", p.min_leaf);
  return p;
}

inline ForestParams forest_params(const nlohmann::json& hyper) {
  ForestParams p;
  p.n_trees = hyper_get(hyper, "n_trees", p.n_trees);
  p.max_depth = hyper_get(hyper, "max_depth", p.max_depth);
  p.min_leaf = hyper_get(hyper, "min_leaf", p.min_leaf);
  p.features_per_split = hyper_get(hyper, "features_per_split", p.features_per_split);
  return p;
}

inline AdaBoostParams ada_params(const nlohmann::json& hyper) {
  AdaBoostParams p;
  p.rounds = hyper_get(hyper, "rounds", p.rounds);
  return p;
}

inline LinearSvmParams linear_svm_params(const nlohmann::json& hyper) {
  LinearSvmParams p;
  p.lambda = hyper_get(hyper, "lambda", p.lambda);
  p.epochs = hyper_get(hyper, "epochs", p.epochs);
  return p;
}

inline KernelSvmParams kernel_svm_params(const nlohmann::json& hyper) {
  KernelSvmParams p;
  p.C = hyper_get(hyper, "C", p.C);
  p.gamma = hyper_get(hyper, "gamma", p.gamma);
  p.tol = hyper_get(hyper, "tol", p.tol);
  p.max_quiet_passes = hyper_get(hyper, "max_quiet_passes", p.max_quiet_passes);
  p.max_total_passes = hyper_get(hyper, "max_total_passes", p.max_total_passes);
  return p;
}

inline int bagging_replicas(const nlohmann::json& hyper) { return hyper_get(hyper, "bags", 50); }

}  // namespace learner_detail

Model train(const LearnerSpec& spec, const Dataset& data);

namespace learner_detail {

inline Model train_base(const LearnerSpec& spec, const Dataset& data) {
  Model model;
  model.spec = spec;
  model.n = data.n;
  model.width = data.width;
  const nlohmann::json hyper = effective_hyper(spec.hyper, to_string(spec.kind));
  switch (spec.kind) {
    case LearnerKind::naive_bayes:
      model.state = train_naive_bayes(data, nb_params(hyper));
      break;
    case LearnerKind::decision_tree:
      model.state = train_tree(data, {}, tree_params(hyper));
      break;
    case LearnerKind::random_forest:
      model.state = train_random_forest(data, forest_params(hyper), spec.seed);
      break;
    case LearnerKind::adaboost:
      model.state = train_adaboost(data, ada_params(hyper));
      break;
    case LearnerKind::linear_svm:
      model.state = train_linear_svm(data, linear_svm_params(hyper), spec.seed);
      break;
    case LearnerKind::kernel_svm:
      model.state = train_kernel_svm(data, kernel_svm_params(hyper), spec.seed);
      break;
    case LearnerKind::ensemble: {
      EnsembleModel ens;
      int stream = 0;
      for (LearnerKind k : {LearnerKind::naive_bayes, LearnerKind::decision_tree,
                            LearnerKind::random_forest, LearnerKind::adaboost,
                            LearnerKind::linear_svm, LearnerKind::kernel_svm}) {
        LearnerSpec member = spec;
        member.kind = k;
        member.bagged = false;
        member.seed = Rng::mix_seed(spec.seed, static_cast<std::uint64_t>(stream++));
        ens.members.push_back(train(member, data));
      }
      model.state = std::move(ens);
      break;
    }
  }
  return model;
}

}  // namespace learner_detail

/// Trains per the spec. bagged = true wraps the base kind in bootstrap
/// replicas aggregated by majority vote; replica r consumes draws r*n..r*n+n-1
/// of the seed-`spec.seed` index stream.
inline Model train(const LearnerSpec& spec, const Dataset& data) {
  if (data.n < 2) throw std::invalid_argument("train: need at least 2 instances");
  bool seen[2] = {false, false};
  for (int label : data.y) {
    if (label != 0 && label != 1) throw std::invalid_argument("train: labels must be 0/1");
    seen[label] = true;
  }
  if (!seen[0] || !seen[1]) throw std::invalid_argument("train: single-class training data");

  if (!spec.bagged || spec.kind == LearnerKind::ensemble)
    return learner_detail::train_base(spec, data);

  const int replicas = learner_detail::bagging_replicas(spec.hyper);
  BaggedModel bag;
  bag.members.reserve(replicas);
  Rng rng(spec.seed);
  for (int r = 0; r < replicas; ++r) {
    std::vector<std::size_t> sample(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
      sample[i] = static_cast<std::size_t>(rng.uniform_int(data.n));
    LearnerSpec member = spec;
    member.bagged = false;
    member.seed = Rng::mix_seed(spec.seed, static_cast<std::uint64_t>(r));
    Dataset boot = data.subset(sample);
    bool both_classes = false;
    for (std::size_t i = 1; i < boot.y.size(); ++i)
      if (boot.y[i] != boot.y[0]) both_classes = true;
    // a single-class bootstrap (possible at tiny n) falls back to the full
    // sample rather than re-drawing, keeping the index stream aligned
    bag.members.push_back(both_classes ? learner_detail::train_base(member, boot)
                                       : learner_detail::train_base(member, data));
  }
  Model model;
  model.spec = spec;
  model.n = data.n;
  model.width = data.width;
  model.state = std::move(bag);
  return model;
}

inline Model train(const LearnerSpec& spec, const std::vector<MatchInstance>& instances) {
  return train(spec, Dataset::from_instances(instances));
}

// --- prediction ------------------------------------------------------------------

Prediction predict(const Model& model, const double* x, std::size_t width);

/// Maps a kind's raw score onto [0,1]: probability-like kinds pass through,
/// the boosting margin shifts from [-1,1], SVM decision values go through a
/// logistic.
inline double to_unit_score(LearnerKind kind, double score) {
  switch (kind) {
    case LearnerKind::adaboost:
      return 0.5 * (score + 1.0);
    case LearnerKind::linear_svm:
    case LearnerKind::kernel_svm:
      return 1.0 / (1.0 + std::exp(-score));
    default:
      return score;
  }
}

inline double normalized_score(const Model& model, const double* x, std::size_t width) {
  // composite models (bagged, ensemble) already report a mean unit score
  if (std::holds_alternative<BaggedModel>(model.state) ||
      std::holds_alternative<EnsembleModel>(model.state))
    return predict(model, x, width).score;
  return to_unit_score(model.spec.kind, predict(model, x, width).score);
}

namespace learner_detail {

/// Majority vote over members; an exact 3-3 style tie falls back to the mean
/// normalized score, and an exact score tie goes to class 0.
inline Prediction vote(const std::vector<Model>& members, const double* x, std::size_t width) {
  int votes1 = 0;
  double score_sum = 0;
  for (const Model& m : members) {
    Prediction p = predict(m, x, width);
    votes1 += p.label;
    score_sum += to_unit_score(m.spec.kind, p.score);
  }
  double mean_score = score_sum / members.size();
  Prediction out;
  out.score = mean_score;
  int votes0 = static_cast<int>(members.size()) - votes1;
  if (votes1 > votes0)
    out.label = 1;
  else if (votes1 < votes0)
    out.label = 0;
  else
    out.label = mean_score > 0.5 ? 1 : 0;
  return out;
}

}  // namespace learner_detail

inline Prediction predict(const Model& model, const double* x, std::size_t width) {
  if (width != model.width) throw std::invalid_argument("predict: width mismatch");
  Prediction p;
  if (const auto* nb = std::get_if<NaiveBayesModel>(&model.state)) {
    p.score = nb_posteriors(*nb, x).second;
    p.label = p.score >= 0.5 ? 1 : 0;
  } else if (const auto* tree = std::get_if<TreeModel>(&model.state)) {
    p.score = tree_p1(*tree, x);
    p.label = p.score >= 0.5 ? 1 : 0;
  } else if (const auto* forest = std::get_if<ForestModel>(&model.state)) {
    p.score = forest_vote_fraction(*forest, x);
    p.label = p.score >= 0.5 ? 1 : 0;
  } else if (const auto* ada = std::get_if<AdaBoostModel>(&model.state)) {
    p.score = adaboost_margin(*ada, x);
    p.label = p.score >= 0 ? 1 : 0;
  } else if (const auto* lin = std::get_if<LinearSvmModel>(&model.state)) {
    p.score = linear_svm_value(*lin, x);
    p.label = p.score >= 0 ? 1 : 0;
  } else if (const auto* ker = std::get_if<KernelSvmModel>(&model.state)) {
    p.score = kernel_svm_value(*ker, x);
    p.label = p.score >= 0 ? 1 : 0;
  } else if (const auto* bag = std::get_if<BaggedModel>(&model.state)) {
    p = learner_detail::vote(bag->members, x, width);
  } else if (const auto* ens = std::get_if<EnsembleModel>(&model.state)) {
    p = learner_detail::vote(ens->members, x, width);
  }
  return p;
}

inline Prediction predict(const Model& model, const std::vector<double>& x) {
  return predict(model, x.data(), x.size());
}

inline Prediction predict(const Model& model, const MatchInstance& inst) {
  return predict(model, inst.features.data(), inst.features.size());
}

// --- serialization -----------------------------------------------------------------

namespace learner_detail {

inline nlohmann::json state_to_json(const Model& model);

inline nlohmann::json model_node_json(const Model& model) {
  nlohmann::json j;
  j["kind"] = to_string(model.spec.kind);
  j["bagged"] = model.spec.bagged;
  j["hyperparameters"] = model.spec.hyper;
  j["seed"] = model.spec.seed;
  j["n"] = model.n;
  j["width"] = model.width;
  j["params"] = state_to_json(model);
  return j;
}

inline nlohmann::json state_to_json(const Model& model) {
  nlohmann::json j;
  if (const auto* nb = std::get_if<NaiveBayesModel>(&model.state)) {
    j["bins"] = nb->params.bins;
    j["alpha"] = nb->params.alpha;
    j["gaussian"] = nb->params.gaussian;
    j["log_prior"] = {nb->log_prior[0], nb->log_prior[1]};
    j["log_likelihood"] = nb->log_likelihood;
    j["mean"] = nb->mean;
    j["var"] = nb->var;
  } else if (const auto* tree = std::get_if<TreeModel>(&model.state)) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree->nodes)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p1});
    j["nodes"] = std::move(nodes);
  } else if (const auto* forest = std::get_if<ForestModel>(&model.state)) {
    nlohmann::json trees = nlohmann::json::array();
    for (const TreeModel& t : forest->trees) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const TreeNode& n : t.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p1});
      trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
  } else if (const auto* ada = std::get_if<AdaBoostModel>(&model.state)) {
    nlohmann::json stumps = nlohmann::json::array();
    for (const Stump& s : ada->stumps) stumps.push_back({s.feature, s.threshold, s.polarity});
    j["stumps"] = std::move(stumps);
    j["alphas"] = ada->alphas;
    j["round_errors"] = ada->round_errors;
  } else if (const auto* lin = std::get_if<LinearSvmModel>(&model.state)) {
    j["weights"] = lin->weights;
    j["bias"] = lin->bias;
  } else if (const auto* ker = std::get_if<KernelSvmModel>(&model.state)) {
    j["gamma"] = ker->gamma;
    j["bias"] = ker->bias;
    j["support_vectors"] = ker->support_vectors;
    j["coefficients"] = ker->coefficients;
  } else if (const auto* bag = std::get_if<BaggedModel>(&model.state)) {
    nlohmann::json members = nlohmann::json::array();
    for (const Model& m : bag->members) members.push_back(model_node_json(m));
    j["members"] = std::move(members);
  } else if (const auto* ens = std::get_if<EnsembleModel>(&model.state)) {
    nlohmann::json members = nlohmann::json::array();
    for (const Model& m : ens->members) members.push_back(model_node_json(m));
    j["members"] = std::move(members);
  }
  return j;
}

inline Model model_node_from_json(const nlohmann::json& j);

inline TreeModel tree_from_json(const nlohmann::json& nodes) {
  TreeModel tree;
  for (const auto& n : nodes) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.p1 = n.at(4).get<double>();
    tree.nodes.push_back(node);
  }
  return tree;
}

inline Model model_node_from_json(const nlohmann::json& j) {
  Model model;
  model.spec.kind = learner_kind_from_string(j.at("kind").get<std::string>());
  model.spec.bagged = j.at("bagged").get<bool>();
  model.spec.hyper = j.at("hyperparameters");
  model.spec.seed = j.at("seed").get<std::uint64_t>();
  model.n = j.at("n").get<std::size_t>();
  model.width = j.at("width").get<std::size_t>();
  const nlohmann::json& p = j.at("params");
  if (p.contains("members")) {
    std::vector<Model> members;
    for (const auto& m : p.at("members")) members.push_back(model_node_from_json(m));
    if (model.spec.kind == LearnerKind::ensemble)
      model.state = EnsembleModel{std::move(members)};
    else
      model.state = BaggedModel{std::move(members)};
    return model;
  }
  switch (model.spec.kind) {
    case LearnerKind::naive_bayes: {
      NaiveBayesModel nb;
      nb.params.bins = p.at("bins").get<int>();
      nb.params.alpha = p.at("alpha").get<double>();
      nb.params.gaussian = p.at("gaussian").get<bool>();
      nb.width = model.width;
      nb.log_prior[0] = p.at("log_prior").at(0).get<double>();
      nb.log_prior[1] = p.at("log_prior").at(1).get<double>();
      nb.log_likelihood = p.at("log_likelihood").get<std::vector<double>>();
      nb.mean = p.at("mean").get<std::vector<double>>();
      nb.var = p.at("var").get<std::vector<double>>();
      model.state = std::move(nb);
      break;
    }
    case LearnerKind::decision_tree:
      model.state = tree_from_json(p.at("nodes"));
      break;
    case LearnerKind::random_forest: {
      ForestModel forest;
      for (const auto& t : p.at("trees")) forest.trees.push_back(tree_from_json(t));
      model.state = std::move(forest);
      break;
    }
    case LearnerKind::adaboost: {
      AdaBoostModel ada;
      for (const auto& s : p.at("stumps"))
        ada.stumps.push_back({s.at(0).get<int>(), s.at(1).get<double>(), s.at(2).get<int>()});
      ada.alphas = p.at("alphas").get<std::vector<double>>();
      ada.round_errors = p.at("round_errors").get<std::vector<double>>();
      model.state = std::move(ada);
      break;
    }
    case LearnerKind::linear_svm: {
      LinearSvmModel lin;
      lin.weights = p.at("weights").get<std::vector<double>>();
      lin.bias = p.at("bias").get<double>();
      model.state = std::move(lin);
      break;
    }
    case LearnerKind::kernel_svm: {
      KernelSvmModel ker;
      ker.width = model.width;
      ker.gamma = p.at("gamma").get<double>();
      ker.bias = p.at("bias").get<double>();
      ker.support_vectors = p.at("support_vectors").get<std::vector<double>>();
      ker.coefficients = p.at("coefficients").get<std::vector<double>>();
      model.state = std::move(ker);
      break;
    }
    case LearnerKind::ensemble:
      throw ParseError("model json: ensemble without members");
  }
  return model;
}

}  // namespace learner_detail

inline nlohmann::json to_json(const Model& model) {
  nlohmann::json j = learner_detail::model_node_json(model);
  j["format_version"] = 1;
  return j;
}

inline Model model_from_json(const nlohmann::json& j) {
  if (j.value("format_version", 1) != 1) throw ParseError("model json: unsupported version");
  return learner_detail::model_node_from_json(j);
}

}  // namespace t20
