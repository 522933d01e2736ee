#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "t20/learners.hpp"
#include "t20/rng.hpp"

namespace t20 {

struct FoldPlan {
  std::size_t n = 0;
  int k = 0;
  std::vector<int> assignment;  // instance index -> fold id
  std::uint64_t seed = 0;
};

/// Seeded shuffle then contiguous chunking; the first (n mod k) folds take the
/// extra element.
inline FoldPlan kfold_split(std::size_t n, int k = 10, std::uint64_t seed = 1) {
  if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("kfold_split: k exceeds n");
  FoldPlan plan;
  plan.n = n;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::size_t base = n / k, extra = n % k, pos = 0;
  for (int fold = 0; fold < k; ++fold) {
    std::size_t size = base + (static_cast<std::size_t>(fold) < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) plan.assignment[order[pos++]] = fold;
  }
  return plan;
}

inline std::vector<std::size_t> fold_indices(const FoldPlan& plan, int fold, bool complement) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < plan.n; ++i)
    if ((plan.assignment[i] == fold) != complement) out.push_back(i);
  return out;
}

// --- curves ------------------------------------------------------------------

struct RocPoint {
  double fpr = 0, tpr = 0;
};

struct PrPoint {
  double recall = 0, precision = 0;
};

/// Threshold sweep over distinct scores, descending; AUC by trapezoid, which
/// with grouped ties equals the Mann-Whitney pair count with ties at 1/2.
inline std::pair<std::vector<RocPoint>, double> roc_curve(const std::vector<double>& scores,
                                                          const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_curve: size mismatch");
  double pos = 0, neg = 0;
  for (int l : labels) (l == 1 ? pos : neg) += 1.0;
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc_curve: need both classes");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::vector<RocPoint> points;
  points.push_back({0.0, 0.0});
  double tp = 0, fp = 0, auc = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double threshold = scores[order[i]];
    double prev_tp = tp, prev_fp = fp;
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1.0;
      ++i;
    }
    auc += (fp - prev_fp) / neg * (prev_tp + tp) / (2.0 * pos);
    points.push_back({fp / neg, tp / pos});
  }
  return {points, auc};
}

/// Precision/recall per distinct descending threshold; the final point is
/// always (recall 1, precision = prevalence).
inline std::vector<PrPoint> pr_curve(const std::vector<double>& scores,
                                     const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("pr_curve: size mismatch");
  double pos = 0;
  for (int l : labels) pos += l;
  if (pos == 0) throw std::invalid_argument("pr_curve: no positive labels");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::vector<PrPoint> points;
  double tp = 0, predicted = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      tp += labels[order[i]];
      predicted += 1.0;
      ++i;
    }
    points.push_back({tp / pos, tp / predicted});
  }
  return points;
}

// --- cross-validation ----------------------------------------------------------

struct EvalReport {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0;
  std::vector<RocPoint> roc;
  double auc = 0;
  std::vector<PrPoint> pr;
  LearnerSpec spec;
  int folds_run = 0;
  int folds_skipped = 0;
  std::vector<std::string> warnings;
};

/// Builder for fold-dependent preprocessing: given the training-fold indices
/// it returns instances for ALL n rows, fitted using training data only. The
/// plain overload below wires a constant builder for prebuilt instances.
using InstanceBuilder =
    std::function<std::vector<MatchInstance>(const std::vector<std::size_t>& train_indices)>;

inline EvalReport cross_validate(const LearnerSpec& spec, const InstanceBuilder& builder,
                                 const FoldPlan& plan) {
  EvalReport report;
  report.spec = spec;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;

  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<std::size_t> train_idx = fold_indices(plan, fold, /*complement=*/true);
    std::vector<std::size_t> test_idx = fold_indices(plan, fold, /*complement=*/false);
    std::vector<MatchInstance> instances = builder(train_idx);
    if (instances.size() != plan.n)
      throw std::invalid_argument("cross_validate: builder returned wrong instance count");

    bool seen[2] = {false, false};
    for (std::size_t i : train_idx) seen[instances[i].label] = true;
    if (!seen[0] || !seen[1]) {
      ++report.folds_skipped;
      report.warnings.push_back("fold " + std::to_string(fold) +
                                " skipped: single-class training complement");
      continue;
    }

    std::vector<MatchInstance> train_set;
    train_set.reserve(train_idx.size());
    for (std::size_t i : train_idx) train_set.push_back(instances[i]);
    Model model = train(spec, train_set);

    double correct = 0;
    for (std::size_t i : test_idx) {
      Prediction p = predict(model, instances[i]);
      if (p.label == instances[i].label) correct += 1.0;
      pooled_scores.push_back(normalized_score(model, instances[i].features.data(),
                                               instances[i].features.size()));
      pooled_labels.push_back(instances[i].label);
    }
    report.fold_accuracies.push_back(correct / test_idx.size());
    ++report.folds_run;
  }

  if (report.folds_run == 0) throw std::runtime_error("cross_validate: every fold was skipped");
  double sum = 0;
  for (double a : report.fold_accuracies) sum += a;
  report.mean_accuracy = sum / report.folds_run;

  bool pooled_both = false;
  for (std::size_t i = 1; i < pooled_labels.size(); ++i)
    if (pooled_labels[i] != pooled_labels[0]) pooled_both = true;
  if (pooled_both) {
    auto [roc, auc] = roc_curve(pooled_scores, pooled_labels);
    report.roc = std::move(roc);
    report.auc = auc;
    double pos = 0;
    for (int l : pooled_labels) pos += l;
    if (pos > 0) report.pr = pr_curve(pooled_scores, pooled_labels);
  }
  return report;
}

inline EvalReport cross_validate(const LearnerSpec& spec,
                                 const std::vector<MatchInstance>& instances,
                                 const FoldPlan& plan) {
  if (plan.n != instances.size())
    throw std::invalid_argument("cross_validate: plan does not match instance count");
  return cross_validate(
      spec, [&instances](const std::vector<std::size_t>&) { return instances; }, plan);
}

// --- backward elimination ---------------------------------------------------------

/// A named feature owning one or more instance columns (a per-player statistic
/// owns that column in every player block).
struct FeatureGroup {
  std::string name;
  std::vector<std::size_t> columns;
};

struct EliminationStep {
  std::string removed;
  double mean_accuracy = 0;  // accuracy after this removal
};

struct EliminationTrace {
  double baseline_accuracy = 0;  // full feature set
  std::vector<EliminationStep> steps;
  std::vector<std::string> selected;  // feature set at the best point
  double best_accuracy = 0;
};

namespace eval_detail {

inline std::vector<MatchInstance> project_columns(const std::vector<MatchInstance>& instances,
                                                  const std::vector<std::size_t>& columns) {
  std::vector<MatchInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    MatchInstance copy;
    copy.match_id = inst.match_id;
    copy.kind = inst.kind;
    copy.label = inst.label;
    copy.features.reserve(columns.size());
    for (std::size_t c : columns) copy.features.push_back(inst.features[c]);
    out.push_back(std::move(copy));
  }
  return out;
}

inline std::vector<std::size_t> active_columns(const std::vector<FeatureGroup>& groups,
                                               const std::vector<bool>& active) {
  std::vector<std::size_t> cols;
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (active[g]) cols.insert(cols.end(), groups[g].columns.begin(), groups[g].columns.end());
  std::sort(cols.begin(), cols.end());
  return cols;
}

}  // namespace eval_detail

/// Greedy backward elimination: at every step, drop the feature whose removal
/// gives the highest mean CV accuracy (ties to the lowest group index), down
/// to a single survivor. The selected set is the point of best accuracy along
/// the trace, preferring fewer features on ties.
inline EliminationTrace backward_eliminate(const LearnerSpec& spec,
                                           const std::vector<MatchInstance>& instances,
                                           const std::vector<FeatureGroup>& features,
                                           const FoldPlan& plan) {
  if (features.size() < 2)
    throw std::invalid_argument("backward_eliminate: need at least 2 features");
  std::vector<bool> active(features.size(), true);

  auto evaluate = [&](const std::vector<bool>& mask) {
    auto cols = eval_detail::active_columns(features, mask);
    auto projected = eval_detail::project_columns(instances, cols);
    return cross_validate(spec, projected, plan).mean_accuracy;
  };

  EliminationTrace trace;
  trace.baseline_accuracy = evaluate(active);

  double best_accuracy = trace.baseline_accuracy;
  std::size_t best_step = 0;  // number of removals at the best point; ties -> more removals
  std::size_t removed_count = 0;

  while (removed_count + 1 < features.size()) {
    int best_group = -1;
    double best_group_acc = 0;
    for (std::size_t g = 0; g < features.size(); ++g) {
      if (!active[g]) continue;
      active[g] = false;
      double acc = evaluate(active);
      active[g] = true;
      if (best_group < 0 || acc > best_group_acc) {
        best_group = static_cast<int>(g);
        best_group_acc = acc;
      }
    }
    active[best_group] = false;
    ++removed_count;
    trace.steps.push_back({features[best_group].name, best_group_acc});
    if (best_group_acc >= best_accuracy) {
      best_accuracy = best_group_acc;
      best_step = removed_count;
    }
  }

  trace.best_accuracy = best_accuracy;
  std::vector<bool> selected_mask(features.size(), true);
  for (std::size_t s = 0; s < best_step; ++s) {
    for (std::size_t g = 0; g < features.size(); ++g)
      if (features[g].name == trace.steps[s].removed && selected_mask[g]) {
        selected_mask[g] = false;
        break;
      }
  }
  for (std::size_t g = 0; g < features.size(); ++g)
    if (selected_mask[g]) trace.selected.push_back(features[g].name);
  return trace;
}

// --- exports --------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["mean_accuracy"] = report.mean_accuracy;
  j["fold_accuracies"] = report.fold_accuracies;
  j["auc"] = report.auc;
  j["folds_run"] = report.folds_run;
  j["folds_skipped"] = report.folds_skipped;
  j["warnings"] = report.warnings;
  j["learner"] = {{"kind", to_string(report.spec.kind)},
                  {"bagged", report.spec.bagged},
                  {"hyperparameters", report.spec.hyper},
                  {"seed", report.spec.seed}};
  return j;
}

inline void save_roc_csv(std::ostream& out, const std::vector<RocPoint>& points) {
  out << "fpr,tpr\n";
  for (const auto& p : points) out << format_double(p.fpr) << ',' << format_double(p.tpr) << "\n";
}

inline void save_pr_csv(std::ostream& out, const std::vector<PrPoint>& points) {
  out << "recall,precision\n";
  for (const auto& p : points)
    out << format_double(p.recall) << ',' << format_double(p.precision) << "\n";
}

inline void save_elimination_csv(std::ostream& out, const EliminationTrace& trace) {
  out << "step,removed_feature,mean_accuracy\n";
  out << "0,," << format_double(trace.baseline_accuracy) << "\n";
  for (std::size_t s = 0; s < trace.steps.size(); ++s)
    out << (s + 1) << ',' << trace.steps[s].removed << ','
        << format_double(trace.steps[s].mean_accuracy) << "\n";
}

}  // namespace t20
