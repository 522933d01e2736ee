// t20pred: Twenty20 match outcome prediction experiments.
//
// Subcommands wire the library end to end: synthetic corpus generation,
// ingestion checks, feature/instance exports, pairwise and cluster rating
// fits, classifier training, cross-validated evaluation, backward feature
// elimination and cluster-size sweeps. Every experiment writes a config.json
// snapshot into its output directory; rerunning with --config <snapshot>
// reproduces the outputs byte for byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "t20/cluster.hpp"
#include "t20/corpus.hpp"
#include "t20/eval.hpp"
#include "t20/features.hpp"
#include "t20/learners.hpp"
#include "t20/pairwise.hpp"
#include "t20/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace t20;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// --- approaches -------------------------------------------------------------

enum class Approach { stats_v1, stats_v2, stats_v3, stats_v4, stats_v5, pairwise, cluster };

Approach approach_from_string(const std::string& s) {
  if (s == "stats_v1") return Approach::stats_v1;
  if (s == "stats_v2") return Approach::stats_v2;
  if (s == "stats_v3") return Approach::stats_v3;
  if (s == "stats_v4") return Approach::stats_v4;
  if (s == "stats_v5") return Approach::stats_v5;
  if (s == "pairwise") return Approach::pairwise;
  if (s == "cluster") return Approach::cluster;
  throw UsageError("unknown approach '" + s +
                   "' (expected stats_v1..stats_v5, pairwise or cluster)");
}

Variation variation_of(Approach a) {
  switch (a) {
    case Approach::stats_v1: return Variation::v1;
    case Approach::stats_v2: return Variation::v2;
    case Approach::stats_v3: return Variation::v3;
    case Approach::stats_v4: return Variation::v4;
    case Approach::stats_v5: return Variation::v5;
    default: throw UsageError("approach is not statistics-based");
  }
}

// --- small file helpers -------------------------------------------------------

void ensure_dir(const std::string& path) { fs::create_directories(path); }

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

void write_json(const std::string& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

/// Flags beat --config values beat defaults. `flag` is the CLI11 option name,
/// `key` the config.json key.
template <typename T>
void sync_opt(CLI::App* cmd, const json& cfg, const char* flag, const char* key, T& value) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

std::vector<Match> load_matches_or_die(const std::string& path, bool lenient) {
  if (path.empty()) throw UsageError("missing --matches");
  auto result = load_matches(path, lenient ? LoadMode::lenient : LoadMode::strict);
  if (result.skipped > 0)
    std::fprintf(stderr, "warning: skipped %zu invalid match record(s)\n", result.skipped);
  return std::move(result.records);
}

std::vector<InteractionRecord> load_interactions_or_die(const std::string& path, bool lenient) {
  if (path.empty()) throw UsageError("missing --interactions (required by this approach)");
  auto result = load_interactions(path, lenient ? LoadMode::lenient : LoadMode::strict);
  if (result.skipped > 0)
    std::fprintf(stderr, "warning: skipped %zu invalid interaction row(s)\n", result.skipped);
  return std::move(result.records);
}

// --- instance pipelines ---------------------------------------------------------

/// As-of feature vectors of every (match, player) pair in `which`, used to
/// fit normalization specs.
std::vector<PlayerFeatureVector> asof_vectors(const std::vector<Match>& matches,
                                              const std::vector<std::size_t>& which,
                                              const StatsIndex& index) {
  std::vector<PlayerFeatureVector> out;
  out.reserve(which.size() * 2 * kTeamSize);
  for (std::size_t i : which) {
    const Match& m = matches[i];
    for (const auto& team : {&m.team1_players, &m.team2_players})
      for (const auto& id : *team) out.push_back(index.asof(id, m.date));
  }
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

/// Statistics-approach instances: player histories may reach back through the
/// whole corpus (they only use matches dated before each instance), while the
/// normalization spec is fitted on the training slice only.
std::vector<MatchInstance> build_stats_instances(const std::vector<Match>& matches,
                                                 Variation variation,
                                                 const std::vector<std::size_t>& train_idx,
                                                 const StatsIndex& index,
                                                 NormalizationSpec* spec_out = nullptr) {
  NormalizationSpec spec = fit_normalization(asof_vectors(matches, train_idx, index));
  if (spec_out) *spec_out = spec;
  std::vector<MatchInstance> instances;
  instances.reserve(matches.size());
  for (const auto& m : matches) instances.push_back(build_instance(m, variation, spec, index));
  return instances;
}

std::vector<MatchInstance> build_pairwise_instances(
    const std::vector<Match>& matches, const std::vector<InteractionRecord>& interactions,
    const std::vector<std::size_t>& train_idx, const SgdConfig& sgd, RatingTable* table_out = nullptr) {
  std::set<std::string> train_ids;
  for (std::size_t i : train_idx) train_ids.insert(matches[i].match_id);
  std::vector<InteractionRecord> train_inter;
  for (const auto& r : interactions)
    if (train_ids.count(r.match_id)) train_inter.push_back(r);
  if (train_inter.empty())
    throw ValidationError("no interactions reference the training matches");
  RatingTable table = fit_ratings(train_inter, {}, sgd);
  if (table_out) *table_out = table;
  std::vector<MatchInstance> instances;
  instances.reserve(matches.size());
  for (const auto& m : matches) instances.push_back(team_rating_features(table, m));
  return instances;
}

std::vector<MatchInstance> build_cluster_instances(const std::vector<Match>& matches, int k,
                                                   const std::vector<std::size_t>& train_idx,
                                                   std::uint64_t seed,
                                                   ClusterRatingSystem* sys_out = nullptr) {
  std::vector<Match> train_matches;
  train_matches.reserve(train_idx.size());
  for (std::size_t i : train_idx) train_matches.push_back(matches[i]);
  ClusterRatingSystem sys = fit_cluster_ratings(train_matches, k, seed);
  if (sys_out) *sys_out = sys;
  std::vector<MatchInstance> instances;
  instances.reserve(matches.size());
  for (const auto& m : matches) instances.push_back(cluster_instance(sys.ratings, m, k));
  return instances;
}

/// Feature kind -> column groups for backward elimination. One Table-1
/// statistic owns its column in every player block.
std::vector<FeatureGroup> elimination_groups(Variation variation) {
  std::vector<std::string> names;
  switch (variation) {
    case Variation::v1:
      for (auto name : kFeatureNames) names.emplace_back(name);
      break;
    case Variation::v2:
      names = {"batting_aggregate", "bowling_aggregate"};
      break;
    case Variation::v5:
      names = v5_feature_names();
      break;
    default:
      throw UsageError("eliminate needs named per-player features; use stats_v1, stats_v2 or stats_v5");
  }
  const std::size_t per_player = names.size();
  std::vector<FeatureGroup> groups(per_player);
  for (std::size_t f = 0; f < per_player; ++f) {
    groups[f].name = names[f];
    for (int p = 0; p < 2 * kTeamSize; ++p)
      groups[f].columns.push_back(p * per_player + f);
  }
  return groups;
}

// --- learner spec from flags/config ------------------------------------------------

struct LearnerFlags {
  std::string kind = "ensemble";
  bool bagged = false;
  std::uint64_t seed = 1;
  json hyper = json::object();
};

LearnerSpec to_spec(const LearnerFlags& f) {
  LearnerSpec spec;
  spec.kind = learner_kind_from_string(f.kind);
  spec.bagged = f.bagged;
  spec.seed = f.seed;
  spec.hyper = f.hyper;
  return spec;
}

// --- ratings CSV (fitted table) -----------------------------------------------------

RatingTable load_ratings_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ratings file '" + path + "'");
  RatingTable table;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || (row == 1 && line == "player_id,batting_rating,bowling_rating")) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError(path + ":" + std::to_string(row) + ": expected 3 fields");
    if (!fields[1].empty())
      table.batting[fields[0]] = parse_double(fields[1], "batting_rating");
    if (!fields[2].empty())
      table.bowling[fields[0]] = parse_double(fields[2], "bowling_rating");
  }
  return table;
}

// --- subcommands --------------------------------------------------------------------

int run_synth(CLI::App* cmd, const std::string& config_path, const std::string& out,
              SynthConfig cfg) {
  json file_cfg = config_path.empty() ? json::object() : load_json(config_path);
  sync_opt(cmd, file_cfg, "--players", "players", cfg.n_players);
  sync_opt(cmd, file_cfg, "--matches", "matches", cfg.n_matches);
  sync_opt(cmd, file_cfg, "--interactions", "interactions", cfg.n_interactions);
  sync_opt(cmd, file_cfg, "--intercept", "intercept_A", cfg.intercept_A);
  sync_opt(cmd, file_cfg, "--rating-stddev", "rating_stddev", cfg.rating_stddev);
  sync_opt(cmd, file_cfg, "--noise-stddev", "noise_stddev", cfg.noise_stddev);
  sync_opt(cmd, file_cfg, "--span-days", "date_span_days", cfg.date_span_days);
  sync_opt(cmd, file_cfg, "--tiers", "skill_tiers", cfg.skill_tiers);
  sync_opt(cmd, file_cfg, "--seed", "seed", cfg.seed);

  SynthResult result = synth_generate(cfg);
  ensure_dir(out);
  save_matches(out + "/matches.jsonl", result.matches);
  save_interactions(out + "/interactions.csv", result.interactions);
  save_ground_truth(out + "/ground_truth.csv", result.truth);
  save_ground_truth_sidecar(out + "/ground_truth_meta.json", result.truth,
                            result.bayes_optimal_accuracy, cfg.seed);

  ordered_json snapshot;
  snapshot["command"] = "synth";
  snapshot["players"] = cfg.n_players;
  snapshot["matches"] = cfg.n_matches;
  snapshot["interactions"] = cfg.n_interactions;
  snapshot["intercept_A"] = cfg.intercept_A;
  snapshot["rating_stddev"] = cfg.rating_stddev;
  snapshot["noise_stddev"] = cfg.noise_stddev;
  snapshot["date_span_days"] = cfg.date_span_days;
  snapshot["skill_tiers"] = cfg.skill_tiers;
  snapshot["seed"] = cfg.seed;
  write_json(out + "/config.json", snapshot);

  std::printf("synth: %d matches, %zu interactions, bayes optimal accuracy %.4f\n",
              cfg.n_matches, result.interactions.size(), result.bayes_optimal_accuracy);
  return kExitOk;
}

// shared pipeline wiring for evaluate/train/predict
struct PipelineOpts {
  std::string approach = "stats_v2";
  std::string matches_path;
  std::string interactions_path;
  int cluster_k = 5;
  double sgd_lambda = 0.7, sgd_lr = 0.01, sgd_tolerance = 1e-6;
  int sgd_epochs = 200;
  std::uint64_t pipeline_seed = 1;
};

SgdConfig sgd_from(const PipelineOpts& p) {
  SgdConfig sgd;
  sgd.lambda = p.sgd_lambda;
  sgd.learning_rate = p.sgd_lr;
  sgd.tolerance = p.sgd_tolerance;
  sgd.epochs = p.sgd_epochs;
  sgd.seed = p.pipeline_seed;
  return sgd;
}

void sync_pipeline(CLI::App* cmd, const json& cfg, PipelineOpts& p) {
  sync_opt(cmd, cfg, "--approach", "approach", p.approach);
  sync_opt(cmd, cfg, "--matches", "matches", p.matches_path);
  sync_opt(cmd, cfg, "--interactions", "interactions", p.interactions_path);
  sync_opt(cmd, cfg, "--k", "cluster_k", p.cluster_k);
  sync_opt(cmd, cfg, "--lambda", "sgd_lambda", p.sgd_lambda);
  sync_opt(cmd, cfg, "--lr", "sgd_lr", p.sgd_lr);
  sync_opt(cmd, cfg, "--epochs", "sgd_epochs", p.sgd_epochs);
  sync_opt(cmd, cfg, "--tolerance", "sgd_tolerance", p.sgd_tolerance);
  sync_opt(cmd, cfg, "--pipeline-seed", "pipeline_seed", p.pipeline_seed);
}

void snapshot_pipeline(ordered_json& snapshot, const PipelineOpts& p, Approach approach) {
  snapshot["approach"] = p.approach;
  snapshot["matches"] = p.matches_path;
  if (approach == Approach::pairwise) {
    snapshot["interactions"] = p.interactions_path;
    snapshot["sgd_lambda"] = p.sgd_lambda;
    snapshot["sgd_lr"] = p.sgd_lr;
    snapshot["sgd_epochs"] = p.sgd_epochs;
    snapshot["sgd_tolerance"] = p.sgd_tolerance;
    snapshot["pipeline_seed"] = p.pipeline_seed;
  }
  if (approach == Approach::cluster) {
    snapshot["cluster_k"] = p.cluster_k;
    snapshot["pipeline_seed"] = p.pipeline_seed;
  }
}

void snapshot_learner(ordered_json& snapshot, const LearnerFlags& lf) {
  snapshot["learner"] = lf.kind;
  snapshot["bagged"] = lf.bagged;
  snapshot["seed"] = lf.seed;
  snapshot["hyper"] = lf.hyper;
}

int run_evaluate(CLI::App* cmd, const std::string& config_path, const std::string& out,
                 PipelineOpts& pipe, LearnerFlags& lf, int folds, std::uint64_t fold_seed,
                 bool lenient) {
  json cfg = config_path.empty() ? json::object() : load_json(config_path);
  sync_pipeline(cmd, cfg, pipe);
  sync_opt(cmd, cfg, "--learner", "learner", lf.kind);
  sync_opt(cmd, cfg, "--bagged", "bagged", lf.bagged);
  sync_opt(cmd, cfg, "--seed", "seed", lf.seed);
  sync_opt(cmd, cfg, "--folds", "folds", folds);
  sync_opt(cmd, cfg, "--fold-seed", "fold_seed", fold_seed);
  if (cfg.contains("hyper") && cmd->count("--config")) lf.hyper = cfg.at("hyper");

  Approach approach = approach_from_string(pipe.approach);
  if (pipe.matches_path.empty()) throw UsageError("missing --matches");
  if (approach == Approach::pairwise && pipe.interactions_path.empty())
    throw UsageError("missing --interactions (required by the pairwise approach)");
  std::vector<Match> matches = load_matches_or_die(pipe.matches_path, lenient);
  if (matches.size() < 2) throw ValidationError("need at least 2 matches");
  std::vector<InteractionRecord> interactions;
  if (approach == Approach::pairwise)
    interactions = load_interactions_or_die(pipe.interactions_path, lenient);

  LearnerSpec spec = to_spec(lf);
  FoldPlan plan = kfold_split(matches.size(), folds, fold_seed);
  StatsIndex index(matches);

  InstanceBuilder builder;
  switch (approach) {
    case Approach::pairwise:
      builder = [&](const std::vector<std::size_t>& train_idx) {
        return build_pairwise_instances(matches, interactions, train_idx, sgd_from(pipe));
      };
      break;
    case Approach::cluster:
      builder = [&](const std::vector<std::size_t>& train_idx) {
        return build_cluster_instances(matches, pipe.cluster_k, train_idx, pipe.pipeline_seed);
      };
      break;
    default: {
      Variation variation = variation_of(approach);
      builder = [&, variation](const std::vector<std::size_t>& train_idx) {
        return build_stats_instances(matches, variation, train_idx, index);
      };
    }
  }

  EvalReport report = cross_validate(spec, builder, plan);

  ensure_dir(out);
  ordered_json rj = to_json(report);
  rj["folds"] = folds;
  rj["fold_seed"] = fold_seed;
  write_json(out + "/report.json", rj);
  std::ostringstream roc;
  save_roc_csv(roc, report.roc);
  write_text(out + "/roc.csv", roc.str());
  std::ostringstream pr;
  save_pr_csv(pr, report.pr);
  write_text(out + "/pr.csv", pr.str());

  ordered_json snapshot;
  snapshot["command"] = "evaluate";
  snapshot_pipeline(snapshot, pipe, approach);
  snapshot_learner(snapshot, lf);
  snapshot["folds"] = folds;
  snapshot["fold_seed"] = fold_seed;
  write_json(out + "/config.json", snapshot);

  std::printf("evaluate: mean accuracy %.4f (auc %.4f) over %d folds\n", report.mean_accuracy,
              report.auc, report.folds_run);
  return kExitOk;
}

ordered_json normalization_snapshot(const NormalizationSpec& spec) { return to_json(spec); }

int run_train(CLI::App* cmd, const std::string& config_path, const std::string& out,
              PipelineOpts& pipe, LearnerFlags& lf, bool lenient) {
  json cfg = config_path.empty() ? json::object() : load_json(config_path);
  sync_pipeline(cmd, cfg, pipe);
  sync_opt(cmd, cfg, "--learner", "learner", lf.kind);
  sync_opt(cmd, cfg, "--bagged", "bagged", lf.bagged);
  sync_opt(cmd, cfg, "--seed", "seed", lf.seed);
  if (cfg.contains("hyper") && cmd->count("--config")) lf.hyper = cfg.at("hyper");

  Approach approach = approach_from_string(pipe.approach);
  std::vector<Match> matches = load_matches_or_die(pipe.matches_path, lenient);
  StatsIndex index(matches);
  std::vector<std::size_t> train_idx = all_indices(matches.size());

  ordered_json pipeline;
  std::vector<MatchInstance> instances;
  switch (approach) {
    case Approach::pairwise: {
      auto interactions = load_interactions_or_die(pipe.interactions_path, lenient);
      RatingTable table;
      instances = build_pairwise_instances(matches, interactions, train_idx, sgd_from(pipe), &table);
      pipeline["kind"] = "pairwise";
      pipeline["intercept"] = table.intercept;
      pipeline["batting"] = table.batting;
      pipeline["bowling"] = table.bowling;
      break;
    }
    case Approach::cluster: {
      ClusterRatingSystem sys;
      instances = build_cluster_instances(matches, pipe.cluster_k, train_idx, pipe.pipeline_seed, &sys);
      pipeline["kind"] = "cluster";
      pipeline["k"] = sys.k;
      ordered_json ratings = ordered_json::array();
      for (const auto& r : sys.ratings)
        ratings.push_back({{"player_id", r.player_id},
                           {"batting_rating", r.batting_rating},
                           {"bowling_rating", r.bowling_rating}});
      pipeline["ratings"] = std::move(ratings);
      break;
    }
    default: {
      NormalizationSpec spec;
      instances = build_stats_instances(matches, variation_of(approach), train_idx, index, &spec);
      pipeline["kind"] = "stats";
      pipeline["variation"] = pipe.approach;
      pipeline["normalization"] = normalization_snapshot(spec);
    }
  }

  Model model = train(to_spec(lf), instances);
  double correct = 0;
  for (const auto& inst : instances)
    if (predict(model, inst).label == inst.label) correct += 1.0;

  ensure_dir(out);
  ordered_json bundle;
  bundle["format_version"] = 1;
  bundle["approach"] = pipe.approach;
  bundle["pipeline"] = std::move(pipeline);
  bundle["model"] = to_json(model);
  write_json(out + "/model.json", bundle);

  ordered_json snapshot;
  snapshot["command"] = "train";
  snapshot_pipeline(snapshot, pipe, approach);
  snapshot_learner(snapshot, lf);
  write_json(out + "/config.json", snapshot);

  std::printf("train: %s on %zu instances, training accuracy %.4f\n", lf.kind.c_str(),
              instances.size(), correct / instances.size());
  return kExitOk;
}

int run_predict(CLI::App* cmd, const std::string& config_path, const std::string& out,
                std::string model_path, std::string matches_path, bool lenient) {
  json cfg = config_path.empty() ? json::object() : load_json(config_path);
  sync_opt(cmd, cfg, "--model", "model", model_path);
  sync_opt(cmd, cfg, "--matches", "matches", matches_path);
  if (model_path.empty()) throw UsageError("missing --model");

  json bundle = load_json(model_path);
  Model model = model_from_json(bundle.at("model"));
  Approach approach = approach_from_string(bundle.at("approach").get<std::string>());
  std::vector<Match> matches = load_matches_or_die(matches_path, lenient);

  std::vector<MatchInstance> instances;
  const json& pipeline = bundle.at("pipeline");
  switch (approach) {
    case Approach::pairwise: {
      RatingTable table;
      table.intercept = pipeline.at("intercept").get<double>();
      table.batting = pipeline.at("batting").get<std::map<std::string, double>>();
      table.bowling = pipeline.at("bowling").get<std::map<std::string, double>>();
      for (const auto& m : matches) instances.push_back(team_rating_features(table, m));
      break;
    }
    case Approach::cluster: {
      int k = pipeline.at("k").get<int>();
      std::vector<ClusterRating> ratings;
      for (const auto& r : pipeline.at("ratings"))
        ratings.push_back({r.at("player_id").get<std::string>(), r.at("batting_rating").get<int>(),
                           r.at("bowling_rating").get<int>()});
      for (const auto& m : matches) instances.push_back(cluster_instance(ratings, m, k));
      break;
    }
    default: {
      NormalizationSpec spec = normalization_from_json(pipeline.at("normalization"));
      StatsIndex index(matches);
      Variation variation = variation_of(approach);
      for (const auto& m : matches)
        instances.push_back(build_instance(m, variation, spec, index));
    }
  }

  ensure_dir(out);
  std::ostringstream csv;
  csv << "match_id,label,score,predicted\n";
  double correct = 0;
  for (const auto& inst : instances) {
    Prediction p = predict(model, inst);
    if (p.label == inst.label) correct += 1.0;
    csv << inst.match_id << ',' << inst.label << ',' << format_double(p.score) << ',' << p.label
        << "\n";
  }
  write_text(out + "/predictions.csv", csv.str());

  ordered_json snapshot;
  snapshot["command"] = "predict";
  snapshot["model"] = model_path;
  snapshot["matches"] = matches_path;
  write_json(out + "/config.json", snapshot);

  std::printf("predict: %zu matches, accuracy %.4f\n", instances.size(),
              correct / instances.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"t20pred: Twenty20 cricket match outcome prediction experiments"};
  app.require_subcommand(1);

  // options shared by several subcommands; each subcommand binds its own copy
  struct Common {
    std::string out = "out";
    std::string config;
    bool lenient = false;
  };

  auto add_common = [](CLI::App* cmd, Common& c) {
    cmd->add_option("-o,--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--config", c.config, "JSON config snapshot to rerun (flags still win)");
    cmd->add_flag("--lenient,!--strict", c.lenient,
                  "skip invalid records instead of aborting (default strict)");
  };

  // synth ----------------------------------------------------------------
  Common synth_common;
  SynthConfig synth_cfg;
  synth_cfg.n_players = 200;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted ratings");
  synth->add_option("--players", synth_cfg.n_players, "player pool size")->capture_default_str();
  synth->add_option("--matches", synth_cfg.n_matches, "matches to generate")->capture_default_str();
  synth->add_option("--interactions", synth_cfg.n_interactions,
                    "interaction rows (0 = 40 per match)")->capture_default_str();
  synth->add_option("--intercept", synth_cfg.intercept_A, "expected average-vs-average score")
      ->capture_default_str();
  synth->add_option("--rating-stddev", synth_cfg.rating_stddev, "planted rating spread")
      ->capture_default_str();
  synth->add_option("--noise-stddev", synth_cfg.noise_stddev, "score noise")->capture_default_str();
  synth->add_option("--span-days", synth_cfg.date_span_days, "corpus date span in days")
      ->capture_default_str();
  synth->add_option("--tiers", synth_cfg.skill_tiers, "skill tiers (0 = continuous ratings)")
      ->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed, "generator seed")->capture_default_str();
  add_common(synth, synth_common);

  // validate ---------------------------------------------------------------
  Common validate_common;
  std::string validate_matches, validate_interactions;
  CLI::App* validate_cmd = app.add_subcommand("validate", "check corpus files against invariants");
  validate_cmd->add_option("--matches", validate_matches, "matches JSONL file");
  validate_cmd->add_option("--interactions", validate_interactions, "interactions CSV file");
  add_common(validate_cmd, validate_common);

  // features ----------------------------------------------------------------
  Common features_common;
  std::string features_matches, features_variation = "v1";
  CLI::App* features_cmd =
      app.add_subcommand("features", "export classifier instances for one variation");
  features_cmd->add_option("--matches", features_matches, "matches JSONL file");
  features_cmd->add_option("--variation", features_variation, "v1|v2|v3|v4|v5")
      ->capture_default_str();
  add_common(features_cmd, features_common);

  // rate ---------------------------------------------------------------------
  CLI::App* rate = app.add_subcommand("rate", "fit player ratings");
  rate->require_subcommand(1);

  Common ratep_common;
  std::string ratep_interactions, ratep_filter;
  double ratep_lambda = 0.7, ratep_lr = 0.01, ratep_tolerance = 1e-6;
  int ratep_epochs = 200;
  std::uint64_t ratep_seed = 1;
  CLI::App* rate_pairwise =
      rate->add_subcommand("pairwise", "batting/bowling ratings from pairwise interactions");
  rate_pairwise->add_option("--interactions", ratep_interactions, "interactions CSV file");
  rate_pairwise->add_option("--matches-filter", ratep_filter,
                            "file of match ids to keep (one per line)");
  rate_pairwise->add_option("--lambda", ratep_lambda, "neighborhood regularization")
      ->capture_default_str();
  rate_pairwise->add_option("--lr", ratep_lr, "SGD learning rate")->capture_default_str();
  rate_pairwise->add_option("--epochs", ratep_epochs, "SGD epoch cap")->capture_default_str();
  rate_pairwise->add_option("--tolerance", ratep_tolerance, "relative cost tolerance")
      ->capture_default_str();
  rate_pairwise->add_option("--seed", ratep_seed, "shuffle seed")->capture_default_str();
  add_common(rate_pairwise, ratep_common);

  Common ratec_common;
  std::string ratec_matches;
  int ratec_k = 5;
  std::uint64_t ratec_seed = 1;
  CLI::App* rate_cluster = rate->add_subcommand("cluster", "k-means derived integer ratings");
  rate_cluster->add_option("--matches", ratec_matches, "matches JSONL file");
  rate_cluster->add_option("--k", ratec_k, "number of clusters")->capture_default_str();
  rate_cluster->add_option("--seed", ratec_seed, "k-means seed")->capture_default_str();
  add_common(rate_cluster, ratec_common);

  // compare-ratings -------------------------------------------------------------
  Common compare_common;
  std::string compare_ratings, compare_reference, compare_side = "batting";
  CLI::App* compare_cmd = app.add_subcommand(
      "compare-ratings", "rescale fitted ratings to a reference list and report correlation");
  compare_cmd->add_option("--ratings", compare_ratings, "fitted ratings CSV");
  compare_cmd->add_option("--reference", compare_reference, "reference CSV player_id,rating");
  compare_cmd->add_option("--side", compare_side, "batting|bowling")->capture_default_str();
  add_common(compare_cmd, compare_common);

  // evaluate / train / predict ----------------------------------------------------
  auto add_pipeline = [](CLI::App* cmd, PipelineOpts& p) {
    cmd->add_option("--approach", p.approach,
                    "stats_v1..stats_v5 | pairwise | cluster")->capture_default_str();
    cmd->add_option("--matches", p.matches_path, "matches JSONL file");
    cmd->add_option("--interactions", p.interactions_path, "interactions CSV (pairwise)");
    cmd->add_option("--k", p.cluster_k, "cluster count (cluster approach)")->capture_default_str();
    cmd->add_option("--lambda", p.sgd_lambda, "pairwise regularization")->capture_default_str();
    cmd->add_option("--lr", p.sgd_lr, "pairwise SGD learning rate")->capture_default_str();
    cmd->add_option("--epochs", p.sgd_epochs, "pairwise SGD epoch cap")->capture_default_str();
    cmd->add_option("--tolerance", p.sgd_tolerance, "pairwise SGD tolerance")
        ->capture_default_str();
    cmd->add_option("--pipeline-seed", p.pipeline_seed, "rating/clustering fit seed")
        ->capture_default_str();
  };
  auto add_learner = [](CLI::App* cmd, LearnerFlags& lf) {
    cmd->add_option("--learner", lf.kind,
                    "naive_bayes|decision_tree|random_forest|adaboost|linear_svm|kernel_svm|ensemble")
        ->capture_default_str();
    cmd->add_flag("--bagged", lf.bagged, "wrap the learner in bootstrap bagging");
    cmd->add_option("--seed", lf.seed, "learner seed")->capture_default_str();
  };

  Common eval_common;
  PipelineOpts eval_pipe;
  LearnerFlags eval_lf;
  int eval_folds = 10;
  std::uint64_t eval_fold_seed = 1;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "k-fold cross-validated accuracy, ROC and PR curves");
  add_pipeline(evaluate_cmd, eval_pipe);
  add_learner(evaluate_cmd, eval_lf);
  evaluate_cmd->add_option("--folds", eval_folds, "fold count")->capture_default_str();
  evaluate_cmd->add_option("--fold-seed", eval_fold_seed, "fold shuffle seed")
      ->capture_default_str();
  add_common(evaluate_cmd, eval_common);

  Common train_common;
  PipelineOpts train_pipe;
  LearnerFlags train_lf;
  CLI::App* train_cmd = app.add_subcommand("train", "fit one model on the full corpus");
  add_pipeline(train_cmd, train_pipe);
  add_learner(train_cmd, train_lf);
  add_common(train_cmd, train_common);

  Common predict_common;
  std::string predict_model, predict_matches;
  CLI::App* predict_cmd = app.add_subcommand("predict", "score matches with a trained model");
  predict_cmd->add_option("--model", predict_model, "model.json bundle from train");
  predict_cmd->add_option("--matches", predict_matches, "matches JSONL file");
  add_common(predict_cmd, predict_common);

  // eliminate ------------------------------------------------------------------
  Common elim_common;
  PipelineOpts elim_pipe;
  LearnerFlags elim_lf;
  int elim_folds = 10;
  std::uint64_t elim_fold_seed = 1;
  CLI::App* eliminate_cmd =
      app.add_subcommand("eliminate", "greedy backward feature elimination trace");
  elim_pipe.approach = "stats_v5";
  elim_lf.kind = "random_forest";
  add_pipeline(eliminate_cmd, elim_pipe);
  add_learner(eliminate_cmd, elim_lf);
  eliminate_cmd->add_option("--folds", elim_folds, "fold count")->capture_default_str();
  eliminate_cmd->add_option("--fold-seed", elim_fold_seed, "fold shuffle seed")
      ->capture_default_str();
  add_common(eliminate_cmd, elim_common);

  // sweep-k -----------------------------------------------------------------------
  Common sweep_common;
  std::string sweep_matches;
  LearnerFlags sweep_lf;
  int sweep_kmin = 2, sweep_kmax = 10, sweep_folds = 10;
  std::uint64_t sweep_seed = 1;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep-k", "cluster-size sweep: mean CV accuracy per k");
  sweep_cmd->add_option("--matches", sweep_matches, "matches JSONL file");
  add_learner(sweep_cmd, sweep_lf);
  sweep_cmd->add_option("--k-min", sweep_kmin, "first k")->capture_default_str();
  sweep_cmd->add_option("--k-max", sweep_kmax, "last k")->capture_default_str();
  sweep_cmd->add_option("--folds", sweep_folds, "fold count")->capture_default_str();
  sweep_cmd->add_option("--sweep-seed", sweep_seed, "fold/k-means seed")->capture_default_str();
  add_common(sweep_cmd, sweep_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(synth, synth_common.config, synth_common.out, synth_cfg);

    if (validate_cmd->parsed()) {
      if (validate_matches.empty() && validate_interactions.empty())
        throw UsageError("validate needs --matches and/or --interactions");
      std::size_t n_matches = 0, n_inter = 0, skipped = 0;
      if (!validate_matches.empty()) {
        auto r = load_matches(validate_matches,
                              validate_common.lenient ? LoadMode::lenient : LoadMode::strict);
        n_matches = r.records.size();
        skipped += r.skipped;
      }
      if (!validate_interactions.empty()) {
        auto r = load_interactions(validate_interactions,
                                   validate_common.lenient ? LoadMode::lenient : LoadMode::strict);
        n_inter = r.records.size();
        skipped += r.skipped;
      }
      std::printf("validate: %zu matches, %zu interactions, %zu skipped\n", n_matches, n_inter,
                  skipped);
      return kExitOk;
    }

    if (features_cmd->parsed()) {
      json cfg = features_common.config.empty() ? json::object() : load_json(features_common.config);
      sync_opt(features_cmd, cfg, "--matches", "matches", features_matches);
      sync_opt(features_cmd, cfg, "--variation", "variation", features_variation);
      Approach approach = approach_from_string("stats_" + features_variation);
      auto matches = load_matches_or_die(features_matches, features_common.lenient);
      StatsIndex index(matches);
      NormalizationSpec spec;
      auto instances = build_stats_instances(matches, variation_of(approach),
                                             all_indices(matches.size()), index, &spec);
      ensure_dir(features_common.out);
      save_instances_csv(features_common.out + "/instances_" + features_variation + ".csv",
                         instances);
      write_json(features_common.out + "/normalization.json", to_json(spec));
      ordered_json snapshot;
      snapshot["command"] = "features";
      snapshot["matches"] = features_matches;
      snapshot["variation"] = features_variation;
      write_json(features_common.out + "/config.json", snapshot);
      std::printf("features: %zu instances of width %zu (%s)\n", instances.size(),
                  instances.empty() ? 0 : instances[0].features.size(),
                  features_variation.c_str());
      return kExitOk;
    }

    if (rate_pairwise->parsed()) {
      json cfg = ratep_common.config.empty() ? json::object() : load_json(ratep_common.config);
      sync_opt(rate_pairwise, cfg, "--interactions", "interactions", ratep_interactions);
      sync_opt(rate_pairwise, cfg, "--matches-filter", "matches_filter", ratep_filter);
      sync_opt(rate_pairwise, cfg, "--lambda", "lambda", ratep_lambda);
      sync_opt(rate_pairwise, cfg, "--lr", "lr", ratep_lr);
      sync_opt(rate_pairwise, cfg, "--epochs", "epochs", ratep_epochs);
      sync_opt(rate_pairwise, cfg, "--tolerance", "tolerance", ratep_tolerance);
      sync_opt(rate_pairwise, cfg, "--seed", "seed", ratep_seed);
      auto interactions = load_interactions_or_die(ratep_interactions, ratep_common.lenient);
      if (!ratep_filter.empty()) {
        std::ifstream in(ratep_filter);
        if (!in) throw ParseError("cannot open matches filter '" + ratep_filter + "'");
        std::set<std::string> keep;
        std::string line;
        while (std::getline(in, line))
          if (!line.empty()) keep.insert(line);
        std::vector<InteractionRecord> filtered;
        for (auto& r : interactions)
          if (keep.count(r.match_id)) filtered.push_back(std::move(r));
        interactions = std::move(filtered);
        if (interactions.empty()) throw ValidationError("matches filter removed every interaction");
      }
      SgdConfig sgd;
      sgd.lambda = ratep_lambda;
      sgd.learning_rate = ratep_lr;
      sgd.epochs = ratep_epochs;
      sgd.tolerance = ratep_tolerance;
      sgd.seed = ratep_seed;
      RatingTable table = fit_ratings(interactions, {}, sgd);
      ensure_dir(ratep_common.out);
      save_ratings_csv(ratep_common.out + "/ratings.csv", table);
      write_json(ratep_common.out + "/fit_report.json", fit_report_json(table));
      ordered_json snapshot;
      snapshot["command"] = "rate pairwise";
      snapshot["interactions"] = ratep_interactions;
      snapshot["matches_filter"] = ratep_filter;
      snapshot["lambda"] = ratep_lambda;
      snapshot["lr"] = ratep_lr;
      snapshot["epochs"] = ratep_epochs;
      snapshot["tolerance"] = ratep_tolerance;
      snapshot["seed"] = ratep_seed;
      write_json(ratep_common.out + "/config.json", snapshot);
      std::printf("rate pairwise: final cost %.6g after %d epochs (%zu batsmen, %zu bowlers)\n",
                  table.fitted_cost, table.epochs_run, table.batting.size(),
                  table.bowling.size());
      return kExitOk;
    }

    if (rate_cluster->parsed()) {
      json cfg = ratec_common.config.empty() ? json::object() : load_json(ratec_common.config);
      sync_opt(rate_cluster, cfg, "--matches", "matches", ratec_matches);
      sync_opt(rate_cluster, cfg, "--k", "k", ratec_k);
      sync_opt(rate_cluster, cfg, "--seed", "seed", ratec_seed);
      auto matches = load_matches_or_die(ratec_matches, ratec_common.lenient);
      ClusterRatingSystem sys = fit_cluster_ratings(matches, ratec_k, ratec_seed);
      ensure_dir(ratec_common.out);
      std::ostringstream csv;
      save_cluster_ratings_csv(csv, sys.ratings, sys.k);
      write_text(ratec_common.out + "/cluster_ratings.csv", csv.str());
      ordered_json snapshot;
      snapshot["command"] = "rate cluster";
      snapshot["matches"] = ratec_matches;
      snapshot["k"] = ratec_k;
      snapshot["seed"] = ratec_seed;
      write_json(ratec_common.out + "/config.json", snapshot);
      std::printf("rate cluster: %zu players rated with k=%d\n", sys.ratings.size(), sys.k);
      return kExitOk;
    }

    if (compare_cmd->parsed()) {
      json cfg = compare_common.config.empty() ? json::object() : load_json(compare_common.config);
      sync_opt(compare_cmd, cfg, "--ratings", "ratings", compare_ratings);
      sync_opt(compare_cmd, cfg, "--reference", "reference", compare_reference);
      sync_opt(compare_cmd, cfg, "--side", "side", compare_side);
      if (compare_ratings.empty() || compare_reference.empty())
        throw UsageError("compare-ratings needs --ratings and --reference");
      if (compare_side != "batting" && compare_side != "bowling")
        throw UsageError("--side must be batting or bowling");
      RatingTable table = load_ratings_table(compare_ratings);
      auto reference = load_reference_csv(compare_reference);
      auto res = rescale_to_reference(
          table, reference, compare_side == "batting" ? Side::batting : Side::bowling);
      ensure_dir(compare_common.out);
      std::ostringstream csv;
      csv << "player_id,fitted,reference,scaled\n";
      for (std::size_t i = 0; i < res.players.size(); ++i)
        csv << res.players[i] << ',' << format_double(res.scatter[i].first) << ','
            << format_double(res.scatter[i].second) << ','
            << format_double(res.scaled.at(res.players[i])) << "\n";
      write_text(compare_common.out + "/scatter.csv", csv.str());
      ordered_json cj;
      cj["pearson_r"] = res.pearson_r;
      cj["scale"] = res.scale;
      cj["offset"] = res.offset;
      cj["common_players"] = res.players.size();
      write_json(compare_common.out + "/comparison.json", cj);
      ordered_json snapshot;
      snapshot["command"] = "compare-ratings";
      snapshot["ratings"] = compare_ratings;
      snapshot["reference"] = compare_reference;
      snapshot["side"] = compare_side;
      write_json(compare_common.out + "/config.json", snapshot);
      std::printf("compare-ratings: pearson r %.4f over %zu common players\n", res.pearson_r,
                  res.players.size());
      return kExitOk;
    }

    if (evaluate_cmd->parsed())
      return run_evaluate(evaluate_cmd, eval_common.config, eval_common.out, eval_pipe, eval_lf,
                          eval_folds, eval_fold_seed, eval_common.lenient);

    if (train_cmd->parsed())
      return run_train(train_cmd, train_common.config, train_common.out, train_pipe, train_lf,
                       train_common.lenient);

    if (predict_cmd->parsed())
      return run_predict(predict_cmd, predict_common.config, predict_common.out, predict_model,
                         predict_matches, predict_common.lenient);

    if (eliminate_cmd->parsed()) {
      json cfg = elim_common.config.empty() ? json::object() : load_json(elim_common.config);
      sync_pipeline(eliminate_cmd, cfg, elim_pipe);
      sync_opt(eliminate_cmd, cfg, "--learner", "learner", elim_lf.kind);
      sync_opt(eliminate_cmd, cfg, "--bagged", "bagged", elim_lf.bagged);
      sync_opt(eliminate_cmd, cfg, "--seed", "seed", elim_lf.seed);
      sync_opt(eliminate_cmd, cfg, "--folds", "folds", elim_folds);
      sync_opt(eliminate_cmd, cfg, "--fold-seed", "fold_seed", elim_fold_seed);
      Approach approach = approach_from_string(elim_pipe.approach);
      Variation variation = variation_of(approach);  // rejects pairwise/cluster
      auto matches = load_matches_or_die(elim_pipe.matches_path, elim_common.lenient);
      StatsIndex index(matches);
      auto instances = build_stats_instances(matches, variation, all_indices(matches.size()),
                                             index);
      FoldPlan plan = kfold_split(matches.size(), elim_folds, elim_fold_seed);
      EliminationTrace trace =
          backward_eliminate(to_spec(elim_lf), instances, elimination_groups(variation), plan);
      ensure_dir(elim_common.out);
      std::ostringstream csv;
      save_elimination_csv(csv, trace);
      write_text(elim_common.out + "/elimination.csv", csv.str());
      ordered_json snapshot;
      snapshot["command"] = "eliminate";
      snapshot_pipeline(snapshot, elim_pipe, approach);
      snapshot_learner(snapshot, elim_lf);
      snapshot["folds"] = elim_folds;
      snapshot["fold_seed"] = elim_fold_seed;
      write_json(elim_common.out + "/config.json", snapshot);
      std::printf("eliminate: best accuracy %.4f with %zu features\n", trace.best_accuracy,
                  trace.selected.size());
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      json cfg = sweep_common.config.empty() ? json::object() : load_json(sweep_common.config);
      sync_opt(sweep_cmd, cfg, "--matches", "matches", sweep_matches);
      sync_opt(sweep_cmd, cfg, "--learner", "learner", sweep_lf.kind);
      sync_opt(sweep_cmd, cfg, "--bagged", "bagged", sweep_lf.bagged);
      sync_opt(sweep_cmd, cfg, "--seed", "seed", sweep_lf.seed);
      sync_opt(sweep_cmd, cfg, "--k-min", "k_min", sweep_kmin);
      sync_opt(sweep_cmd, cfg, "--k-max", "k_max", sweep_kmax);
      sync_opt(sweep_cmd, cfg, "--folds", "folds", sweep_folds);
      sync_opt(sweep_cmd, cfg, "--sweep-seed", "sweep_seed", sweep_seed);
      if (sweep_kmin < 1 || sweep_kmax < sweep_kmin)
        throw UsageError("need 1 <= --k-min <= --k-max");
      auto matches = load_matches_or_die(sweep_matches, sweep_common.lenient);
      std::vector<int> k_range;
      for (int k = sweep_kmin; k <= sweep_kmax; ++k) k_range.push_back(k);
      auto sweep = sweep_cluster_size(matches, k_range, to_spec(sweep_lf), sweep_folds,
                                      sweep_seed);
      ensure_dir(sweep_common.out);
      std::ostringstream csv;
      save_sweep_csv(csv, sweep, sweep_lf.kind);
      write_text(sweep_common.out + "/sweep.csv", csv.str());
      ordered_json snapshot;
      snapshot["command"] = "sweep-k";
      snapshot["matches"] = sweep_matches;
      snapshot_learner(snapshot, sweep_lf);
      snapshot["k_min"] = sweep_kmin;
      snapshot["k_max"] = sweep_kmax;
      snapshot["folds"] = sweep_folds;
      snapshot["sweep_seed"] = sweep_seed;
      write_json(sweep_common.out + "/config.json", snapshot);
      int best_k = k_range.front();
      for (int k : k_range)
        if (sweep.at(k) > sweep.at(best_k)) best_k = k;
      std::printf("sweep-k: best k=%d with mean accuracy %.4f\n", best_k, sweep.at(best_k));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
