#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "t20/eval.hpp"
#include "t20/features.hpp"
#include "t20/kmeans.hpp"
#include "t20/pairwise.hpp"  // Side

namespace t20 {

/// Integer skill ratings in [1, k] per side; k is the best cluster.
struct ClusterRating {
  std::string player_id;
  int batting_rating = 1;
  int bowling_rating = 1;
};

/// Side projection of a normalized feature vector: batting keeps the 10
/// batting statistics, bowling keeps the 6 bowling ones with cost features
/// flipped to 1 - x, so every coordinate is benefit-oriented.
inline std::vector<double> side_point(const std::array<double, kFeatureCount>& normalized,
                                      Side side) {
  std::vector<double> out;
  if (side == Side::batting) {
    for (std::size_t f = kBattingSideBegin; f < kBattingSideEnd; ++f)
      out.push_back(normalized[f]);
  } else {
    for (std::size_t f = kBowlingSideBegin; f < kBowlingSideEnd; ++f)
      out.push_back(is_cost_feature(f) ? 1.0 - normalized[f] : normalized[f]);
  }
  return out;
}

/// Rating of each cluster: rank by centroid quality (mean coordinate), k for
/// the best, 1 for the worst. Quality ties rank by centroid index.
inline std::vector<int> cluster_rating_map(const KMeansModel& model) {
  const int k = model.k;
  std::vector<std::pair<double, int>> quality(k);
  for (int c = 0; c < k; ++c) {
    const auto& centroid = model.centroids[c];
    double mean = std::accumulate(centroid.begin(), centroid.end(), 0.0) / centroid.size();
    quality[c] = {mean, c};
  }
  std::sort(quality.begin(), quality.end());
  std::vector<int> rating(k);
  for (int rank = 0; rank < k; ++rank) rating[quality[rank].second] = rank + 1;
  return rating;
}

/// One side's rating for each player, in input order.
inline std::vector<int> assign_side_ratings(const KMeansModel& model, Side side,
                                            const std::vector<PlayerFeatureVector>& players,
                                            const NormalizationSpec& norm) {
  std::vector<int> rating_of = cluster_rating_map(model);
  std::vector<int> out;
  out.reserve(players.size());
  for (const auto& p : players) {
    std::vector<double> point = side_point(normalize(p, norm), side);
    out.push_back(rating_of[nearest_centroid(model, point)]);
  }
  return out;
}

inline std::vector<ClusterRating> assign_ratings(const KMeansModel& batting_model,
                                                 const KMeansModel& bowling_model,
                                                 const std::vector<PlayerFeatureVector>& players,
                                                 const NormalizationSpec& norm) {
  std::vector<int> bat = assign_side_ratings(batting_model, Side::batting, players, norm);
  std::vector<int> bowl = assign_side_ratings(bowling_model, Side::bowling, players, norm);
  std::vector<ClusterRating> out;
  out.reserve(players.size());
  for (std::size_t i = 0; i < players.size(); ++i)
    out.push_back({players[i].player_id, bat[i], bowl[i]});
  return out;
}

/// 44-wide instance of ratings/k per player in team order. Players without a
/// rating take the midpoint ceil(k/2), mirroring the 0.5 base rating.
inline MatchInstance cluster_instance(const std::vector<ClusterRating>& ratings, const Match& match,
                                      int k) {
  if (k < 1) throw std::invalid_argument("cluster_instance: k must be >= 1");
  std::map<std::string, const ClusterRating*> by_id;
  for (const auto& r : ratings) by_id[r.player_id] = &r;
  const int midpoint = (k + 1) / 2;

  MatchInstance inst;
  inst.match_id = match.match_id;
  inst.kind = InstanceKind::cluster_ratings;
  inst.label = match.label;
  for (const auto& team : {&match.team1_players, &match.team2_players})
    for (const auto& id : *team) {
      auto it = by_id.find(id);
      int bat = it != by_id.end() ? it->second->batting_rating : midpoint;
      int bowl = it != by_id.end() ? it->second->bowling_rating : midpoint;
      inst.features.push_back(static_cast<double>(bat) / k);
      inst.features.push_back(static_cast<double>(bowl) / k);
    }
  return inst;
}

/// Both k-means systems fitted on one corpus slice, plus everything needed to
/// rate further players.
struct ClusterRatingSystem {
  int k = 0;
  NormalizationSpec norm;
  KMeansModel batting_model;
  KMeansModel bowling_model;
  std::vector<ClusterRating> ratings;  // players seen at fit time
};

namespace cluster_detail {

/// One feature vector per player appearing in `matches`, as of the day after
/// the latest match (so every innings counts).
inline std::vector<PlayerFeatureVector> player_vectors(const std::vector<Match>& matches) {
  std::set<std::string> ids;
  Date latest{1970, 1, 1};
  for (const auto& m : matches) {
    for (const auto& p : m.team1_players) ids.insert(p);
    for (const auto& p : m.team2_players) ids.insert(p);
    latest = std::max(latest, m.date);
  }
  Date cutoff = Date::from_serial(latest.serial() + 1);
  StatsIndex index(matches);
  std::vector<PlayerFeatureVector> out;
  for (const auto& id : ids) out.push_back(index.asof(id, cutoff));
  return out;
}

}  // namespace cluster_detail

inline ClusterRatingSystem fit_cluster_ratings(const std::vector<Match>& matches, int k,
                                               std::uint64_t seed) {
  ClusterRatingSystem sys;
  sys.k = k;
  std::vector<PlayerFeatureVector> players = cluster_detail::player_vectors(matches);
  if (players.empty()) throw std::invalid_argument("fit_cluster_ratings: no players");
  sys.norm = fit_normalization(players);
  std::vector<std::vector<double>> bat_points, bowl_points;
  for (const auto& p : players) {
    auto n = normalize(p, sys.norm);
    bat_points.push_back(side_point(n, Side::batting));
    bowl_points.push_back(side_point(n, Side::bowling));
  }
  sys.batting_model = kmeans_fit(bat_points, k, Rng::mix_seed(seed, 0));
  sys.bowling_model = kmeans_fit(bowl_points, k, Rng::mix_seed(seed, 1));
  sys.ratings = assign_ratings(sys.batting_model, sys.bowling_model, players, sys.norm);
  return sys;
}

/// Cluster-count experiment: mean CV accuracy per k. The two k-means systems
/// are refit inside each fold on training matches only.
inline std::map<int, double> sweep_cluster_size(const std::vector<Match>& matches,
                                                const std::vector<int>& k_range,
                                                const LearnerSpec& learner, int folds = 10,
                                                std::uint64_t seed = 1) {
  if (k_range.empty()) throw std::invalid_argument("sweep_cluster_size: empty k range");
  FoldPlan plan = kfold_split(matches.size(), folds, seed);
  std::map<int, double> out;
  for (int k : k_range) {
    InstanceBuilder builder = [&, k](const std::vector<std::size_t>& train_idx) {
      std::vector<Match> train_matches;
      train_matches.reserve(train_idx.size());
      for (std::size_t i : train_idx) train_matches.push_back(matches[i]);
      ClusterRatingSystem sys = fit_cluster_ratings(train_matches, k, seed);
      std::vector<MatchInstance> instances;
      instances.reserve(matches.size());
      for (const auto& m : matches) instances.push_back(cluster_instance(sys.ratings, m, k));
      return instances;
    };
    out[k] = cross_validate(learner, builder, plan).mean_accuracy;
  }
  return out;
}

// --- exports ---------------------------------------------------------------------

inline void save_cluster_ratings_csv(std::ostream& out, const std::vector<ClusterRating>& ratings,
                                     int k) {
  out << "player_id,batting_rating,bowling_rating,k\n";
  std::vector<const ClusterRating*> sorted;
  for (const auto& r : ratings) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const ClusterRating* a, const ClusterRating* b) { return a->player_id < b->player_id; });
  for (const auto* r : sorted)
    out << r->player_id << ',' << r->batting_rating << ',' << r->bowling_rating << ',' << k << "\n";
}

inline void save_sweep_csv(std::ostream& out, const std::map<int, double>& sweep,
                           const std::string& classifier) {
  out << "k,classifier,mean_accuracy\n";
  for (const auto& [k, acc] : sweep)
    out << k << ',' << classifier << ',' << format_double(acc) << "\n";
}

}  // namespace t20
