#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "t20/corpus.hpp"
#include "t20/features.hpp"
#include "t20/rng.hpp"

namespace t20 {

/// League-average scoring constants behind the runs-above-average statistic.
/// Defaults are 2011 ODI figures; configurable because a T20 corpus may want
/// its own baselines.
struct RaaBaseline {
  double runs_per_ball = 0.79;
  double outs_per_ball = 0.028;
  double runs_per_dismissal = 28.31;
};

/// Runs above average for one batsman-vs-bowler aggregate: scoring-rate part
/// plus dismissals avoided, valued at the average runs per dismissal.
inline double raa_score(double runs, int balls, int outs, const RaaBaseline& baseline = {}) {
  if (balls < 1) throw std::invalid_argument("raa_score: balls must be >= 1");
  if (outs < 0) throw std::invalid_argument("raa_score: outs must be >= 0");
  return (runs - baseline.runs_per_ball * balls) +
         (baseline.outs_per_ball * balls - outs) * baseline.runs_per_dismissal;
}

/// Recency weight for a match at day t within [t_min, t_max]:
/// ((1 + t - t_min) / (1 + t_max - t_min))^2. Equals 1 at t_max.
inline double time_weight(long t, long t_min, long t_max) {
  if (t_min > t_max) throw std::invalid_argument("time_weight: t_min > t_max");
  if (t < t_min || t > t_max) throw std::invalid_argument("time_weight: t outside [t_min, t_max]");
  double ratio = static_cast<double>(1 + t - t_min) / static_cast<double>(1 + t_max - t_min);
  return ratio * ratio;
}

enum class Side { batting, bowling };

struct SgdConfig {
  double learning_rate = 0.01;
  int epochs = 200;          // cap
  double tolerance = 1e-6;   // relative cost change between epochs
  double lambda = 0.7;       // neighborhood regularization strength
  std::uint64_t seed = 1;
};

struct RatingTable {
  std::map<std::string, double> batting;  // player -> a_i
  std::map<std::string, double> bowling;  // player -> b_j
  double intercept = 0;                   // A
  double fitted_cost = 0;
  int epochs_run = 0;
  std::vector<double> cost_history;  // cost at each epoch boundary
  double gauge_shift_batting = 0;    // mean subtracted from a at gauge fix
  double gauge_shift_bowling = 0;
  SgdConfig config;
};

/// Predicted interaction score A + a_i - b_j. Players absent from the table
/// count as average (rating 0).
inline double predict_score(const RatingTable& table, const std::string& batsman_id,
                            const std::string& bowler_id) {
  double a = 0, b = 0;
  if (auto it = table.batting.find(batsman_id); it != table.batting.end()) a = it->second;
  if (auto it = table.bowling.find(bowler_id); it != table.bowling.end()) b = it->second;
  return table.intercept + a - b;
}

struct ScorePrediction {
  double score = 0;
  bool batsman_known = false;
  bool bowler_known = false;
};

inline ScorePrediction predict_score_detail(const RatingTable& table, const std::string& batsman_id,
                                            const std::string& bowler_id) {
  ScorePrediction p;
  double a = 0, b = 0;
  if (auto it = table.batting.find(batsman_id); it != table.batting.end()) {
    a = it->second;
    p.batsman_known = true;
  }
  if (auto it = table.bowling.find(bowler_id); it != table.bowling.end()) {
    b = it->second;
    p.bowler_known = true;
  }
  p.score = table.intercept + a - b;
  return p;
}

namespace detail {

inline std::pair<long, long> date_range_days(const std::vector<InteractionRecord>& interactions) {
  long t_min = interactions.front().date.serial();
  long t_max = t_min;
  for (const auto& r : interactions) {
    long t = r.date.serial();
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  return {t_min, t_max};
}

}  // namespace detail

/// Time-weighted mean of the opposite-side ratings over the player's opponent
/// multiset (one entry per interaction). `side` is the side of the player
/// whose neighborhood is requested.
inline double neighborhood_mean(const std::string& player_id, Side side,
                                const std::vector<InteractionRecord>& interactions,
                                const RatingTable& current) {
  if (interactions.empty()) throw std::invalid_argument("neighborhood_mean: no interactions");
  auto [t_min, t_max] = detail::date_range_days(interactions);
  double wsum = 0, wrsum = 0;
  for (const auto& r : interactions) {
    const bool mine = (side == Side::batting) ? r.batsman_id == player_id
                                              : r.bowler_id == player_id;
    if (!mine) continue;
    double w = time_weight(r.date.serial(), t_min, t_max);
    double opp = 0;
    if (side == Side::batting) {
      if (auto it = current.bowling.find(r.bowler_id); it != current.bowling.end())
        opp = it->second;
    } else {
      if (auto it = current.batting.find(r.batsman_id); it != current.batting.end())
        opp = it->second;
    }
    wsum += w;
    wrsum += w * opp;
  }
  if (wsum == 0) throw std::invalid_argument("neighborhood_mean: empty neighborhood for '" + player_id + "'");
  return wrsum / wsum;
}

/// Fits batting ratings a_i, bowling ratings b_j and intercept A by stochastic
/// gradient descent on
///   cost = sum_ij w_ij (A + a_i - b_j - o_ij)^2 + lambda sum_i (r_i - n_i)^2
/// with o_ij the observed RAA score, w_ij the match recency weight and n_i the
/// weighted opponent-rating mean (recomputed at each epoch start; regularizer
/// applied to both sides). Converged ratings are gauge-fixed to zero-mean a
/// and b with A adjusted so every prediction is unchanged.
inline RatingTable fit_ratings(const std::vector<InteractionRecord>& interactions,
                               const RaaBaseline& baseline = {}, const SgdConfig& config = {}) {
  if (interactions.empty()) throw std::invalid_argument("fit_ratings: no interactions");
  if (config.learning_rate <= 0) throw std::invalid_argument("fit_ratings: learning_rate must be > 0");
  if (config.lambda < 0) throw std::invalid_argument("fit_ratings: lambda must be >= 0");

  const std::size_t n = interactions.size();
  std::unordered_map<std::string, int> bat_index, bowl_index;
  std::vector<std::string> bat_ids, bowl_ids;
  std::vector<int> bi(n), bj(n);
  std::vector<double> w(n), o(n);
  auto [t_min, t_max] = detail::date_range_days(interactions);
  for (std::size_t m = 0; m < n; ++m) {
    const auto& r = interactions[m];
    auto [bit, bnew] = bat_index.try_emplace(r.batsman_id, static_cast<int>(bat_ids.size()));
    if (bnew) bat_ids.push_back(r.batsman_id);
    auto [wit, wnew] = bowl_index.try_emplace(r.bowler_id, static_cast<int>(bowl_ids.size()));
    if (wnew) bowl_ids.push_back(r.bowler_id);
    bi[m] = bit->second;
    bj[m] = wit->second;
    w[m] = time_weight(r.date.serial(), t_min, t_max);
    o[m] = raa_score(r.runs, r.balls, r.outs, baseline);
  }
  const std::size_t nb = bat_ids.size(), nw = bowl_ids.size();

  std::vector<double> a(nb, 0.0), b(nw, 0.0);
  double wsum = 0, wosum = 0;
  for (std::size_t m = 0; m < n; ++m) {
    wsum += w[m];
    wosum += w[m] * o[m];
  }
  double A = wosum / wsum;  // weighted mean score: average-vs-average baseline

  // opponent adjacency for neighborhood means
  std::vector<std::vector<std::pair<int, double>>> bat_opponents(nb), bowl_opponents(nw);
  for (std::size_t m = 0; m < n; ++m) {
    bat_opponents[bi[m]].push_back({bj[m], w[m]});
    bowl_opponents[bj[m]].push_back({bi[m], w[m]});
  }
  std::vector<double> n_bat(nb, 0.0), n_bowl(nw, 0.0);
  auto recompute_neighborhoods = [&]() {
    for (std::size_t i = 0; i < nb; ++i) {
      double ws = 0, wr = 0;
      for (const auto& [j, wm] : bat_opponents[i]) {
        ws += wm;
        wr += wm * b[j];
      }
      n_bat[i] = wr / ws;
    }
    for (std::size_t j = 0; j < nw; ++j) {
      double ws = 0, wr = 0;
      for (const auto& [i, wm] : bowl_opponents[j]) {
        ws += wm;
        wr += wm * a[i];
      }
      n_bowl[j] = wr / ws;
    }
  };
  auto total_cost = [&]() {
    double cost = 0;
    for (std::size_t m = 0; m < n; ++m) {
      double e = A + a[bi[m]] - b[bj[m]] - o[m];
      cost += w[m] * e * e;
    }
    for (std::size_t i = 0; i < nb; ++i) {
      double d = a[i] - n_bat[i];
      cost += config.lambda * d * d;
    }
    for (std::size_t j = 0; j < nw; ++j) {
      double d = b[j] - n_bowl[j];
      cost += config.lambda * d * d;
    }
    return cost;
  };

  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < n; ++m) order[m] = m;
  Rng rng(config.seed);

  const double lr = config.learning_rate;
  double prev_cost = 0;
  bool have_prev = false;
  int epochs_run = 0;
  double cost = 0;
  std::vector<double> cost_history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    recompute_neighborhoods();
    rng.shuffle(order);
    for (std::size_t m : order) {
      const int i = bi[m], j = bj[m];
      double e = A + a[i] - b[j] - o[m];
      double g = 2.0 * w[m] * e;
      a[i] -= lr * (g + 2.0 * config.lambda * (a[i] - n_bat[i]));
      b[j] -= lr * (-g + 2.0 * config.lambda * (b[j] - n_bowl[j]));
      A -= lr * g;
    }
    recompute_neighborhoods();
    cost = total_cost();
    epochs_run = epoch + 1;
    cost_history.push_back(cost);
    if (!std::isfinite(cost))
      throw std::runtime_error("fit_ratings: cost diverged at epoch " + std::to_string(epochs_run));
    if (have_prev) {
      double rel = std::abs(prev_cost - cost) / std::max(std::abs(prev_cost), 1e-300);
      if (rel < config.tolerance) break;
    }
    prev_cost = cost;
    have_prev = true;
  }

  // gauge fix: zero-mean a and b, compensate A so predictions are unchanged
  double a_mean = 0, b_mean = 0;
  for (double v : a) a_mean += v;
  a_mean /= static_cast<double>(nb);
  for (double v : b) b_mean += v;
  b_mean /= static_cast<double>(nw);
  for (double& v : a) v -= a_mean;
  for (double& v : b) v -= b_mean;
  A += a_mean - b_mean;

  RatingTable table;
  table.intercept = A;
  table.fitted_cost = cost;
  table.epochs_run = epochs_run;
  table.cost_history = std::move(cost_history);
  table.gauge_shift_batting = a_mean;
  table.gauge_shift_bowling = b_mean;
  table.config = config;
  for (std::size_t i = 0; i < nb; ++i) table.batting[bat_ids[i]] = a[i];
  for (std::size_t j = 0; j < nw; ++j) table.bowling[bowl_ids[j]] = b[j];
  return table;
}

// --- reference-scale comparison -------------------------------------------------

struct RescaleResult {
  std::map<std::string, double> scaled;             // common players, reference scale
  double pearson_r = 0;
  double scale = 1, offset = 0;                     // scaled = scale * fitted + offset
  std::vector<std::pair<double, double>> scatter;   // (fitted, reference) per common player
  std::vector<std::string> players;                 // scatter row order
};

/// Affinely maps fitted ratings onto the reference list's mean/stddev over the
/// common players and reports the Pearson correlation (scatter-plot export).
inline RescaleResult rescale_to_reference(const RatingTable& table,
                                          const std::map<std::string, double>& reference,
                                          Side side) {
  const auto& fitted = (side == Side::batting) ? table.batting : table.bowling;
  RescaleResult res;
  std::vector<double> x, y;
  for (const auto& [id, value] : fitted) {
    auto it = reference.find(id);
    if (it == reference.end()) continue;
    res.players.push_back(id);
    x.push_back(value);
    y.push_back(it->second);
  }
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("rescale_to_reference: fewer than 2 common players");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    throw std::invalid_argument("rescale_to_reference: zero variance");
  res.pearson_r = sxy / std::sqrt(sxx * syy);
  res.scale = std::sqrt(syy / sxx);
  res.offset = my - res.scale * mx;
  for (std::size_t i = 0; i < n; ++i) {
    res.scaled[res.players[i]] = res.scale * x[i] + res.offset;
    res.scatter.push_back({x[i], y[i]});
  }
  return res;
}

// --- classifier instances from ratings ------------------------------------------

/// 44-wide instance: per player in team order, (batting rating, bowling
/// rating) min-max squashed to [0,1] by the table's own range. Unknown
/// players sit at 0.5.
inline MatchInstance team_rating_features(const RatingTable& table, const Match& match) {
  auto range = [](const std::map<std::string, double>& m) -> std::pair<double, double> {
    double lo = 0, hi = 0;
    bool first = true;
    for (const auto& [id, v] : m) {
      if (first) {
        lo = hi = v;
        first = false;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    return {lo, hi};
  };
  auto [alo, ahi] = range(table.batting);
  auto [blo, bhi] = range(table.bowling);
  auto squash = [](double v, double lo, double hi) {
    if (hi <= lo) return 0.5;
    return std::min(1.0, std::max(0.0, (v - lo) / (hi - lo)));
  };

  MatchInstance inst;
  inst.match_id = match.match_id;
  inst.kind = InstanceKind::pairwise_ratings;
  inst.label = match.label;
  for (const auto& team : {&match.team1_players, &match.team2_players})
    for (const auto& id : *team) {
      auto a = table.batting.find(id);
      inst.features.push_back(a == table.batting.end() ? 0.5 : squash(a->second, alo, ahi));
      auto b = table.bowling.find(id);
      inst.features.push_back(b == table.bowling.end() ? 0.5 : squash(b->second, blo, bhi));
    }
  return inst;
}

// --- I/O -------------------------------------------------------------------------

inline void save_ratings_csv(std::ostream& out, const RatingTable& table) {
  out << "player_id,batting_rating,bowling_rating\n";
  std::map<std::string, std::pair<const double*, const double*>> merged;
  for (const auto& [id, v] : table.batting) merged[id].first = &v;
  for (const auto& [id, v] : table.bowling) merged[id].second = &v;
  for (const auto& [id, pv] : merged) {
    out << id << ',';
    if (pv.first) out << format_double(*pv.first);
    out << ',';
    if (pv.second) out << format_double(*pv.second);
    out << "\n";
  }
}

inline void save_ratings_csv(const std::string& path, const RatingTable& table) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write ratings file '" + path + "'");
  save_ratings_csv(out, table);
}

/// Reference ratings: CSV `player_id,rating`.
inline std::map<std::string, double> load_reference_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open reference ratings file '" + path + "'");
  std::map<std::string, double> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    if (row == 1 && line == "player_id,rating") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw ParseError(path + ":" + std::to_string(row) + ": expected 2 fields");
    out[fields[0]] = parse_double(fields[1], path + ":" + std::to_string(row));
  }
  return out;
}

inline nlohmann::ordered_json fit_report_json(const RatingTable& table) {
  nlohmann::ordered_json j;
  j["final_cost"] = table.fitted_cost;
  j["epochs_run"] = table.epochs_run;
  j["intercept"] = table.intercept;
  j["gauge_shift_batting"] = table.gauge_shift_batting;
  j["gauge_shift_bowling"] = table.gauge_shift_bowling;
  j["config"] = {{"learning_rate", table.config.learning_rate},
                 {"epochs", table.config.epochs},
                 {"tolerance", table.config.tolerance},
                 {"lambda", table.config.lambda},
                 {"seed", table.config.seed}};
  j["n_batting"] = table.batting.size();
  j["n_bowling"] = table.bowling.size();
  return j;
}

}  // namespace t20
