#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "t20/corpus.hpp"

namespace t20 {

inline constexpr std::size_t kFeatureCount = 16;

/// Per-player statistics, in canonical order. Indices 0-9 are the batting
/// side, 10-15 the bowling side.
enum Feature : std::size_t {
  kAvgRuns = 0,
  kAvgFours = 1,
  kAvgSixes = 2,
  kAvgStrikeRate = 3,
  kNotOuts = 4,
  kFifties = 5,
  kHundreds = 6,
  kNMatches = 7,
  kCurrentBattingPos = 8,
  kAvgBattingPos = 9,
  kAvgWickets = 10,
  kAvgEconomy = 11,
  kAvgRunsConceded = 12,
  kAvgWides = 13,
  kAvgNoBalls = 14,
  kAvgMaidens = 15,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "avg_runs",      "avg_fours",       "avg_sixes",         "avg_strike_rate",
    "not_outs",      "fifties",         "hundreds",          "n_matches",
    "current_batting_pos", "avg_batting_pos", "avg_wickets",  "avg_economy",
    "avg_runs_conceded", "avg_wides",    "avg_no_balls",      "avg_maidens"};

inline constexpr std::size_t kBattingSideBegin = 0, kBattingSideEnd = 10;
inline constexpr std::size_t kBowlingSideBegin = 10, kBowlingSideEnd = 16;

/// Bowling features where a smaller value means a better player; inverted to
/// 1 - x before any aggregation so every coordinate is benefit-oriented.
inline constexpr bool is_cost_feature(std::size_t f) {
  return f == kAvgEconomy || f == kAvgRunsConceded || f == kAvgWides || f == kAvgNoBalls;
}

struct PlayerFeatureVector {
  std::string player_id;
  Date as_of;
  std::array<double, kFeatureCount> values{};
  std::array<bool, kFeatureCount> missing{};  // true -> value carries no meaning

  bool all_missing() const {
    for (bool m : missing)
      if (!m) return false;
    return true;
  }
};

/// History index over a fixed match list: per player, innings sorted by date.
/// Built once, then queried per (player, date). All queries use matches dated
/// strictly before the query date.
class StatsIndex {
 public:
  explicit StatsIndex(const std::vector<Match>& matches) {
    for (std::size_t i = 0; i < matches.size(); ++i) {
      const Match& m = matches[i];
      for (const auto& p : m.team1_players) history_[p].participations.push_back(m.date);
      for (const auto& p : m.team2_players) history_[p].participations.push_back(m.date);
      auto add_lines = [&](const std::vector<PlayerInningsLine>& lines) {
        for (const auto& line : lines)
          history_[line.player_id].innings.push_back({m.date, i, line.batting, line.bowling});
      };
      add_lines(m.innings1);
      add_lines(m.innings2);
    }
    for (auto& [id, h] : history_) {
      std::sort(h.participations.begin(), h.participations.end());
      std::sort(h.innings.begin(), h.innings.end(), [](const Innings& a, const Innings& b) {
        return a.date != b.date ? a.date < b.date : a.match_index < b.match_index;
      });
    }
  }

  PlayerFeatureVector asof(const std::string& player_id, const Date& date) const {
    if (!date.valid()) throw ValidationError("asof: invalid date");
    PlayerFeatureVector v;
    v.player_id = player_id;
    v.as_of = date;
    v.missing.fill(true);

    auto it = history_.find(player_id);
    if (it == history_.end()) return v;  // unknown player: all-missing, not an error
    const History& h = it->second;

    long n_matches = 0;
    for (const Date& d : h.participations) {
      if (!(d < date)) break;
      ++n_matches;
    }
    if (n_matches > 0) {
      v.values[kNMatches] = static_cast<double>(n_matches);
      v.missing[kNMatches] = false;
    }

    // batting accumulators
    long innings_batted = 0, dismissals = 0, total_runs = 0, total_fours = 0, total_sixes = 0;
    long fifties = 0, hundreds = 0, pos_sum = 0;
    double sr_sum = 0;
    long sr_innings = 0;
    int current_pos = 0;
    // bowling accumulators
    long innings_bowled = 0, balls_bowled = 0, runs_conceded = 0, wickets = 0, wides = 0,
         no_balls = 0, maidens = 0;

    for (const Innings& inn : h.innings) {
      if (!(inn.date < date)) break;
      if (inn.batting) {
        const BattingLine& b = *inn.batting;
        ++innings_batted;
        total_runs += b.runs;
        total_fours += b.fours;
        total_sixes += b.sixes;
        if (b.dismissed) ++dismissals;
        if (b.runs >= 100)
          ++hundreds;
        else if (b.runs >= 50)
          ++fifties;
        pos_sum += b.batting_position;
        current_pos = b.batting_position;  // innings sorted ascending; last wins
        if (b.balls_faced >= 1) {
          sr_sum += 100.0 * b.runs / b.balls_faced;
          ++sr_innings;
        }
      }
      if (inn.bowling) {
        const BowlingLine& b = *inn.bowling;
        ++innings_bowled;
        balls_bowled += b.balls_bowled;
        runs_conceded += b.runs_conceded;
        wickets += b.wickets;
        wides += b.wides;
        no_balls += b.no_balls;
        maidens += b.maidens;
      }
    }

    auto set = [&](std::size_t f, double value) {
      v.values[f] = value;
      v.missing[f] = false;
    };
    if (innings_batted > 0) {
      // runs per dismissal; a never-dismissed batsman falls back to runs per innings
      set(kAvgRuns, dismissals > 0 ? static_cast<double>(total_runs) / dismissals
                                   : static_cast<double>(total_runs) / innings_batted);
      set(kAvgFours, static_cast<double>(total_fours) / innings_batted);
      set(kAvgSixes, static_cast<double>(total_sixes) / innings_batted);
      set(kNotOuts, static_cast<double>(innings_batted - dismissals));
      set(kFifties, static_cast<double>(fifties));
      set(kHundreds, static_cast<double>(hundreds));
      set(kCurrentBattingPos, static_cast<double>(current_pos));
      set(kAvgBattingPos, static_cast<double>(pos_sum) / innings_batted);
    }
    if (sr_innings > 0) set(kAvgStrikeRate, sr_sum / sr_innings);
    if (innings_bowled > 0) {
      set(kAvgWickets, static_cast<double>(wickets) / innings_bowled);
      set(kAvgRunsConceded, static_cast<double>(runs_conceded) / innings_bowled);
      set(kAvgWides, static_cast<double>(wides) / innings_bowled);
      set(kAvgNoBalls, static_cast<double>(no_balls) / innings_bowled);
      set(kAvgMaidens, static_cast<double>(maidens) / innings_bowled);
    }
    if (balls_bowled > 0) set(kAvgEconomy, 6.0 * runs_conceded / balls_bowled);
    return v;
  }

 private:
  struct Innings {
    Date date;
    std::size_t match_index;
    std::optional<BattingLine> batting;
    std::optional<BowlingLine> bowling;
  };
  struct History {
    std::vector<Date> participations;
    std::vector<Innings> innings;
  };
  std::map<std::string, History> history_;
};

/// Convenience form matching the one-shot contract; bulk callers should build
/// a StatsIndex once instead.
inline PlayerFeatureVector player_stats_asof(const std::string& player_id, const Date& date,
                                             const std::vector<Match>& matches) {
  return StatsIndex(matches).asof(player_id, date);
}

// --- normalization -----------------------------------------------------------

struct FeatureRange {
  double min = 0;
  double max = 0;
  bool constant = false;  // min == max observed, or no observations
};

struct NormalizationSpec {
  static constexpr double kMissingFill = 0.5;
  std::array<FeatureRange, kFeatureCount> ranges{};
  bool fitted = false;

  bool operator==(const NormalizationSpec&) const = default;
};

inline bool operator==(const FeatureRange& a, const FeatureRange& b) {
  return a.min == b.min && a.max == b.max && a.constant == b.constant;
}

inline NormalizationSpec fit_normalization(const std::vector<PlayerFeatureVector>& vectors) {
  if (vectors.empty()) throw ValidationError("fit_normalization: no vectors");
  NormalizationSpec spec;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    bool any = false;
    double lo = 0, hi = 0;
    for (const auto& v : vectors) {
      if (v.missing[f]) continue;
      if (!any) {
        lo = hi = v.values[f];
        any = true;
      } else {
        lo = std::min(lo, v.values[f]);
        hi = std::max(hi, v.values[f]);
      }
    }
    if (!any) {
      spec.ranges[f] = {NormalizationSpec::kMissingFill, NormalizationSpec::kMissingFill, true};
    } else {
      spec.ranges[f] = {lo, hi, lo == hi};
    }
  }
  spec.fitted = true;
  return spec;
}

/// Min-max to [0,1] with clamping; missing or degenerate features map to the
/// 0.5 base rating.
inline std::array<double, kFeatureCount> normalize(const PlayerFeatureVector& v,
                                                   const NormalizationSpec& spec) {
  if (!spec.fitted) throw ValidationError("normalize: spec not fitted");
  std::array<double, kFeatureCount> out{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const FeatureRange& r = spec.ranges[f];
    if (v.missing[f] || r.constant) {
      out[f] = NormalizationSpec::kMissingFill;
    } else {
      double x = (v.values[f] - r.min) / (r.max - r.min);
      out[f] = std::min(1.0, std::max(0.0, x));
    }
  }
  return out;
}

// --- match instances ----------------------------------------------------------

enum class Variation { v1, v2, v3, v4, v5 };

/// Tags every classifier instance with the feature route that produced it.
enum class InstanceKind { v1, v2, v3, v4, v5, pairwise_ratings, cluster_ratings };

inline InstanceKind kind_of(Variation v) {
  switch (v) {
    case Variation::v1: return InstanceKind::v1;
    case Variation::v2: return InstanceKind::v2;
    case Variation::v3: return InstanceKind::v3;
    case Variation::v4: return InstanceKind::v4;
    case Variation::v5: return InstanceKind::v5;
  }
  throw std::invalid_argument("bad variation");
}

inline std::size_t instance_width(InstanceKind k) {
  switch (k) {
    case InstanceKind::v1: return 352;
    case InstanceKind::v2: return 44;
    case InstanceKind::v3: return 22;
    case InstanceKind::v4: return 2;
    case InstanceKind::v5: return 242;
    case InstanceKind::pairwise_ratings: return 44;
    case InstanceKind::cluster_ratings: return 44;
  }
  throw std::invalid_argument("bad instance kind");
}

struct MatchInstance {
  std::string match_id;
  InstanceKind kind = InstanceKind::v1;
  std::vector<double> features;
  int label = 0;
};

/// Merges the two batting-position statistics: positions further than
/// `threshold` from the player's average become a single negative value
/// (-|diff|/10), everything else 0. Missing positions contribute 0.
inline double combine_batting_position(double avg_pos, double current_pos, double threshold = 2) {
  double diff = std::abs(current_pos - avg_pos);
  if (diff > threshold) return -diff / 10.0;
  return 0.0;
}

namespace detail {

inline double batting_aggregate(const std::array<double, kFeatureCount>& n) {
  double sum = 0;
  for (std::size_t f = kBattingSideBegin; f < kBattingSideEnd; ++f) sum += n[f];
  return sum / (kBattingSideEnd - kBattingSideBegin);
}

inline double bowling_aggregate(const std::array<double, kFeatureCount>& n) {
  double sum = 0;
  for (std::size_t f = kBowlingSideBegin; f < kBowlingSideEnd; ++f)
    sum += is_cost_feature(f) ? 1.0 - n[f] : n[f];
  return sum / (kBowlingSideEnd - kBowlingSideBegin);
}

}  // namespace detail

/// Features kept per player under variation 5, in order. The two position
/// statistics collapse into one combined feature.
inline const std::vector<std::string>& v5_feature_names() {
  static const std::vector<std::string> names = {
      "avg_runs",  "avg_fours",   "avg_sixes",   "avg_strike_rate",
      "fifties",   "hundreds",    "n_matches",   "combined_batting_pos",
      "avg_wickets", "avg_economy", "avg_maidens"};
  return names;
}

inline MatchInstance build_instance(const Match& match, Variation variation,
                                    const NormalizationSpec& spec, const StatsIndex& index) {
  if (!spec.fitted) throw ValidationError("build_instance: normalization spec not fitted");
  MatchInstance inst;
  inst.match_id = match.match_id;
  inst.kind = kind_of(variation);
  inst.label = match.label;

  std::vector<PlayerFeatureVector> raw;
  std::vector<std::array<double, kFeatureCount>> norm;
  raw.reserve(2 * kTeamSize);
  for (const auto& team : {&match.team1_players, &match.team2_players})
    for (const auto& id : *team) {
      raw.push_back(index.asof(id, match.date));
      norm.push_back(normalize(raw.back(), spec));
    }

  switch (variation) {
    case Variation::v1:
      for (const auto& n : norm)
        inst.features.insert(inst.features.end(), n.begin(), n.end());
      break;
    case Variation::v2:
      for (const auto& n : norm) {
        inst.features.push_back(detail::batting_aggregate(n));
        inst.features.push_back(detail::bowling_aggregate(n));
      }
      break;
    case Variation::v3:
      for (const auto& n : norm)
        inst.features.push_back(0.5 * (detail::batting_aggregate(n) + detail::bowling_aggregate(n)));
      break;
    case Variation::v4: {
      for (int team = 0; team < 2; ++team) {
        double sum = 0;
        for (int p = 0; p < kTeamSize; ++p) {
          const auto& n = norm[team * kTeamSize + p];
          sum += 0.5 * (detail::batting_aggregate(n) + detail::bowling_aggregate(n));
        }
        inst.features.push_back(sum / kTeamSize);
      }
      break;
    }
    case Variation::v5:
      for (std::size_t i = 0; i < norm.size(); ++i) {
        const auto& n = norm[i];
        const auto& r = raw[i];
        inst.features.push_back(n[kAvgRuns]);
        inst.features.push_back(n[kAvgFours]);
        inst.features.push_back(n[kAvgSixes]);
        inst.features.push_back(n[kAvgStrikeRate]);
        inst.features.push_back(n[kFifties]);
        inst.features.push_back(n[kHundreds]);
        inst.features.push_back(n[kNMatches]);
        if (r.missing[kAvgBattingPos] || r.missing[kCurrentBattingPos])
          inst.features.push_back(0.0);
        else
          inst.features.push_back(
              combine_batting_position(r.values[kAvgBattingPos], r.values[kCurrentBattingPos]));
        inst.features.push_back(n[kAvgWickets]);
        inst.features.push_back(n[kAvgEconomy]);
        inst.features.push_back(n[kAvgMaidens]);
      }
      break;
  }
  if (inst.features.size() != instance_width(inst.kind))
    throw ValidationError("instance width mismatch");
  return inst;
}

inline MatchInstance build_instance(const Match& match, Variation variation,
                                    const NormalizationSpec& spec,
                                    const std::vector<Match>& matches) {
  return build_instance(match, variation, spec, StatsIndex(matches));
}

// --- exports -------------------------------------------------------------------

inline void save_instances_csv(std::ostream& out, const std::vector<MatchInstance>& instances) {
  if (instances.empty()) {
    out << "match_id,label\n";
    return;
  }
  out << "match_id,label";
  for (std::size_t i = 0; i < instances[0].features.size(); ++i) out << ",f" << i;
  out << "\n";
  for (const auto& inst : instances) {
    out << inst.match_id << ',' << inst.label;
    for (double f : inst.features) out << ',' << format_double(f);
    out << "\n";
  }
}

inline void save_instances_csv(const std::string& path, const std::vector<MatchInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write instances file '" + path + "'");
  save_instances_csv(out, instances);
}

inline nlohmann::ordered_json to_json(const NormalizationSpec& spec) {
  nlohmann::ordered_json j;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    j[std::string(kFeatureNames[f])] = {{"min", spec.ranges[f].min},
                                        {"max", spec.ranges[f].max},
                                        {"constant", spec.ranges[f].constant}};
  }
  return j;
}

inline NormalizationSpec normalization_from_json(const nlohmann::ordered_json& j) {
  NormalizationSpec spec;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& r = j.at(std::string(kFeatureNames[f]));
    spec.ranges[f] = {r.at("min").get<double>(), r.at("max").get<double>(),
                      r.at("constant").get<bool>()};
  }
  spec.fitted = true;
  return spec;
}

}  // namespace t20
