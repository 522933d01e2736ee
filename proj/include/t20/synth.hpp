#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "t20/corpus.hpp"
#include "t20/pairwise.hpp"
#include "t20/rng.hpp"

namespace t20 {

/// Generation knobs. Interaction scores follow s = A + a_i - b_j + eps with
/// eps ~ N(0, noise_stddev); skill_tiers > 0 snaps planted ratings to that
/// many evenly spaced levels instead of a continuous normal draw.
struct SynthConfig {
  int n_players = 100;
  int n_matches = 500;
  long n_interactions = 0;  // 0 -> 40 per match
  double intercept_A = 20.0;
  double rating_stddev = 5.0;
  double noise_stddev = 5.0;
  int date_span_days = 730;
  int skill_tiers = 0;
  std::uint64_t seed = 1;
};

inline void validate(const SynthConfig& c) {
  if (c.n_players < 22) throw std::invalid_argument("synth: need at least 22 players");
  if (c.n_matches < 1) throw std::invalid_argument("synth: n_matches must be positive");
  if (c.n_interactions < 0) throw std::invalid_argument("synth: n_interactions must be >= 0");
  if (c.rating_stddev < 0 || c.noise_stddev < 0)
    throw std::invalid_argument("synth: stddevs must be >= 0");
  if (c.date_span_days < 1) throw std::invalid_argument("synth: date_span_days must be positive");
  if (c.skill_tiers < 0) throw std::invalid_argument("synth: skill_tiers must be >= 0");
}

/// Planted ratings, gauge-fixed to exact zero means at generation time.
struct GroundTruth {
  std::map<std::string, double> planted_batting;
  std::map<std::string, double> planted_bowling;
  double planted_A = 0;
};

struct SynthResult {
  std::vector<Match> matches;
  std::vector<InteractionRecord> interactions;
  GroundTruth truth;
  /// Accuracy of the Bayes-optimal decision rule on the generated match set:
  /// mean over matches of max(p, 1-p) with p the planted team-2 win chance.
  double bayes_optimal_accuracy = 0;
};

namespace synth_detail {

inline std::string player_name(int i, int n_players) {
  int width = 1;
  for (int v = n_players; v >= 10; v /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p%0*d", std::min(width, 12), i + 1);
  return buf;
}

inline double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

/// Innings lines are drawn so that every Table-1 statistic trends with the
/// planted rating of its side: better batsmen score faster and get out less,
/// better bowlers concede less and strike more.
inline BattingLine make_batting_line(double a, int position, Rng& rng) {
  BattingLine line;
  line.balls_faced = 6 + static_cast<int>(rng.uniform_int(25));
  double rpb = clampd(1.25 + 0.05 * a + rng.normal(0.0, 0.15), 0.1, 3.0);
  line.runs = static_cast<int>(std::lround(line.balls_faced * rpb));
  double f4 = clampd(0.35 + 0.012 * a, 0.0, 0.8);
  double f6 = clampd(0.12 + 0.010 * a, 0.0, 0.19);
  line.fours = static_cast<int>(line.runs * f4 / 4.0);
  line.sixes = static_cast<int>(line.runs * f6 / 6.0);
  line.dismissed = rng.bernoulli(clampd(0.75 - 0.03 * a, 0.05, 0.98));
  line.batting_position = position;
  return line;
}

inline BowlingLine make_bowling_line(double b, Rng& rng) {
  BowlingLine line;
  line.balls_bowled = 6 * (2 + static_cast<int>(rng.uniform_int(3)));
  double rpb = clampd(1.30 - 0.05 * b + rng.normal(0.0, 0.15), 0.2, 3.0);
  line.runs_conceded = static_cast<int>(std::lround(line.balls_bowled * rpb));
  double p_wicket = clampd(0.030 + 0.003 * b, 0.001, 0.25);
  double p_wide = clampd(0.030 - 0.0015 * b, 0.001, 0.2);
  double p_noball = clampd(0.010 - 0.0005 * b, 0.0005, 0.1);
  for (int ball = 0; ball < line.balls_bowled; ++ball) {
    if (rng.bernoulli(p_wicket)) ++line.wickets;
    if (rng.bernoulli(p_wide)) ++line.wides;
    if (rng.bernoulli(p_noball)) ++line.no_balls;
  }
  double p_maiden = clampd(0.02 + 0.004 * b, 0.0, 0.5);
  for (int over = 0; over < line.balls_bowled / 6; ++over)
    if (rng.bernoulli(p_maiden)) ++line.maidens;
  return line;
}

}  // namespace synth_detail

inline SynthResult synth_generate(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);
  SynthResult result;

  // planted ratings, exact zero mean per side
  const int np = config.n_players;
  std::vector<std::string> ids(np);
  std::vector<double> a(np), b(np);
  for (int i = 0; i < np; ++i) {
    ids[i] = synth_detail::player_name(i, np);
    if (config.skill_tiers > 0) {
      int tier_a = static_cast<int>(rng.uniform_int(config.skill_tiers));
      int tier_b = static_cast<int>(rng.uniform_int(config.skill_tiers));
      double mid = (config.skill_tiers - 1) / 2.0;
      a[i] = (tier_a - mid) * config.rating_stddev;
      b[i] = (tier_b - mid) * config.rating_stddev;
    } else {
      a[i] = rng.normal(0.0, config.rating_stddev);
      b[i] = rng.normal(0.0, config.rating_stddev);
    }
  }
  auto center = [np](std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= np;
    for (double& x : v) x -= mean;
  };
  center(a);
  center(b);
  for (int i = 0; i < np; ++i) {
    result.truth.planted_batting[ids[i]] = a[i];
    result.truth.planted_bowling[ids[i]] = b[i];
  }
  result.truth.planted_A = config.intercept_A;

  // matches
  const Date start{2010, 1, 1};
  const double win_scale = config.rating_stddev * std::sqrt(22.0);
  std::vector<int> pool(np);
  for (int i = 0; i < np; ++i) pool[i] = i;
  double bayes_sum = 0;
  result.matches.reserve(config.n_matches);
  for (int m = 0; m < config.n_matches; ++m) {
    Match match;
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "m%06d", m + 1);
    match.match_id = idbuf;
    match.date = Date::from_serial(start.serial() +
                                   static_cast<long>(rng.uniform_int(config.date_span_days)));

    rng.shuffle(pool);
    std::vector<int> team1(pool.begin(), pool.begin() + kTeamSize);
    std::vector<int> team2(pool.begin() + kTeamSize, pool.begin() + 2 * kTeamSize);
    // batting order by planted skill, best first
    auto by_batting = [&](int x, int y) { return a[x] != a[y] ? a[x] > a[y] : x < y; };
    std::sort(team1.begin(), team1.end(), by_batting);
    std::sort(team2.begin(), team2.end(), by_batting);

    double strength1 = 0, strength2 = 0;
    for (int p : team1) strength1 += a[p];
    for (int p : team2) strength1 -= b[p];
    for (int p : team2) strength2 += a[p];
    for (int p : team1) strength2 -= b[p];
    double diff = strength2 - strength1;
    double p2 = win_scale > 0 ? 1.0 / (1.0 + std::exp(-diff / win_scale))
                              : (diff > 0 ? 1.0 : diff < 0 ? 0.0 : 0.5);
    match.label = rng.bernoulli(p2) ? 1 : 0;
    bayes_sum += std::max(p2, 1.0 - p2);

    for (int slot = 0; slot < kTeamSize; ++slot) {
      int p1 = team1[slot], p2i = team2[slot];
      match.team1_players.push_back(ids[p1]);
      match.team2_players.push_back(ids[p2i]);
      PlayerInningsLine l1{ids[p1], synth_detail::make_batting_line(a[p1], slot + 1, rng),
                           synth_detail::make_bowling_line(b[p1], rng)};
      PlayerInningsLine l2{ids[p2i], synth_detail::make_batting_line(a[p2i], slot + 1, rng),
                           synth_detail::make_bowling_line(b[p2i], rng)};
      match.innings1.push_back(std::move(l1));
      match.innings2.push_back(std::move(l2));
    }
    match.extras1 = static_cast<int>(rng.uniform_int(15));
    match.extras2 = static_cast<int>(rng.uniform_int(15));
    result.matches.push_back(std::move(match));
  }
  result.bayes_optimal_accuracy = bayes_sum / config.n_matches;

  // interactions: cycle through matches, pairing a batsman with an opposing
  // bowler; (runs, balls, outs) are chosen so the RAA score is exactly
  // A + a_i - b_j + eps
  const RaaBaseline baseline;
  long n_inter = config.n_interactions > 0 ? config.n_interactions : 40L * config.n_matches;
  result.interactions.reserve(n_inter);
  for (long r = 0; r < n_inter; ++r) {
    const Match& match = result.matches[r % result.matches.size()];
    bool team1_bats = rng.uniform_int(2) == 0;
    const auto& bat_team = team1_bats ? match.team1_players : match.team2_players;
    const auto& bowl_team = team1_bats ? match.team2_players : match.team1_players;
    InteractionRecord rec;
    rec.batsman_id = bat_team[rng.uniform_int(kTeamSize)];
    rec.bowler_id = bowl_team[rng.uniform_int(kTeamSize)];
    rec.match_id = match.match_id;
    rec.date = match.date;
    rec.balls = 6 + static_cast<int>(rng.uniform_int(19));
    rec.outs = rng.bernoulli(0.2) ? 1 : 0;
    double s = config.intercept_A + result.truth.planted_batting[rec.batsman_id] -
               result.truth.planted_bowling[rec.bowler_id] +
               (config.noise_stddev > 0 ? rng.normal(0.0, config.noise_stddev) : 0.0);
    auto runs_for = [&](int outs) {
      return s + baseline.runs_per_ball * rec.balls -
             (baseline.outs_per_ball * rec.balls - outs) * baseline.runs_per_dismissal;
    };
    double runs = runs_for(rec.outs);
    while (runs < 0 && rec.outs < rec.balls) {
      ++rec.outs;
      runs = runs_for(rec.outs);
    }
    rec.runs = std::max(runs, 0.0);
    result.interactions.push_back(std::move(rec));
  }
  return result;
}

// --- ground truth I/O ---------------------------------------------------------

inline void save_ground_truth(const std::string& csv_path, const GroundTruth& truth) {
  std::ofstream out(csv_path);
  if (!out) throw ParseError("cannot write ground truth file '" + csv_path + "'");
  out << "player_id,batting_rating,bowling_rating\n";
  for (const auto& [id, bat] : truth.planted_batting) {
    out << id << ',' << format_double(bat) << ','
        << format_double(truth.planted_bowling.at(id)) << "\n";
  }
}

inline void save_ground_truth_sidecar(const std::string& path, const GroundTruth& truth,
                                      double bayes_optimal_accuracy, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["planted_A"] = truth.planted_A;
  j["bayes_optimal_accuracy"] = bayes_optimal_accuracy;
  j["seed"] = seed;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write sidecar file '" + path + "'");
  out << j.dump() << "\n";
}

inline GroundTruth load_ground_truth(const std::string& csv_path, const std::string& sidecar_path) {
  GroundTruth truth;
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open ground truth file '" + csv_path + "'");
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || (row == 1 && line == "player_id,batting_rating,bowling_rating")) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError(csv_path + ":" + std::to_string(row) + ": expected 3 fields");
    truth.planted_batting[fields[0]] = parse_double(fields[1], "batting_rating");
    truth.planted_bowling[fields[0]] = parse_double(fields[2], "bowling_rating");
  }
  std::ifstream side(sidecar_path);
  if (!side) throw ParseError("cannot open sidecar file '" + sidecar_path + "'");
  nlohmann::ordered_json j;
  side >> j;
  truth.planted_A = j.at("planted_A").get<double>();
  return truth;
}

}  // namespace t20
