#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "t20/dates.hpp"
#include "t20/util.hpp"

namespace t20 {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kTeamSize = 11;

struct BattingLine {
  int runs = 0;
  int balls_faced = 0;
  int fours = 0;
  int sixes = 0;
  bool dismissed = false;
  int batting_position = 1;  // 1..11
};

struct BowlingLine {
  int balls_bowled = 0;
  int maidens = 0;
  int runs_conceded = 0;
  int wickets = 0;
  int wides = 0;
  int no_balls = 0;
};

/// One player's performance in one match. At least one of batting/bowling
/// must be present.
struct PlayerInningsLine {
  std::string player_id;
  std::optional<BattingLine> batting;
  std::optional<BowlingLine> bowling;
};

struct Match {
  std::string match_id;
  Date date;
  std::vector<std::string> team1_players;  // exactly 11, ordered (batting order)
  std::vector<std::string> team2_players;
  std::vector<PlayerInningsLine> innings1;  // team 1 players' lines
  std::vector<PlayerInningsLine> innings2;
  int extras1 = 0;
  int extras2 = 0;
  int label = 0;  // 0 = team 1 won, 1 = team 2 won

  bool operator==(const Match&) const = default;
};

inline bool operator==(const BattingLine& a, const BattingLine& b) {
  return a.runs == b.runs && a.balls_faced == b.balls_faced && a.fours == b.fours &&
         a.sixes == b.sixes && a.dismissed == b.dismissed &&
         a.batting_position == b.batting_position;
}
inline bool operator==(const BowlingLine& a, const BowlingLine& b) {
  return a.balls_bowled == b.balls_bowled && a.maidens == b.maidens &&
         a.runs_conceded == b.runs_conceded && a.wickets == b.wickets && a.wides == b.wides &&
         a.no_balls == b.no_balls;
}
inline bool operator==(const PlayerInningsLine& a, const PlayerInningsLine& b) {
  return a.player_id == b.player_id && a.batting == b.batting && a.bowling == b.bowling;
}

/// All balls a given bowler bowled to a given batsman in one match, collapsed
/// to (runs, balls, outs). Runs is real-valued: generated corpora place exact
/// model scores here, ingested scorecard data is integral anyway.
struct InteractionRecord {
  std::string batsman_id;
  std::string bowler_id;
  double runs = 0;
  int balls = 1;
  int outs = 0;
  std::string match_id;
  Date date;

  bool operator==(const InteractionRecord&) const = default;
};

// --- validation ------------------------------------------------------------

inline void validate_line(const PlayerInningsLine& line) {
  if (!line.batting && !line.bowling)
    throw ValidationError("player '" + line.player_id + "': line with neither batting nor bowling");
  if (line.batting) {
    const BattingLine& b = *line.batting;
    if (b.runs < 0 || b.balls_faced < 0 || b.fours < 0 || b.sixes < 0)
      throw ValidationError("player '" + line.player_id + "': negative batting count");
    if (b.fours * 4 + b.sixes * 6 > b.runs)
      throw ValidationError("player '" + line.player_id + "': fours*4 + sixes*6 > runs");
    if (b.batting_position < 1 || b.batting_position > kTeamSize)
      throw ValidationError("player '" + line.player_id + "': batting position out of [1,11]");
  }
  if (line.bowling) {
    const BowlingLine& b = *line.bowling;
    if (b.balls_bowled < 0 || b.maidens < 0 || b.runs_conceded < 0 || b.wickets < 0 ||
        b.wides < 0 || b.no_balls < 0)
      throw ValidationError("player '" + line.player_id + "': negative bowling count");
    if (b.maidens * 6 > b.balls_bowled)
      throw ValidationError("player '" + line.player_id + "': maidens*6 > balls bowled");
  }
}

inline void validate(const Match& m) {
  auto check_team = [&](const std::vector<std::string>& team, const char* name) {
    if (team.size() != kTeamSize)
      throw ValidationError("match '" + m.match_id + "': " + name + " team size != 11");
    std::set<std::string> distinct(team.begin(), team.end());
    if (distinct.size() != team.size())
      throw ValidationError("match '" + m.match_id + "': duplicate player in " + name);
  };
  check_team(m.team1_players, "team1");
  check_team(m.team2_players, "team2");
  for (const auto& p : m.team1_players)
    if (std::find(m.team2_players.begin(), m.team2_players.end(), p) != m.team2_players.end())
      throw ValidationError("match '" + m.match_id + "': player '" + p + "' in both teams");
  if (m.label != 0 && m.label != 1)
    throw ValidationError("match '" + m.match_id + "': label must be 0 or 1");
  if (m.extras1 < 0 || m.extras2 < 0)
    throw ValidationError("match '" + m.match_id + "': negative extras");
  if (!m.date.valid()) throw ValidationError("match '" + m.match_id + "': invalid date");
  auto check_lines = [&](const std::vector<PlayerInningsLine>& lines,
                         const std::vector<std::string>& team, const char* name) {
    for (const auto& line : lines) {
      validate_line(line);
      if (std::find(team.begin(), team.end(), line.player_id) == team.end())
        throw ValidationError("match '" + m.match_id + "': " + name + " line references '" +
                              line.player_id + "' outside the team list");
    }
  };
  check_lines(m.innings1, m.team1_players, "innings1");
  check_lines(m.innings2, m.team2_players, "innings2");
}

inline void validate(const InteractionRecord& r) {
  if (r.balls < 1)
    throw ValidationError("interaction " + r.batsman_id + "/" + r.bowler_id + ": balls must be >= 1");
  if (r.runs < 0)
    throw ValidationError("interaction " + r.batsman_id + "/" + r.bowler_id + ": runs must be >= 0");
  if (r.outs < 0 || r.outs > r.balls)
    throw ValidationError("interaction " + r.batsman_id + "/" + r.bowler_id + ": outs must be in [0, balls]");
}

// --- JSONL match format ------------------------------------------------------

inline ordered_json to_json(const PlayerInningsLine& line) {
  ordered_json j;
  j["player_id"] = line.player_id;
  if (line.batting) {
    const BattingLine& b = *line.batting;
    j["batting"] = {{"runs", b.runs},
                    {"balls_faced", b.balls_faced},
                    {"fours", b.fours},
                    {"sixes", b.sixes},
                    {"dismissed", b.dismissed},
                    {"batting_position", b.batting_position}};
  }
  if (line.bowling) {
    const BowlingLine& b = *line.bowling;
    j["bowling"] = {{"balls_bowled", b.balls_bowled},
                    {"maidens", b.maidens},
                    {"runs_conceded", b.runs_conceded},
                    {"wickets", b.wickets},
                    {"wides", b.wides},
                    {"no_balls", b.no_balls}};
  }
  return j;
}

inline ordered_json to_json(const Match& m) {
  ordered_json j;
  j["match_id"] = m.match_id;
  j["date"] = m.date.to_string();
  j["team1_players"] = m.team1_players;
  j["team2_players"] = m.team2_players;
  j["innings1"] = ordered_json::array();
  for (const auto& line : m.innings1) j["innings1"].push_back(to_json(line));
  j["innings2"] = ordered_json::array();
  for (const auto& line : m.innings2) j["innings2"].push_back(to_json(line));
  j["extras1"] = m.extras1;
  j["extras2"] = m.extras2;
  j["label"] = m.label;
  return j;
}

inline PlayerInningsLine line_from_json(const ordered_json& j) {
  PlayerInningsLine line;
  line.player_id = j.at("player_id").get<std::string>();
  if (j.contains("batting")) {
    const auto& b = j.at("batting");
    line.batting = BattingLine{b.at("runs").get<int>(),   b.at("balls_faced").get<int>(),
                               b.at("fours").get<int>(),  b.at("sixes").get<int>(),
                               b.at("dismissed").get<bool>(),
                               b.at("batting_position").get<int>()};
  }
  if (j.contains("bowling")) {
    const auto& b = j.at("bowling");
    line.bowling = BowlingLine{b.at("balls_bowled").get<int>(), b.at("maidens").get<int>(),
                               b.at("runs_conceded").get<int>(), b.at("wickets").get<int>(),
                               b.at("wides").get<int>(),         b.at("no_balls").get<int>()};
  }
  return line;
}

inline Match match_from_json(const ordered_json& j) {
  Match m;
  m.match_id = j.at("match_id").get<std::string>();
  m.date = parse_date(j.at("date").get<std::string>());
  m.team1_players = j.at("team1_players").get<std::vector<std::string>>();
  m.team2_players = j.at("team2_players").get<std::vector<std::string>>();
  for (const auto& line : j.at("innings1")) m.innings1.push_back(line_from_json(line));
  for (const auto& line : j.at("innings2")) m.innings2.push_back(line_from_json(line));
  m.extras1 = j.at("extras1").get<int>();
  m.extras2 = j.at("extras2").get<int>();
  m.label = j.at("label").get<int>();
  return m;
}

enum class LoadMode { strict, lenient };

template <typename T>
struct LoadResult {
  std::vector<T> records;
  std::size_t skipped = 0;
  std::vector<std::string> errors;  // one message per skipped record (lenient)
};

inline LoadResult<Match> load_matches(const std::string& path, LoadMode mode = LoadMode::strict) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matches file '" + path + "'");
  LoadResult<Match> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ordered_json j = ordered_json::parse(line);
      Match m = match_from_json(j);
      validate(m);
      result.records.push_back(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      std::string msg = path + ":" + std::to_string(line_no) + ": " + e.what();
      if (mode == LoadMode::strict) throw ParseError(msg);
      ++result.skipped;
      result.errors.push_back(msg);
    } catch (const std::exception& e) {
      std::string msg = path + ":" + std::to_string(line_no) + ": " + e.what();
      if (mode == LoadMode::strict) throw ValidationError(msg);
      ++result.skipped;
      result.errors.push_back(msg);
    }
  }
  return result;
}

inline void save_matches(std::ostream& out, const std::vector<Match>& matches) {
  for (const auto& m : matches) out << to_json(m).dump() << "\n";
}

inline void save_matches(const std::string& path, const std::vector<Match>& matches) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write matches file '" + path + "'");
  save_matches(out, matches);
}

// --- CSV interaction format --------------------------------------------------

inline constexpr const char* kInteractionsHeader = "batsman_id,bowler_id,runs,balls,outs,match_id,date";

inline LoadResult<InteractionRecord> load_interactions(const std::string& path,
                                                       LoadMode mode = LoadMode::strict) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open interactions file '" + path + "'");
  LoadResult<InteractionRecord> result;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1) {
      if (line != kInteractionsHeader)
        throw ParseError(path + ":1: expected header '" + std::string(kInteractionsHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    try {
      auto fields = split_csv_line(line);
      if (fields.size() != 7)
        throw ParseError("expected 7 fields, got " + std::to_string(fields.size()));
      std::string ctx = "row " + std::to_string(row);
      InteractionRecord r;
      r.batsman_id = fields[0];
      r.bowler_id = fields[1];
      r.runs = parse_double(fields[2], ctx + " runs");
      r.balls = static_cast<int>(parse_long(fields[3], ctx + " balls"));
      r.outs = static_cast<int>(parse_long(fields[4], ctx + " outs"));
      r.match_id = fields[5];
      r.date = parse_date(fields[6]);
      validate(r);
      result.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      std::string msg = path + ":" + std::to_string(row) + ": " + e.what();
      if (mode == LoadMode::strict) throw ValidationError(msg);
      ++result.skipped;
      result.errors.push_back(msg);
    }
  }
  return result;
}

inline void save_interactions(std::ostream& out, const std::vector<InteractionRecord>& records) {
  out << kInteractionsHeader << "\n";
  for (const auto& r : records) {
    out << r.batsman_id << ',' << r.bowler_id << ',' << format_double(r.runs) << ',' << r.balls
        << ',' << r.outs << ',' << r.match_id << ',' << r.date.to_string() << "\n";
  }
}

inline void save_interactions(const std::string& path, const std::vector<InteractionRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write interactions file '" + path + "'");
  save_interactions(out, records);
}

}  // namespace t20
