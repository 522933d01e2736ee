#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "t20/corpus.hpp"
#include "t20/rng.hpp"

namespace t20test {

/// Self-cleaning scratch directory for file-format tests.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    t20::Rng rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("t20_" + tag + "_" + std::to_string(rng.next_u64() % 1000000000));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

/// Minimal hand-built valid match: 11 distinct players a side, one batting
/// line and one bowling line each.
inline t20::Match tiny_match(const std::string& id, const t20::Date& date, int label = 0) {
  t20::Match m;
  m.match_id = id;
  m.date = date;
  m.label = label;
  for (int i = 0; i < 11; ++i) {
    m.team1_players.push_back("a" + std::to_string(i + 1));
    m.team2_players.push_back("b" + std::to_string(i + 1));
    t20::PlayerInningsLine l1{m.team1_players.back(),
                              t20::BattingLine{20 + i, 15, 2, 1, true, i + 1},
                              t20::BowlingLine{12, 0, 18, 1, 1, 0}};
    t20::PlayerInningsLine l2{m.team2_players.back(),
                              t20::BattingLine{18 + i, 16, 1, 1, i % 2 == 0, i + 1},
                              t20::BowlingLine{18, 1, 22, 0, 0, 1}};
    m.innings1.push_back(l1);
    m.innings2.push_back(l2);
  }
  m.extras1 = 5;
  m.extras2 = 7;
  return m;
}

}  // namespace t20test
