#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "t20/cluster.hpp"
#include "t20/synth.hpp"
#include "test_util.hpp"

using namespace t20;

namespace {

/// Brute-force best 2-clustering of 1-D points: try every nonempty bipartition
/// (points sorted, contiguous splits are optimal in 1-D, but enumerate all
/// subsets anyway for a true oracle).
double brute_force_inertia_k2(const std::vector<double>& pts,
                              std::pair<double, double>* centroids_out = nullptr) {
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double sum[2] = {0, 0};
    int count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      int side = (mask >> i) & 1;
      sum[side] += pts[i];
      ++count[side];
    }
    double mean0 = sum[0] / count[0], mean1 = sum[1] / count[1];
    double inertia = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = ((mask >> i) & 1) ? mean1 : mean0;
      inertia += (pts[i] - m) * (pts[i] - m);
    }
    if (inertia < best) {
      best = inertia;
      if (centroids_out) *centroids_out = {std::min(mean0, mean1), std::max(mean0, mean1)};
    }
  }
  return best;
}

std::vector<std::vector<double>> to_points(const std::vector<double>& xs) {
  std::vector<std::vector<double>> out;
  for (double x : xs) out.push_back({x});
  return out;
}

}  // namespace

TEST_CASE("kmeans_fit: {0,1,10,11} with k=2 matches the brute-force oracle") {
  std::vector<double> xs = {0, 1, 10, 11};
  std::pair<double, double> oracle_centroids;
  double oracle_inertia = brute_force_inertia_k2(xs, &oracle_centroids);
  CHECK(oracle_inertia == doctest::Approx(1.0));
  CHECK(oracle_centroids.first == doctest::Approx(0.5));
  CHECK(oracle_centroids.second == doctest::Approx(10.5));

  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto model = kmeans_fit(to_points(xs), 2, seed);
    CHECK(model.inertia == doctest::Approx(oracle_inertia));
    double lo = std::min(model.centroids[0][0], model.centroids[1][0]);
    double hi = std::max(model.centroids[0][0], model.centroids[1][0]);
    CHECK(lo == doctest::Approx(0.5));
    CHECK(hi == doctest::Approx(10.5));
  }
}

TEST_CASE("kmeans_fit: degenerate ks") {
  std::vector<double> xs = {2, 4, 9};
  SUBCASE("k=1 gives the mean") {
    auto model = kmeans_fit(to_points(xs), 1, 7);
    CHECK(model.centroids.size() == 1);
    CHECK(model.centroids[0][0] == doctest::Approx(5.0));
  }
  SUBCASE("k = distinct points gives zero inertia") {
    auto model = kmeans_fit(to_points(xs), 3, 7);
    CHECK(model.inertia == doctest::Approx(0.0));
  }
  SUBCASE("k above distinct points is an error") {
    CHECK_THROWS_AS(kmeans_fit(to_points({1, 1, 2, 2}), 3, 7), std::invalid_argument);
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(kmeans_fit({}, 1, 7), std::invalid_argument);
  }
  SUBCASE("duplicates are fine while k fits the distinct count") {
    auto model = kmeans_fit(to_points({1, 1, 2, 2}), 2, 7);
    CHECK(model.inertia == doctest::Approx(0.0));
  }
}

TEST_CASE("kmeans_fit: inertia non-increasing, deterministic, scale invariant") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> points;
    int n = 20 + static_cast<int>(rng.uniform_int(40));
    int dim = 1 + static_cast<int>(rng.uniform_int(4));
    for (int i = 0; i < n; ++i) {
      std::vector<double> p(dim);
      for (int d = 0; d < dim; ++d) p[d] = rng.normal(0, 1) + (i % 3) * 2.0;
      points.push_back(std::move(p));
    }
    int k = 2 + static_cast<int>(rng.uniform_int(4));
    std::uint64_t seed = rng.next_u64();
    auto model = kmeans_fit(points, k, seed);
    for (std::size_t it = 1; it < model.inertia_history.size(); ++it)
      CHECK(model.inertia_history[it] <= model.inertia_history[it - 1] + 1e-9);

    auto again = kmeans_fit(points, k, seed);
    CHECK(again.centroids == model.centroids);

    // uniform positive scaling preserves memberships for the same seed
    double c = 3.7;
    std::vector<std::vector<double>> scaled = points;
    for (auto& p : scaled)
      for (double& v : p) v *= c;
    auto scaled_model = kmeans_fit(scaled, k, seed);
    for (std::size_t i = 0; i < points.size(); ++i)
      CHECK(nearest_centroid(model, points[i]) == nearest_centroid(scaled_model, scaled[i]));
  }
}

TEST_CASE("cluster_rating_map: rank by centroid quality") {
  KMeansModel model;
  model.k = 2;
  model.centroids = {{0.8, 0.8}, {0.2, 0.2}};
  auto rating_of = cluster_rating_map(model);
  CHECK(rating_of[0] == 2);  // better centroid gets the top rating
  CHECK(rating_of[1] == 1);

  SUBCASE("quality ties break by centroid index") {
    KMeansModel tie;
    tie.k = 2;
    tie.centroids = {{0.4, 0.6}, {0.6, 0.4}};  // equal means
    auto r = cluster_rating_map(tie);
    CHECK(r[0] == 1);
    CHECK(r[1] == 2);
  }
  SUBCASE("relabeling clusters never changes a player's rating") {
    KMeansModel swapped;
    swapped.k = 2;
    swapped.centroids = {{0.2, 0.2}, {0.8, 0.8}};
    auto r1 = cluster_rating_map(model);
    auto r2 = cluster_rating_map(swapped);
    // the 0.8-centroid holds rating 2 under either labeling
    CHECK(r1[0] == r2[1]);
    CHECK(r1[1] == r2[0]);
  }
}

TEST_CASE("assign_side_ratings: players at centroids, k=1") {
  // hand-built normalization that is identity on [0,1] features
  std::vector<PlayerFeatureVector> fitvecs(2);
  for (auto& v : fitvecs) v.missing.fill(false);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    fitvecs[0].values[f] = 0.0;
    fitvecs[1].values[f] = 1.0;
  }
  NormalizationSpec norm = fit_normalization(fitvecs);

  PlayerFeatureVector strong, weak;
  strong.player_id = "strong";
  strong.missing.fill(false);
  weak.player_id = "weak";
  weak.missing.fill(false);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    strong.values[f] = is_cost_feature(f) ? 0.1 : 0.9;
    weak.values[f] = is_cost_feature(f) ? 0.9 : 0.1;
  }

  KMeansModel model;
  model.k = 2;
  model.centroids = {std::vector<double>(10, 0.1), std::vector<double>(10, 0.9)};
  auto ratings = assign_side_ratings(model, Side::batting, {strong, weak}, norm);
  CHECK(ratings[0] == 2);
  CHECK(ratings[1] == 1);

  SUBCASE("bowling side inverts cost features before matching") {
    KMeansModel bowl;
    bowl.k = 2;
    bowl.centroids = {std::vector<double>(6, 0.1), std::vector<double>(6, 0.9)};
    auto r = assign_side_ratings(bowl, Side::bowling, {strong, weak}, norm);
    CHECK(r[0] == 2);  // strong bowler: high wickets, low economy -> inverted high
    CHECK(r[1] == 1);
  }
  SUBCASE("k = 1 rates everyone 1") {
    KMeansModel one;
    one.k = 1;
    one.centroids = {std::vector<double>(10, 0.5)};
    auto r = assign_side_ratings(one, Side::batting, {strong, weak}, norm);
    CHECK(r[0] == 1);
    CHECK(r[1] == 1);
  }
  SUBCASE("width mismatch is an error") {
    KMeansModel narrow;
    narrow.k = 1;
    narrow.centroids = {std::vector<double>(3, 0.5)};
    CHECK_THROWS_AS(assign_side_ratings(narrow, Side::batting, {strong}, norm),
                    std::invalid_argument);
  }
}

TEST_CASE("cluster_instance") {
  Match match = t20test::tiny_match("m1", {2011, 5, 5});
  std::vector<ClusterRating> ratings = {{"a1", 5, 1}};
  auto inst = cluster_instance(ratings, match, 5);
  CHECK(inst.features.size() == 44);
  CHECK(inst.kind == InstanceKind::cluster_ratings);
  CHECK(inst.features[0] == doctest::Approx(1.0));  // a1 batting 5/5
  CHECK(inst.features[1] == doctest::Approx(0.2));  // a1 bowling 1/5

  SUBCASE("unknown players take the midpoint rating") {
    auto filled = cluster_instance({}, match, 5);
    for (double f : filled.features) CHECK(f == doctest::Approx(0.6));  // ceil(5/2)/5
  }
  SUBCASE("features stay in (0,1]") {
    std::vector<ClusterRating> all;
    for (int i = 0; i < 11; ++i) {
      all.push_back({"a" + std::to_string(i + 1), 1 + i % 5, 1 + (i * 2) % 5});
      all.push_back({"b" + std::to_string(i + 1), 1 + (i * 3) % 5, 1 + i % 5});
    }
    auto full = cluster_instance(all, match, 5);
    for (double f : full.features) {
      CHECK(f > 0.0);
      CHECK(f <= 1.0);
    }
  }
}

TEST_CASE("fit_cluster_ratings on a tiered corpus recovers tier structure") {
  SynthConfig cfg;
  cfg.n_players = 60;
  cfg.n_matches = 150;
  cfg.n_interactions = 100;
  cfg.skill_tiers = 3;
  cfg.rating_stddev = 6.0;
  cfg.seed = 41;
  auto synth = synth_generate(cfg);
  ClusterRatingSystem sys = fit_cluster_ratings(synth.matches, 3, 9);
  REQUIRE(sys.ratings.size() == 60);

  // mean cluster rating should increase with planted batting tier
  std::map<double, std::vector<int>> by_tier;
  for (const auto& r : sys.ratings)
    by_tier[synth.truth.planted_batting.at(r.player_id)].push_back(r.batting_rating);
  REQUIRE(by_tier.size() == 3);
  std::vector<double> tier_means;
  for (const auto& [tier, ratings] : by_tier) {
    double m = 0;
    for (int r : ratings) m += r;
    tier_means.push_back(m / ratings.size());
  }
  CHECK(tier_means[0] < tier_means[1]);
  CHECK(tier_means[1] < tier_means[2]);
}

TEST_CASE("sweep_cluster_size: shape and the k=1 no-information floor") {
  SynthConfig cfg;
  cfg.n_players = 40;
  cfg.n_matches = 120;
  cfg.n_interactions = 100;
  cfg.skill_tiers = 3;
  cfg.seed = 55;
  auto synth = synth_generate(cfg);

  LearnerSpec tree;
  tree.kind = LearnerKind::decision_tree;
  tree.seed = 11;
  auto sweep = sweep_cluster_size(synth.matches, {1, 3}, tree, 5, 77);
  CHECK(sweep.size() == 2);

  double majority = 0;
  for (const auto& m : synth.matches) majority += m.label;
  majority = std::max(majority, synth.matches.size() - majority) / synth.matches.size();
  // k = 1: every feature is the constant 1.0, no signal at all
  CHECK(std::abs(sweep.at(1) - majority) < 0.08);
  CHECK(sweep.at(3) + 1e-9 >= sweep.at(1) - 0.08);
}

TEST_CASE("cluster ratings CSV export") {
  std::ostringstream out;
  save_cluster_ratings_csv(out, {{"p2", 3, 1}, {"p1", 2, 5}}, 5);
  CHECK(out.str() == "player_id,batting_rating,bowling_rating,k\np1,2,5,5\np2,3,1,5\n");
}
