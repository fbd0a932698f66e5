#include "oaf/clustering.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "oaf/errors.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Two tight clusters around scaled identities: generator matrix times a
// small multiplicative perturbation exp(t * sym) keeps samples SPD.
std::vector<MatrixXd> two_cluster_samples(std::mt19937_64& rng, int per_cluster,
                                          double jitter, double scale_b = 9.0) {
  std::vector<MatrixXd> samples;
  for (double scale : {1.0, scale_b}) {
    MatrixXd gen = scale * MatrixXd::Identity(2, 2);
    for (int i = 0; i < per_cluster; ++i) {
      MatrixXd t = jitter * random_symmetric(rng, 2);
      samples.push_back(oaf::exp_map_spd(gen, t));
    }
  }
  return samples;
}

}  // namespace

TEST_CASE("kmeans with K equal to the sample count returns the samples") {
  std::mt19937_64 rng(41);
  std::vector<MatrixXd> samples;
  for (int i = 0; i < 5; ++i) samples.push_back(random_spd(rng, 3, 1.0));
  auto centers = oaf::kmeans_stein(samples, 5, 7);
  REQUIRE(centers.size() == 5);
  // Every sample matches some center (up to ordering).
  for (const auto& s : samples) {
    double best = 1e300;
    for (const auto& c : centers) best = std::min(best, oaf::stein_divergence(s, c));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("kmeans recovers two tight clusters") {
  std::mt19937_64 rng(42);
  auto samples = two_cluster_samples(rng, 20, 0.05);
  auto centers = oaf::kmeans_stein(samples, 2, 3);
  REQUIRE(centers.size() == 2);

  MatrixXd a = MatrixXd::Identity(2, 2);
  MatrixXd b = 9.0 * MatrixXd::Identity(2, 2);
  double da = std::min(oaf::stein_divergence(centers[0], a),
                       oaf::stein_divergence(centers[1], a));
  double db = std::min(oaf::stein_divergence(centers[0], b),
                       oaf::stein_divergence(centers[1], b));
  CHECK(da < 0.05);
  CHECK(db < 0.05);
}

TEST_CASE("kmeans objective is non-increasing across Lloyd iterations") {
  std::mt19937_64 rng(43);
  for (int run = 0; run < 50; ++run) {
    std::vector<MatrixXd> samples;
    const int n = 12;
    for (int i = 0; i < n; ++i) samples.push_back(random_spd(rng, 3, 1.2));
    std::vector<double> trace;
    auto centers = oaf::kmeans_stein(samples, 3, run, {}, &trace);
    REQUIRE(!trace.empty());
    for (std::size_t t = 1; t < trace.size(); ++t) {
      CHECK(trace[t] <= trace[t - 1] + 1e-12);
    }
    CHECK(trace.back() >= 0.0);

    // Deterministic given the seed.
    auto again = oaf::kmeans_stein(samples, 3, run);
    REQUIRE(again.size() == centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
      CHECK((centers[j] - again[j]).norm() == 0.0);
    }
  }
}

TEST_CASE("kmeans argument validation") {
  std::mt19937_64 rng(44);
  std::vector<MatrixXd> samples = {random_spd(rng, 2)};
  CHECK_THROWS_AS(oaf::kmeans_stein({}, 1, 0), oaf::ConfigError);
  CHECK_THROWS_AS(oaf::kmeans_stein(samples, 2, 0), oaf::ConfigError);
  CHECK_THROWS_AS(oaf::kmeans_stein(samples, 0, 0), oaf::ConfigError);
}

TEST_CASE("em with a single component reduces to the Stein mean") {
  std::mt19937_64 rng(45);
  std::vector<MatrixXd> samples;
  for (int i = 0; i < 6; ++i) samples.push_back(random_spd(rng, 3, 1.0));
  auto state = oaf::em_soft_clustering(samples, 1, 9);
  REQUIRE(state.means.size() == 1);
  CHECK(state.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((state.responsibilities.col(0).array() == 1.0).all());

  MatrixXd direct = oaf::stein_mean(oaf::equal_weights(samples));
  CHECK((state.means[0] - direct).norm() / direct.norm() < 1e-8);
}

TEST_CASE("em separates well-separated clusters with confident responsibilities") {
  // Responsibilities go like exp(-D_S), so "well separated" means the
  // between-cluster divergence must be several units for confidence >= 0.99;
  // identity vs 1e4*identity gives D_S around 7.8 in d=2.
  std::mt19937_64 rng(46);
  auto samples = two_cluster_samples(rng, 15, 0.03, 1e4);
  auto state = oaf::em_soft_clustering(samples, 2, 5);

  // Identify which component owns the small-scale cluster.
  MatrixXd a = MatrixXd::Identity(2, 2);
  int comp_a = oaf::stein_divergence(state.means[0], a) <
                       oaf::stein_divergence(state.means[1], a)
                   ? 0
                   : 1;
  for (int i = 0; i < 15; ++i) CHECK(state.responsibilities(i, comp_a) >= 0.99);
  for (int i = 15; i < 30; ++i) CHECK(state.responsibilities(i, 1 - comp_a) >= 0.99);

  // Responsibilities and mixture weights stay on the simplex.
  for (int i = 0; i < 30; ++i) {
    CHECK(state.responsibilities.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((state.responsibilities.row(i).array() >= 0.0).all());
  }
  CHECK(state.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));

  // Hard and soft clustering agree on memberships at this separation.
  auto centers = oaf::kmeans_stein(samples, 2, 5);
  int hard_a = oaf::stein_divergence(centers[0], a) <
                       oaf::stein_divergence(centers[1], a)
                   ? 0
                   : 1;
  for (int i = 0; i < 30; ++i) {
    const bool soft_first = state.responsibilities(i, comp_a) > 0.5;
    const bool hard_first = oaf::stein_divergence(samples[i], centers[hard_a]) <
                            oaf::stein_divergence(samples[i], centers[1 - hard_a]);
    CHECK(soft_first == hard_first);
  }
}

TEST_CASE("nearest_prototype_distance matches a brute-force oracle") {
  std::mt19937_64 rng(47);
  oaf::PrototypeDictionary dict;
  dict.layer_count = 3;
  dict.dim = 3;
  dict.prototypes.resize(3);
  for (int l = 0; l < 3; ++l) {
    for (int k = 0; k < 4; ++k) dict.prototypes[l].push_back(random_spd(rng, 3));
  }

  for (int t = 0; t < 20; ++t) {
    MatrixXd query = random_spd(rng, 3);
    VectorXd d = oaf::nearest_prototype_distance(query, dict);
    for (int l = 0; l < 3; ++l) {
      double brute = 1e300;
      for (const auto& p : dict.prototypes[l]) {
        brute = std::min(brute, oaf::stein_divergence(query, p));
      }
      CHECK(d[l] == doctest::Approx(brute).epsilon(1e-15));
      CHECK(d[l] >= 0.0);
    }
  }

  // A query equal to a layer prototype scores 0 on that layer.
  VectorXd hit = oaf::nearest_prototype_distance(dict.prototypes[1][2], dict);
  CHECK(hit[1] == 0.0);

  // Permuting a layer's prototype list changes nothing.
  oaf::PrototypeDictionary shuffled = dict;
  std::reverse(shuffled.prototypes[0].begin(), shuffled.prototypes[0].end());
  MatrixXd q = random_spd(rng, 3);
  CHECK((oaf::nearest_prototype_distance(q, dict) -
         oaf::nearest_prototype_distance(q, shuffled))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // Singleton dictionaries reduce to the direct divergence vector.
  oaf::PrototypeDictionary singles;
  singles.layer_count = 2;
  singles.dim = 3;
  singles.prototypes = {{dict.prototypes[0][0]}, {dict.prototypes[1][0]}};
  VectorXd ds = oaf::nearest_prototype_distance(q, singles);
  CHECK(ds[0] == doctest::Approx(oaf::stein_divergence(q, singles.prototypes[0][0])));
  CHECK(ds[1] == doctest::Approx(oaf::stein_divergence(q, singles.prototypes[1][0])));

  oaf::PrototypeDictionary broken = dict;
  broken.prototypes[2].clear();
  CHECK_THROWS_AS(oaf::nearest_prototype_distance(q, broken), oaf::ConfigError);
}
