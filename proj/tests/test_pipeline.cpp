#include "oaf/pipeline.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oaf/errors.hpp"
#include "oaf/metrics.hpp"
#include "oaf/phantom.hpp"
#include "oaf/spd.hpp"
#include "test_util.hpp"

using oaf::LabeledVolume;
using oaf::Volume;

namespace {

LabeledVolume make_labels(int depth, int na, int nb, int c) {
  LabeledVolume l;
  l.depth = depth;
  l.na = na;
  l.nb = nb;
  l.layer_count = c;
  l.labels.assign(static_cast<std::size_t>(depth) * na * nb, 0);
  return l;
}

}  // namespace

TEST_CASE("phantom determinism and noise-independent labels") {
  oaf::PhantomConfig cfg;
  cfg.dims = {16, 10, 4};
  cfg.layer_count = 4;
  cfg.amplitude = 1.5;
  cfg.seed = 7;
  auto [va, la] = oaf::generate_phantom(cfg);
  auto [vb, lb] = oaf::generate_phantom(cfg);
  CHECK(va.voxels == vb.voxels);
  CHECK(la.labels == lb.labels);

  // Noise only perturbs intensities; the same seed keeps labels fixed.
  cfg.noise_sigma = 0.1;
  cfg.speckle_sigma = 0.05;
  auto [vc, lc] = oaf::generate_phantom(cfg);
  CHECK(lc.labels == la.labels);
  CHECK(vc.voxels != va.voxels);
}

TEST_CASE("flat noise-free phantom is exactly banded") {
  oaf::PhantomConfig cfg;
  cfg.dims = {12, 5, 3};
  cfg.layer_count = 3;
  cfg.amplitude = 0.0;
  cfg.modes = 0;
  auto [vol, lab] = oaf::generate_phantom(cfg);
  oaf::validate(vol);
  oaf::validate(lab);
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 5; ++a) {
      for (int k = 0; k < 12; ++k) {
        const int expected = k < 4 ? 0 : (k < 8 ? 1 : 2);
        CHECK(lab.labels[lab.index(k, a, b)] == expected);
        CHECK(vol.at(k, a, b) ==
              doctest::Approx(0.25 + 0.75 * expected / 2.0).epsilon(1e-7));
      }
    }
  }
  CHECK(oaf::count_order_violations(lab) == 0);
}

TEST_CASE("phantom columns are monotone with all layers present") {
  oaf::PhantomConfig cfg;
  cfg.dims = {32, 14, 6};
  cfg.layer_count = 4;
  cfg.amplitude = 2.0;
  cfg.modes = 3;
  cfg.seed = 99;
  auto [vol, lab] = oaf::generate_phantom(cfg);
  CHECK(oaf::count_order_violations(lab) == 0);
  for (int b = 0; b < 6; ++b) {
    for (int a = 0; a < 14; ++a) {
      std::array<bool, 4> seen{};
      for (int k = 0; k < 32; ++k) seen[lab.labels[lab.index(k, a, b)]] = true;
      for (bool s : seen) CHECK(s);
    }
  }
}

TEST_CASE("phantom config validation") {
  oaf::PhantomConfig cfg;
  cfg.dims = {12, 4, 2};
  cfg.layer_count = 6;
  cfg.amplitude = 1.0;  // adjacent boundaries sit 2 apart: can touch
  CHECK_THROWS_AS(oaf::generate_phantom(cfg), oaf::ConfigError);
  cfg.amplitude = 0.9;
  CHECK_NOTHROW(oaf::generate_phantom(cfg));

  cfg = {};
  cfg.dims = {4, 4, 1};
  cfg.layer_count = 6;  // deeper than the volume
  CHECK_THROWS_AS(oaf::generate_phantom(cfg), oaf::ConfigError);

  cfg = {};
  cfg.layer_means = {1.0, 2.0};  // wrong count for 6 layers
  CHECK_THROWS_AS(oaf::generate_phantom(cfg), oaf::ConfigError);

  cfg = {};
  cfg.noise_sigma = -0.1;
  CHECK_THROWS_AS(oaf::generate_phantom(cfg), oaf::ConfigError);
}

TEST_CASE("dice closed forms and symmetry") {
  auto truth = make_labels(9, 1, 1, 3);
  auto pred = make_labels(9, 1, 1, 3);
  for (int i = 0; i < 5; ++i) truth.labels[i] = 1;
  for (int i : {0, 1, 2, 6}) pred.labels[i] = 1;
  // TP = 3, FP = 1, FN = 2.
  CHECK(oaf::dice(pred, truth, 1) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(oaf::dice(pred, truth, 1) == oaf::dice(truth, pred, 1));
  // Label 2 is unused by both: empty-vs-empty convention.
  CHECK(oaf::dice(pred, truth, 2) == 1.0);

  CHECK(oaf::dice(truth, truth, 0) == 1.0);
  CHECK(oaf::dice(truth, truth, 1) == 1.0);

  auto a = make_labels(4, 1, 1, 2);
  auto b = make_labels(4, 1, 1, 2);
  a.labels = {1, 1, 0, 0};
  b.labels = {0, 0, 1, 1};
  CHECK(oaf::dice(a, b, 1) == 0.0);

  auto wrong = make_labels(4, 2, 1, 2);
  CHECK_THROWS_AS(oaf::dice(a, wrong, 0), oaf::ConfigError);
  CHECK_THROWS_AS(oaf::dice(a, b, 2), oaf::ConfigError);
}

TEST_CASE("dice is invariant under consistent permutations") {
  std::mt19937_64 rng(90);
  auto pred = make_labels(6, 4, 2, 4);
  auto truth = make_labels(6, 4, 2, 4);
  for (auto& l : pred.labels) l = static_cast<std::uint8_t>(oaf::uniform_int(rng, 4));
  for (auto& l : truth.labels) l = static_cast<std::uint8_t>(oaf::uniform_int(rng, 4));

  const std::array<int, 4> perm{2, 0, 3, 1};
  auto pred2 = pred;
  auto truth2 = truth;
  for (auto& l : pred2.labels) l = static_cast<std::uint8_t>(perm[l]);
  for (auto& l : truth2.labels) l = static_cast<std::uint8_t>(perm[l]);
  for (int l = 0; l < 4; ++l) {
    CHECK(oaf::dice(pred2, truth2, perm[l]) ==
          doctest::Approx(oaf::dice(pred, truth, l)).epsilon(1e-15));
  }
}

TEST_CASE("mae closed forms") {
  oaf::PhantomConfig cfg;
  cfg.dims = {12, 6, 2};
  cfg.layer_count = 3;
  cfg.amplitude = 1.0;
  cfg.seed = 3;
  auto [vol, truth] = oaf::generate_phantom(cfg);

  for (int m = 0; m < 2; ++m) {
    long long excluded = -1;
    CHECK(oaf::mae(truth, truth, m, &excluded) == 0.0);
    CHECK(excluded == 0);
  }

  // Shift every crossing two voxels deeper: label k' = label at k' - 2.
  auto shifted = truth;
  for (int b = 0; b < 2; ++b) {
    for (int a = 0; a < 6; ++a) {
      for (int k = 11; k >= 0; --k) {
        shifted.labels[shifted.index(k, a, b)] =
            truth.labels[truth.index(std::max(0, k - 2), a, b)];
      }
    }
  }
  CHECK(oaf::mae(shifted, truth, 0) == 2.0);
  CHECK(oaf::mae(shifted, truth, 1) == 2.0);
  CHECK(oaf::mae(shifted, truth, 0) == oaf::mae(truth, shifted, 0));
}

TEST_CASE("mae exclusion rules") {
  auto truth = make_labels(8, 3, 1, 2);
  auto pred = make_labels(8, 3, 1, 2);
  // Column 0: both cross at 4 / 5.
  for (int k = 4; k < 8; ++k) truth.labels[truth.index(k, 0, 0)] = 1;
  for (int k = 5; k < 8; ++k) pred.labels[pred.index(k, 0, 0)] = 1;
  // Column 1: pred never reaches label 1 -> excluded.
  for (int k = 4; k < 8; ++k) truth.labels[truth.index(k, 1, 0)] = 1;
  // Column 2: pred unordered -> excluded.
  for (int k = 4; k < 8; ++k) truth.labels[truth.index(k, 2, 0)] = 1;
  pred.labels[pred.index(2, 2, 0)] = 1;
  for (int k = 4; k < 8; ++k) pred.labels[pred.index(k, 2, 0)] = 1;
  pred.labels[pred.index(3, 2, 0)] = 0;  // 0,0,1,0,1,... not monotone

  long long excluded = 0;
  CHECK(oaf::mae(pred, truth, 0, &excluded) == 1.0);  // only column 0 counts
  CHECK(excluded == 2);

  // Symmetric in the arguments, including the exclusion tally.
  long long excluded_rev = 0;
  CHECK(oaf::mae(truth, pred, 0, &excluded_rev) == 1.0);
  CHECK(excluded_rev == 2);

  // Nothing usable anywhere -> NaN.
  auto empty_pred = make_labels(8, 3, 1, 2);
  CHECK(std::isnan(oaf::mae(empty_pred, truth, 0)));
}

TEST_CASE("mae matches a brute-force per-column loop") {
  std::mt19937_64 rng(91);
  const int depth = 10, na = 7, nb = 3, c = 4;
  auto rand_ordered = [&](bool allow_missing) {
    auto v = make_labels(depth, na, nb, c);
    for (int b = 0; b < nb; ++b) {
      for (int a = 0; a < na; ++a) {
        // Random nondecreasing crossing depths; values past depth-1 leave
        // the boundary absent.
        std::array<int, 3> pos;
        const int hi = allow_missing ? depth + 3 : depth - 1;
        for (auto& p : pos) p = oaf::uniform_int(rng, hi + 1);
        std::sort(pos.begin(), pos.end());
        for (int k = 0; k < depth; ++k) {
          int label = 0;
          for (int m = 0; m < 3; ++m)
            if (pos[m] <= k) label = m + 1;
          v.labels[v.index(k, a, b)] = static_cast<std::uint8_t>(label);
        }
      }
    }
    return v;
  };
  auto pred = rand_ordered(true);
  auto truth = rand_ordered(true);

  for (int m = 0; m < 3; ++m) {
    double total = 0.0;
    long long used = 0, skipped = 0;
    for (int b = 0; b < nb; ++b) {
      for (int a = 0; a < na; ++a) {
        int kp = -1, kt = -1;
        for (int k = 0; k < depth && kp < 0; ++k)
          if (pred.labels[pred.index(k, a, b)] >= m + 1) kp = k;
        for (int k = 0; k < depth && kt < 0; ++k)
          if (truth.labels[truth.index(k, a, b)] >= m + 1) kt = k;
        if (kp < 0 || kt < 0) {
          ++skipped;
          continue;
        }
        total += std::abs(kp - kt);
        ++used;
      }
    }
    long long excluded = 0;
    const double got = oaf::mae(pred, truth, m, &excluded);
    CHECK(excluded == skipped);
    if (used == 0) {
      CHECK(std::isnan(got));
    } else {
      CHECK(got == doctest::Approx(total / used).epsilon(1e-15));
    }
  }
}

TEST_CASE("order violation counting") {
  auto banded = make_labels(8, 4, 2, 3);
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 4; ++a)
      for (int k = 0; k < 8; ++k)
        banded.labels[banded.index(k, a, b)] =
            static_cast<std::uint8_t>(k / 3 > 1 ? 2 : k / 3);
  CHECK(oaf::count_order_violations(banded) == 0);

  auto one = banded;
  std::swap(one.labels[one.index(2, 1, 0)], one.labels[one.index(3, 1, 0)]);
  CHECK(oaf::count_order_violations(one) == 1);

  std::mt19937_64 rng(92);
  auto rand = make_labels(6, 5, 2, 4);
  for (auto& l : rand.labels) l = static_cast<std::uint8_t>(oaf::uniform_int(rng, 4));
  long long brute = 0;
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 5; ++a)
      for (int k = 0; k + 1 < 6; ++k)
        if (rand.labels[rand.index(k + 1, a, b)] <
            rand.labels[rand.index(k, a, b)])
          ++brute;
  CHECK(oaf::count_order_violations(rand) == brute);
}

TEST_CASE("evaluate_labels assembles the full report") {
  oaf::PhantomConfig cfg;
  cfg.dims = {12, 5, 2};
  cfg.layer_count = 3;
  cfg.amplitude = 1.0;
  cfg.seed = 11;
  auto [vol, truth] = oaf::generate_phantom(cfg);
  auto rep = oaf::evaluate_labels(truth, truth);
  REQUIRE(rep.per_layer_dice.size() == 3);
  REQUIRE(rep.per_boundary_mae.size() == 2);
  REQUIRE(rep.excluded_columns.size() == 2);
  for (double d : rep.per_layer_dice) CHECK(d == 1.0);
  for (double m : rep.per_boundary_mae) CHECK(m == 0.0);
  for (long long e : rep.excluded_columns) CHECK(e == 0);
  CHECK(rep.violations == 0);
}

TEST_CASE("mae shifts consistently under order-preserving relabeling") {
  oaf::PhantomConfig cfg;
  cfg.dims = {12, 4, 2};
  cfg.layer_count = 3;
  cfg.amplitude = 1.0;
  cfg.seed = 13;
  auto [vol, truth] = oaf::generate_phantom(cfg);
  auto pred = truth;
  // Nudge one column's first crossing.
  for (int k = 0; k < 12; ++k) {
    if (pred.labels[pred.index(k, 1, 0)] == 1) {
      pred.labels[pred.index(k, 1, 0)] = 0;
      break;
    }
  }

  // Embed labels order-preservingly: l -> l + 1 inside a larger range.
  auto lift = [](const LabeledVolume& v) {
    LabeledVolume out = v;
    out.layer_count = v.layer_count + 2;
    for (auto& l : out.labels) l = static_cast<std::uint8_t>(l + 1);
    return out;
  };
  auto pred2 = lift(pred);
  auto truth2 = lift(truth);
  for (int m = 0; m < 2; ++m) {
    CHECK(oaf::mae(pred2, truth2, m + 1) ==
          doctest::Approx(oaf::mae(pred, truth, m)).epsilon(1e-15));
  }
}

TEST_CASE("train and segment a small phantom end to end") {
  oaf::PhantomConfig pcfg;
  pcfg.dims = {16, 12, 4};
  pcfg.layer_count = 3;
  pcfg.amplitude = 1.2;
  pcfg.noise_sigma = 0.02;
  pcfg.speckle_sigma = 0.03;
  pcfg.seed = 21;
  auto [vol, truth] = oaf::generate_phantom(pcfg);

  oaf::TrainConfig tcfg;
  tcfg.prototypes_per_layer = 2;
  tcfg.max_samples_per_layer = 120;
  tcfg.features.scales = {1.0};
  tcfg.seed = 5;
  auto dict = oaf::train_dictionary(vol, truth, tcfg);
  REQUIRE(dict.layer_count == 3);
  REQUIRE(dict.dim == oaf::kFeatureCount);
  for (const auto& layer : dict.prototypes) {
    REQUIRE(!layer.empty());
    for (const auto& proto : layer) {
      auto [lam, V] = oaf::sym_eig(proto);
      CHECK(lam.minCoeff() > 0.0);
    }
  }

  oaf::FlowConfig fcfg;
  auto seg = oaf::segment_volume(vol, dict, tcfg.features, fcfg, true);
  CHECK(seg.labels.layer_count == 3);
  auto rep = oaf::evaluate_labels(seg.labels, truth);
  for (double d : rep.per_layer_dice) CHECK(d > 0.8);
  CHECK(rep.violations == 0);

  // Re-running is fully deterministic.
  auto seg2 = oaf::segment_volume(vol, dict, tcfg.features, fcfg, true);
  CHECK(seg2.labels.labels == seg.labels.labels);
}

TEST_CASE("alternative prototype means stay SPD") {
  oaf::PhantomConfig pcfg;
  pcfg.dims = {12, 6, 4};
  pcfg.layer_count = 2;
  pcfg.amplitude = 1.0;
  pcfg.speckle_sigma = 0.05;
  pcfg.seed = 31;
  auto [vol, truth] = oaf::generate_phantom(pcfg);

  for (auto kind : {oaf::MeanKind::riemannian, oaf::MeanKind::logeuclid}) {
    oaf::TrainConfig tcfg;
    tcfg.prototypes_per_layer = 2;
    tcfg.max_samples_per_layer = 60;
    tcfg.features.scales = {1.0};
    tcfg.mean_kind = kind;
    auto dict = oaf::train_dictionary(vol, truth, tcfg);
    for (const auto& layer : dict.prototypes) {
      for (const auto& proto : layer) {
        auto [lam, V] = oaf::sym_eig(proto);
        CHECK(lam.minCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("pipeline validation errors") {
  oaf::PhantomConfig pcfg;
  pcfg.dims = {8, 4, 1};
  pcfg.layer_count = 2;
  pcfg.amplitude = 0.5;
  auto [vol, truth] = oaf::generate_phantom(pcfg);

  // Labels that never use layer 1 cannot train it.
  auto hollow = truth;
  for (auto& l : hollow.labels) l = 0;
  CHECK_THROWS_AS(oaf::train_dictionary(vol, hollow, oaf::TrainConfig{}),
                  oaf::ConfigError);

  oaf::Mat D = oaf::Mat::Zero(10, 2);  // wrong voxel count for 8*4*1
  try {
    oaf::segment_distances({8, 4, 1}, D, oaf::FlowConfig{}, false);
    FAIL("expected ConfigError");
  } catch (const oaf::ConfigError& e) {
    CHECK(std::string(e.what()).find("10") != std::string::npos);
    CHECK(std::string(e.what()).find("32") != std::string::npos);
  }
}
