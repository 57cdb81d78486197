#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "comfp/errors.hpp"
#include "comfp/metrics.hpp"
#include "comfp/numerics.hpp"

using namespace comfp;

namespace {

RankedCandidates two_candidates(double pos_score, double neg_score) {
  RankedCandidates rc;
  rc.scored = {{make_dyad(0, 1), pos_score}, {make_dyad(0, 2), neg_score}};
  rc.positives = {make_dyad(0, 1)};
  return rc;
}

}  // namespace

TEST_CASE("average precision hand cases are exact") {
  // Lone positive ranked first.
  CHECK(average_precision(two_candidates(2.0, 1.0)) == 1.0);
  // Lone positive ranked second of two.
  CHECK(average_precision(two_candidates(1.0, 2.0)) == 0.5);

  // Positives at ranks 1 and 3 of 4: (1/1 + 2/3) / 2 = 5/6.
  RankedCandidates rc;
  rc.scored = {{make_dyad(0, 1), 9.0},
               {make_dyad(0, 2), 7.0},
               {make_dyad(0, 3), 8.0},
               {make_dyad(0, 4), 6.0}};
  rc.positives = {make_dyad(0, 1), make_dyad(0, 2)};
  CHECK(average_precision(rc) == (1.0 + 2.0 / 3.0) / 2.0);
}

TEST_CASE("score ties break by ascending dyad order") {
  RankedCandidates rc;
  rc.scored = {{make_dyad(0, 2), 1.0}, {make_dyad(0, 1), 1.0}};
  rc.positives = {make_dyad(0, 2)};
  // (0,1) sorts before (0,2) on the tie, so the positive lands at rank 2.
  CHECK(average_precision(rc) == 0.5);

  rc.positives = {make_dyad(0, 1)};
  CHECK(average_precision(rc) == 1.0);
}

TEST_CASE("average precision is invariant under monotone score maps") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    RankedCandidates rc, mapped;
    for (UserIndex j = 1; j <= 12; ++j) {
      const double s = rng.uniform();
      rc.scored.push_back({make_dyad(0, j), s});
      mapped.scored.push_back({make_dyad(0, j), std::exp(3.0 * s) - 5.0});
      if (j % 3 == 0) {
        rc.positives.push_back(make_dyad(0, j));
        mapped.positives.push_back(make_dyad(0, j));
      }
    }
    CHECK(average_precision(rc) == average_precision(mapped));
  }
}

TEST_CASE("average precision rejects degenerate inputs") {
  RankedCandidates none;
  none.scored = {{make_dyad(0, 1), 1.0}};
  CHECK_THROWS_AS(average_precision(none), InvariantViolation);

  RankedCandidates missing;
  missing.scored = {{make_dyad(0, 1), 1.0}};
  missing.positives = {make_dyad(0, 2)};
  CHECK_THROWS_AS(average_precision(missing), InvariantViolation);

  RankedCandidates nan = two_candidates(1.0, 2.0);
  nan.scored[1].second = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(average_precision(nan), InvariantViolation);
}

TEST_CASE("random scores on one positive vs one negative average 0.75") {
  Rng rng(77);
  double total = 0.0;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) {
    total += average_precision(two_candidates(rng.uniform(), rng.uniform()));
  }
  CHECK(std::fabs(total / trials - 0.75) < 0.01);
}

TEST_CASE("evaluate_layer ranks per endpoint and splits the long tail") {
  LayerSplit split;
  split.heldout_pos = {make_dyad(0, 1)};
  split.train_pos = {make_dyad(0, 2)};  // degrees: user0=1, user1=0, user2=1
  split.eval_neg[0] = {make_dyad(0, 3)};
  split.eval_neg[1] = {make_dyad(1, 3)};

  // Scorer that loves the held-out dyad.
  const LayerScorer good = [](UserIndex a, UserIndex b) {
    return (make_dyad(a, b) == make_dyad(0, 1)) ? 10.0 : 1.0;
  };
  const LayerMetrics m = evaluate_layer(good, split, 4, 1);
  CHECK(m.n_users == 2);  // both endpoints of the held-out dyad
  CHECK(m.map == 1.0);
  // degree cap 1: only user 1 (degree 0) is long-tail.
  CHECK(m.n_long_tail == 1);
  CHECK(m.long_tail_map == 1.0);
  REQUIRE(m.per_user_ap.size() == 2);
  CHECK(m.per_user_ap[0].first == 0);
  CHECK(m.per_user_ap[1].first == 1);

  // Scorer that buries the held-out dyad: both users rank it second.
  const LayerScorer bad = [](UserIndex a, UserIndex b) {
    return (make_dyad(a, b) == make_dyad(0, 1)) ? 1.0 : 10.0;
  };
  const LayerMetrics mb = evaluate_layer(bad, split, 4, 10);
  CHECK(mb.map == 0.5);
  CHECK(mb.n_long_tail == 2);  // cap 10 covers everyone evaluated
}

TEST_CASE("a perfectly separating scorer reaches MAP 1.0") {
  LayerSplit split;
  for (int u = 0; u < 6; u += 2) {
    split.heldout_pos.push_back(make_dyad(u, u + 1));
    split.eval_neg[u] = {make_dyad(u, 7), make_dyad(u, 8)};
    split.eval_neg[u + 1] = {make_dyad(u + 1, 7), make_dyad(u + 1, 8)};
  }
  const LayerScorer sep = [](UserIndex a, UserIndex b) {
    return (b - a == 1 && a % 2 == 0) ? 5.0 : -5.0;
  };
  const LayerMetrics m = evaluate_layer(sep, split, 9, 10);
  CHECK(m.n_users == 6);
  CHECK(m.map == 1.0);
}

TEST_CASE("partition agreement handles relabeling and degenerate splits") {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  const std::vector<int> same{5, 5, 9, 9, 7, 7};  // same partition, new names
  CHECK(partition_agreement(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(partition_agreement(a, same) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<int> constant{3, 3, 3, 3, 3, 3};
  CHECK(partition_agreement(a, constant) == 0.0);
  CHECK(partition_agreement(constant, a) == 0.0);
  CHECK(partition_agreement(constant, constant) == 1.0);

  // Crossed two-way splits share no information.
  const std::vector<int> left{0, 1, 0, 1};
  const std::vector<int> right{0, 0, 1, 1};
  CHECK(partition_agreement(left, right) ==
        doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<int> shorter{0, 1};
  CHECK_THROWS_AS(partition_agreement(a, shorter), InvariantViolation);
  CHECK(partition_agreement({}, {}) == 1.0);
}

TEST_CASE("partition agreement is symmetric and lives in [0, 1]") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> a(60), b(60);
    for (int i = 0; i < 60; ++i) {
      a[i] = static_cast<int>(rng.uniform_int(4));
      b[i] = static_cast<int>(rng.uniform_int(3));
    }
    const double ab = partition_agreement(a, b);
    CHECK(ab == doctest::Approx(partition_agreement(b, a)).epsilon(1e-12));
    CHECK(ab >= -1e-12);
    CHECK(ab <= 1.0 + 1e-12);
  }
}
