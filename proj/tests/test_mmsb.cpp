#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "comfp/errors.hpp"
#include "comfp/mmsb_model.hpp"
#include "support/oracles.hpp"

using namespace comfp;
using comfp_tests::build_layer;
using comfp_tests::oracle_conditional;

namespace {

std::vector<TrainDyad> triangle_dyads(const std::vector<std::int8_t>& signs) {
  const std::vector<Dyad> base{make_dyad(0, 1), make_dyad(0, 2),
                               make_dyad(1, 2)};
  std::vector<TrainDyad> out;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    out.push_back({base[i % base.size()], signs[i]});
  }
  return out;
}

// Normalized production conditional for dyad idx. The conditional expects
// the dyad's current assignment to be absent from the counts, as in a sweep.
std::vector<double> model_conditional(LayerState layer, std::size_t idx,
                                      double alpha0, double gamma0,
                                      double gamma1) {
  layer.remove_dyad(idx);
  std::vector<double> w(static_cast<std::size_t>(layer.K) * layer.K);
  const double total = mmsb_conditional(layer, idx, alpha0, gamma0, gamma1, w);
  REQUIRE(total > 0.0);
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

TEST_CASE("blocked conditional matches exhaustive enumeration") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 1 + static_cast<int>(rng.uniform_int(3));
    const std::size_t n = 3;
    const std::size_t m = 1 + rng.uniform_int(3);
    std::vector<std::int8_t> signs(m);
    for (auto& s : signs) s = rng.bernoulli(0.5) ? 1 : -1;
    const std::vector<TrainDyad> dyads = triangle_dyads(signs);

    std::vector<std::pair<int, int>> z(dyads.size());
    for (auto& p : z) {
      p = {static_cast<int>(rng.uniform_int(K)),
           static_cast<int>(rng.uniform_int(K))};
    }
    const LayerState layer = build_layer(n, K, dyads, z);

    const double alpha0 = rng.bernoulli(0.5) ? 1.0 / K : 0.4;
    const double gamma0 = rng.bernoulli(0.5) ? 1.0 : 0.7;
    const double gamma1 = rng.bernoulli(0.5) ? 1.0 : 1.3;
    const std::vector<double> alpha(n * static_cast<std::size_t>(K), alpha0);
    const std::vector<double> c1(static_cast<std::size_t>(K) * K, gamma1);
    const std::vector<double> c0(static_cast<std::size_t>(K) * K, gamma0);

    for (std::size_t idx = 0; idx < dyads.size(); ++idx) {
      const std::vector<double> got =
          model_conditional(layer, idx, alpha0, gamma0, gamma1);
      const std::vector<double> want =
          oracle_conditional(n, K, dyads, z, idx, alpha, c1, c0);
      REQUIRE(got.size() == want.size());
      for (std::size_t c = 0; c < got.size(); ++c) {
        CHECK(std::fabs(got[c] - want[c]) < 1e-12);
      }
    }
  }
}

TEST_CASE("the conditional is independent of the dyad's current pair") {
  const std::vector<TrainDyad> dyads = triangle_dyads({1, -1, 1});
  const int K = 3;
  std::vector<std::pair<int, int>> z{{0, 1}, {2, 2}, {1, 0}};
  const LayerState a = build_layer(3, K, dyads, z);
  z[1] = {0, 0};
  const LayerState b = build_layer(3, K, dyads, z);

  const std::vector<double> wa = model_conditional(a, 1, 0.3, 1.0, 1.0);
  const std::vector<double> wb = model_conditional(b, 1, 0.3, 1.0, 1.0);
  for (std::size_t c = 0; c < wa.size(); ++c) {
    CHECK(wa[c] == doctest::Approx(wb[c]).epsilon(1e-14));
  }
}

TEST_CASE("K=1 collapses to a single certain cell") {
  const std::vector<TrainDyad> dyads = triangle_dyads({1, -1});
  const LayerState layer = build_layer(3, 1, dyads, {{0, 0}, {0, 0}});
  const std::vector<double> w = model_conditional(layer, 0, 1.0, 1.0, 1.0);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == 1.0);
}

TEST_CASE("gibbs sweeps keep the count tables consistent") {
  Rng rng(55);
  std::vector<TrainDyad> dyads;
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      if (rng.bernoulli(0.7)) {
        dyads.push_back({make_dyad(i, j), rng.bernoulli(0.5) ? std::int8_t{1}
                                                             : std::int8_t{-1}});
      }
    }
  }
  std::vector<std::pair<int, int>> z(dyads.size(), {0, 0});
  LayerState layer = build_layer(6, 3, dyads, z);
  REQUIRE(counts_consistent(layer, 6));

  for (int sweep = 0; sweep < 20; ++sweep) {
    gibbs_sweep_mmsb(layer, 1.0 / 3.0, 1.0, 1.0, rng);
  }
  CHECK(counts_consistent(layer, 6));
  for (const auto& pair : layer.z) {
    CHECK(pair.first < 3);
    CHECK(pair.second < 3);
  }
  // Totals are invariants of the sweep: each dyad contributes one slot to
  // each endpoint.
  std::int64_t total = 0;
  for (std::int64_t v : layer.user_total) total += v;
  CHECK(total == static_cast<std::int64_t>(2 * dyads.size()));
}

TEST_CASE("point estimates follow the count/pseudo-count formulas") {
  const std::vector<TrainDyad> dyads{{make_dyad(0, 1), 1},
                                     {make_dyad(0, 2), -1}};
  const LayerState layer = build_layer(3, 2, dyads, {{0, 1}, {0, 0}});
  const double alpha0 = 0.5, gamma0 = 1.0, gamma1 = 2.0;
  const LayerEstimate est = estimate_point(layer, 3, alpha0, gamma0, gamma1);

  // user 0: counts (2, 0), total 2 -> pi = (2.5/3, 0.5/3)
  CHECK(est.pi[0] == doctest::Approx(2.5 / 3.0).epsilon(1e-15));
  CHECK(est.pi[1] == doctest::Approx(0.5 / 3.0).epsilon(1e-15));
  // user 1: counts (0, 1), total 1 -> pi = (0.25, 0.75)
  CHECK(est.pi[2] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(est.pi[3] == doctest::Approx(0.75).epsilon(1e-15));
  // cell (0,1): one positive -> (1+2)/(1+3); cell (0,0): one negative ->
  // (0+2)/(1+3); untouched cells -> prior mean 2/3.
  CHECK(est.b[0 * 2 + 1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(est.b[0 * 2 + 0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(est.b[1 * 2 + 0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(est.b[1 * 2 + 1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("fit is deterministic and honors a zero-iteration budget") {
  LayerSplit split;
  split.train_pos = {make_dyad(0, 1), make_dyad(1, 2), make_dyad(2, 3)};
  split.train_neg = {make_dyad(0, 2), make_dyad(0, 3)};

  MmsbConfig cfg;
  cfg.k = 3;
  cfg.iterations = 40;
  cfg.seed = 12;
  const LayerEstimate a = fit_mmsb(split, 4, cfg);
  const LayerEstimate b = fit_mmsb(split, 4, cfg);
  CHECK(a.pi == b.pi);
  CHECK(a.b == b.b);

  // Zero iterations reports the initialized state's estimate: deterministic,
  // with simplex membership rows.
  cfg.iterations = 0;
  const LayerEstimate init_a = fit_mmsb(split, 4, cfg);
  const LayerEstimate init_b = fit_mmsb(split, 4, cfg);
  CHECK(init_a.pi == init_b.pi);
  CHECK(init_a.b == init_b.b);
  for (std::size_t i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int k = 0; k < 3; ++k) row += init_a.pi[i * 3 + k];
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }

  // With no observations at all the estimate is the prior mean exactly.
  const LayerSplit empty;
  const LayerEstimate prior = fit_mmsb(empty, 4, cfg);
  for (double v : prior.pi) {
    CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  for (double v : prior.b) {
    CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("dyad scores use the canonical orientation symmetrically") {
  LayerEstimate est;
  est.K = 2;
  est.pi = {0.9, 0.1, 0.2, 0.8};
  est.b = {0.7, 0.3, 0.4, 0.6};
  // score(0,1) = pi_0^T B pi_1 with row user a < b.
  const double direct = 0.9 * (0.7 * 0.2 + 0.3 * 0.8) +
                        0.1 * (0.4 * 0.2 + 0.6 * 0.8);
  CHECK(score_dyad(est, 0, 1) == doctest::Approx(direct).epsilon(1e-15));
  CHECK(score_dyad(est, 1, 0) == score_dyad(est, 0, 1));
}

TEST_CASE("merged layers union dyads and keep earliest timestamps") {
  Roster roster;
  for (int i = 0; i < 4; ++i) roster.intern(std::to_string(i));
  LayerGraph l1;
  l1.name = "a";
  l1.dyads = {make_dyad(0, 1), make_dyad(1, 2)};
  l1.timestamps = {5, 9};
  l1.rebuild_index();
  LayerGraph l2;
  l2.name = "b";
  l2.dyads = {make_dyad(1, 2), make_dyad(2, 3)};
  l2.timestamps = {3, 8};
  l2.rebuild_index();
  const CompositeNetwork net = assemble_composite(roster, {l1, l2});

  const CompositeNetwork merged = merge_layers(net);
  REQUIRE(merged.layers.size() == 1);
  CHECK(merged.layers[0].name == "merged");
  REQUIRE(merged.layers[0].dyads.size() == 3);
  // (1,2) appears in both; the earlier stamp 3 wins.
  for (std::size_t i = 0; i < merged.layers[0].dyads.size(); ++i) {
    if (merged.layers[0].dyads[i] == make_dyad(1, 2)) {
      CHECK(merged.layers[0].timestamps[i] == 3);
    }
  }

  // One bare layer drops timestamps from the merge.
  LayerGraph l3;
  l3.name = "c";
  l3.dyads = {make_dyad(0, 3)};
  l3.rebuild_index();
  Roster r2;
  for (int i = 0; i < 4; ++i) r2.intern(std::to_string(i));
  const CompositeNetwork net2 = assemble_composite(r2, {l1, l3});
  const CompositeNetwork merged2 = merge_layers(net2);
  CHECK_FALSE(merged2.layers[0].has_timestamps());
}
