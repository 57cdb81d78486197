#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "comfp/comfp_model.hpp"
#include "comfp/errors.hpp"
#include "comfp/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace comfp;
using comfp_tests::build_layer;
using comfp_tests::oracle_conditional;
using comfp_tests::quadrature_log_joint;

namespace {

struct ToyInstance {
  LatentState state;
  HyperState hyper;
};

// Random dyad sets with signs over n users, indicators uniform, features
// Gaussian through init_hyper.
ToyInstance random_instance(Rng& rng, std::size_t n, int layers, int K,
                            int T) {
  ToyInstance inst;
  inst.state.n = n;
  std::vector<int> layer_k(layers, K);
  for (int d = 0; d < layers; ++d) {
    std::vector<TrainDyad> dyads;
    for (UserIndex i = 0; i < n; ++i) {
      for (UserIndex j = i + 1; j < n; ++j) {
        if (!rng.bernoulli(0.6)) continue;
        dyads.push_back({make_dyad(i, j),
                         rng.bernoulli(0.5) ? std::int8_t{1} : std::int8_t{-1}});
      }
    }
    if (dyads.empty()) dyads.push_back({make_dyad(0, 1), 1});
    std::vector<std::pair<int, int>> z(dyads.size());
    for (auto& p : z) {
      p = {static_cast<int>(rng.uniform_int(K)),
           static_cast<int>(rng.uniform_int(K))};
    }
    inst.state.layers.push_back(build_layer(n, K, dyads, z));
  }
  ComfpConfig cfg;
  cfg.k = K;
  cfg.t = T;
  inst.hyper = init_hyper(n, layer_k, cfg, rng);
  return inst;
}

// The conditional expects the dyad's current assignment to be absent from
// the counts, as during a sweep.
std::vector<double> normalized_conditional(LayerState layer,
                                           const HyperState& hyper,
                                           std::size_t d, std::size_t idx) {
  layer.remove_dyad(idx);
  std::vector<double> w(static_cast<std::size_t>(layer.K) * layer.K);
  const double total = comfp_conditional(layer, hyper, d, idx, w);
  REQUIRE(total > 0.0);
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

TEST_CASE("hybrid prior reproduces fixed softplus values") {
  // Zero features: every community gets softplus(0) = ln 2.
  const std::vector<double> x0(4, 0.0);
  const std::vector<double> lam(2 * 4, 0.7);
  const std::vector<double> a0 = hybrid_prior(x0, lam, 2, 4);
  for (double v : a0) {
    CHECK(v == doctest::Approx(0.69314718055994530942).epsilon(1e-15));
  }

  // Aligned unit block: <x, lambda_k> = 4 -> softplus(4).
  const std::vector<double> x1(4, 1.0);
  const std::vector<double> lam1(1 * 4, 1.0);
  const std::vector<double> a1 = hybrid_prior(x1, lam1, 1, 4);
  CHECK(a1[0] == doctest::Approx(4.0181499279178097404).epsilon(1e-15));
}

TEST_CASE("compatibility prior is symmetric with softplus diagonal") {
  Rng rng(3);
  const int K = 3, T = 4;
  std::vector<double> lam(K * T);
  for (double& v : lam) v = rng.gaussian();
  const std::vector<double> rho = compat_prior(lam, K, T);
  for (int k = 0; k < K; ++k) {
    double norm2 = 0.0;
    for (int t = 0; t < T; ++t) norm2 += lam[k * T + t] * lam[k * T + t];
    CHECK(rho[k * K + k] == doctest::Approx(softplus(norm2)).epsilon(1e-14));
    for (int kp = 0; kp < K; ++kp) {
      CHECK(rho[k * K + kp] == rho[kp * K + k]);
      CHECK(rho[k * K + kp] > 0.0);
    }
  }
}

TEST_CASE("feature-coupled conditional matches exhaustive enumeration") {
  Rng rng(211);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3;
    const int K = 1 + static_cast<int>(rng.uniform_int(3));
    const int T = 1 + static_cast<int>(rng.uniform_int(3));
    ToyInstance inst = random_instance(rng, n, 1, K, T);
    const LayerState& layer = inst.state.layers[0];

    std::vector<double> c1(static_cast<std::size_t>(K) * K);
    for (std::size_t c = 0; c < c1.size(); ++c) {
      c1[c] = inst.hyper.rho[0][c] + 1.0;
    }
    std::vector<std::pair<int, int>> z;
    for (const auto& p : layer.z) z.push_back({p.first, p.second});

    for (std::size_t idx = 0; idx < layer.dyads.size(); ++idx) {
      const std::vector<double> got =
          normalized_conditional(layer, inst.hyper, 0, idx);
      const std::vector<double> want = oracle_conditional(
          n, K, layer.dyads, z, idx, inst.hyper.alpha[0], c1, c1);
      for (std::size_t c = 0; c < got.size(); ++c) {
        CHECK(std::fabs(got[c] - want[c]) < 1e-12);
      }
    }
  }
}

TEST_CASE("constant features reduce the conditional to the baseline") {
  // x = 0 and lambda = 0 give alpha = ln 2 and rho + 1 = ln 2 + 1, so the
  // feature-coupled conditional must equal the baseline with those
  // pseudo-counts on every state.
  const double ln2 = 0.69314718055994530942;
  Rng rng(401);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(4);
    const int K = 1 + static_cast<int>(rng.uniform_int(3));
    ToyInstance inst = random_instance(rng, n, 1, K, 3);
    std::fill(inst.hyper.x.begin(), inst.hyper.x.end(), 0.0);
    for (auto& lam : inst.hyper.lambda) {
      std::fill(lam.begin(), lam.end(), 0.0);
    }
    inst.hyper.refresh_all();

    const LayerState& layer = inst.state.layers[0];
    for (std::size_t idx = 0; idx < layer.dyads.size(); ++idx) {
      LayerState ctx = layer;
      ctx.remove_dyad(idx);
      std::vector<double> wc(static_cast<std::size_t>(K) * K);
      std::vector<double> wm(wc.size());
      const double tc = comfp_conditional(ctx, inst.hyper, 0, idx, wc);
      const double tm =
          mmsb_conditional(ctx, idx, ln2, ln2 + 1.0, ln2 + 1.0, wm);
      for (std::size_t c = 0; c < wc.size(); ++c) {
        CHECK(std::fabs(wc[c] / tc - wm[c] / tm) < 1e-12);
      }
    }
  }
}

TEST_CASE("joint log density of an empty state is the Gaussian prior mass") {
  Rng rng(17);
  const std::size_t n = 4;
  const int K = 2, T = 3;
  ToyInstance inst = random_instance(rng, n, 2, K, T);
  // Erase all dyads: no count terms survive.
  for (auto& layer : inst.state.layers) {
    layer = build_layer(n, K, {}, {});
  }
  const double got = joint_log_density(inst.state, inst.hyper);

  double want = 0.0;
  auto prior = [](const std::vector<double>& v, double sigma) {
    double s = 0.0;
    for (double u : v) {
      s += -0.5 * u * u / (sigma * sigma) -
           0.5 * std::log(2.0 * 3.141592653589793238462643 * sigma * sigma);
    }
    return s;
  };
  want += prior(inst.hyper.x, inst.hyper.sigma_u);
  for (std::size_t d = 0; d < inst.hyper.lambda.size(); ++d) {
    want += prior(inst.hyper.lambda[d], inst.hyper.sigma_d[d]);
  }
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("joint log density matches the quadrature oracle at K=2") {
  Rng rng(19);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 3 + rng.uniform_int(2);
    const int layers = 1 + static_cast<int>(rng.uniform_int(2));
    ToyInstance inst = random_instance(rng, n, layers, 2, 3);
    const double got = joint_log_density(inst.state, inst.hyper);
    const double want = quadrature_log_joint(inst.state, inst.hyper);
    CHECK(std::fabs(got - want) < 1e-4 * std::max(1.0, std::fabs(want)));
  }
}

TEST_CASE("joint log density is invariant under community relabeling") {
  Rng rng(23);
  const std::size_t n = 5;
  const int K = 3, T = 3;
  ToyInstance inst = random_instance(rng, n, 1, K, T);
  const double before = joint_log_density(inst.state, inst.hyper);

  // Relabel communities of layer 0 by the cycle k -> (k+1) mod K.
  std::vector<int> perm(K);
  for (int k = 0; k < K; ++k) perm[k] = (k + 1) % K;

  ToyInstance relabeled = inst;
  std::vector<double>& lam = relabeled.hyper.lambda[0];
  const std::vector<double> old_lam = inst.hyper.lambda[0];
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < T; ++t) {
      lam[perm[k] * T + t] = old_lam[k * T + t];
    }
  }
  relabeled.hyper.refresh_all();

  const LayerState& src = inst.state.layers[0];
  std::vector<std::pair<int, int>> z;
  for (const auto& p : src.z) {
    z.push_back({perm[p.first], perm[p.second]});
  }
  relabeled.state.layers[0] = build_layer(n, K, src.dyads, z);

  const double after = joint_log_density(relabeled.state, relabeled.hyper);
  CHECK(std::fabs(after - before) < 1e-9 * std::max(1.0, std::fabs(before)));
}

TEST_CASE("analytic gradients pass finite-difference certification") {
  const std::vector<GradCheckRow> rows = gradient_certification(5, 91);
  REQUIRE(rows.size() == 5);
  for (const GradCheckRow& r : rows) {
    CAPTURE(r.instance);
    CHECK(r.lambda_err < 1e-5);
    CHECK(r.x_err < 1e-5);
  }
}

TEST_CASE("with no counts the gradients are pure Gaussian shrinkage") {
  Rng rng(29);
  const std::size_t n = 3;
  const int K = 2, T = 3;
  ToyInstance inst = random_instance(rng, n, 1, K, T);
  inst.state.layers[0] = build_layer(n, K, {}, {});

  const std::vector<double> gl = grad_lambda(inst.state, inst.hyper, 0);
  const double sd = inst.hyper.sigma_d[0];
  for (std::size_t j = 0; j < gl.size(); ++j) {
    CHECK(gl[j] == doctest::Approx(-inst.hyper.lambda[0][j] / (sd * sd))
                       .epsilon(1e-12));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> gx = grad_x(inst.state, inst.hyper, i);
    const double su = inst.hyper.sigma_u;
    for (int t = 0; t < T; ++t) {
      CHECK(gx[t] == doctest::Approx(-inst.hyper.x[i * T + t] / (su * su))
                         .epsilon(1e-12));
    }
  }
}

TEST_CASE("lambda updates never lower the joint and refresh the caches") {
  Rng rng(37);
  int moved_count = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.uniform_int(4);
    const int K = 1 + static_cast<int>(rng.uniform_int(4));
    const int T = 1 + static_cast<int>(rng.uniform_int(4));
    ToyInstance inst = random_instance(rng, n, 1, K, T);

    const double before = joint_log_density(inst.state, inst.hyper);
    bool warn = false;
    const bool moved = update_lambda(inst.state, inst.hyper, 0, 10, 7, &warn);
    const double after = joint_log_density(inst.state, inst.hyper);

    CAPTURE(trial);
    CHECK_FALSE(warn);
    CHECK(after >= before - 1e-9 * std::max(1.0, std::fabs(before)));
    moved_count += moved;

    // Caches must match a from-scratch recomputation.
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> row = hybrid_prior(
          std::span<const double>(&inst.hyper.x[i * T], T),
          inst.hyper.lambda[0], K, T);
      for (int k = 0; k < K; ++k) {
        CHECK(inst.hyper.alpha[0][i * K + k] ==
              doctest::Approx(row[k]).epsilon(1e-14));
      }
    }
  }
  CHECK(moved_count > 40);  // random starts are essentially never stationary
}

TEST_CASE("langevin steps accept surely on a flat target") {
  MalaTarget flat;
  flat.log_density = [](std::span<const double>) { return 0.0; };
  flat.gradient = [](std::span<const double> v) {
    return std::vector<double>(v.size(), 0.0);
  };
  Rng rng(43);
  std::vector<double> x(3, 0.0);
  for (int s = 0; s < 200; ++s) {
    CHECK(mala_step(x, flat, 0.3, rng));
  }
}

TEST_CASE("rejected langevin steps consume the same random draws") {
  const std::vector<double> start{0.5, -0.25};

  MalaTarget accepting;
  accepting.log_density = [](std::span<const double>) { return 0.0; };
  accepting.gradient = [](std::span<const double> v) {
    return std::vector<double>(v.size(), 0.0);
  };
  // Rejects every proposal: the density collapses away from the start.
  MalaTarget rejecting;
  rejecting.log_density = [start](std::span<const double> v) {
    return (v[0] == start[0] && v[1] == start[1])
               ? 0.0
               : -std::numeric_limits<double>::infinity();
  };
  rejecting.gradient = accepting.gradient;

  Rng r1(720), r2(720);
  std::vector<double> x1 = start, x2 = start;
  CHECK(mala_step(x1, accepting, 0.2, r1));
  CHECK_FALSE(mala_step(x2, rejecting, 0.2, r2));
  CHECK(x2 == start);
  // Both paths must leave the stream at the same point.
  CHECK(r1.uniform() == r2.uniform());
}

TEST_CASE("non-finite proposals or gradients reject cleanly") {
  MalaTarget nan_grad;
  nan_grad.log_density = [](std::span<const double>) { return 0.0; };
  int calls = 0;
  nan_grad.gradient = [&calls](std::span<const double> v) {
    ++calls;
    if (calls > 1) {
      return std::vector<double>(v.size(),
                                 std::numeric_limits<double>::quiet_NaN());
    }
    return std::vector<double>(v.size(), 0.0);
  };
  Rng rng(11);
  std::vector<double> x{1.0};
  CHECK_FALSE(mala_step(x, nan_grad, 0.1, rng));
  CHECK(x[0] == 1.0);
}

TEST_CASE("user feature updates keep every layer cache coherent") {
  Rng rng(53);
  ToyInstance inst = random_instance(rng, 5, 2, 3, 3);
  inst.hyper.sigma_mh = 0.2;
  int accepted = 0;
  for (int round = 0; round < 10; ++round) {
    for (std::size_t i = 0; i < 5; ++i) {
      accepted += update_x_mh(inst.state, inst.hyper, i, rng) ? 1 : 0;
    }
  }
  CHECK(accepted > 0);
  const int T = inst.hyper.T;
  for (std::size_t d = 0; d < 2; ++d) {
    const int K = inst.hyper.layer_k[d];
    for (std::size_t i = 0; i < 5; ++i) {
      const std::vector<double> row = hybrid_prior(
          std::span<const double>(&inst.hyper.x[i * T], T),
          inst.hyper.lambda[d], K, T);
      for (int k = 0; k < K; ++k) {
        CHECK(inst.hyper.alpha[d][i * K + k] ==
              doctest::Approx(row[k]).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("point estimates blend counts with the feature prior") {
  Rng rng(59);
  ToyInstance inst = random_instance(rng, 4, 1, 2, 3);
  const LayerState& layer = inst.state.layers[0];
  const LayerEstimate est = estimate_point_comfp(layer, inst.hyper, 0);

  for (std::size_t i = 0; i < 4; ++i) {
    double row_sum = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double want =
          (static_cast<double>(layer.nc(static_cast<UserIndex>(i), k)) +
           inst.hyper.alpha[0][i * 2 + k]) /
          (static_cast<double>(layer.user_total[i]) +
           inst.hyper.alpha_sum[0][i]);
      CHECK(est.pi[i * 2 + k] == doctest::Approx(want).epsilon(1e-14));
      row_sum += est.pi[i * 2 + k];
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int k = 0; k < 2; ++k) {
    for (int kp = 0; kp < 2; ++kp) {
      const double r1 = inst.hyper.rho[0][k * 2 + kp] + 1.0;
      const double want =
          (static_cast<double>(layer.np(k, kp, 0)) + r1) /
          (static_cast<double>(layer.np(k, kp, 0) + layer.np(k, kp, 1)) +
           2.0 * r1);
      CHECK(est.b[k * 2 + kp] == doctest::Approx(want).epsilon(1e-14));
    }
  }
}

TEST_CASE("full fits are deterministic and respect the iteration budget") {
  LayerSplit l0;
  l0.train_pos = {make_dyad(0, 1), make_dyad(1, 2), make_dyad(3, 4)};
  l0.train_neg = {make_dyad(0, 3), make_dyad(2, 4)};
  LayerSplit l1;
  l1.train_pos = {make_dyad(0, 2), make_dyad(2, 3)};
  l1.train_neg = {make_dyad(1, 4)};
  TrainTestSplit split;
  split.layers = {l0, l1};

  ComfpConfig cfg;
  cfg.k = 2;
  cfg.t = 3;
  cfg.iterations = 24;
  cfg.hyper_period = 6;
  cfg.sigma_mh = 0.1;
  cfg.seed = 77;

  const ComfpFit a = fit_comfp(split, 5, cfg);
  const ComfpFit b = fit_comfp(split, 5, cfg);
  CHECK(a.joint_trace == b.joint_trace);
  CHECK(a.accept_trace == b.accept_trace);
  REQUIRE(a.estimates.size() == 2);
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(a.estimates[d].pi == b.estimates[d].pi);
    CHECK(a.estimates[d].b == b.estimates[d].b);
  }

  CHECK(a.iterations_run <= cfg.iterations);
  CHECK(a.joint_trace.size() == static_cast<std::size_t>(a.iterations_run));
  CHECK(a.accept_trace.size() == a.joint_trace.size());
  CHECK(a.iter_seconds.size() == a.joint_trace.size());
  if (a.converged_early) CHECK(a.iterations_run < cfg.iterations);
  for (double r : a.accept_trace) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  for (double j : a.joint_trace) CHECK(std::isfinite(j));
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(counts_consistent(a.state.layers[d], 5));
  }
}

TEST_CASE("a zero-iteration fit returns prior-state estimates") {
  LayerSplit l0;
  l0.train_pos = {make_dyad(0, 1)};
  l0.train_neg = {make_dyad(0, 2)};
  TrainTestSplit split;
  split.layers = {l0};

  ComfpConfig cfg;
  cfg.k = 2;
  cfg.t = 2;
  cfg.iterations = 0;
  cfg.seed = 5;
  const ComfpFit fit = fit_comfp(split, 3, cfg);
  CHECK(fit.iterations_run == 0);
  CHECK(fit.joint_trace.empty());
  CHECK(fit.accept_trace.empty());
  REQUIRE(fit.estimates.size() == 1);
  CHECK(fit.estimates[0].pi.size() == 3 * 2);
  for (double v : fit.estimates[0].pi) CHECK(std::isfinite(v));
  CHECK_FALSE(fit.converged_early);
}

TEST_CASE("per-layer community widths can differ") {
  LayerSplit l0, l1;
  l0.train_pos = {make_dyad(0, 1)};
  l0.train_neg = {make_dyad(1, 2)};
  l1.train_pos = {make_dyad(0, 2)};
  l1.train_neg = {make_dyad(0, 1)};
  TrainTestSplit split;
  split.layers = {l0, l1};

  ComfpConfig cfg;
  cfg.layer_k = {2, 4};
  cfg.t = 2;
  cfg.iterations = 8;
  cfg.hyper_period = 4;
  cfg.seed = 3;
  const ComfpFit fit = fit_comfp(split, 3, cfg);
  CHECK(fit.estimates[0].K == 2);
  CHECK(fit.estimates[1].K == 4);
  CHECK(fit.state.layers[0].K == 2);
  CHECK(fit.state.layers[1].K == 4);
}
