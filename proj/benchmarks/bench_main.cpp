// Microbenchmarks for the hot paths: special functions, blocked Gibbs
// sweeps at several train-dyad counts, the optimizer, and ranking.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <span>
#include <vector>

#include "comfp/comfp_model.hpp"
#include "comfp/latent_state.hpp"
#include "comfp/metrics.hpp"
#include "comfp/mmsb_model.hpp"
#include "comfp/network.hpp"
#include "comfp/numerics.hpp"
#include "comfp/optim.hpp"
#include "comfp/split.hpp"

namespace {

using namespace comfp;

constexpr std::size_t kUsers = 500;

// Deterministic m-dyad layer split over kUsers, half positive half negative.
LayerSplit scaled_split(std::size_t m) {
  std::vector<Dyad> pairs;
  pairs.reserve(kUsers * (kUsers - 1) / 2);
  for (UserIndex a = 0; a < kUsers; ++a) {
    for (UserIndex b = a + 1; b < kUsers; ++b) pairs.push_back(Dyad{a, b});
  }
  Rng rng(4321);
  rng.shuffle(pairs);
  LayerSplit ls;
  ls.train_pos.assign(pairs.begin(), pairs.begin() + m / 2);
  ls.train_neg.assign(pairs.begin() + m / 2, pairs.begin() + m);
  return ls;
}

void BM_LogGamma(benchmark::State& state) {
  double x = 0.123;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_gamma(x));
    x += 0.937;
    if (x > 60.0) x = 0.123;
  }
}
BENCHMARK(BM_LogGamma);

void BM_Digamma(benchmark::State& state) {
  double x = 0.123;
  for (auto _ : state) {
    benchmark::DoNotOptimize(digamma(x));
    x += 0.937;
    if (x > 60.0) x = 0.123;
  }
}
BENCHMARK(BM_Digamma);

void BM_Softplus(benchmark::State& state) {
  double x = -40.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(softplus(x));
    x += 0.173;
    if (x > 40.0) x = -40.0;
  }
}
BENCHMARK(BM_Softplus);

void BM_SweepBaseline(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  const LayerSplit split = scaled_split(m);
  Rng init_rng(9);
  LayerState layer = init_layer_state(split, kUsers, 4, init_rng);
  Rng rng(10);
  for (auto _ : state) {
    gibbs_sweep_mmsb(layer, 0.25, 1.0, 1.0, rng);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_SweepBaseline)->Arg(10000)->Arg(20000)->Arg(40000);

void BM_SweepFeatureModel(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  TrainTestSplit split;
  split.layers.push_back(scaled_split(m));

  ComfpConfig cfg;
  cfg.k = 4;
  cfg.t = 4;
  Rng init_rng(9);
  LatentState latent = init_state(split, kUsers, {4}, init_rng);
  HyperState hyper = init_hyper(kUsers, {4}, cfg, init_rng);
  Rng rng(10);
  for (auto _ : state) {
    gibbs_sweep_comfp(latent, hyper, rng);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_SweepFeatureModel)->Arg(10000)->Arg(20000)->Arg(40000);

void BM_JointLogDensity(benchmark::State& state) {
  TrainTestSplit split;
  split.layers.push_back(scaled_split(20000));
  ComfpConfig cfg;
  cfg.k = 4;
  cfg.t = 4;
  Rng init_rng(9);
  LatentState latent = init_state(split, kUsers, {4}, init_rng);
  HyperState hyper = init_hyper(kUsers, {4}, cfg, init_rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(joint_log_density(latent, hyper));
  }
}
BENCHMARK(BM_JointLogDensity);

void BM_LbfgsQuadratic(benchmark::State& state) {
  const std::size_t dim = 20;
  ObjectiveHandle obj;
  obj.dimension = dim;
  obj.value = [](std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      s -= 0.5 * static_cast<double>(i + 1) * (v[i] - 1.0) * (v[i] - 1.0);
    }
    return s;
  };
  obj.gradient = [](std::span<const double> v, std::span<double> g) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      g[i] = -static_cast<double>(i + 1) * (v[i] - 1.0);
    }
  };
  const std::vector<double> x0(dim, -2.0);
  LbfgsOptions opts;
  opts.max_iterations = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lbfgs_maximize(obj, x0, opts));
  }
}
BENCHMARK(BM_LbfgsQuadratic);

void BM_AveragePrecision(benchmark::State& state) {
  Rng rng(77);
  RankedCandidates rc;
  for (UserIndex j = 1; j <= 1000; ++j) {
    rc.scored.push_back({Dyad{0, j}, rng.uniform()});
    if (j % 20 == 0) rc.positives.push_back(Dyad{0, j});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(average_precision(rc));
  }
}
BENCHMARK(BM_AveragePrecision);

}  // namespace

BENCHMARK_MAIN();
