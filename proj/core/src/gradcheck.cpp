#include "comfp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "comfp/optim.hpp"

namespace comfp {

namespace {

constexpr double kFdStep = 1e-5;

double scaled_err(const std::vector<double>& analytic,
                  const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t j = 0; j < analytic.size(); ++j) {
    const double denom = std::max(1.0, std::fabs(numeric[j]));
    worst = std::max(worst, std::fabs(analytic[j] - numeric[j]) / denom);
  }
  return worst;
}

TrainTestSplit random_split(std::size_t n, std::size_t n_layers, Rng& rng) {
  TrainTestSplit split;
  split.layers.resize(n_layers);
  std::vector<Dyad> all;
  for (UserIndex i = 0; i < n; ++i) {
    for (UserIndex j = i + 1; j < n; ++j) all.push_back(Dyad{i, j});
  }
  for (LayerSplit& layer : split.layers) {
    std::vector<Dyad> pool = all;
    rng.shuffle(pool);
    const std::size_t c =
        std::min<std::size_t>(pool.size(), 4 + rng.uniform_int(9));
    const std::size_t pos = std::max<std::size_t>(1, (c * 3) / 5);
    for (std::size_t j = 0; j < c; ++j) {
      (j < pos ? layer.train_pos : layer.train_neg).push_back(pool[j]);
    }
  }
  return split;
}

}  // namespace

std::vector<GradCheckRow> gradient_certification(int instances,
                                                 std::uint64_t seed) {
  std::vector<GradCheckRow> rows;
  for (int inst = 0; inst < instances; ++inst) {
    Rng rng(derive_seed(seed, "gradcheck:" + std::to_string(inst)));
    const std::size_t n = 3 + rng.uniform_int(8);
    const std::size_t n_layers = 1 + rng.uniform_int(2);
    ComfpConfig cfg;
    cfg.t = 1 + static_cast<int>(rng.uniform_int(4));
    cfg.seed = seed;
    std::vector<int> layer_k;
    for (std::size_t d = 0; d < n_layers; ++d) {
      layer_k.push_back(1 + static_cast<int>(rng.uniform_int(4)));
    }

    TrainTestSplit split = random_split(n, n_layers, rng);
    LatentState state = init_state(split, n, layer_k, rng);
    HyperState hyper = init_hyper(n, layer_k, cfg, rng);

    GradCheckRow row;
    row.instance = inst;
    row.n = n;
    row.layers = static_cast<int>(n_layers);
    row.k = *std::max_element(layer_k.begin(), layer_k.end());
    row.t = cfg.t;

    for (std::size_t d = 0; d < n_layers; ++d) {
      const std::vector<double> analytic = grad_lambda(state, hyper, d);
      const std::vector<double> point = hyper.lambda[d];
      auto f = [&state, &hyper, d](std::span<const double> v) {
        hyper.lambda[d].assign(v.begin(), v.end());
        hyper.refresh_layer(d);
        return joint_log_density(state, hyper);
      };
      const std::vector<double> numeric =
          finite_diff_gradient(f, point, kFdStep);
      hyper.lambda[d] = point;
      hyper.refresh_layer(d);
      row.lambda_err = std::max(row.lambda_err, scaled_err(analytic, numeric));
    }

    for (int rep = 0; rep < 2; ++rep) {
      const std::size_t i = rng.uniform_int(n);
      const std::vector<double> analytic = grad_x(state, hyper, i);
      const std::vector<double> point(&hyper.x[i * hyper.T],
                                      &hyper.x[i * hyper.T] + hyper.T);
      auto f = [&state, &hyper, i](std::span<const double> v) {
        std::copy(v.begin(), v.end(), &hyper.x[i * hyper.T]);
        hyper.refresh_user(i);
        return joint_log_density(state, hyper);
      };
      const std::vector<double> numeric =
          finite_diff_gradient(f, point, kFdStep);
      std::copy(point.begin(), point.end(), &hyper.x[i * hyper.T]);
      hyper.refresh_user(i);
      row.x_err = std::max(row.x_err, scaled_err(analytic, numeric));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace comfp
