#include "comfp/mmsb_model.hpp"

#include <algorithm>
#include <map>

#include "comfp/errors.hpp"

namespace comfp {

double mmsb_conditional(const LayerState& layer, std::size_t idx,
                        double alpha0, double gamma0, double gamma1,
                        std::span<double> w) {
  const int K = layer.K;
  const TrainDyad& td = layer.dyads[idx];
  const double gy = td.y > 0 ? gamma1 : gamma0;
  const int yi = sign_index(td.y);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const double ai = static_cast<double>(layer.nc(td.d.a, k)) + alpha0;
    for (int kp = 0; kp < K; ++kp) {
      const double aj = static_cast<double>(layer.nc(td.d.b, kp)) + alpha0;
      const std::int64_t n_pos = layer.np(k, kp, 0);
      const std::int64_t n_neg = layer.np(k, kp, 1);
      const double cell =
          (static_cast<double>(yi == 0 ? n_pos : n_neg) + gy) /
          (static_cast<double>(n_pos + n_neg) + gamma0 + gamma1);
      const double weight = ai * aj * cell;
      w[k * K + kp] = weight;
      total += weight;
    }
  }
  return total;
}

void gibbs_sweep_mmsb(LayerState& layer, double alpha0, double gamma0,
                      double gamma1, Rng& rng) {
  const int K = layer.K;
  std::vector<double> w(static_cast<std::size_t>(K) * K);
  for (std::size_t idx = 0; idx < layer.dyads.size(); ++idx) {
    layer.remove_dyad(idx);
    mmsb_conditional(layer, idx, alpha0, gamma0, gamma1, w);
    const std::size_t cell = rng.categorical(w);
    layer.insert_dyad(idx, static_cast<int>(cell) / K,
                      static_cast<int>(cell) % K);
  }
}

LayerEstimate estimate_point(const LayerState& layer, std::size_t n,
                             double alpha0, double gamma0, double gamma1) {
  const int K = layer.K;
  LayerEstimate est;
  est.K = K;
  est.pi.resize(n * static_cast<std::size_t>(K));
  est.b.resize(static_cast<std::size_t>(K) * K);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom =
        static_cast<double>(layer.user_total[i]) + K * alpha0;
    for (int k = 0; k < K; ++k) {
      est.pi[i * K + k] =
          (static_cast<double>(layer.nc(static_cast<UserIndex>(i), k)) +
           alpha0) /
          denom;
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      const std::int64_t n_pos = layer.np(k, kp, 0);
      const std::int64_t n_neg = layer.np(k, kp, 1);
      est.b[k * K + kp] = (static_cast<double>(n_pos) + gamma1) /
                          (static_cast<double>(n_pos + n_neg) + gamma0 +
                           gamma1);
    }
  }
  return est;
}

LayerEstimate fit_mmsb(const LayerSplit& split, std::size_t n,
                       const MmsbConfig& cfg) {
  const double alpha0 = cfg.resolved_alpha0();
  Rng rng(derive_seed(cfg.seed, "mmsb"));
  LayerState state = init_layer_state(split, n, cfg.k, rng);
  if (cfg.iterations <= 0) {
    return estimate_point(state, n, alpha0, cfg.gamma0, cfg.gamma1);
  }

  LayerEstimate acc;
  std::size_t samples = 0;
  const int burn_in = cfg.iterations / 2;
  for (int it = 1; it <= cfg.iterations; ++it) {
    gibbs_sweep_mmsb(state, alpha0, cfg.gamma0, cfg.gamma1, rng);
    if (it <= burn_in) continue;
    LayerEstimate cur = estimate_point(state, n, alpha0, cfg.gamma0,
                                       cfg.gamma1);
    if (samples == 0) {
      acc = std::move(cur);
    } else {
      for (std::size_t i = 0; i < acc.pi.size(); ++i) acc.pi[i] += cur.pi[i];
      for (std::size_t i = 0; i < acc.b.size(); ++i) acc.b[i] += cur.b[i];
    }
    ++samples;
  }
  for (double& v : acc.pi) v /= static_cast<double>(samples);
  for (double& v : acc.b) v /= static_cast<double>(samples);
  return acc;
}

double score_dyad(const LayerEstimate& est, UserIndex i, UserIndex j) {
  const Dyad d = make_dyad(i, j);
  const int K = est.K;
  const double* pi_a = &est.pi[d.a * static_cast<std::size_t>(K)];
  const double* pi_b = &est.pi[d.b * static_cast<std::size_t>(K)];
  double score = 0.0;
  for (int k = 0; k < K; ++k) {
    double row = 0.0;
    for (int kp = 0; kp < K; ++kp) row += est.b[k * K + kp] * pi_b[kp];
    score += pi_a[k] * row;
  }
  return score;
}

CompositeNetwork merge_layers(const CompositeNetwork& net) {
  bool all_timestamped = true;
  for (const LayerGraph& l : net.layers) {
    if (!l.has_timestamps()) all_timestamped = false;
  }

  LayerGraph merged;
  merged.name = "merged";
  std::map<std::uint64_t, std::size_t> first_at;
  for (const LayerGraph& l : net.layers) {
    for (std::size_t i = 0; i < l.dyads.size(); ++i) {
      const Dyad& d = l.dyads[i];
      auto it = first_at.find(dyad_key(d));
      if (it == first_at.end()) {
        first_at.emplace(dyad_key(d), merged.dyads.size());
        merged.dyads.push_back(d);
        if (all_timestamped) merged.timestamps.push_back(l.timestamps[i]);
      } else if (all_timestamped) {
        merged.timestamps[it->second] =
            std::min(merged.timestamps[it->second], l.timestamps[i]);
      }
    }
  }
  merged.rebuild_index();

  CompositeNetwork out;
  out.roster = net.roster;
  out.layers.push_back(std::move(merged));
  return out;
}

}  // namespace comfp
