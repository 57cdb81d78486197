#include "comfp/latent_state.hpp"

#include "comfp/errors.hpp"

namespace comfp {

void LayerState::remove_dyad(std::size_t idx) {
  const auto [ka, kb] = z[idx];
  const TrainDyad& td = dyads[idx];
  --user_comm[td.d.a * K + ka];
  --user_comm[td.d.b * K + kb];
  --user_total[td.d.a];
  --user_total[td.d.b];
  --pair_counts[(ka * K + kb) * 2 + sign_index(td.y)];
}

void LayerState::insert_dyad(std::size_t idx, int k, int kp) {
  z[idx] = {static_cast<std::uint16_t>(k), static_cast<std::uint16_t>(kp)};
  const TrainDyad& td = dyads[idx];
  ++user_comm[td.d.a * K + k];
  ++user_comm[td.d.b * K + kp];
  ++user_total[td.d.a];
  ++user_total[td.d.b];
  ++pair_counts[(k * K + kp) * 2 + sign_index(td.y)];
}

LayerState init_layer_state(const LayerSplit& split, std::size_t n, int k,
                            Rng& rng) {
  if (k <= 0) throw InvariantViolation("community count must be positive");
  LayerState ls;
  ls.K = k;
  ls.user_comm.assign(n * static_cast<std::size_t>(k), 0);
  ls.user_total.assign(n, 0);
  ls.pair_counts.assign(static_cast<std::size_t>(k) * k * 2, 0);
  ls.dyads.reserve(split.train_pos.size() + split.train_neg.size());
  for (const Dyad& d : split.train_pos) ls.dyads.push_back({d, +1});
  for (const Dyad& d : split.train_neg) ls.dyads.push_back({d, -1});
  ls.z.assign(ls.dyads.size(), {0, 0});
  for (std::size_t i = 0; i < ls.dyads.size(); ++i) {
    const int ka = static_cast<int>(rng.uniform_int(k));
    const int kb = static_cast<int>(rng.uniform_int(k));
    ls.insert_dyad(i, ka, kb);
  }
  return ls;
}

LatentState init_state(const TrainTestSplit& split, std::size_t n,
                       const std::vector<int>& layer_k, Rng& rng) {
  if (layer_k.size() != split.layers.size()) {
    throw InvariantViolation("one community count per layer required");
  }
  LatentState state;
  state.n = n;
  for (std::size_t d = 0; d < split.layers.size(); ++d) {
    state.layers.push_back(
        init_layer_state(split.layers[d], n, layer_k[d], rng));
  }
  return state;
}

bool counts_consistent(const LayerState& layer, std::size_t n) {
  std::vector<std::int64_t> uc(n * layer.K, 0), ut(n, 0);
  std::vector<std::int64_t> pc(static_cast<std::size_t>(layer.K) * layer.K * 2,
                               0);
  for (std::size_t i = 0; i < layer.dyads.size(); ++i) {
    const auto [ka, kb] = layer.z[i];
    const TrainDyad& td = layer.dyads[i];
    ++uc[td.d.a * layer.K + ka];
    ++uc[td.d.b * layer.K + kb];
    ++ut[td.d.a];
    ++ut[td.d.b];
    ++pc[(ka * layer.K + kb) * 2 + sign_index(td.y)];
  }
  return uc == layer.user_comm && ut == layer.user_total &&
         pc == layer.pair_counts;
}

}  // namespace comfp
