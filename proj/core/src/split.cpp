#include "comfp/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "comfp/errors.hpp"
#include "comfp/numerics.hpp"

namespace comfp {

namespace {

std::size_t holdout_count(std::size_t m, double fraction) {
  return static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(m)));
}

std::vector<Dyad> enumerate_non_edges(const LayerGraph& layer) {
  std::vector<Dyad> out;
  const auto& mem = layer.members;
  for (std::size_t i = 0; i < mem.size(); ++i) {
    for (std::size_t j = i + 1; j < mem.size(); ++j) {
      const Dyad d = make_dyad(mem[i], mem[j]);
      if (!layer.contains(d)) out.push_back(d);
    }
  }
  return out;
}

}  // namespace

TrainTestSplit holdout_split(const CompositeNetwork& net, double fraction,
                             SplitMode mode, std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw InvariantViolation("holdout fraction must lie in (0,1), got " +
                             std::to_string(fraction));
  }
  if (mode == SplitMode::kTemporal) {
    for (const LayerGraph& l : net.layers) {
      if (!l.dyads.empty() && !l.has_timestamps()) {
        throw InvariantViolation("temporal split requires timestamps; layer '" +
                                 l.name + "' has none");
      }
    }
  }

  TrainTestSplit split;
  split.holdout_fraction = fraction;
  split.mode = mode;
  split.seed = seed;

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const LayerGraph& layer = net.layers[li];
    const std::size_t m = layer.dyads.size();
    const std::size_t h = holdout_count(m, fraction);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    if (mode == SplitMode::kTemporal) {
      // Latest timestamps held out; ties broken by line order, later
      // insertions leave first.
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return layer.timestamps[a] < layer.timestamps[b];
                       });
    } else {
      Rng rng(derive_seed(seed, "holdout:" + std::to_string(li)));
      rng.shuffle(order);
    }

    std::vector<bool> held(m, false);
    for (std::size_t i = m - std::min(h, m); i < m; ++i) held[order[i]] = true;

    LayerSplit ls;
    for (std::size_t i = 0; i < m; ++i) {
      (held[i] ? ls.heldout_pos : ls.train_pos).push_back(layer.dyads[i]);
    }
    split.layers.push_back(std::move(ls));
  }
  return split;
}

void sample_negatives(const CompositeNetwork& net, TrainTestSplit& split,
                      std::size_t eval_pool_per_user, std::uint64_t seed) {
  if (split.layers.size() != net.layers.size()) {
    throw InvariantViolation("split/layer count mismatch");
  }
  split.eval_pool = eval_pool_per_user;

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const LayerGraph& layer = net.layers[li];
    LayerSplit& ls = split.layers[li];
    const auto& mem = layer.members;
    const std::size_t pairs =
        mem.size() < 2 ? 0 : mem.size() * (mem.size() - 1) / 2;
    const std::size_t feasible = pairs - layer.dyads.size();
    const std::size_t need = ls.train_pos.size();
    if (need > feasible) {
      throw InvariantViolation(
          "layer '" + layer.name + "' cannot supply " + std::to_string(need) +
          " train negatives (only " + std::to_string(feasible) +
          " unobserved member pairs)");
    }

    Rng rng(derive_seed(seed, "negatives:" + std::to_string(li)));
    std::unordered_set<std::uint64_t> taken;

    ls.train_neg.clear();
    if (need > 0) {
      if (need * 2 > feasible) {
        std::vector<Dyad> pool = enumerate_non_edges(layer);
        rng.shuffle(pool);
        ls.train_neg.assign(pool.begin(), pool.begin() + need);
        for (const Dyad& d : ls.train_neg) taken.insert(dyad_key(d));
      } else {
        while (ls.train_neg.size() < need) {
          const UserIndex u = mem[rng.uniform_int(mem.size())];
          const UserIndex v = mem[rng.uniform_int(mem.size())];
          if (u == v) continue;
          const Dyad d = make_dyad(u, v);
          if (layer.contains(d) || !taken.insert(dyad_key(d)).second) continue;
          ls.train_neg.push_back(d);
        }
      }
    }

    // Candidate pools for users owning at least one held-out positive.
    std::set<UserIndex> anchors;
    for (const Dyad& d : ls.heldout_pos) {
      anchors.insert(d.a);
      anchors.insert(d.b);
    }
    ls.eval_neg.clear();
    for (UserIndex u : anchors) {
      std::vector<Dyad> legal;
      for (UserIndex w : mem) {
        if (w == u) continue;
        const Dyad d = make_dyad(u, w);
        if (layer.contains(d) || taken.count(dyad_key(d))) continue;
        legal.push_back(d);
      }
      const std::size_t want = std::min(eval_pool_per_user, legal.size());
      if (want < legal.size()) {
        rng.shuffle(legal);
        legal.resize(want);
      }
      ls.eval_neg.emplace(u, std::move(legal));
    }
  }
}

std::vector<std::size_t> train_degrees(const LayerSplit& split,
                                       std::size_t n) {
  std::vector<std::size_t> deg(n, 0);
  for (const Dyad& d : split.train_pos) {
    ++deg[d.a];
    ++deg[d.b];
  }
  return deg;
}

LayerSplit merge_layer_splits(const TrainTestSplit& split) {
  LayerSplit merged;
  std::unordered_set<std::uint64_t> positive;
  for (const LayerSplit& ls : split.layers) {
    for (const Dyad& d : ls.train_pos) {
      if (positive.insert(dyad_key(d)).second) merged.train_pos.push_back(d);
    }
  }
  // Any positive anywhere (train or held out) disqualifies a merged
  // negative: a non-edge of one layer can be an edge of another.
  std::unordered_set<std::uint64_t> excluded = positive;
  for (const LayerSplit& ls : split.layers) {
    for (const Dyad& d : ls.heldout_pos) excluded.insert(dyad_key(d));
  }
  std::unordered_set<std::uint64_t> seen;
  for (const LayerSplit& ls : split.layers) {
    for (const Dyad& d : ls.train_neg) {
      if (excluded.count(dyad_key(d))) continue;
      if (seen.insert(dyad_key(d)).second) merged.train_neg.push_back(d);
    }
  }
  return merged;
}

}  // namespace comfp
