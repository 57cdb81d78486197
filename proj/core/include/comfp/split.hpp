#ifndef COMFP_SPLIT_HPP_
#define COMFP_SPLIT_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "comfp/network.hpp"

namespace comfp {

enum class SplitMode { kTemporal, kUniform };

// Train/test partition for one layer. Positives keep the layer's dyad
// order; negatives keep sampling order. The four dyad sets are pairwise
// disjoint.
struct LayerSplit {
  std::vector<Dyad> train_pos;
  std::vector<Dyad> heldout_pos;
  std::vector<Dyad> train_neg;
  // Per-user candidate negatives, keyed by the user owning the pool.
  std::map<UserIndex, std::vector<Dyad>> eval_neg;
};

struct TrainTestSplit {
  double holdout_fraction = 0.1;
  SplitMode mode = SplitMode::kTemporal;
  std::uint64_t seed = 0;
  std::size_t eval_pool = 100;
  std::vector<LayerSplit> layers;
};

// Holds out ceil(fraction * m_d) dyads per layer: the latest by timestamp
// in temporal mode (ties broken by dyad order, later lines win), or a
// seeded uniform draw. fraction must lie in (0, 1); temporal mode requires
// timestamps on every layer.
TrainTestSplit holdout_split(const CompositeNetwork& net, double fraction,
                             SplitMode mode, std::uint64_t seed);

// Fills train_neg (one per train positive, sampled uniformly from the
// layer's unobserved member pairs) and eval_neg (up to eval_pool_per_user
// partners for each user with a held-out positive, clamped to the feasible
// count). Throws InvariantViolation when a layer cannot supply the train
// negatives.
void sample_negatives(const CompositeNetwork& net, TrainTestSplit& split,
                      std::size_t eval_pool_per_user, std::uint64_t seed);

// Train-positive degree of each user in one layer split.
std::vector<std::size_t> train_degrees(const LayerSplit& split, std::size_t n);

// Union of per-layer splits as a single layer: train positives are merged;
// a dyad positive anywhere never appears as a merged negative. Held-out
// sets stay per-layer and are not merged here.
LayerSplit merge_layer_splits(const TrainTestSplit& split);

}  // namespace comfp

#endif  // COMFP_SPLIT_HPP_
