#ifndef COMFP_LATENT_STATE_HPP_
#define COMFP_LATENT_STATE_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "comfp/numerics.hpp"
#include "comfp/split.hpp"

namespace comfp {

// One training dyad with its link sign: +1 observed link, -1 sampled
// non-link.
struct TrainDyad {
  Dyad d;
  std::int8_t y = 1;
};

inline int sign_index(int y) { return y > 0 ? 0 : 1; }

// Per-layer indicator assignments and the count tables they induce.
// Indicator pairs are ordered by the dyad's canonical (a < b) orientation:
// z.first belongs to endpoint a, z.second to endpoint b.
struct LayerState {
  int K = 0;
  std::vector<TrainDyad> dyads;  // train positives then train negatives
  std::vector<std::pair<std::uint16_t, std::uint16_t>> z;
  std::vector<std::int64_t> user_comm;    // n x K, slots user i chose k
  std::vector<std::int64_t> user_total;   // n, total slots of user i
  std::vector<std::int64_t> pair_counts;  // K x K x 2, sign-split cell tallies

  std::int64_t nc(UserIndex i, int k) const { return user_comm[i * K + k]; }
  std::int64_t np(int k, int kp, int yi) const {
    return pair_counts[(k * K + kp) * 2 + yi];
  }

  void remove_dyad(std::size_t idx);
  void insert_dyad(std::size_t idx, int k, int kp);
};

struct LatentState {
  std::size_t n = 0;
  std::vector<LayerState> layers;
};

// Builds the state for the split's train dyads with indicator pairs drawn
// uniformly from {0..K_d-1}^2, positives first, insertion order preserved.
LatentState init_state(const TrainTestSplit& split, std::size_t n,
                       const std::vector<int>& layer_k, Rng& rng);

// Single-layer variant used by the per-layer and merged baselines.
LayerState init_layer_state(const LayerSplit& split, std::size_t n, int k,
                            Rng& rng);

// Recomputes every count table from the indicators and compares; false
// means the incremental bookkeeping diverged.
bool counts_consistent(const LayerState& layer, std::size_t n);

}  // namespace comfp

#endif  // COMFP_LATENT_STATE_HPP_
