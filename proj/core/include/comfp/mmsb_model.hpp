#ifndef COMFP_MMSB_MODEL_HPP_
#define COMFP_MMSB_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "comfp/latent_state.hpp"

namespace comfp {

struct MmsbConfig {
  int k = 25;
  // 0 means "use the default 1/k".
  double alpha0 = 0.0;
  double gamma0 = 1.0;  // pseudo-count for y = -1
  double gamma1 = 1.0;  // pseudo-count for y = +1
  int iterations = 500;
  std::uint64_t seed = 0;

  double resolved_alpha0() const {
    return alpha0 > 0.0 ? alpha0 : 1.0 / static_cast<double>(k);
  }
};

// Membership and compatibility point estimates for one trained layer.
struct LayerEstimate {
  int K = 0;
  std::vector<double> pi;  // n x K rows on the probability simplex
  std::vector<double> b;   // K x K link probabilities
};

// Unnormalized blocked conditional over the K*K indicator pairs for dyad
// `idx`, with that dyad's current pair removed from the counts. Weights
// land in `w` (length K*K, cell k*K+kp); the return value is their sum.
double mmsb_conditional(const LayerState& layer, std::size_t idx,
                        double alpha0, double gamma0, double gamma1,
                        std::span<double> w);

// One systematic scan in stored dyad order: remove, draw a (k,kp) pair
// from the blocked conditional, reinsert.
void gibbs_sweep_mmsb(LayerState& layer, double alpha0, double gamma0,
                      double gamma1, Rng& rng);

// Posterior-mean style estimates from the current counts:
//   pi_{i,k} = (n_{i,k} + alpha0) / (n_i + K alpha0)
//   b_{k,kp} = (n_{k,kp,+} + gamma1) / (n_{k,kp} + gamma0 + gamma1)
LayerEstimate estimate_point(const LayerState& layer, std::size_t n,
                             double alpha0, double gamma0, double gamma1);

// Runs `iterations` sweeps and averages estimates over the post burn-in
// half. iterations == 0 returns the prior-mean estimate.
LayerEstimate fit_mmsb(const LayerSplit& split, std::size_t n,
                       const MmsbConfig& cfg);

// pi_i^T B pi_j with the canonical a < b orientation.
double score_dyad(const LayerEstimate& est, UserIndex i, UserIndex j);

// Union of all layers as a single layer named "merged". Timestamps are
// kept (earliest occurrence wins) only when every layer carries them.
CompositeNetwork merge_layers(const CompositeNetwork& net);

}  // namespace comfp

#endif  // COMFP_MMSB_MODEL_HPP_
