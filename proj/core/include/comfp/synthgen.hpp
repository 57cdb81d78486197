#ifndef COMFP_SYNTHGEN_HPP_
#define COMFP_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "comfp/network.hpp"
#include "comfp/numerics.hpp"

namespace comfp {

struct SynthLayerSpec {
  std::string name;
  int k = 2;
  std::size_t candidates = 0;  // dyad slots to draw, <= n(n-1)/2
};

// Ground truth for one generated layer. Candidate slots keep draw order;
// outcomes[i] is +1 (link) or -1 (non-link) for candidates[i], and z[i]
// holds the indicator pair drawn for its endpoints (first = smaller index).
struct PlantedLayer {
  std::string name;
  int k = 0;
  std::vector<double> lambda;  // k x t row-major; empty without features
  std::vector<double> alpha;   // n x k Dirichlet parameters
  std::vector<double> pi;      // n x k sampled memberships
  std::vector<double> b;       // k x k link probabilities
  std::vector<UserIndex> members;
  std::vector<Dyad> candidates;
  std::vector<std::pair<std::uint16_t, std::uint16_t>> z;
  std::vector<std::int8_t> outcomes;
  std::vector<Dyad> negatives;  // candidates with outcome -1, draw order
};

struct PlantedTruth {
  std::size_t n = 0;
  int t = 0;               // latent feature width; 0 without features
  std::vector<double> x;   // n x t row-major; empty without features
  std::vector<int> labels; // hard community per user
  std::vector<PlantedLayer> layers;
};

struct SynthResult {
  CompositeNetwork net;
  PlantedTruth truth;
};

// Samples a composite from the feature-driven process: lambda_d and x are
// Gaussian, alpha = softplus(x lambda^T), B entries Beta(rho, 1) with
// rho = softplus(lambda lambda^T), pi rows Dirichlet(alpha), then each
// candidate dyad draws indicators from pi and its link from B. Candidate
// dyads are sampled uniformly without replacement. Positives become layer
// dyads with sequential timestamps in draw order. A layer that ends with
// zero positives triggers a bounded redraw, then InvariantViolation.
SynthResult generate_comfp(std::size_t n,
                           const std::vector<SynthLayerSpec>& specs, int t,
                           double sigma_u, double sigma_d,
                           std::uint64_t seed);

// Single-layer baseline analogue: pi rows from a symmetric
// Dirichlet(alpha0), B entries Beta with pseudo-counts gamma1 (link) and
// gamma0 (non-link).
SynthResult generate_mmsb(std::size_t n, int k, std::size_t candidates,
                          double alpha0, double gamma0, double gamma1,
                          std::uint64_t seed);

// Two layers sharing community structure through a common x but distinct
// lambda, with layer 2's candidate budget = layer 1's / density_ratio and
// ceil(n * overlap_fraction) users present in both layers. Layer 1 is the
// dense layer; layer 2 anchors hub_share of its candidates on a small hub
// subset so train degrees spread into popular and long-tail users;
// hub_share 0 samples layer 2 uniformly, which at high density_ratio
// leaves every member long-tailed. B is set to its prior mean rho/(1+rho)
// so planted communities are sharp.
// layer1_budget <= 0 selects the default of 30n candidate slots.
SynthResult plant_sparse_dense_pair(std::size_t n, int k, int t,
                                    double density_ratio,
                                    double overlap_fraction,
                                    std::uint64_t seed,
                                    long layer1_budget = 0,
                                    double hub_share = 0.5);

// Uniform draw of `count` distinct member pairs, in draw order.
std::vector<Dyad> sample_candidate_dyads(const std::vector<UserIndex>& members,
                                         std::size_t count, Rng& rng);

}  // namespace comfp

#endif  // COMFP_SYNTHGEN_HPP_
