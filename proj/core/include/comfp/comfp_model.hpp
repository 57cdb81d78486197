#ifndef COMFP_COMFP_MODEL_HPP_
#define COMFP_COMFP_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "comfp/latent_state.hpp"
#include "comfp/mmsb_model.hpp"
#include "comfp/optim.hpp"

namespace comfp {

struct ComfpConfig {
  int k = 25;                  // communities per layer (uniform)
  std::vector<int> layer_k;    // optional per-layer override
  int t = 25;                  // latent feature dimension
  int iterations = 500;
  int hyper_period = 10;       // feature updates every this many sweeps
  int lbfgs_iterations = 10;
  int lbfgs_memory = 7;
  double sigma_u = 1.0;
  double sigma_d = 1.0;
  double sigma_mh = 0.05;
  double convergence_tol = 1e-4;
  std::uint64_t seed = 0;

  std::vector<int> resolved_layer_k(std::size_t n_layers) const {
    if (!layer_k.empty()) return layer_k;
    return std::vector<int>(n_layers, k);
  }
};

// Per-user latent features x and per-layer mapping matrices lambda, plus
// the derived Dirichlet and compatibility priors they induce.
struct HyperState {
  std::size_t n = 0;
  int T = 0;
  std::vector<int> layer_k;
  std::vector<double> x;                    // n x T, row-major
  std::vector<std::vector<double>> lambda;  // per layer, K_d x T row-major
  double sigma_u = 1.0;
  double sigma_mh = 0.05;
  std::vector<double> sigma_d;  // per layer

  // Caches derived from x and lambda.
  std::vector<std::vector<double>> alpha_arg;  // per layer, n x K inner products
  std::vector<std::vector<double>> alpha;      // softplus(alpha_arg)
  std::vector<std::vector<double>> alpha_sum;  // per layer, n row sums
  std::vector<std::vector<double>> rho_arg;    // per layer, K x K
  std::vector<std::vector<double>> rho;        // softplus(rho_arg)

  void refresh_layer(std::size_t d);
  void refresh_user(std::size_t i);
  void refresh_all();
};

// alpha_{id} = softplus(x_i . lambda_{d,k}) for each community k.
std::vector<double> hybrid_prior(std::span<const double> x_i,
                                 std::span<const double> lambda_d, int K,
                                 int T);

// rho_d = softplus(lambda_d lambda_d^T), entrywise; symmetric.
std::vector<double> compat_prior(std::span<const double> lambda_d, int K,
                                 int T);

// Draws lambda_d from N(0, sigma_d^2) and x from N(0, sigma_u^2), then
// fills the caches.
HyperState init_hyper(std::size_t n, const std::vector<int>& layer_k,
                      const ComfpConfig& cfg, Rng& rng);

// Unnormalized blocked conditional for dyad idx of layer d, current pair
// removed; per-user Dirichlet rows come from the hybrid prior and cell
// pseudo-counts are rho+1 per sign. Fills w (K*K), returns the sum.
double comfp_conditional(const LayerState& layer, const HyperState& hyper,
                         std::size_t d, std::size_t idx, std::span<double> w);

// One systematic scan over every layer in order.
void gibbs_sweep_comfp(LatentState& state, const HyperState& hyper, Rng& rng);

// Collapsed objective: Dirichlet-multinomial terms per (layer, user),
// Beta-Bernoulli terms per compatibility cell with symmetric shape rho+1,
// Gaussian log-priors on x and lambda. Throws NumericError naming the
// offending term group if a contribution is non-finite.
double joint_log_density(const LatentState& state, const HyperState& hyper);

// Analytic gradients of joint_log_density.
std::vector<double> grad_lambda(const LatentState& state,
                                const HyperState& hyper, std::size_t d);
std::vector<double> grad_x(const LatentState& state, const HyperState& hyper,
                           std::size_t i);

// L-BFGS ascent on lambda_d with everything else fixed. Returns true if
// lambda_d moved; the objective never decreases. On numeric failure the
// previous lambda_d is kept and `warning` is set.
bool update_lambda(const LatentState& state, HyperState& hyper, std::size_t d,
                   int max_iterations, int memory, bool* warning);

// One Metropolis-adjusted Langevin step for a generic target. The whole
// vector is proposed and accepted or rejected at once. Non-finite
// proposals are rejected.
struct MalaTarget {
  std::function<double(std::span<const double>)> log_density;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};
bool mala_step(std::vector<double>& x, const MalaTarget& target, double sigma,
               Rng& rng);

// MALA update of user i's feature row against its conditional density.
// Returns true when the proposal is accepted.
bool update_x_mh(const LatentState& state, HyperState& hyper, std::size_t i,
                 Rng& rng);

// Count/prior point estimates for one layer at the current state:
//   pi_{id,k} = (n_{i,k} + alpha_{id,k}) / (n_i + sum_k alpha_{id,k})
//   b_{k,kp}  = (n_{k,kp,+} + rho+1) / (n_{k,kp} + 2 rho + 2)
LayerEstimate estimate_point_comfp(const LayerState& layer,
                                   const HyperState& hyper, std::size_t d);

struct ComfpFit {
  std::vector<LayerEstimate> estimates;  // averaged post burn-in
  HyperState hyper;
  LatentState state;
  std::vector<double> joint_trace;    // one entry per completed iteration
  std::vector<double> accept_trace;   // most recent MH round's rate
  std::vector<double> iter_seconds;
  int iterations_run = 0;
  bool converged_early = false;
  int optimizer_warnings = 0;
};

// Full training loop: sweeps every iteration, feature updates every
// hyper_period iterations, convergence checked at those boundaries via the
// relative change between consecutive trace-window means.
ComfpFit fit_comfp(const TrainTestSplit& split, std::size_t n,
                   const ComfpConfig& cfg);

inline double score_dyad_comfp(const ComfpFit& fit, std::size_t d,
                               UserIndex i, UserIndex j) {
  return score_dyad(fit.estimates[d], i, j);
}

}  // namespace comfp

#endif  // COMFP_COMFP_MODEL_HPP_
