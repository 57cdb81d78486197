#include "comfp/comfp_model.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "comfp/errors.hpp"

namespace comfp {

namespace {

double dot_n(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double gaussian_log_prior(std::span<const double> v, double sigma) {
  const double inv2 = 1.0 / (2.0 * sigma * sigma);
  const double norm = 0.5 * std::log(2.0 * 3.14159265358979323846 * sigma *
                                     sigma);
  double lp = 0.0;
  for (double u : v) lp += -u * u * inv2 - norm;
  return lp;
}

// Dirichlet-multinomial block of one layer for an explicit lambda buffer.
// Only users holding indicator slots contribute.
double dm_terms(const LayerState& ls, std::size_t n,
                const std::vector<double>& x, int T,
                std::span<const double> v) {
  const int K = ls.K;
  std::vector<double> a(K);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t nt = ls.user_total[i];
    if (nt == 0) continue;
    double asum = 0.0;
    for (int k = 0; k < K; ++k) {
      a[k] = softplus(dot_n(&x[i * T], &v[k * T], T));
      asum += a[k];
    }
    total += log_gamma(asum) - log_gamma(asum + static_cast<double>(nt));
    for (int k = 0; k < K; ++k) {
      const std::int64_t nik = ls.nc(static_cast<UserIndex>(i), k);
      if (nik > 0) {
        total += log_gamma(a[k] + static_cast<double>(nik)) - log_gamma(a[k]);
      }
    }
  }
  return total;
}

// Beta-Bernoulli block for an explicit lambda buffer: each cell carries a
// symmetric Beta(r1, r1) on its link rate, so the collapsed mass is
// B(r1+n_pos, r1+n_neg) / B(r1, r1).
double pair_terms(const LayerState& ls, int T, std::span<const double> v) {
  const int K = ls.K;
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      const std::int64_t n_pos = ls.np(k, kp, 0);
      const std::int64_t n_neg = ls.np(k, kp, 1);
      if (n_pos == 0 && n_neg == 0) continue;
      const double r1 = softplus(dot_n(&v[k * T], &v[kp * T], T)) + 1.0;
      total += log_gamma(2.0 * r1) -
               log_gamma(2.0 * r1 + static_cast<double>(n_pos + n_neg));
      if (n_pos > 0) {
        total += log_gamma(r1 + static_cast<double>(n_pos)) - log_gamma(r1);
      }
      if (n_neg > 0) {
        total += log_gamma(r1 + static_cast<double>(n_neg)) - log_gamma(r1);
      }
    }
  }
  return total;
}

double lambda_objective(const LayerState& ls, std::size_t n,
                        const std::vector<double>& x, int T,
                        std::span<const double> v, double sigma_d) {
  return dm_terms(ls, n, x, T, v) + pair_terms(ls, T, v) +
         gaussian_log_prior(v, sigma_d);
}

void lambda_gradient(const LayerState& ls, std::size_t n,
                     const std::vector<double>& x, int T,
                     std::span<const double> v, double sigma_d,
                     std::span<double> out) {
  const int K = ls.K;
  const double inv_sd2 = 1.0 / (sigma_d * sigma_d);
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < T; ++t) out[k * T + t] = -v[k * T + t] * inv_sd2;
  }

  // Dirichlet chain terms. The row-sum part couples every community, so
  // brackets for zero-count communities still contribute.
  std::vector<double> arg(K), a(K);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t nt = ls.user_total[i];
    if (nt == 0) continue;
    double asum = 0.0;
    for (int k = 0; k < K; ++k) {
      arg[k] = dot_n(&x[i * T], &v[k * T], T);
      a[k] = softplus(arg[k]);
      asum += a[k];
    }
    const double common =
        digamma(asum) - digamma(asum + static_cast<double>(nt));
    for (int k = 0; k < K; ++k) {
      const std::int64_t nik = ls.nc(static_cast<UserIndex>(i), k);
      double bracket = common;
      if (nik > 0) {
        bracket += digamma(a[k] + static_cast<double>(nik)) - digamma(a[k]);
      }
      const double coef = softplus_deriv(arg[k]) * bracket;
      for (int t = 0; t < T; ++t) out[k * T + t] += coef * x[i * T + t];
    }
  }

  // Compatibility terms: cells (k,kp) and (kp,k) both move with lambda_k.
  std::vector<double> w(static_cast<std::size_t>(K) * K, 0.0);
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      const std::int64_t n_pos = ls.np(k, kp, 0);
      const std::int64_t n_neg = ls.np(k, kp, 1);
      if (n_pos == 0 && n_neg == 0) continue;
      const double r1 = softplus(dot_n(&v[k * T], &v[kp * T], T)) + 1.0;
      double acc = 2.0 * (digamma(2.0 * r1) -
                          digamma(2.0 * r1 +
                                  static_cast<double>(n_pos + n_neg)));
      if (n_pos > 0) acc += digamma(r1 + static_cast<double>(n_pos));
      if (n_neg > 0) acc += digamma(r1 + static_cast<double>(n_neg));
      acc -= digamma(r1) * ((n_pos > 0) + (n_neg > 0));
      w[k * K + kp] = acc;
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      const double pair_w = w[k * K + kp] + w[kp * K + k];
      if (pair_w == 0.0) continue;
      const double coef =
          softplus_deriv(dot_n(&v[k * T], &v[kp * T], T)) * pair_w;
      for (int t = 0; t < T; ++t) out[k * T + t] += coef * v[kp * T + t];
    }
  }
}

// Conditional pieces for one user's feature row with an explicit buffer.
double user_logp_at(const LatentState& state, const HyperState& hyper,
                    std::size_t i, std::span<const double> v) {
  const int T = hyper.T;
  double lp = gaussian_log_prior(v, hyper.sigma_u);
  for (std::size_t d = 0; d < state.layers.size(); ++d) {
    const LayerState& ls = state.layers[d];
    const std::int64_t nt = ls.user_total[i];
    if (nt == 0) continue;
    const int K = ls.K;
    double asum = 0.0;
    std::vector<double> a(K);
    for (int k = 0; k < K; ++k) {
      a[k] = softplus(dot_n(v.data(), &hyper.lambda[d][k * T], T));
      asum += a[k];
    }
    lp += log_gamma(asum) - log_gamma(asum + static_cast<double>(nt));
    for (int k = 0; k < K; ++k) {
      const std::int64_t nik = ls.nc(static_cast<UserIndex>(i), k);
      if (nik > 0) {
        lp += log_gamma(a[k] + static_cast<double>(nik)) - log_gamma(a[k]);
      }
    }
  }
  return lp;
}

std::vector<double> user_grad_at(const LatentState& state,
                                 const HyperState& hyper, std::size_t i,
                                 std::span<const double> v) {
  const int T = hyper.T;
  const double inv_su2 = 1.0 / (hyper.sigma_u * hyper.sigma_u);
  std::vector<double> g(T);
  for (int t = 0; t < T; ++t) g[t] = -v[t] * inv_su2;
  for (std::size_t d = 0; d < state.layers.size(); ++d) {
    const LayerState& ls = state.layers[d];
    const std::int64_t nt = ls.user_total[i];
    if (nt == 0) continue;
    const int K = ls.K;
    std::vector<double> arg(K), a(K);
    double asum = 0.0;
    for (int k = 0; k < K; ++k) {
      arg[k] = dot_n(v.data(), &hyper.lambda[d][k * T], T);
      a[k] = softplus(arg[k]);
      asum += a[k];
    }
    const double common =
        digamma(asum) - digamma(asum + static_cast<double>(nt));
    for (int k = 0; k < K; ++k) {
      const std::int64_t nik = ls.nc(static_cast<UserIndex>(i), k);
      double bracket = common;
      if (nik > 0) {
        bracket += digamma(a[k] + static_cast<double>(nik)) - digamma(a[k]);
      }
      const double coef = softplus_deriv(arg[k]) * bracket;
      for (int t = 0; t < T; ++t) {
        g[t] += coef * hyper.lambda[d][k * T + t];
      }
    }
  }
  return g;
}

}  // namespace

void HyperState::refresh_layer(std::size_t d) {
  const int K = layer_k[d];
  const std::vector<double>& lam = lambda[d];
  alpha_arg[d].resize(n * static_cast<std::size_t>(K));
  alpha[d].resize(n * static_cast<std::size_t>(K));
  alpha_sum[d].resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
      const double arg = dot_n(&x[i * T], &lam[k * T], T);
      alpha_arg[d][i * K + k] = arg;
      const double a = softplus(arg);
      alpha[d][i * K + k] = a;
      s += a;
    }
    alpha_sum[d][i] = s;
  }
  rho_arg[d].resize(static_cast<std::size_t>(K) * K);
  rho[d].resize(static_cast<std::size_t>(K) * K);
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      const double arg = dot_n(&lam[k * T], &lam[kp * T], T);
      rho_arg[d][k * K + kp] = arg;
      rho[d][k * K + kp] = softplus(arg);
    }
  }
}

void HyperState::refresh_user(std::size_t i) {
  for (std::size_t d = 0; d < lambda.size(); ++d) {
    const int K = layer_k[d];
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
      const double arg = dot_n(&x[i * T], &lambda[d][k * T], T);
      alpha_arg[d][i * K + k] = arg;
      const double a = softplus(arg);
      alpha[d][i * K + k] = a;
      s += a;
    }
    alpha_sum[d][i] = s;
  }
}

void HyperState::refresh_all() {
  for (std::size_t d = 0; d < lambda.size(); ++d) refresh_layer(d);
}

std::vector<double> hybrid_prior(std::span<const double> x_i,
                                 std::span<const double> lambda_d, int K,
                                 int T) {
  std::vector<double> out(K);
  for (int k = 0; k < K; ++k) {
    out[k] = softplus(dot_n(x_i.data(), &lambda_d[k * T], T));
  }
  return out;
}

std::vector<double> compat_prior(std::span<const double> lambda_d, int K,
                                 int T) {
  std::vector<double> out(static_cast<std::size_t>(K) * K);
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      out[k * K + kp] = softplus(dot_n(&lambda_d[k * T], &lambda_d[kp * T], T));
    }
  }
  return out;
}

HyperState init_hyper(std::size_t n, const std::vector<int>& layer_k,
                      const ComfpConfig& cfg, Rng& rng) {
  HyperState h;
  h.n = n;
  h.T = cfg.t;
  h.layer_k = layer_k;
  h.sigma_u = cfg.sigma_u;
  h.sigma_mh = cfg.sigma_mh;
  h.sigma_d.assign(layer_k.size(), cfg.sigma_d);
  h.lambda.resize(layer_k.size());
  for (std::size_t d = 0; d < layer_k.size(); ++d) {
    h.lambda[d].resize(static_cast<std::size_t>(layer_k[d]) * cfg.t);
    for (double& v : h.lambda[d]) v = rng.gaussian(0.0, h.sigma_d[d]);
  }
  h.x.resize(n * static_cast<std::size_t>(cfg.t));
  for (double& v : h.x) v = rng.gaussian(0.0, cfg.sigma_u);
  h.alpha_arg.resize(layer_k.size());
  h.alpha.resize(layer_k.size());
  h.alpha_sum.resize(layer_k.size());
  h.rho_arg.resize(layer_k.size());
  h.rho.resize(layer_k.size());
  h.refresh_all();
  return h;
}

double comfp_conditional(const LayerState& layer, const HyperState& hyper,
                         std::size_t d, std::size_t idx,
                         std::span<double> w) {
  const int K = layer.K;
  const TrainDyad& td = layer.dyads[idx];
  const int yi = sign_index(td.y);
  const double* alpha_a = &hyper.alpha[d][td.d.a * static_cast<std::size_t>(K)];
  const double* alpha_b = &hyper.alpha[d][td.d.b * static_cast<std::size_t>(K)];
  const std::vector<double>& rho = hyper.rho[d];
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const double ai = static_cast<double>(layer.nc(td.d.a, k)) + alpha_a[k];
    for (int kp = 0; kp < K; ++kp) {
      const double aj = static_cast<double>(layer.nc(td.d.b, kp)) + alpha_b[kp];
      const std::int64_t n_pos = layer.np(k, kp, 0);
      const std::int64_t n_neg = layer.np(k, kp, 1);
      const double r1 = rho[k * K + kp] + 1.0;
      const double cell = (static_cast<double>(yi == 0 ? n_pos : n_neg) + r1) /
                          (static_cast<double>(n_pos + n_neg) + 2.0 * r1);
      const double weight = ai * aj * cell;
      w[k * K + kp] = weight;
      total += weight;
    }
  }
  return total;
}

void gibbs_sweep_comfp(LatentState& state, const HyperState& hyper, Rng& rng) {
  for (std::size_t d = 0; d < state.layers.size(); ++d) {
    LayerState& layer = state.layers[d];
    const int K = layer.K;
    std::vector<double> w(static_cast<std::size_t>(K) * K);
    for (std::size_t idx = 0; idx < layer.dyads.size(); ++idx) {
      layer.remove_dyad(idx);
      comfp_conditional(layer, hyper, d, idx, w);
      const std::size_t cell = rng.categorical(w);
      layer.insert_dyad(idx, static_cast<int>(cell) / K,
                        static_cast<int>(cell) % K);
    }
  }
}

double joint_log_density(const LatentState& state, const HyperState& hyper) {
  double total = 0.0;
  for (std::size_t d = 0; d < state.layers.size(); ++d) {
    const LayerState& ls = state.layers[d];
    const int K = ls.K;
    double dm = 0.0;
    for (std::size_t i = 0; i < state.n; ++i) {
      const std::int64_t nt = ls.user_total[i];
      if (nt == 0) continue;
      const double asum = hyper.alpha_sum[d][i];
      dm += log_gamma(asum) - log_gamma(asum + static_cast<double>(nt));
      for (int k = 0; k < K; ++k) {
        const std::int64_t nik = ls.nc(static_cast<UserIndex>(i), k);
        if (nik > 0) {
          const double a = hyper.alpha[d][i * K + k];
          dm += log_gamma(a + static_cast<double>(nik)) - log_gamma(a);
        }
      }
    }
    if (!std::isfinite(dm)) {
      throw NumericError(
          "joint_log_density: non-finite membership term in layer " +
          std::to_string(d));
    }
    double pair = 0.0;
    for (int k = 0; k < K; ++k) {
      for (int kp = 0; kp < K; ++kp) {
        const std::int64_t n_pos = ls.np(k, kp, 0);
        const std::int64_t n_neg = ls.np(k, kp, 1);
        if (n_pos == 0 && n_neg == 0) continue;
        const double r1 = hyper.rho[d][k * K + kp] + 1.0;
        pair += log_gamma(2.0 * r1) -
                log_gamma(2.0 * r1 + static_cast<double>(n_pos + n_neg));
        if (n_pos > 0) {
          pair += log_gamma(r1 + static_cast<double>(n_pos)) - log_gamma(r1);
        }
        if (n_neg > 0) {
          pair += log_gamma(r1 + static_cast<double>(n_neg)) - log_gamma(r1);
        }
      }
    }
    if (!std::isfinite(pair)) {
      throw NumericError(
          "joint_log_density: non-finite compatibility term in layer " +
          std::to_string(d));
    }
    total += dm + pair;
    total += gaussian_log_prior(hyper.lambda[d], hyper.sigma_d[d]);
  }
  total += gaussian_log_prior(hyper.x, hyper.sigma_u);
  if (!std::isfinite(total)) {
    throw NumericError("joint_log_density: non-finite prior term");
  }
  return total;
}

std::vector<double> grad_lambda(const LatentState& state,
                                const HyperState& hyper, std::size_t d) {
  const LayerState& ls = state.layers[d];
  std::vector<double> out(hyper.lambda[d].size());
  lambda_gradient(ls, state.n, hyper.x, hyper.T, hyper.lambda[d],
                  hyper.sigma_d[d], out);
  return out;
}

std::vector<double> grad_x(const LatentState& state, const HyperState& hyper,
                           std::size_t i) {
  return user_grad_at(state, hyper, i,
                      std::span<const double>(&hyper.x[i * hyper.T],
                                              hyper.T));
}

bool update_lambda(const LatentState& state, HyperState& hyper, std::size_t d,
                   int max_iterations, int memory, bool* warning) {
  const LayerState& ls = state.layers[d];
  const std::size_t n = state.n;
  const int T = hyper.T;
  const double sd = hyper.sigma_d[d];
  const std::vector<double>& x = hyper.x;

  ObjectiveHandle obj;
  obj.dimension = hyper.lambda[d].size();
  obj.value = [&ls, n, &x, T, sd](std::span<const double> v) {
    return lambda_objective(ls, n, x, T, v, sd);
  };
  obj.gradient = [&ls, n, &x, T, sd](std::span<const double> v,
                                     std::span<double> g) {
    lambda_gradient(ls, n, x, T, v, sd, g);
  };

  LbfgsOptions opts;
  opts.max_iterations = max_iterations;
  opts.memory = memory;
  try {
    LbfgsResult res = lbfgs_maximize(obj, hyper.lambda[d], opts);
    if (warning && res.line_search_failed) *warning = true;
    bool moved = res.x != hyper.lambda[d];
    if (moved) {
      hyper.lambda[d] = std::move(res.x);
      hyper.refresh_layer(d);
    }
    return moved;
  } catch (const NumericError&) {
    if (warning) *warning = true;
    return false;
  }
}

bool mala_step(std::vector<double>& x, const MalaTarget& target, double sigma,
               Rng& rng) {
  const std::size_t t = x.size();
  const double half_s2 = 0.5 * sigma * sigma;

  const double lp0 = target.log_density(x);
  const std::vector<double> g0 = target.gradient(x);

  std::vector<double> prop(t);
  for (std::size_t i = 0; i < t; ++i) {
    prop[i] = x[i] + half_s2 * g0[i] + sigma * rng.gaussian();
  }
  const double u = rng.uniform_pos();

  bool finite = true;
  for (double v : prop) finite = finite && std::isfinite(v);
  if (!finite) return false;

  const double lp1 = target.log_density(prop);
  if (!std::isfinite(lp1)) return false;
  const std::vector<double> g1 = target.gradient(prop);
  for (double v : g1) finite = finite && std::isfinite(v);
  if (!finite) return false;

  // log q(x | prop) - log q(prop | x), Gaussian kernels centered on the
  // drifted points.
  double fwd = 0.0, rev = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    const double df = prop[i] - x[i] - half_s2 * g0[i];
    const double dr = x[i] - prop[i] - half_s2 * g1[i];
    fwd += df * df;
    rev += dr * dr;
  }
  const double log_r =
      lp1 - lp0 + (fwd - rev) / (2.0 * sigma * sigma);
  if (std::log(u) < log_r) {
    x = std::move(prop);
    return true;
  }
  return false;
}

bool update_x_mh(const LatentState& state, HyperState& hyper, std::size_t i,
                 Rng& rng) {
  MalaTarget target;
  target.log_density = [&state, &hyper, i](std::span<const double> v) {
    return user_logp_at(state, hyper, i, v);
  };
  target.gradient = [&state, &hyper, i](std::span<const double> v) {
    return user_grad_at(state, hyper, i, v);
  };
  std::vector<double> row(&hyper.x[i * hyper.T],
                          &hyper.x[i * hyper.T] + hyper.T);
  const bool accepted = mala_step(row, target, hyper.sigma_mh, rng);
  if (accepted) {
    std::copy(row.begin(), row.end(), &hyper.x[i * hyper.T]);
    hyper.refresh_user(i);
  }
  return accepted;
}

LayerEstimate estimate_point_comfp(const LayerState& layer,
                                   const HyperState& hyper, std::size_t d) {
  const int K = layer.K;
  const std::size_t n = hyper.n;
  LayerEstimate est;
  est.K = K;
  est.pi.resize(n * static_cast<std::size_t>(K));
  est.b.resize(static_cast<std::size_t>(K) * K);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom =
        static_cast<double>(layer.user_total[i]) + hyper.alpha_sum[d][i];
    for (int k = 0; k < K; ++k) {
      est.pi[i * K + k] =
          (static_cast<double>(layer.nc(static_cast<UserIndex>(i), k)) +
           hyper.alpha[d][i * K + k]) /
          denom;
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      const std::int64_t n_pos = layer.np(k, kp, 0);
      const std::int64_t n_neg = layer.np(k, kp, 1);
      const double r1 = hyper.rho[d][k * K + kp] + 1.0;
      est.b[k * K + kp] = (static_cast<double>(n_pos) + r1) /
                          (static_cast<double>(n_pos + n_neg) + 2.0 * r1);
    }
  }
  return est;
}

ComfpFit fit_comfp(const TrainTestSplit& split, std::size_t n,
                   const ComfpConfig& cfg) {
  const std::vector<int> layer_k = cfg.resolved_layer_k(split.layers.size());
  if (layer_k.size() != split.layers.size()) {
    throw InvariantViolation("fit_comfp: layer_k size mismatch");
  }

  Rng rng(derive_seed(cfg.seed, "comfp"));
  ComfpFit fit;
  fit.state = init_state(split, n, layer_k, rng);
  fit.hyper = init_hyper(n, layer_k, cfg, rng);

  const int burn_in = cfg.iterations / 2;
  std::vector<LayerEstimate> acc;
  std::size_t samples = 0;
  double last_rate = 0.0;

  for (int it = 1; it <= cfg.iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    gibbs_sweep_comfp(fit.state, fit.hyper, rng);

    if (cfg.hyper_period > 0 && it % cfg.hyper_period == 0) {
      for (std::size_t d = 0; d < fit.state.layers.size(); ++d) {
        bool warn = false;
        update_lambda(fit.state, fit.hyper, d, cfg.lbfgs_iterations,
                      cfg.lbfgs_memory, &warn);
        fit.optimizer_warnings += warn;
      }
      std::size_t accepted = 0;
      for (std::size_t i = 0; i < n; ++i) {
        accepted += update_x_mh(fit.state, fit.hyper, i, rng);
      }
      last_rate = n > 0 ? static_cast<double>(accepted) /
                              static_cast<double>(n)
                        : 0.0;
    }

    fit.joint_trace.push_back(joint_log_density(fit.state, fit.hyper));
    fit.accept_trace.push_back(last_rate);

    if (it > burn_in) {
      std::vector<LayerEstimate> cur;
      for (std::size_t d = 0; d < fit.state.layers.size(); ++d) {
        cur.push_back(estimate_point_comfp(fit.state.layers[d], fit.hyper, d));
      }
      if (samples == 0) {
        acc = std::move(cur);
      } else {
        for (std::size_t d = 0; d < acc.size(); ++d) {
          for (std::size_t i = 0; i < acc[d].pi.size(); ++i) {
            acc[d].pi[i] += cur[d].pi[i];
          }
          for (std::size_t i = 0; i < acc[d].b.size(); ++i) {
            acc[d].b[i] += cur[d].b[i];
          }
        }
      }
      ++samples;
    }

    const auto t1 = std::chrono::steady_clock::now();
    fit.iter_seconds.push_back(
        std::chrono::duration<double>(t1 - t0).count());
    fit.iterations_run = it;

    // Convergence is tested on ten-iteration window means at hyper-update
    // boundaries, and only once the averaging window is open: an exit
    // before burn-in would leave the point estimates without any sample,
    // contradicting their post-burn-in-average definition.
    if (cfg.hyper_period > 0 && it % cfg.hyper_period == 0 && it > burn_in &&
        it >= 20) {
      const auto& tr = fit.joint_trace;
      double m1 = 0.0, m0 = 0.0;
      for (int j = 0; j < 10; ++j) {
        m1 += tr[tr.size() - 1 - j];
        m0 += tr[tr.size() - 11 - j];
      }
      m1 /= 10.0;
      m0 /= 10.0;
      if (std::fabs(m1 - m0) <
          cfg.convergence_tol * std::max(1.0, std::fabs(m0))) {
        fit.converged_early = true;
        break;
      }
    }
  }

  if (samples > 0) {
    for (auto& est : acc) {
      for (double& v : est.pi) v /= static_cast<double>(samples);
      for (double& v : est.b) v /= static_cast<double>(samples);
    }
    fit.estimates = std::move(acc);
  } else {
    for (std::size_t d = 0; d < fit.state.layers.size(); ++d) {
      fit.estimates.push_back(
          estimate_point_comfp(fit.state.layers[d], fit.hyper, d));
    }
  }
  return fit;
}

}  // namespace comfp
