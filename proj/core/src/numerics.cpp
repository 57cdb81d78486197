#include "comfp/numerics.hpp"

#include <cmath>
#include <cstddef>

#include "comfp/errors.hpp"

namespace comfp {

double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double softplus_deriv(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // log(2*pi)/2

// Stirling tail sum(B_2n / (2n(2n-1) x^(2n-1))), valid for x >= 10.
double stirling_log_gamma_tail(double x) {
  const double r = 1.0 / (x * x);
  double s = 7.0 / 1092.0;
  s = s * r - 691.0 / 360360.0;
  s = s * r + 1.0 / 1188.0;
  s = s * r - 1.0 / 1680.0;
  s = s * r + 1.0 / 1260.0;
  s = s * r - 1.0 / 360.0;
  s = s * r + 1.0 / 12.0;
  return s / x;
}

// Asymptotic tail sum(B_2n / (2n x^2n)) of Psi, valid for x >= 10.
double asymptotic_digamma_tail(double x) {
  const double r = 1.0 / (x * x);
  double s = 1.0 / 12.0;
  s = s * r - 691.0 / 32760.0;
  s = s * r + 1.0 / 132.0;
  s = s * r - 1.0 / 240.0;
  s = s * r + 1.0 / 252.0;
  s = s * r - 1.0 / 120.0;
  s = s * r + 1.0 / 12.0;
  return s * r;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw NumericError("log_gamma: argument must be positive, got " +
                       std::to_string(x));
  }
  double shift = 0.0;
  while (x < 10.0) {
    shift += std::log(x);
    x += 1.0;
  }
  return (x - 0.5) * std::log(x) - x + kHalfLogTwoPi +
         stirling_log_gamma_tail(x) - shift;
}

double digamma(double x) {
  if (!(x > 0.0)) {
    throw NumericError("digamma: argument must be positive, got " +
                       std::to_string(x));
  }
  double shift = 0.0;
  while (x < 10.0) {
    shift += 1.0 / x;
    x += 1.0;
  }
  return std::log(x) - 0.5 / x - asymptotic_digamma_tail(x) - shift;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw NumericError("uniform_int: bound must be positive");
  // Rejection to keep the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

double Rng::gaussian() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw NumericError("gamma: shape must be positive, got " +
                       std::to_string(shape));
  }
  if (shape < 1.0) {
    const double u = uniform_pos();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  if (x + y <= 0.0) return 0.5;
  return x / (x + y);
}

void Rng::dirichlet(std::span<const double> alpha, std::span<double> out) {
  if (alpha.size() != out.size() || alpha.empty()) {
    throw NumericError("dirichlet: bad dimensions");
  }
  // Log-space Gamma draws; tiny concentrations give near-one-hot samples
  // instead of 0/0 after underflow.
  double mx = -HUGE_VAL;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double a = alpha[k];
    if (!(a > 0.0)) throw NumericError("dirichlet: non-positive alpha");
    double lg;
    if (a < 1.0) {
      lg = std::log(gamma(a + 1.0)) + std::log(uniform_pos()) / a;
    } else {
      lg = std::log(gamma(a));
    }
    out[k] = lg;
    if (lg > mx) mx = lg;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::exp(out[k] - mx);
    sum += out[k];
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= sum;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw NumericError("categorical: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw NumericError("categorical: zero total weight");
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& salt) {
  // FNV-1a over the salt, then a splitmix64 finalizer round.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : salt) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace comfp
