#ifndef COMFP_NUMERICS_HPP_
#define COMFP_NUMERICS_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace comfp {

// log(1 + e^x), evaluated so that neither tail overflows or loses digits.
double softplus(double x);

// d/dx softplus(x) = 1 / (1 + e^-x), the logistic function.
double softplus_deriv(double x);

// ln Gamma(x) for x > 0 via recurrence shift into the Stirling regime.
double log_gamma(double x);

// Psi(x) = d/dx ln Gamma(x) for x > 0, same recurrence-shift scheme.
double digamma(double x);

// Deterministic random stream. All transforms are built on raw engine
// draws so a (seed, algorithm) pair fixes every sample bit-for-bit.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1].
  double uniform_pos();
  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_int(std::uint64_t bound);
  // N(0, 1) via Box-Muller; each call consumes exactly two uniforms.
  double gaussian();
  double gaussian(double mu, double sigma) { return mu + sigma * gaussian(); }
  // Gamma(shape, 1) by Marsaglia-Tsang rejection; shape > 0.
  double gamma(double shape);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }
  // Dirichlet via normalized Gamma draws, done in log space so very small
  // concentrations cannot underflow to 0/0. Output sums to 1.
  void dirichlet(std::span<const double> alpha, std::span<double> out);
  // Index draw proportional to non-negative weights (need not sum to 1).
  std::size_t categorical(std::span<const double> weights);
  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stable stream derivation: distinct salts give unrelated substreams of a
// single user-facing seed, so every pipeline stage is independently seeded.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& salt);

}  // namespace comfp

#endif  // COMFP_NUMERICS_HPP_
