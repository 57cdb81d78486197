#ifndef COMFP_GRADCHECK_HPP_
#define COMFP_GRADCHECK_HPP_

#include <cstdint>
#include <vector>

#include "comfp/comfp_model.hpp"

namespace comfp {

// One certification instance: the largest scaled deviation between the
// analytic gradients and central finite differences of joint_log_density,
// err = max_j |analytic_j - numeric_j| / max(1, |numeric_j|).
struct GradCheckRow {
  int instance = 0;
  std::size_t n = 0;
  int layers = 0;
  int k = 0;
  int t = 0;
  double lambda_err = 0.0;
  double x_err = 0.0;
};

// Builds `instances` random small problems (n <= 10, K <= 4, T <= 4, 1-2
// layers) and certifies grad_lambda on every layer plus grad_x on two
// users each. Deterministic in `seed`.
std::vector<GradCheckRow> gradient_certification(int instances,
                                                 std::uint64_t seed);

}  // namespace comfp

#endif  // COMFP_GRADCHECK_HPP_
