#ifndef COMFP_CHECKPOINT_HPP_
#define COMFP_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "comfp/mmsb_model.hpp"
#include "comfp/split.hpp"
#include "comfp/synthgen.hpp"

namespace comfp {

// Trained-model snapshot plus everything needed to recompute the exact
// train/test split it was fitted on. Text format "comfp-checkpoint v1",
// matrices written with enough digits to round-trip doubles exactly.
struct Checkpoint {
  std::string model;  // mmsb | mmsb-c | comfp
  std::string config_echo;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.1;
  SplitMode split_mode = SplitMode::kUniform;
  std::size_t eval_pool = 100;
  bool filter_popular = false;
  std::size_t n = 0;
  std::vector<std::string> layer_names;  // one per estimate
  std::vector<LayerEstimate> estimates;

  // Feature-model block, present for the comfp model only.
  bool has_hyper = false;
  int t = 0;
  double sigma_u = 1.0;
  double sigma_mh = 0.05;
  std::vector<double> sigma_d;
  std::vector<double> x;                    // n x t
  std::vector<std::vector<double>> lambda;  // per layer K x t
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// CSV trace: iteration, joint_log_density, mh_accept_rate, seconds.
void write_trace_csv(const std::string& path,
                     const std::vector<double>& joint_trace,
                     const std::vector<double>& accept_trace,
                     const std::vector<double>& seconds,
                     const std::string& config_echo);

// Generator ground truth, text format "comfp-truth v1".
void write_truth(const std::string& path, const PlantedTruth& truth,
                 const std::string& config_echo);
PlantedTruth read_truth(const std::string& path);

}  // namespace comfp

#endif  // COMFP_CHECKPOINT_HPP_
