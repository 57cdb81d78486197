#ifndef COMFP_EXPERIMENT_HPP_
#define COMFP_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "comfp/comfp_model.hpp"
#include "comfp/metrics.hpp"
#include "comfp/mmsb_model.hpp"
#include "comfp/network.hpp"
#include "comfp/split.hpp"

namespace comfp {

struct ExperimentConfig {
  std::vector<std::string> models{"mmsb", "mmsb-c", "comfp"};
  double holdout_fraction = 0.1;
  SplitMode split_mode = SplitMode::kUniform;
  std::size_t eval_pool = 50;
  int degree_cap = 10;
  bool filter_popular = false;
  std::uint64_t seed = 1;
  MmsbConfig mmsb;
  ComfpConfig comfp;
  std::string out_dir;  // empty: compute only, write nothing
  std::string config_echo;
};

struct ModelLayerRow {
  std::string model;
  std::string layer;
  double map = 0.0;
  std::size_t n_users = 0;
  bool has_long_tail = false;
  double long_tail_map = 0.0;
  std::size_t n_long_tail = 0;
};

struct ExperimentResult {
  TrainTestSplit split;
  std::vector<ModelLayerRow> rows;
  std::vector<std::pair<std::string, double>> timings;  // model, seconds
  std::string candidate_hash;
  std::vector<std::string> notices;
};

// Hash of the evaluation candidate sets (held-out positives plus sampled
// negatives, per layer); models sharing a split share this value.
std::string candidate_set_hash(const TrainTestSplit& split);

// Report files under out_dir: report.csv (deterministic given the seed),
// timings.csv (wall-clock, excluded from determinism claims), summary.txt,
// and a degree histogram per layer.
struct ReportBundle {
  std::vector<ModelLayerRow> rows;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> summary_lines;
  std::string config_echo;
};
void write_report_files(const std::string& out_dir, const ReportBundle& bundle,
                        const CompositeNetwork& net);

// Full pipeline: optional popularity filter, split, negatives, one fit per
// requested model, ranking metrics per layer, reports. A model failure
// flushes partial results with a failure marker, then rethrows.
ExperimentResult run_experiment(const CompositeNetwork& net,
                                const ExperimentConfig& cfg);

}  // namespace comfp

#endif  // COMFP_EXPERIMENT_HPP_
