#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>
#include <vector>

#include "comfp/errors.hpp"
#include "comfp/experiment.hpp"
#include "comfp/synthgen.hpp"
#include "support/tempdir.hpp"

using namespace comfp;
using comfp_tests::TempDir;
using comfp_tests::slurp;

namespace {

CompositeNetwork small_net() {
  return plant_sparse_dense_pair(50, 2, 2, 4.0, 0.6, 99).net;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.holdout_fraction = 0.2;
  cfg.eval_pool = 10;
  cfg.degree_cap = 3;
  cfg.seed = 17;
  cfg.mmsb.k = 2;
  cfg.mmsb.iterations = 8;
  cfg.comfp.k = 2;
  cfg.comfp.t = 2;
  cfg.comfp.iterations = 8;
  cfg.comfp.hyper_period = 4;
  cfg.comfp.sigma_mh = 0.1;
  return cfg;
}

bool rows_equal(const std::vector<ModelLayerRow>& a,
                const std::vector<ModelLayerRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].model != b[i].model || a[i].layer != b[i].layer ||
        a[i].map != b[i].map || a[i].n_users != b[i].n_users ||
        a[i].has_long_tail != b[i].has_long_tail ||
        a[i].long_tail_map != b[i].long_tail_map ||
        a[i].n_long_tail != b[i].n_long_tail) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("experiment produces one row per model and evaluated layer") {
  const CompositeNetwork net = small_net();
  const ExperimentResult res = run_experiment(net, small_config());

  // Which layers kept held-out positives is visible in the rows themselves;
  // each fitted model must cover exactly the same layer set.
  std::vector<std::string> layers_seen;
  for (const ModelLayerRow& row : res.rows) {
    if (row.model != "mmsb") continue;
    layers_seen.push_back(row.layer);
  }
  REQUIRE(!layers_seen.empty());
  for (const std::string& model : {"mmsb", "mmsb-c", "comfp"}) {
    std::vector<std::string> got;
    for (const ModelLayerRow& row : res.rows) {
      if (row.model == model) got.push_back(row.layer);
    }
    CHECK(got == layers_seen);
  }
  CHECK(res.rows.size() == 3 * layers_seen.size());

  for (const ModelLayerRow& row : res.rows) {
    CHECK(row.map >= 0.0);
    CHECK(row.map <= 1.0);
    CHECK(row.n_users > 0);
    if (row.has_long_tail) {
      CHECK(row.long_tail_map >= 0.0);
      CHECK(row.long_tail_map <= 1.0);
      CHECK(row.n_long_tail > 0);
    }
  }

  REQUIRE(res.timings.size() == 3);
  CHECK(res.timings[0].first == "mmsb");
  CHECK(res.timings[1].first == "mmsb-c");
  CHECK(res.timings[2].first == "comfp");
  for (const auto& [model, seconds] : res.timings) CHECK(seconds >= 0.0);

  CHECK(res.candidate_hash.size() == 16);
  for (char c : res.candidate_hash) {
    CHECK(std::isxdigit(static_cast<unsigned char>(c)));
  }
}

TEST_CASE("experiment rows and hash are seed-deterministic") {
  const CompositeNetwork net = small_net();
  const ExperimentConfig cfg = small_config();
  const ExperimentResult r1 = run_experiment(net, cfg);
  const ExperimentResult r2 = run_experiment(net, cfg);
  CHECK(rows_equal(r1.rows, r2.rows));
  CHECK(r1.candidate_hash == r2.candidate_hash);

  ExperimentConfig other = cfg;
  other.seed = 18;
  const ExperimentResult r3 = run_experiment(net, other);
  CHECK(r3.candidate_hash != r1.candidate_hash);
}

TEST_CASE("experiment writes the full report bundle") {
  const CompositeNetwork net = small_net();
  ExperimentConfig cfg = small_config();
  cfg.config_echo = "train --seed 17";

  TempDir dir1("exp1");
  cfg.out_dir = dir1.path();
  const ExperimentResult res = run_experiment(net, cfg);

  for (const char* name :
       {"report.csv", "timings.csv", "summary.txt", "degree_hist_dense.csv",
        "degree_hist_sparse.csv"}) {
    CHECK(std::filesystem::exists(dir1.file(name)));
  }

  const std::string report = slurp(dir1.file("report.csv"));
  CHECK(report.rfind("# train --seed 17\n", 0) == 0);
  CHECK(report.find("model,layer,map,long_tail_map,n_users_evaluated\n") !=
        std::string::npos);
  for (const ModelLayerRow& row : res.rows) {
    CHECK(report.find(row.model + "," + row.layer + ",") != std::string::npos);
  }

  const std::string summary = slurp(dir1.file("summary.txt"));
  CHECK(summary.find("n 50") != std::string::npos);
  CHECK(summary.find("layers 2") != std::string::npos);
  CHECK(summary.find("model comfp candidate_set_hash " + res.candidate_hash) !=
        std::string::npos);

  const std::string timings = slurp(dir1.file("timings.csv"));
  CHECK(timings.find("model,seconds\n") != std::string::npos);
  CHECK(timings.find("comfp,") != std::string::npos);

  // The ranking side of the report is reproducible across reruns; only
  // timings.csv may differ.
  TempDir dir2("exp2");
  cfg.out_dir = dir2.path();
  run_experiment(net, cfg);
  CHECK(slurp(dir2.file("report.csv")) == report);
  CHECK(slurp(dir2.file("summary.txt")) == summary);
}

TEST_CASE("unknown model fails loudly but flushes partial results") {
  const CompositeNetwork net = small_net();
  ExperimentConfig cfg = small_config();
  cfg.models = {"mmsb", "nope"};
  TempDir dir("exp-fail");
  cfg.out_dir = dir.path();

  CHECK_THROWS_WITH_AS(run_experiment(net, cfg),
                       doctest::Contains("unknown model nope"),
                       InvariantViolation);
  REQUIRE(std::filesystem::exists(dir.file("summary.txt")));
  const std::string summary = slurp(dir.file("summary.txt"));
  CHECK(summary.find("FAILED nope") != std::string::npos);
  // The model that did finish still reached the report.
  const std::string report = slurp(dir.file("report.csv"));
  CHECK(report.find("mmsb,") != std::string::npos);
}
