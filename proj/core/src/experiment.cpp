#include "comfp/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "comfp/errors.hpp"

namespace comfp {

namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

std::string fmt_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

}  // namespace

std::string candidate_set_hash(const TrainTestSplit& split) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t d = 0; d < split.layers.size(); ++d) {
    const std::uint32_t dd = static_cast<std::uint32_t>(d);
    for (const Dyad& dy : split.layers[d].heldout_pos) {
      hash_bytes(h, &dd, sizeof(dd));
      hash_bytes(h, &dy.a, sizeof(dy.a));
      hash_bytes(h, &dy.b, sizeof(dy.b));
    }
    for (const auto& [user, dyads] : split.layers[d].eval_neg) {
      hash_bytes(h, &dd, sizeof(dd));
      hash_bytes(h, &user, sizeof(user));
      for (const Dyad& dy : dyads) {
        hash_bytes(h, &dy.a, sizeof(dy.a));
        hash_bytes(h, &dy.b, sizeof(dy.b));
      }
    }
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_report_files(const std::string& out_dir, const ReportBundle& bundle,
                        const CompositeNetwork& net) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  {
    std::ofstream out = open_out(dir / "report.csv");
    if (!bundle.config_echo.empty()) out << "# " << bundle.config_echo << '\n';
    out << "model,layer,map,long_tail_map,n_users_evaluated\n";
    for (const ModelLayerRow& row : bundle.rows) {
      out << row.model << ',' << row.layer << ',' << fmt_metric(row.map)
          << ',' << (row.has_long_tail ? fmt_metric(row.long_tail_map) : "")
          << ',' << row.n_users << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "timings.csv");
    if (!bundle.config_echo.empty()) out << "# " << bundle.config_echo << '\n';
    out << "model,seconds\n";
    char buf[64];
    for (const auto& [model, seconds] : bundle.timings) {
      std::snprintf(buf, sizeof(buf), "%.6f", seconds);
      out << model << ',' << buf << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "summary.txt");
    if (!bundle.config_echo.empty()) out << "# " << bundle.config_echo << '\n';
    for (const std::string& line : bundle.summary_lines) out << line << '\n';
  }
  for (const LayerGraph& layer : net.layers) {
    write_degree_histogram((dir / ("degree_hist_" + layer.name + ".csv"))
                               .string(),
                           layer, bundle.config_echo);
  }
}

ExperimentResult run_experiment(const CompositeNetwork& net,
                                const ExperimentConfig& cfg) {
  CompositeNetwork working = net;
  if (cfg.filter_popular) {
    working = filter_popular_users(working);
    // Re-validate pairwise overlap, which filtering may have destroyed.
    working = assemble_composite(working.roster, working.layers);
  }
  const std::size_t n = working.n_users();

  ExperimentResult res;
  res.split = holdout_split(working, cfg.holdout_fraction, cfg.split_mode,
                            cfg.seed);
  sample_negatives(working, res.split, cfg.eval_pool, cfg.seed);
  res.candidate_hash = candidate_set_hash(res.split);

  ReportBundle bundle;
  bundle.config_echo = cfg.config_echo;
  bundle.summary_lines.push_back("n " + std::to_string(n));
  bundle.summary_lines.push_back("layers " +
                                 std::to_string(working.layers.size()));
  for (std::size_t d = 0; d < working.layers.size(); ++d) {
    const LayerSplit& ls = res.split.layers[d];
    bundle.summary_lines.push_back(
        "layer " + working.layers[d].name + " train_pos " +
        std::to_string(ls.train_pos.size()) + " heldout_pos " +
        std::to_string(ls.heldout_pos.size()) + " train_neg " +
        std::to_string(ls.train_neg.size()));
    if (ls.heldout_pos.empty()) {
      res.notices.push_back("layer " + working.layers[d].name +
                            " omitted: no held-out positives");
    }
  }

  auto flush = [&]() {
    bundle.rows = res.rows;
    bundle.timings = res.timings;
    for (const std::string& notice : res.notices) {
      bundle.summary_lines.push_back("notice " + notice);
    }
    if (!cfg.out_dir.empty()) {
      write_report_files(cfg.out_dir, bundle, working);
    }
  };

  for (const std::string& model : cfg.models) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      std::vector<LayerEstimate> estimates;
      if (model == "mmsb") {
        for (std::size_t d = 0; d < working.layers.size(); ++d) {
          MmsbConfig mc = cfg.mmsb;
          mc.seed = derive_seed(cfg.seed, "fit:mmsb:" + std::to_string(d));
          estimates.push_back(fit_mmsb(res.split.layers[d], n, mc));
        }
      } else if (model == "mmsb-c") {
        const LayerSplit merged = merge_layer_splits(res.split);
        MmsbConfig mc = cfg.mmsb;
        mc.seed = derive_seed(cfg.seed, "fit:mmsb-c");
        const LayerEstimate est = fit_mmsb(merged, n, mc);
        estimates.assign(working.layers.size(), est);
      } else if (model == "comfp") {
        ComfpConfig cc = cfg.comfp;
        cc.seed = derive_seed(cfg.seed, "fit:comfp");
        ComfpFit fit = fit_comfp(res.split, n, cc);
        estimates = std::move(fit.estimates);
        if (fit.optimizer_warnings > 0) {
          res.notices.push_back(model + ": " +
                                std::to_string(fit.optimizer_warnings) +
                                " optimizer warnings");
        }
      } else {
        throw InvariantViolation("unknown model " + model);
      }

      for (std::size_t d = 0; d < working.layers.size(); ++d) {
        if (res.split.layers[d].heldout_pos.empty()) continue;
        const LayerEstimate& est = estimates[d];
        const LayerMetrics metrics = evaluate_layer(
            [&est](UserIndex a, UserIndex b) { return score_dyad(est, a, b); },
            res.split.layers[d], n, cfg.degree_cap);
        ModelLayerRow row;
        row.model = model;
        row.layer = working.layers[d].name;
        row.map = metrics.map;
        row.n_users = metrics.n_users;
        row.has_long_tail = metrics.n_long_tail > 0;
        row.long_tail_map = metrics.long_tail_map;
        row.n_long_tail = metrics.n_long_tail;
        res.rows.push_back(row);
        if (!row.has_long_tail) {
          res.notices.push_back(model + "/" + row.layer +
                                ": no long-tail users");
        }
      }
      res.timings.emplace_back(
          model, std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count());
    } catch (const std::exception& e) {
      res.timings.emplace_back(
          model, std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
                     .count());
      res.notices.push_back("FAILED " + model + ": " + e.what());
      flush();
      throw;
    }
  }

  for (const std::string& model : cfg.models) {
    bundle.summary_lines.push_back("model " + model + " candidate_set_hash " +
                                   res.candidate_hash);
  }
  flush();
  return res;
}

}  // namespace comfp
