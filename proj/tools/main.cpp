// Command-line front end: ingest, synth, train, eval, gradcheck.
// Exit codes: 0 success, 1 I/O or parse failure, 2 data-invariant
// violation, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "comfp/checkpoint.hpp"
#include "comfp/comfp_model.hpp"
#include "comfp/errors.hpp"
#include "comfp/experiment.hpp"
#include "comfp/gradcheck.hpp"
#include "comfp/metrics.hpp"
#include "comfp/mmsb_model.hpp"
#include "comfp/network.hpp"
#include "comfp/split.hpp"
#include "comfp/synthgen.hpp"

namespace {

using namespace comfp;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IoError("bad numeric value for " + what + ": '" + s + "'");
  }
  if (used != s.size()) {
    throw IoError("bad numeric value for " + what + ": '" + s + "'");
  }
  return v;
}

long long to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw IoError("bad integer value for " + what + ": '" + s + "'");
  }
  if (used != s.size()) {
    throw IoError("bad integer value for " + what + ": '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw IoError("bad seed value for " + what + ": '" + s + "'");
  }
  if (used != s.size()) {
    throw IoError("bad seed value for " + what + ": '" + s + "'");
  }
  return v;
}

std::string normalize_key(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

// "key value" lines; '#' starts a comment. Repeated keys keep every value.
std::vector<std::pair<std::string, std::string>> read_kv_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ss(line.substr(start));
    std::string key;
    ss >> key;
    std::string value;
    std::getline(ss, value);
    const std::size_t vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? std::string() : value.substr(vs);
    out.emplace_back(normalize_key(key), value);
  }
  return out;
}

using Setter = std::function<void(const std::string&)>;

// Config-file values fill in only the options the command line left unset.
void apply_config(CLI::App* sub, const std::string& config_path,
                  const std::map<std::string, Setter>& setters) {
  if (config_path.empty()) return;
  for (const auto& [key, value] : read_kv_file(config_path)) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw IoError("unknown config key '" + key + "' in " + config_path);
    }
    const std::string flag = "--" + key;
    if (sub->get_option_no_throw(flag) != nullptr && sub->count(flag) > 0) {
      continue;  // explicit flag wins
    }
    it->second(value);
  }
}

SplitMode parse_split_mode(const std::string& s) {
  if (s == "temporal") return SplitMode::kTemporal;
  if (s == "uniform") return SplitMode::kUniform;
  throw IoError("split-mode must be temporal or uniform, got '" + s + "'");
}

std::string split_mode_name(SplitMode m) {
  return m == SplitMode::kTemporal ? "temporal" : "uniform";
}

// ---------------------------------------------------------------- ingest

struct IngestOpts {
  std::string manifest;
  std::string config;
};

int run_ingest(const IngestOpts& opts) {
  if (opts.manifest.empty()) throw IoError("--manifest is required");
  const CompositeNetwork net = load_composite(opts.manifest);
  std::printf("users %zu\n", net.n_users());
  std::printf("layers %zu\n", net.layers.size());
  for (const LayerGraph& layer : net.layers) {
    std::printf("layer %s dyads %zu members %zu timestamps %s\n",
                layer.name.c_str(), layer.dyads.size(), layer.members.size(),
                layer.has_timestamps() ? "yes" : "no");
  }
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    for (std::size_t j = i + 1; j < net.layers.size(); ++j) {
      std::size_t overlap = 0;
      const auto& a = net.layers[i].members;
      const auto& b = net.layers[j].members;
      std::size_t pa = 0, pb = 0;
      while (pa < a.size() && pb < b.size()) {
        if (a[pa] < b[pb]) {
          ++pa;
        } else if (b[pb] < a[pa]) {
          ++pb;
        } else {
          ++overlap;
          ++pa;
          ++pb;
        }
      }
      std::printf("overlap %s %s %zu\n", net.layers[i].name.c_str(),
                  net.layers[j].name.c_str(), overlap);
    }
  }
  return 0;
}

// ----------------------------------------------------------------- synth

struct SynthOpts {
  std::string spec;
  std::string out_dir;
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_synth(const SynthOpts& opts) {
  if (opts.spec.empty()) throw IoError("--spec is required");
  if (opts.out_dir.empty()) throw IoError("--out-dir is required");

  std::string kind;
  std::size_t n = 0;
  int k = 4, t = 4;
  std::size_t candidates = 0;
  double alpha0 = 0.0, gamma0 = 1.0, gamma1 = 1.0;
  double density_ratio = 5.0, overlap_fraction = 0.5;
  long budget = 0;
  double sigma_u = 1.0, sigma_d = 1.0;
  std::uint64_t seed = 0;
  std::vector<SynthLayerSpec> layer_specs;

  for (const auto& [key, value] : read_kv_file(opts.spec)) {
    if (key == "kind") {
      kind = value;
    } else if (key == "n") {
      n = static_cast<std::size_t>(to_int(value, key));
    } else if (key == "k") {
      k = static_cast<int>(to_int(value, key));
    } else if (key == "t") {
      t = static_cast<int>(to_int(value, key));
    } else if (key == "candidates") {
      candidates = static_cast<std::size_t>(to_int(value, key));
    } else if (key == "alpha0") {
      alpha0 = to_double(value, key);
    } else if (key == "gamma0") {
      gamma0 = to_double(value, key);
    } else if (key == "gamma1") {
      gamma1 = to_double(value, key);
    } else if (key == "density-ratio") {
      density_ratio = to_double(value, key);
    } else if (key == "overlap-fraction") {
      overlap_fraction = to_double(value, key);
    } else if (key == "budget") {
      budget = static_cast<long>(to_int(value, key));
    } else if (key == "sigma-u") {
      sigma_u = to_double(value, key);
    } else if (key == "sigma-d") {
      sigma_d = to_double(value, key);
    } else if (key == "seed") {
      seed = to_u64(value, key);
    } else if (key == "layer") {
      std::istringstream ss(value);
      SynthLayerSpec spec;
      long long cand = 0;
      ss >> spec.name >> spec.k >> cand;
      if (ss.fail() || cand < 1) {
        throw IoError("bad layer line in " + opts.spec + ": '" + value + "'");
      }
      spec.candidates = static_cast<std::size_t>(cand);
      layer_specs.push_back(spec);
    } else {
      throw IoError("unknown spec key '" + key + "' in " + opts.spec);
    }
  }
  if (opts.seed_set) seed = opts.seed;

  SynthResult result;
  std::string echo = "synth kind=" + kind + " n=" + std::to_string(n);
  if (kind == "sparse_dense") {
    echo += " k=" + std::to_string(k) + " t=" + std::to_string(t) +
            " density_ratio=" + fmt_double(density_ratio) +
            " overlap_fraction=" + fmt_double(overlap_fraction) +
            " budget=" + std::to_string(budget);
    result = plant_sparse_dense_pair(n, k, t, density_ratio,
                                     overlap_fraction, seed, budget);
  } else if (kind == "comfp") {
    if (layer_specs.empty()) {
      throw IoError("kind comfp needs at least one 'layer <name> <k> "
                    "<candidates>' line");
    }
    echo += " t=" + std::to_string(t) + " sigma_u=" + fmt_double(sigma_u) +
            " sigma_d=" + fmt_double(sigma_d);
    for (const SynthLayerSpec& s : layer_specs) {
      echo += " layer=" + s.name + ":" + std::to_string(s.k) + ":" +
              std::to_string(s.candidates);
    }
    result = generate_comfp(n, layer_specs, t, sigma_u, sigma_d, seed);
  } else if (kind == "mmsb") {
    echo += " k=" + std::to_string(k) +
            " candidates=" + std::to_string(candidates) +
            " alpha0=" + fmt_double(alpha0 > 0.0 ? alpha0 : 1.0 / k) +
            " gamma0=" + fmt_double(gamma0) + " gamma1=" + fmt_double(gamma1);
    result = generate_mmsb(n, k, candidates,
                           alpha0 > 0.0 ? alpha0 : 1.0 / k, gamma0, gamma1,
                           seed);
  } else {
    throw IoError("spec kind must be sparse_dense, comfp, or mmsb");
  }
  echo += " seed=" + std::to_string(seed);

  const std::filesystem::path dir(opts.out_dir);
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (const LayerGraph& layer : result.net.layers) {
    const std::string path =
        std::filesystem::absolute(dir / (layer.name + ".edges")).string();
    write_edge_list(path, layer, result.net.roster, echo);
    entries.push_back({layer.name, path, layer.has_timestamps()});
  }
  const std::string manifest_path = (dir / "manifest.txt").string();
  write_manifest(manifest_path, entries, echo);
  write_truth((dir / "truth.txt").string(), result.truth, echo);

  std::printf("wrote %s\n", manifest_path.c_str());
  for (const LayerGraph& layer : result.net.layers) {
    std::printf("layer %s positives %zu members %zu\n", layer.name.c_str(),
                layer.dyads.size(), layer.members.size());
  }
  return 0;
}

// ----------------------------------------------------------------- train

struct TrainOpts {
  std::string manifest;
  std::string model = "comfp";
  int k = 25;
  int t = 25;
  int iters = 500;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.1;
  std::string split_mode = "temporal";
  bool filter_popular = false;
  double sigma_u = 1.0;
  double sigma_d = 1.0;
  double sigma_mh = 0.05;
  std::string out_dir;
  std::string config;
  // Config-file-only knobs.
  std::size_t eval_pool = 100;
  int hyper_period = 10;
  int lbfgs_iters = 10;
  double alpha0 = 0.0;
  double gamma0 = 1.0;
  double gamma1 = 1.0;
};

std::string train_echo(const TrainOpts& o) {
  std::string e = "train manifest=" + o.manifest + " model=" + o.model +
                  " k=" + std::to_string(o.k) + " t=" + std::to_string(o.t) +
                  " iters=" + std::to_string(o.iters) +
                  " seed=" + std::to_string(o.seed) +
                  " holdout_fraction=" + fmt_double(o.holdout_fraction) +
                  " split_mode=" + o.split_mode +
                  " filter_popular=" + (o.filter_popular ? "1" : "0") +
                  " sigma_u=" + fmt_double(o.sigma_u) +
                  " sigma_d=" + fmt_double(o.sigma_d) +
                  " sigma_mh=" + fmt_double(o.sigma_mh) +
                  " eval_pool=" + std::to_string(o.eval_pool) +
                  " hyper_period=" + std::to_string(o.hyper_period) +
                  " out_dir=" + o.out_dir;
  return e;
}

int run_train(const TrainOpts& opts) {
  if (opts.manifest.empty()) throw IoError("--manifest is required");
  if (opts.out_dir.empty()) throw IoError("--out-dir is required");
  if (opts.model != "mmsb" && opts.model != "mmsb-c" &&
      opts.model != "comfp") {
    throw IoError("--model must be mmsb, mmsb-c, or comfp");
  }
  const SplitMode mode = parse_split_mode(opts.split_mode);
  const std::string echo = train_echo(opts);

  CompositeNetwork net = load_composite(opts.manifest);
  if (opts.filter_popular) {
    net = filter_popular_users(net);
    net = assemble_composite(net.roster, net.layers);
  }
  const std::size_t n = net.n_users();

  TrainTestSplit split =
      holdout_split(net, opts.holdout_fraction, mode, opts.seed);
  sample_negatives(net, split, opts.eval_pool, opts.seed);

  Checkpoint ckpt;
  ckpt.model = opts.model;
  ckpt.config_echo = echo;
  ckpt.seed = opts.seed;
  ckpt.holdout_fraction = opts.holdout_fraction;
  ckpt.split_mode = mode;
  ckpt.eval_pool = opts.eval_pool;
  ckpt.filter_popular = opts.filter_popular;
  ckpt.n = n;

  const std::filesystem::path dir(opts.out_dir);
  std::filesystem::create_directories(dir);

  if (opts.model == "comfp") {
    ComfpConfig cfg;
    cfg.k = opts.k;
    cfg.t = opts.t;
    cfg.iterations = opts.iters;
    cfg.hyper_period = opts.hyper_period;
    cfg.lbfgs_iterations = opts.lbfgs_iters;
    cfg.sigma_u = opts.sigma_u;
    cfg.sigma_d = opts.sigma_d;
    cfg.sigma_mh = opts.sigma_mh;
    cfg.seed = derive_seed(opts.seed, "fit:comfp");
    ComfpFit fit = fit_comfp(split, n, cfg);
    ckpt.estimates = fit.estimates;
    for (const LayerGraph& layer : net.layers) {
      ckpt.layer_names.push_back(layer.name);
    }
    ckpt.has_hyper = true;
    ckpt.t = fit.hyper.T;
    ckpt.sigma_u = fit.hyper.sigma_u;
    ckpt.sigma_mh = fit.hyper.sigma_mh;
    ckpt.sigma_d = fit.hyper.sigma_d;
    ckpt.x = fit.hyper.x;
    ckpt.lambda = fit.hyper.lambda;
    write_trace_csv((dir / "trace.csv").string(), fit.joint_trace,
                    fit.accept_trace, fit.iter_seconds, echo);
    std::printf("iterations %d converged %d optimizer_warnings %d\n",
                fit.iterations_run, fit.converged_early ? 1 : 0,
                fit.optimizer_warnings);
  } else if (opts.model == "mmsb") {
    for (std::size_t d = 0; d < net.layers.size(); ++d) {
      MmsbConfig cfg;
      cfg.k = opts.k;
      cfg.alpha0 = opts.alpha0;
      cfg.gamma0 = opts.gamma0;
      cfg.gamma1 = opts.gamma1;
      cfg.iterations = opts.iters;
      cfg.seed = derive_seed(opts.seed, "fit:mmsb:" + std::to_string(d));
      ckpt.estimates.push_back(fit_mmsb(split.layers[d], n, cfg));
      ckpt.layer_names.push_back(net.layers[d].name);
    }
  } else {  // mmsb-c
    const LayerSplit merged = merge_layer_splits(split);
    MmsbConfig cfg;
    cfg.k = opts.k;
    cfg.alpha0 = opts.alpha0;
    cfg.gamma0 = opts.gamma0;
    cfg.gamma1 = opts.gamma1;
    cfg.iterations = opts.iters;
    cfg.seed = derive_seed(opts.seed, "fit:mmsb-c");
    ckpt.estimates.push_back(fit_mmsb(merged, n, cfg));
    ckpt.layer_names.push_back("merged");
  }

  const std::string ckpt_path = (dir / "checkpoint.txt").string();
  write_checkpoint(ckpt_path, ckpt);
  std::printf("wrote %s\n", ckpt_path.c_str());
  return 0;
}

// ------------------------------------------------------------------ eval

struct EvalOpts {
  std::string checkpoint;
  std::string manifest;
  std::string out_dir;
  std::string config;
  int degree_cap = 10;
};

int run_eval(const EvalOpts& opts) {
  if (opts.checkpoint.empty()) throw IoError("--checkpoint is required");
  if (opts.manifest.empty()) throw IoError("--manifest is required");
  if (opts.out_dir.empty()) throw IoError("--out-dir is required");

  const Checkpoint ckpt = read_checkpoint(opts.checkpoint);
  CompositeNetwork net = load_composite(opts.manifest);
  if (ckpt.filter_popular) {
    net = filter_popular_users(net);
    net = assemble_composite(net.roster, net.layers);
  }
  if (net.n_users() != ckpt.n) {
    throw InvariantViolation(
        "checkpoint was trained on " + std::to_string(ckpt.n) +
        " users but the manifest resolves to " +
        std::to_string(net.n_users()));
  }
  if (ckpt.model != "mmsb-c" &&
      ckpt.estimates.size() != net.layers.size()) {
    throw InvariantViolation(
        "checkpoint holds " + std::to_string(ckpt.estimates.size()) +
        " layer estimates but the manifest has " +
        std::to_string(net.layers.size()) + " layers");
  }

  const std::string echo =
      "eval checkpoint=" + opts.checkpoint + " manifest=" + opts.manifest +
      " degree_cap=" + std::to_string(opts.degree_cap) +
      " out_dir=" + opts.out_dir;

  TrainTestSplit split =
      holdout_split(net, ckpt.holdout_fraction, ckpt.split_mode, ckpt.seed);
  sample_negatives(net, split, ckpt.eval_pool, ckpt.seed);

  ReportBundle bundle;
  bundle.config_echo = echo;
  bundle.summary_lines.push_back("n " + std::to_string(net.n_users()));
  bundle.summary_lines.push_back("layers " +
                                 std::to_string(net.layers.size()));
  std::vector<std::string> notices;

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t d = 0; d < net.layers.size(); ++d) {
    const LayerSplit& ls = split.layers[d];
    bundle.summary_lines.push_back(
        "layer " + net.layers[d].name + " train_pos " +
        std::to_string(ls.train_pos.size()) + " heldout_pos " +
        std::to_string(ls.heldout_pos.size()) + " train_neg " +
        std::to_string(ls.train_neg.size()));
    if (ls.heldout_pos.empty()) {
      notices.push_back("layer " + net.layers[d].name +
                        " omitted: no held-out positives");
      continue;
    }
    const LayerEstimate& est =
        ckpt.model == "mmsb-c" ? ckpt.estimates[0] : ckpt.estimates[d];
    const LayerMetrics metrics = evaluate_layer(
        [&est](UserIndex a, UserIndex b) { return score_dyad(est, a, b); },
        ls, net.n_users(), opts.degree_cap);
    ModelLayerRow row;
    row.model = ckpt.model;
    row.layer = net.layers[d].name;
    row.map = metrics.map;
    row.n_users = metrics.n_users;
    row.has_long_tail = metrics.n_long_tail > 0;
    row.long_tail_map = metrics.long_tail_map;
    row.n_long_tail = metrics.n_long_tail;
    bundle.rows.push_back(row);
    if (!row.has_long_tail) {
      notices.push_back(ckpt.model + "/" + row.layer +
                        ": no long-tail users");
    }
  }
  bundle.timings.emplace_back(
      ckpt.model,
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count());
  bundle.summary_lines.push_back("model " + ckpt.model +
                                 " candidate_set_hash " +
                                 candidate_set_hash(split));
  for (const std::string& notice : notices) {
    bundle.summary_lines.push_back("notice " + notice);
  }

  write_report_files(opts.out_dir, bundle, net);
  std::printf("wrote %s\n",
              (std::filesystem::path(opts.out_dir) / "report.csv").c_str());
  return 0;
}

// ------------------------------------------------------------- gradcheck

struct GradcheckOpts {
  int instances = 20;
  std::uint64_t seed = 0;
  std::string config;
};

int run_gradcheck(const GradcheckOpts& opts) {
  const std::vector<GradCheckRow> rows =
      gradient_certification(opts.instances, opts.seed);
  std::printf("instance n layers k t lambda_rel_err x_rel_err\n");
  double worst_lambda = 0.0, worst_x = 0.0;
  for (const GradCheckRow& row : rows) {
    std::printf("%d %zu %d %d %d %.3e %.3e\n", row.instance, row.n,
                row.layers, row.k, row.t, row.lambda_err, row.x_err);
    worst_lambda = std::max(worst_lambda, row.lambda_err);
    worst_x = std::max(worst_x, row.x_err);
  }
  std::printf("max lambda_rel_err %.3e\n", worst_lambda);
  std::printf("max x_rel_err %.3e\n", worst_x);
  const bool pass = worst_lambda < 1e-4 && worst_x < 1e-4;
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  if (!pass) {
    throw NumericError("analytic gradients deviate from finite differences");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective friendship prediction on composite networks"};
  app.require_subcommand(1);

  IngestOpts ingest_opts;
  CLI::App* ingest = app.add_subcommand(
      "ingest", "Validate a composite-network manifest and print a summary");
  ingest->add_option("--manifest", ingest_opts.manifest, "manifest file");
  ingest->add_option("--config", ingest_opts.config, "key-value config file");
  const std::map<std::string, Setter> ingest_setters{
      {"manifest", [&](const std::string& v) { ingest_opts.manifest = v; }},
  };

  SynthOpts synth_opts;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic composite network with ground truth");
  synth->add_option("--spec", synth_opts.spec, "generator spec file");
  synth->add_option("--out-dir", synth_opts.out_dir, "output directory");
  synth->add_option("--seed", synth_opts.seed, "seed override");
  synth->add_option("--config", synth_opts.config, "key-value config file");
  const std::map<std::string, Setter> synth_setters{
      {"spec", [&](const std::string& v) { synth_opts.spec = v; }},
      {"out-dir", [&](const std::string& v) { synth_opts.out_dir = v; }},
      {"seed",
       [&](const std::string& v) {
         synth_opts.seed = to_u64(v, "seed");
         synth_opts.seed_set = true;
       }},
  };

  TrainOpts train_opts;
  CLI::App* train = app.add_subcommand(
      "train", "Fit a model on the train side of a seeded hold-out split");
  train->add_option("--manifest", train_opts.manifest, "manifest file");
  train->add_option("--model", train_opts.model, "mmsb | mmsb-c | comfp");
  train->add_option("--k", train_opts.k, "communities per layer");
  train->add_option("--t", train_opts.t, "latent feature dimension");
  train->add_option("--iters", train_opts.iters, "sampler iterations");
  train->add_option("--seed", train_opts.seed, "run seed");
  train->add_option("--holdout-fraction", train_opts.holdout_fraction,
                    "held-out fraction of each layer's dyads");
  train->add_option("--split-mode", train_opts.split_mode,
                    "temporal | uniform");
  train->add_flag("--filter-popular", train_opts.filter_popular,
                  "drop users with outlying cross-layer degree");
  train->add_option("--sigma-u", train_opts.sigma_u, "user feature scale");
  train->add_option("--sigma-d", train_opts.sigma_d, "layer mapping scale");
  train->add_option("--sigma-mh", train_opts.sigma_mh, "MH proposal scale");
  train->add_option("--out-dir", train_opts.out_dir, "output directory");
  train->add_option("--config", train_opts.config, "key-value config file");
  const std::map<std::string, Setter> train_setters{
      {"manifest", [&](const std::string& v) { train_opts.manifest = v; }},
      {"model", [&](const std::string& v) { train_opts.model = v; }},
      {"k",
       [&](const std::string& v) {
         train_opts.k = static_cast<int>(to_int(v, "k"));
       }},
      {"t",
       [&](const std::string& v) {
         train_opts.t = static_cast<int>(to_int(v, "t"));
       }},
      {"iters",
       [&](const std::string& v) {
         train_opts.iters = static_cast<int>(to_int(v, "iters"));
       }},
      {"seed",
       [&](const std::string& v) { train_opts.seed = to_u64(v, "seed"); }},
      {"holdout-fraction",
       [&](const std::string& v) {
         train_opts.holdout_fraction = to_double(v, "holdout-fraction");
       }},
      {"split-mode",
       [&](const std::string& v) { train_opts.split_mode = v; }},
      {"filter-popular",
       [&](const std::string& v) {
         train_opts.filter_popular = to_int(v, "filter-popular") != 0;
       }},
      {"sigma-u",
       [&](const std::string& v) {
         train_opts.sigma_u = to_double(v, "sigma-u");
       }},
      {"sigma-d",
       [&](const std::string& v) {
         train_opts.sigma_d = to_double(v, "sigma-d");
       }},
      {"sigma-mh",
       [&](const std::string& v) {
         train_opts.sigma_mh = to_double(v, "sigma-mh");
       }},
      {"out-dir", [&](const std::string& v) { train_opts.out_dir = v; }},
      {"eval-pool",
       [&](const std::string& v) {
         train_opts.eval_pool = static_cast<std::size_t>(
             to_int(v, "eval-pool"));
       }},
      {"hyper-period",
       [&](const std::string& v) {
         train_opts.hyper_period = static_cast<int>(to_int(v, "hyper-period"));
       }},
      {"lbfgs-iters",
       [&](const std::string& v) {
         train_opts.lbfgs_iters = static_cast<int>(to_int(v, "lbfgs-iters"));
       }},
      {"alpha0",
       [&](const std::string& v) { train_opts.alpha0 = to_double(v, "alpha0"); }},
      {"gamma0",
       [&](const std::string& v) { train_opts.gamma0 = to_double(v, "gamma0"); }},
      {"gamma1",
       [&](const std::string& v) { train_opts.gamma1 = to_double(v, "gamma1"); }},
  };

  EvalOpts eval_opts;
  CLI::App* eval = app.add_subcommand(
      "eval", "Rank held-out positives against sampled negatives");
  eval->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint file");
  eval->add_option("--manifest", eval_opts.manifest, "manifest file");
  eval->add_option("--out-dir", eval_opts.out_dir, "output directory");
  eval->add_option("--degree-cap", eval_opts.degree_cap,
                   "long-tail train-degree threshold");
  eval->add_option("--config", eval_opts.config, "key-value config file");
  const std::map<std::string, Setter> eval_setters{
      {"checkpoint", [&](const std::string& v) { eval_opts.checkpoint = v; }},
      {"manifest", [&](const std::string& v) { eval_opts.manifest = v; }},
      {"out-dir", [&](const std::string& v) { eval_opts.out_dir = v; }},
      {"degree-cap",
       [&](const std::string& v) {
         eval_opts.degree_cap = static_cast<int>(to_int(v, "degree-cap"));
       }},
  };

  GradcheckOpts grad_opts;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck",
      "Certify analytic gradients against central finite differences");
  gradcheck->add_option("--instances", grad_opts.instances,
                        "random instances to test");
  gradcheck->add_option("--seed", grad_opts.seed, "instance seed");
  gradcheck->add_option("--config", grad_opts.config, "key-value config file");
  const std::map<std::string, Setter> grad_setters{
      {"instances",
       [&](const std::string& v) {
         grad_opts.instances = static_cast<int>(to_int(v, "instances"));
       }},
      {"seed",
       [&](const std::string& v) { grad_opts.seed = to_u64(v, "seed"); }},
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (ingest->parsed()) {
      apply_config(ingest, ingest_opts.config, ingest_setters);
      return run_ingest(ingest_opts);
    }
    if (synth->parsed()) {
      synth_opts.seed_set = synth->count("--seed") > 0;
      apply_config(synth, synth_opts.config, synth_setters);
      return run_synth(synth_opts);
    }
    if (train->parsed()) {
      apply_config(train, train_opts.config, train_setters);
      return run_train(train_opts);
    }
    if (eval->parsed()) {
      apply_config(eval, eval_opts.config, eval_setters);
      return run_eval(eval_opts);
    }
    if (gradcheck->parsed()) {
      apply_config(gradcheck, grad_opts.config, grad_setters);
      return run_gradcheck(grad_opts);
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
