#include "comfp/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "comfp/errors.hpp"

namespace comfp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix(std::ofstream& out, const std::string& tag,
                  std::size_t rows, std::size_t cols,
                  const std::vector<double>& data) {
  out << tag << ' ' << rows << ' ' << cols << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ' ';
      out << fmt(data[r * cols + c]);
    }
    out << '\n';
  }
}

class LineReader {
 public:
  LineReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw IoError("cannot open " + path);
  }

  // Next non-comment line; comments accumulate into `echo`.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] == '#') {
        std::string body = line.substr(line.find_first_not_of("# "));
        if (echo.empty()) echo = body;
        continue;
      }
      if (line.empty()) continue;
      return true;
    }
    return false;
  }

  std::string expect(const std::string& keyword) {
    std::string line;
    if (!next(line)) {
      throw IoError(path_ + ": unexpected end of file, wanted " + keyword);
    }
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head != keyword) {
      throw IoError(path_ + ": expected '" + keyword + "', found '" + head +
                    "'");
    }
    std::string rest;
    std::getline(ss, rest);
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    return rest;
  }

  std::vector<double> matrix(const std::string& tag, std::size_t& rows,
                             std::size_t& cols) {
    std::istringstream head(expect(tag));
    head >> rows >> cols;
    if (head.fail()) throw IoError(path_ + ": bad " + tag + " header");
    std::vector<double> data;
    data.reserve(rows * cols);
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!next(line)) throw IoError(path_ + ": truncated " + tag);
      std::istringstream ss(line);
      for (std::size_t c = 0; c < cols; ++c) {
        double v;
        ss >> v;
        if (ss.fail()) throw IoError(path_ + ": bad value in " + tag);
        data.push_back(v);
      }
    }
    return data;
  }

  std::string echo;

 private:
  std::ifstream in_;
  std::string path_;
};

template <typename T>
T parse_one(const std::string& text, const std::string& what,
            const std::string& path) {
  std::istringstream ss(text);
  T v{};
  ss >> v;
  if (ss.fail()) throw IoError(path + ": bad " + what + " value");
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "comfp-checkpoint v1\n";
  if (!ckpt.config_echo.empty()) out << "# " << ckpt.config_echo << '\n';
  out << "model " << ckpt.model << '\n';
  out << "seed " << ckpt.seed << '\n';
  out << "holdout_fraction " << fmt(ckpt.holdout_fraction) << '\n';
  out << "split_mode "
      << (ckpt.split_mode == SplitMode::kTemporal ? "temporal" : "uniform")
      << '\n';
  out << "eval_pool " << ckpt.eval_pool << '\n';
  out << "filter_popular " << (ckpt.filter_popular ? 1 : 0) << '\n';
  out << "n " << ckpt.n << '\n';
  out << "layers " << ckpt.estimates.size() << '\n';
  for (std::size_t d = 0; d < ckpt.estimates.size(); ++d) {
    const LayerEstimate& est = ckpt.estimates[d];
    out << "layer " << d << ' ' << ckpt.layer_names[d] << ' ' << est.K
        << '\n';
    write_matrix(out, "pi", ckpt.n, est.K, est.pi);
    write_matrix(out, "b", est.K, est.K, est.b);
  }
  out << "hyper " << (ckpt.has_hyper ? 1 : 0) << '\n';
  if (ckpt.has_hyper) {
    out << "t " << ckpt.t << '\n';
    out << "sigma_u " << fmt(ckpt.sigma_u) << '\n';
    out << "sigma_mh " << fmt(ckpt.sigma_mh) << '\n';
    write_matrix(out, "sigma_d", 1, ckpt.sigma_d.size(), ckpt.sigma_d);
    write_matrix(out, "x", ckpt.n, ckpt.t, ckpt.x);
    for (std::size_t d = 0; d < ckpt.lambda.size(); ++d) {
      write_matrix(out, "lambda_" + std::to_string(d),
                   ckpt.lambda[d].size() / ckpt.t, ckpt.t, ckpt.lambda[d]);
    }
  }
  out << "end\n";
  if (!out) throw IoError("failed while writing " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line) || line != "comfp-checkpoint v1") {
    throw IoError(path + ": not a comfp-checkpoint v1 file");
  }
  Checkpoint ckpt;
  ckpt.model = in.expect("model");
  ckpt.seed = parse_one<std::uint64_t>(in.expect("seed"), "seed", path);
  ckpt.holdout_fraction =
      parse_one<double>(in.expect("holdout_fraction"), "fraction", path);
  const std::string mode = in.expect("split_mode");
  if (mode == "temporal") {
    ckpt.split_mode = SplitMode::kTemporal;
  } else if (mode == "uniform") {
    ckpt.split_mode = SplitMode::kUniform;
  } else {
    throw IoError(path + ": unknown split_mode " + mode);
  }
  ckpt.eval_pool =
      parse_one<std::size_t>(in.expect("eval_pool"), "eval_pool", path);
  ckpt.filter_popular =
      parse_one<int>(in.expect("filter_popular"), "filter_popular", path) != 0;
  ckpt.n = parse_one<std::size_t>(in.expect("n"), "n", path);
  const std::size_t n_layers =
      parse_one<std::size_t>(in.expect("layers"), "layers", path);
  for (std::size_t d = 0; d < n_layers; ++d) {
    std::istringstream head(in.expect("layer"));
    std::size_t idx;
    std::string name;
    int k;
    head >> idx >> name >> k;
    if (head.fail() || idx != d) throw IoError(path + ": bad layer header");
    ckpt.layer_names.push_back(name);
    LayerEstimate est;
    est.K = k;
    std::size_t rows, cols;
    est.pi = in.matrix("pi", rows, cols);
    if (rows != ckpt.n || cols != static_cast<std::size_t>(k)) {
      throw IoError(path + ": pi shape mismatch");
    }
    est.b = in.matrix("b", rows, cols);
    if (rows != static_cast<std::size_t>(k) ||
        cols != static_cast<std::size_t>(k)) {
      throw IoError(path + ": b shape mismatch");
    }
    ckpt.estimates.push_back(std::move(est));
  }
  ckpt.has_hyper = parse_one<int>(in.expect("hyper"), "hyper", path) != 0;
  if (ckpt.has_hyper) {
    ckpt.t = parse_one<int>(in.expect("t"), "t", path);
    ckpt.sigma_u = parse_one<double>(in.expect("sigma_u"), "sigma_u", path);
    ckpt.sigma_mh = parse_one<double>(in.expect("sigma_mh"), "sigma_mh", path);
    std::size_t rows, cols;
    ckpt.sigma_d = in.matrix("sigma_d", rows, cols);
    ckpt.x = in.matrix("x", rows, cols);
    if (rows != ckpt.n || cols != static_cast<std::size_t>(ckpt.t)) {
      throw IoError(path + ": x shape mismatch");
    }
    for (std::size_t d = 0; d < n_layers; ++d) {
      ckpt.lambda.push_back(
          in.matrix("lambda_" + std::to_string(d), rows, cols));
    }
  }
  in.expect("end");
  ckpt.config_echo = in.echo;
  return ckpt;
}

void write_trace_csv(const std::string& path,
                     const std::vector<double>& joint_trace,
                     const std::vector<double>& accept_trace,
                     const std::vector<double>& seconds,
                     const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!config_echo.empty()) out << "# " << config_echo << '\n';
  out << "iteration,joint_log_density,mh_accept_rate,seconds\n";
  char buf[96];
  for (std::size_t i = 0; i < joint_trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.6f,%.6f\n", i + 1,
                  joint_trace[i], i < accept_trace.size() ? accept_trace[i] : 0.0,
                  i < seconds.size() ? seconds[i] : 0.0);
    out << buf;
  }
  if (!out) throw IoError("failed while writing " + path);
}

void write_truth(const std::string& path, const PlantedTruth& truth,
                 const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "comfp-truth v1\n";
  if (!config_echo.empty()) out << "# " << config_echo << '\n';
  out << "n " << truth.n << '\n';
  out << "t " << truth.t << '\n';
  out << "labels " << truth.labels.size() << '\n';
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (i) out << ' ';
    out << truth.labels[i];
  }
  out << '\n';
  if (truth.t > 0) {
    write_matrix(out, "x", truth.n, truth.t, truth.x);
  }
  out << "layers " << truth.layers.size() << '\n';
  for (std::size_t d = 0; d < truth.layers.size(); ++d) {
    const PlantedLayer& L = truth.layers[d];
    out << "layer " << d << ' ' << L.name << ' ' << L.k << '\n';
    out << "members " << L.members.size() << '\n';
    for (std::size_t i = 0; i < L.members.size(); ++i) {
      if (i) out << ' ';
      out << L.members[i];
    }
    out << '\n';
    if (!L.lambda.empty()) {
      write_matrix(out, "lambda", L.k, truth.t, L.lambda);
    }
    write_matrix(out, "alpha", truth.n, L.k, L.alpha);
    write_matrix(out, "pi", truth.n, L.k, L.pi);
    write_matrix(out, "b", L.k, L.k, L.b);
    out << "candidates " << L.candidates.size() << '\n';
    for (std::size_t i = 0; i < L.candidates.size(); ++i) {
      out << L.candidates[i].a << ' ' << L.candidates[i].b << ' '
          << L.z[i].first << ' ' << L.z[i].second << ' '
          << static_cast<int>(L.outcomes[i]) << '\n';
    }
  }
  out << "end\n";
  if (!out) throw IoError("failed while writing " + path);
}

PlantedTruth read_truth(const std::string& path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line) || line != "comfp-truth v1") {
    throw IoError(path + ": not a comfp-truth v1 file");
  }
  PlantedTruth truth;
  truth.n = parse_one<std::size_t>(in.expect("n"), "n", path);
  truth.t = parse_one<int>(in.expect("t"), "t", path);
  const std::size_t n_labels =
      parse_one<std::size_t>(in.expect("labels"), "labels", path);
  if (n_labels > 0) {
    if (!in.next(line)) throw IoError(path + ": truncated labels");
    std::istringstream ss(line);
    truth.labels.resize(n_labels);
    for (std::size_t i = 0; i < n_labels; ++i) {
      ss >> truth.labels[i];
      if (ss.fail()) throw IoError(path + ": bad label value");
    }
  }
  std::size_t rows, cols;
  if (truth.t > 0) {
    truth.x = in.matrix("x", rows, cols);
  }
  const std::size_t n_layers =
      parse_one<std::size_t>(in.expect("layers"), "layers", path);
  truth.layers.resize(n_layers);
  for (std::size_t d = 0; d < n_layers; ++d) {
    PlantedLayer& L = truth.layers[d];
    std::istringstream head(in.expect("layer"));
    std::size_t idx;
    head >> idx >> L.name >> L.k;
    if (head.fail() || idx != d) throw IoError(path + ": bad layer header");
    const std::size_t n_members =
        parse_one<std::size_t>(in.expect("members"), "members", path);
    if (n_members > 0) {
      if (!in.next(line)) throw IoError(path + ": truncated members");
      std::istringstream ss(line);
      L.members.resize(n_members);
      for (std::size_t i = 0; i < n_members; ++i) {
        ss >> L.members[i];
        if (ss.fail()) throw IoError(path + ": bad member value");
      }
    }
    if (truth.t > 0) {
      L.lambda = in.matrix("lambda", rows, cols);
    }
    L.alpha = in.matrix("alpha", rows, cols);
    L.pi = in.matrix("pi", rows, cols);
    L.b = in.matrix("b", rows, cols);
    const std::size_t n_cand =
        parse_one<std::size_t>(in.expect("candidates"), "candidates", path);
    for (std::size_t i = 0; i < n_cand; ++i) {
      if (!in.next(line)) throw IoError(path + ": truncated candidates");
      std::istringstream ss(line);
      UserIndex a, b;
      int za, zb, y;
      ss >> a >> b >> za >> zb >> y;
      if (ss.fail()) throw IoError(path + ": bad candidate line");
      L.candidates.push_back(Dyad{a, b});
      L.z.emplace_back(static_cast<std::uint16_t>(za),
                       static_cast<std::uint16_t>(zb));
      L.outcomes.push_back(static_cast<std::int8_t>(y));
      if (y < 0) L.negatives.push_back(Dyad{a, b});
    }
  }
  in.expect("end");
  return truth;
}

}  // namespace comfp
