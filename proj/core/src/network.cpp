#include "comfp/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "comfp/errors.hpp"

namespace comfp {

Dyad make_dyad(UserIndex i, UserIndex j) {
  if (i == j) {
    throw InvariantViolation("dyad endpoints must differ: " +
                             std::to_string(i));
  }
  return i < j ? Dyad{i, j} : Dyad{j, i};
}

UserIndex Roster::intern(const std::string& label) {
  auto [it, inserted] =
      index_.emplace(label, static_cast<UserIndex>(labels_.size()));
  if (inserted) labels_.push_back(label);
  return it->second;
}

UserIndex Roster::find(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? static_cast<UserIndex>(-1) : it->second;
}

bool LayerGraph::is_member(UserIndex u) const {
  return std::binary_search(members.begin(), members.end(), u);
}

std::size_t LayerGraph::degree(UserIndex u) const {
  std::size_t deg = 0;
  for (const Dyad& d : dyads) deg += (d.a == u || d.b == u);
  return deg;
}

void LayerGraph::rebuild_index() {
  dyad_set.clear();
  members.clear();
  for (const Dyad& d : dyads) {
    dyad_set.insert(dyad_key(d));
    members.push_back(d.a);
    members.push_back(d.b);
  }
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
}

const LayerGraph* CompositeNetwork::layer_named(const std::string& name) const {
  for (const LayerGraph& l : layers) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

namespace {

// Splits on runs of tabs/spaces. Edge lists are nominally tab-separated
// but synthetic files with space separators read identically.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == '\t' || line[i] == ' ')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != '\t' && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int64(const std::string& s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

LayerGraph load_edge_list(const std::string& path, const std::string& name,
                          bool has_timestamps, Roster& roster) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path);

  LayerGraph layer;
  layer.name = name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_fields(line);
    const std::size_t expected = has_timestamps ? 3 : 2;
    if (fields.size() != expected) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected " + std::to_string(expected) +
                    " fields, got " + std::to_string(fields.size()));
    }
    std::int64_t ts = 0;
    if (has_timestamps && !parse_int64(fields[2], ts)) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": bad timestamp '" + fields[2] + "'");
    }
    const UserIndex u = roster.intern(fields[0]);
    const UserIndex v = roster.intern(fields[1]);
    if (u == v) {
      ++layer.self_loops_skipped;
      continue;
    }
    const Dyad d = make_dyad(u, v);
    if (layer.dyad_set.insert(dyad_key(d)).second) {
      layer.dyads.push_back(d);
      if (has_timestamps) layer.timestamps.push_back(ts);
    }
  }
  layer.rebuild_index();
  return layer;
}

CompositeNetwork assemble_composite(Roster roster,
                                    std::vector<LayerGraph> layers) {
  if (layers.empty()) {
    throw InvariantViolation("assemble_composite: no layers");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (std::size_t j = i + 1; j < layers.size(); ++j) {
      std::vector<UserIndex> common;
      std::set_intersection(layers[i].members.begin(),
                            layers[i].members.end(),
                            layers[j].members.begin(),
                            layers[j].members.end(),
                            std::back_inserter(common));
      if (common.empty()) {
        throw InvariantViolation("layers '" + layers[i].name + "' and '" +
                                 layers[j].name +
                                 "' share no users; composite is invalid");
      }
    }
  }

  // Compact the roster to the union of member sets so unused interned
  // labels never leave gaps.
  std::vector<bool> used(roster.size(), false);
  for (const LayerGraph& l : layers) {
    for (UserIndex u : l.members) used[u] = true;
  }
  const bool all_used =
      std::all_of(used.begin(), used.end(), [](bool b) { return b; });

  CompositeNetwork net;
  if (all_used) {
    net.roster = std::move(roster);
    net.layers = std::move(layers);
    return net;
  }

  std::vector<UserIndex> remap(roster.size(), static_cast<UserIndex>(-1));
  for (UserIndex u = 0; u < roster.size(); ++u) {
    if (used[u]) remap[u] = net.roster.intern(roster.label(u));
  }
  for (LayerGraph& l : layers) {
    for (Dyad& d : l.dyads) d = make_dyad(remap[d.a], remap[d.b]);
    l.rebuild_index();
    net.layers.push_back(std::move(l));
  }
  return net;
}

std::vector<std::size_t> cross_layer_degrees(const CompositeNetwork& net) {
  std::vector<std::size_t> deg(net.n_users(), 0);
  for (const LayerGraph& l : net.layers) {
    for (const Dyad& d : l.dyads) {
      ++deg[d.a];
      ++deg[d.b];
    }
  }
  return deg;
}

CompositeNetwork filter_popular_users(const CompositeNetwork& net) {
  const std::vector<std::size_t> deg = cross_layer_degrees(net);
  const std::size_t n = deg.size();
  double mean = 0.0;
  for (std::size_t d : deg) mean += static_cast<double>(d);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t d : deg) {
    const double c = static_cast<double>(d) - mean;
    var += c * c;
  }
  var /= static_cast<double>(n);  // population variance
  const double threshold = mean + std::sqrt(var);

  std::vector<bool> keep(n);
  for (std::size_t u = 0; u < n; ++u) {
    keep[u] = static_cast<double>(deg[u]) <= threshold;
  }

  CompositeNetwork out;
  std::vector<UserIndex> remap(n, static_cast<UserIndex>(-1));
  for (UserIndex u = 0; u < n; ++u) {
    if (keep[u]) remap[u] = out.roster.intern(net.roster.label(u));
  }
  for (const LayerGraph& l : net.layers) {
    LayerGraph filtered;
    filtered.name = l.name;
    filtered.self_loops_skipped = l.self_loops_skipped;
    for (std::size_t i = 0; i < l.dyads.size(); ++i) {
      const Dyad& d = l.dyads[i];
      if (!keep[d.a] || !keep[d.b]) continue;
      filtered.dyads.push_back(make_dyad(remap[d.a], remap[d.b]));
      if (l.has_timestamps()) filtered.timestamps.push_back(l.timestamps[i]);
    }
    filtered.rebuild_index();
    // Surviving members keep their membership even if all their dyads
    // were removed with a popular partner.
    std::vector<UserIndex> members = filtered.members;
    for (UserIndex u : l.members) {
      if (keep[u]) members.push_back(remap[u]);
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    filtered.members = std::move(members);
    out.layers.push_back(std::move(filtered));
  }
  return out;
}

std::map<std::size_t, std::size_t> degree_histogram(const LayerGraph& layer) {
  std::map<std::size_t, std::size_t> hist;
  std::unordered_map<UserIndex, std::size_t> deg;
  for (UserIndex u : layer.members) deg[u] = 0;
  for (const Dyad& d : layer.dyads) {
    ++deg[d.a];
    ++deg[d.b];
  }
  for (UserIndex u : layer.members) ++hist[deg[u]];
  return hist;
}

std::vector<ManifestEntry> parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 4 || fields[0] != "layer" ||
        (fields[3] != "timestamps" && fields[3] != "none")) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected 'layer <name> <path> <timestamps|none>'");
    }
    ManifestEntry e;
    e.name = fields[1];
    std::filesystem::path p(fields[2]);
    e.path = p.is_absolute() ? p.string() : (base / p).string();
    e.has_timestamps = fields[3] == "timestamps";
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw IoError(path + ": manifest lists no layers");
  return entries;
}

CompositeNetwork load_composite(const std::string& manifest_path) {
  const std::vector<ManifestEntry> entries = parse_manifest(manifest_path);
  Roster roster;
  std::vector<LayerGraph> layers;
  for (const ManifestEntry& e : entries) {
    layers.push_back(load_edge_list(e.path, e.name, e.has_timestamps, roster));
  }
  return assemble_composite(std::move(roster), std::move(layers));
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries,
                    const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  if (!config_echo.empty()) out << "# " << config_echo << "\n";
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (const ManifestEntry& e : entries) {
    std::filesystem::path p(e.path);
    std::string rel = p.string();
    if (p.is_absolute() && !base.empty()) {
      rel = std::filesystem::relative(p, base).string();
    }
    out << "layer " << e.name << " " << rel << " "
        << (e.has_timestamps ? "timestamps" : "none") << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_edge_list(const std::string& path, const LayerGraph& layer,
                     const Roster& roster, const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edge list: " + path);
  if (!config_echo.empty()) out << "# " << config_echo << "\n";
  for (std::size_t i = 0; i < layer.dyads.size(); ++i) {
    const Dyad& d = layer.dyads[i];
    out << roster.label(d.a) << "\t" << roster.label(d.b);
    if (layer.has_timestamps()) out << "\t" << layer.timestamps[i];
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_degree_histogram(const std::string& path, const LayerGraph& layer,
                            const std::string& config_echo) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write degree histogram: " + path);
  if (!config_echo.empty()) out << "# " << config_echo << "\n";
  out << "degree,count\n";
  for (const auto& [degree, count] : degree_histogram(layer)) {
    out << degree << "," << count << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace comfp
