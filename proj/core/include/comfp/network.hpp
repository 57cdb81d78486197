#ifndef COMFP_NETWORK_HPP_
#define COMFP_NETWORK_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace comfp {

using UserIndex = std::uint32_t;

// Undirected pair of distinct users, stored with a < b.
struct Dyad {
  UserIndex a = 0;
  UserIndex b = 0;
  friend bool operator==(const Dyad&, const Dyad&) = default;
  friend auto operator<=>(const Dyad&, const Dyad&) = default;
};

// Normalizes endpoint order; throws InvariantViolation on a self-pair.
Dyad make_dyad(UserIndex i, UserIndex j);

inline std::uint64_t dyad_key(const Dyad& d) {
  return (static_cast<std::uint64_t>(d.a) << 32) | d.b;
}

// External label <-> dense internal index map.
class Roster {
 public:
  UserIndex intern(const std::string& label);
  // Returns the index or -1 cast to UserIndex if absent.
  UserIndex find(const std::string& label) const;
  const std::string& label(UserIndex i) const { return labels_[i]; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, UserIndex> index_;
};

// One network layer. Immutable once built; dyads keep insertion order and
// are deduplicated (first timestamp wins on duplicates).
struct LayerGraph {
  std::string name;
  std::vector<Dyad> dyads;
  std::vector<std::int64_t> timestamps;  // parallel to dyads; empty if none
  std::vector<UserIndex> members;        // sorted, unique endpoint set
  std::size_t self_loops_skipped = 0;

  bool has_timestamps() const { return !timestamps.empty(); }
  bool contains(const Dyad& d) const { return dyad_set.count(dyad_key(d)) > 0; }
  bool is_member(UserIndex u) const;
  // Number of dyads incident to u.
  std::size_t degree(UserIndex u) const;

  std::unordered_set<std::uint64_t> dyad_set;
  void rebuild_index();  // recomputes members and dyad_set from dyads
};

struct CompositeNetwork {
  Roster roster;
  std::vector<LayerGraph> layers;
  std::size_t n_users() const { return roster.size(); }
  const LayerGraph* layer_named(const std::string& name) const;
};

// Reads "src<TAB>dst[<TAB>timestamp]" lines; '#' starts a comment line.
// Labels are interned into the shared roster. Duplicate dyads collapse,
// self-loops are skipped and counted.
LayerGraph load_edge_list(const std::string& path, const std::string& name,
                          bool has_timestamps, Roster& roster);

// Validates pairwise member-set overlap and compacts the roster to the
// union of member sets. Throws InvariantViolation naming the offending
// layer pair when an overlap is empty.
CompositeNetwork assemble_composite(Roster roster,
                                    std::vector<LayerGraph> layers);

// Removes users whose cross-layer degree strictly exceeds
// mean + 1 population standard deviation, along with incident dyads,
// then re-indexes. The result may be empty or lose layer overlap; the
// caller re-validates when that matters.
CompositeNetwork filter_popular_users(const CompositeNetwork& net);

// Total degree of each user summed over all layers.
std::vector<std::size_t> cross_layer_degrees(const CompositeNetwork& net);

// degree -> number of members with that degree.
std::map<std::size_t, std::size_t> degree_histogram(const LayerGraph& layer);

// One manifest line per layer: "layer <name> <path> <timestamps|none>".
// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
  std::string name;
  std::string path;
  bool has_timestamps = false;
};
std::vector<ManifestEntry> parse_manifest(const std::string& path);

// Convenience: parse manifest, load every layer, assemble.
CompositeNetwork load_composite(const std::string& manifest_path);

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries,
                    const std::string& config_echo);

void write_edge_list(const std::string& path, const LayerGraph& layer,
                     const Roster& roster, const std::string& config_echo);

void write_degree_histogram(const std::string& path, const LayerGraph& layer,
                            const std::string& config_echo);

}  // namespace comfp

#endif  // COMFP_NETWORK_HPP_
