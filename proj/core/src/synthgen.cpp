#include "comfp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "comfp/errors.hpp"

namespace comfp {

namespace {

constexpr int kMaxRedraws = 20;

std::vector<UserIndex> all_users(std::size_t n) {
  std::vector<UserIndex> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<UserIndex>(i);
  return v;
}

Roster numbered_roster(std::size_t n) {
  Roster r;
  for (std::size_t i = 0; i < n; ++i) r.intern(std::to_string(i));
  return r;
}

std::size_t pair_count(std::size_t m) { return m * (m - 1) / 2; }

std::vector<Dyad> enumerate_member_pairs(const std::vector<UserIndex>& members) {
  std::vector<Dyad> all;
  all.reserve(pair_count(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      all.push_back(Dyad{members[i], members[j]});
    }
  }
  return all;
}

// Draws indicators and link outcomes for predrawn candidate slots.
void realize_candidates(PlantedLayer& layer, Rng& rng) {
  const int K = layer.k;
  layer.z.clear();
  layer.outcomes.clear();
  layer.negatives.clear();
  for (const Dyad& d : layer.candidates) {
    std::span<const double> pa(&layer.pi[d.a * static_cast<std::size_t>(K)],
                               K);
    std::span<const double> pb(&layer.pi[d.b * static_cast<std::size_t>(K)],
                               K);
    const int za = static_cast<int>(rng.categorical(pa));
    const int zb = static_cast<int>(rng.categorical(pb));
    const bool link = rng.uniform() < layer.b[za * K + zb];
    layer.z.emplace_back(static_cast<std::uint16_t>(za),
                         static_cast<std::uint16_t>(zb));
    layer.outcomes.push_back(link ? 1 : -1);
    if (!link) layer.negatives.push_back(d);
  }
}

LayerGraph to_layer_graph(const PlantedLayer& layer) {
  LayerGraph g;
  g.name = layer.name;
  for (std::size_t i = 0; i < layer.candidates.size(); ++i) {
    if (layer.outcomes[i] > 0) {
      g.dyads.push_back(layer.candidates[i]);
      g.timestamps.push_back(static_cast<std::int64_t>(i) + 1);
    }
  }
  g.rebuild_index();
  g.members = layer.members;  // keep isolated members on the roster
  return g;
}

int argmax_row(const std::vector<double>& mat, std::size_t row, int k) {
  int best = 0;
  for (int j = 1; j < k; ++j) {
    if (mat[row * k + j] > mat[row * k + best]) best = j;
  }
  return best;
}

SynthResult assemble_result(PlantedTruth truth) {
  std::vector<LayerGraph> graphs;
  for (const PlantedLayer& layer : truth.layers) {
    graphs.push_back(to_layer_graph(layer));
  }
  SynthResult out;
  out.net = assemble_composite(numbered_roster(truth.n), std::move(graphs));
  if (out.net.n_users() != truth.n) {
    throw InvariantViolation(
        "synth generator lost users while assembling the composite");
  }
  out.truth = std::move(truth);
  return out;
}

// Pattern vector in R^t peaking at coordinate (hot mod t).
void structured_row(double* row, int t, int hot, double scale) {
  for (int j = 0; j < t; ++j) row[j] = -0.5 * scale;
  row[hot % t] = scale;
}

}  // namespace

std::vector<Dyad> sample_candidate_dyads(const std::vector<UserIndex>& members,
                                         std::size_t count, Rng& rng) {
  const std::size_t total = pair_count(members.size());
  if (count > total) {
    throw InvariantViolation(
        "candidate dyad count exceeds the number of member pairs");
  }
  std::vector<Dyad> out;
  if (count * 2 >= total) {
    out = enumerate_member_pairs(members);
    rng.shuffle(out);
    out.resize(count);
    return out;
  }
  out.reserve(count);
  std::unordered_set<std::uint64_t> taken;
  while (out.size() < count) {
    const UserIndex u = members[rng.uniform_int(members.size())];
    const UserIndex v = members[rng.uniform_int(members.size())];
    if (u == v) continue;
    const Dyad d = make_dyad(u, v);
    if (taken.insert(dyad_key(d)).second) out.push_back(d);
  }
  return out;
}

SynthResult generate_comfp(std::size_t n,
                           const std::vector<SynthLayerSpec>& specs, int t,
                           double sigma_u, double sigma_d,
                           std::uint64_t seed) {
  if (n < 2) throw InvariantViolation("generate_comfp: need at least 2 users");
  if (specs.empty()) {
    throw InvariantViolation("generate_comfp: no layer specs");
  }
  for (const SynthLayerSpec& s : specs) {
    if (s.k < 1 || s.candidates < 1 || s.candidates > pair_count(n)) {
      throw InvariantViolation("generate_comfp: bad spec for layer " + s.name);
    }
  }

  Rng rng(derive_seed(seed, "synth:comfp"));
  const std::vector<UserIndex> everyone = all_users(n);

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    PlantedTruth truth;
    truth.n = n;
    truth.t = t;
    truth.layers.resize(specs.size());

    for (std::size_t d = 0; d < specs.size(); ++d) {
      PlantedLayer& L = truth.layers[d];
      L.name = specs[d].name;
      L.k = specs[d].k;
      L.members = everyone;
      L.lambda.resize(static_cast<std::size_t>(L.k) * t);
      for (double& v : L.lambda) v = rng.gaussian(0.0, sigma_d);
    }
    for (PlantedLayer& L : truth.layers) {
      const int K = L.k;
      L.b.resize(static_cast<std::size_t>(K) * K);
      for (int k = 0; k < K; ++k) {
        for (int kp = 0; kp < K; ++kp) {
          double dot = 0.0;
          for (int j = 0; j < t; ++j) {
            dot += L.lambda[k * t + j] * L.lambda[kp * t + j];
          }
          L.b[k * K + kp] = rng.beta(softplus(dot), 1.0);
        }
      }
    }
    truth.x.resize(n * static_cast<std::size_t>(t));
    for (double& v : truth.x) v = rng.gaussian(0.0, sigma_u);
    for (PlantedLayer& L : truth.layers) {
      const int K = L.k;
      L.alpha.resize(n * static_cast<std::size_t>(K));
      L.pi.resize(n * static_cast<std::size_t>(K));
      for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < K; ++k) {
          double dot = 0.0;
          for (int j = 0; j < t; ++j) {
            dot += truth.x[i * t + j] * L.lambda[k * t + j];
          }
          L.alpha[i * K + k] = softplus(dot);
        }
        rng.dirichlet(std::span<const double>(&L.alpha[i * K], K),
                      std::span<double>(&L.pi[i * K], K));
      }
    }

    bool all_have_links = true;
    for (std::size_t d = 0; d < specs.size(); ++d) {
      PlantedLayer& L = truth.layers[d];
      L.candidates = sample_candidate_dyads(L.members, specs[d].candidates,
                                            rng);
      realize_candidates(L, rng);
      all_have_links =
          all_have_links && L.negatives.size() < L.candidates.size();
    }
    if (!all_have_links) continue;

    truth.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth.labels[i] = argmax_row(truth.layers[0].pi, i,
                                   truth.layers[0].k);
    }
    return assemble_result(std::move(truth));
  }
  throw InvariantViolation(
      "generate_comfp: a layer produced zero positive dyads in every redraw");
}

SynthResult generate_mmsb(std::size_t n, int k, std::size_t candidates,
                          double alpha0, double gamma0, double gamma1,
                          std::uint64_t seed) {
  if (n < 2) throw InvariantViolation("generate_mmsb: need at least 2 users");
  if (k < 1 || candidates < 1 || candidates > pair_count(n)) {
    throw InvariantViolation("generate_mmsb: bad layer parameters");
  }
  if (alpha0 <= 0.0 || gamma0 <= 0.0 || gamma1 <= 0.0) {
    throw InvariantViolation("generate_mmsb: pseudo-counts must be positive");
  }

  Rng rng(derive_seed(seed, "synth:mmsb"));
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    PlantedTruth truth;
    truth.n = n;
    truth.layers.resize(1);
    PlantedLayer& L = truth.layers[0];
    L.name = "layer";
    L.k = k;
    L.members = all_users(n);
    L.alpha.assign(n * static_cast<std::size_t>(k), alpha0);
    L.b.resize(static_cast<std::size_t>(k) * k);
    // Link probability carries the +1-sign pseudo-count as its first shape.
    for (double& v : L.b) v = rng.beta(gamma1, gamma0);
    L.pi.resize(n * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
      rng.dirichlet(std::span<const double>(&L.alpha[i * k], k),
                    std::span<double>(&L.pi[i * k], k));
    }
    L.candidates = sample_candidate_dyads(L.members, candidates, rng);
    realize_candidates(L, rng);
    if (L.negatives.size() == L.candidates.size()) continue;

    truth.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth.labels[i] = argmax_row(L.pi, i, k);
    }
    return assemble_result(std::move(truth));
  }
  throw InvariantViolation(
      "generate_mmsb: zero positive dyads in every redraw");
}

SynthResult plant_sparse_dense_pair(std::size_t n, int k, int t,
                                    double density_ratio,
                                    double overlap_fraction,
                                    std::uint64_t seed,
                                    long layer1_budget,
                                    double hub_share) {
  if (n < 4) {
    throw InvariantViolation("plant_sparse_dense_pair: need at least 4 users");
  }
  if (k < 1 || t < 1) {
    throw InvariantViolation("plant_sparse_dense_pair: bad k or t");
  }
  if (!(density_ratio > 1.0)) {
    throw InvariantViolation(
        "plant_sparse_dense_pair: density_ratio must exceed 1");
  }
  if (!(overlap_fraction > 0.0) || overlap_fraction > 1.0) {
    throw InvariantViolation(
        "plant_sparse_dense_pair: overlap_fraction must lie in (0, 1]");
  }
  if (hub_share < 0.0 || hub_share > 1.0) {
    throw InvariantViolation(
        "plant_sparse_dense_pair: hub_share must lie in [0, 1]");
  }

  const std::size_t q = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * overlap_fraction));
  std::vector<UserIndex> members1, members2;
  for (std::size_t i = 0; i < q; ++i) {
    members1.push_back(static_cast<UserIndex>(i));
    members2.push_back(static_cast<UserIndex>(i));
  }
  for (std::size_t i = q; i < n; ++i) {
    ((i - q) % 2 == 0 ? members1 : members2)
        .push_back(static_cast<UserIndex>(i));
  }

  const std::size_t budget1 =
      layer1_budget > 0 ? static_cast<std::size_t>(layer1_budget) : 30 * n;
  const std::size_t m1 = std::min(budget1, pair_count(members1.size()));
  const std::size_t m2 = std::max<std::size_t>(
      1, std::min(static_cast<std::size_t>(
                      static_cast<double>(m1) / density_ratio),
                  pair_count(members2.size())));

  // Pattern amplitude: at 2.5 the planted blocks are strongly assortative
  // (within-rate ~0.92 against cross-rate ~0.04), sharp enough for a
  // few-hundred-sweep sampler to sort reliably.
  const double scale = 2.5;
  Rng rng(derive_seed(seed, "synth:pair"));

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    PlantedTruth truth;
    truth.n = n;
    truth.t = t;
    truth.labels.resize(n);
    truth.x.resize(n * static_cast<std::size_t>(t));
    for (std::size_t i = 0; i < n; ++i) {
      const int g = static_cast<int>(i) % k;
      truth.labels[i] = g;
      structured_row(&truth.x[i * t], t, g, scale);
      for (int j = 0; j < t; ++j) truth.x[i * t + j] += rng.gaussian(0.0, 0.1);
    }

    truth.layers.resize(2);
    for (int d = 0; d < 2; ++d) {
      PlantedLayer& L = truth.layers[d];
      L.name = d == 0 ? "dense" : "sparse";
      L.k = k;
      L.members = d == 0 ? members1 : members2;
      L.lambda.resize(static_cast<std::size_t>(k) * t);
      for (int kk = 0; kk < k; ++kk) {
        const int hot = d == 0 ? kk : (kk + 1) % k;
        structured_row(&L.lambda[kk * t], t, hot, scale);
      }
      if (d == 1) {
        for (double& v : L.lambda) v += rng.gaussian(0.0, 0.05);
      }
      L.b.resize(static_cast<std::size_t>(k) * k);
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          double dot = 0.0;
          for (int j = 0; j < t; ++j) {
            dot += L.lambda[a * t + j] * L.lambda[b * t + j];
          }
          const double rho = softplus(dot);
          L.b[a * k + b] = rho / (1.0 + rho);
        }
      }
      L.alpha.resize(n * static_cast<std::size_t>(k));
      L.pi.resize(n * static_cast<std::size_t>(k));
      for (std::size_t i = 0; i < n; ++i) {
        for (int kk = 0; kk < k; ++kk) {
          double dot = 0.0;
          for (int j = 0; j < t; ++j) {
            dot += truth.x[i * t + j] * L.lambda[kk * t + j];
          }
          L.alpha[i * k + kk] = softplus(dot);
        }
        rng.dirichlet(std::span<const double>(&L.alpha[i * k], k),
                      std::span<double>(&L.pi[i * k], k));
      }
    }

    // Dense layer: uniform candidates. Sparse layer: hub_share of the slots
    // anchor on a small hub subset so popular and long-tail users both
    // exist (zero share degenerates to a uniform draw).
    truth.layers[0].candidates =
        sample_candidate_dyads(members1, m1, rng);
    {
      PlantedLayer& L = truth.layers[1];
      const std::size_t n_hubs =
          std::max<std::size_t>(1, members2.size() / 10);
      std::unordered_set<std::uint64_t> taken;
      std::vector<Dyad> cand;
      cand.reserve(m2);
      const std::size_t hub_slots =
          static_cast<std::size_t>(hub_share * static_cast<double>(m2));
      std::size_t guard = 0;
      const std::size_t guard_cap = 200 * m2 + 1000;
      while (cand.size() < hub_slots && guard++ < guard_cap) {
        const UserIndex h = L.members[rng.uniform_int(n_hubs)];
        const UserIndex v = L.members[rng.uniform_int(L.members.size())];
        if (h == v) continue;
        const Dyad dy = make_dyad(h, v);
        if (taken.insert(dyad_key(dy)).second) cand.push_back(dy);
      }
      while (cand.size() < m2 && guard++ < guard_cap) {
        const UserIndex u = L.members[rng.uniform_int(L.members.size())];
        const UserIndex v = L.members[rng.uniform_int(L.members.size())];
        if (u == v) continue;
        const Dyad dy = make_dyad(u, v);
        if (taken.insert(dyad_key(dy)).second) cand.push_back(dy);
      }
      if (cand.size() < m2) {
        std::vector<Dyad> rest;
        for (const Dyad& dy : enumerate_member_pairs(L.members)) {
          if (!taken.count(dyad_key(dy))) rest.push_back(dy);
        }
        rng.shuffle(rest);
        for (const Dyad& dy : rest) {
          if (cand.size() == m2) break;
          cand.push_back(dy);
        }
      }
      L.candidates = std::move(cand);
    }
    realize_candidates(truth.layers[0], rng);
    realize_candidates(truth.layers[1], rng);

    bool ok = true;
    for (const PlantedLayer& L : truth.layers) {
      ok = ok && L.negatives.size() < L.candidates.size();
    }
    if (!ok) continue;
    return assemble_result(std::move(truth));
  }
  throw InvariantViolation(
      "plant_sparse_dense_pair: zero positive dyads in every redraw");
}

}  // namespace comfp
