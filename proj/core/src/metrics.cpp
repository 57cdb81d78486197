#include "comfp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "comfp/errors.hpp"

namespace comfp {

double average_precision(const RankedCandidates& ranked) {
  if (ranked.positives.empty()) {
    throw InvariantViolation("average_precision: no positive candidate");
  }
  std::unordered_set<std::uint64_t> pos;
  for (const Dyad& d : ranked.positives) pos.insert(dyad_key(d));

  std::vector<std::pair<Dyad, double>> order = ranked.scored;
  std::unordered_set<std::uint64_t> present;
  for (const auto& [d, s] : order) {
    if (!std::isfinite(s)) {
      throw InvariantViolation("average_precision: non-finite score");
    }
    present.insert(dyad_key(d));
  }
  for (const Dyad& d : ranked.positives) {
    if (!present.count(dyad_key(d))) {
      throw InvariantViolation(
          "average_precision: positive missing from candidates");
    }
  }
  std::sort(order.begin(), order.end(),
            [](const std::pair<Dyad, double>& lhs,
               const std::pair<Dyad, double>& rhs) {
              if (lhs.second != rhs.second) return lhs.second > rhs.second;
              return lhs.first < rhs.first;
            });

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (pos.count(dyad_key(order[rank].first))) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(ranked.positives.size());
}

LayerMetrics evaluate_layer(const LayerScorer& score, const LayerSplit& split,
                            std::size_t n, int degree_cap) {
  std::map<UserIndex, std::vector<Dyad>> pos_by_user;
  for (const Dyad& d : split.heldout_pos) {
    pos_by_user[d.a].push_back(d);
    pos_by_user[d.b].push_back(d);
  }
  const std::vector<std::size_t> degrees = train_degrees(split, n);

  LayerMetrics out;
  double total = 0.0, tail_total = 0.0;
  for (const auto& [user, positives] : pos_by_user) {
    RankedCandidates rc;
    rc.positives = positives;
    for (const Dyad& d : positives) rc.scored.emplace_back(d, 0.0);
    auto it = split.eval_neg.find(user);
    if (it != split.eval_neg.end()) {
      for (const Dyad& d : it->second) rc.scored.emplace_back(d, 0.0);
    }
    for (auto& [d, s] : rc.scored) s = score(d.a, d.b);

    const double ap = average_precision(rc);
    out.per_user_ap.emplace_back(user, ap);
    total += ap;
    ++out.n_users;
    if (degrees[user] < static_cast<std::size_t>(std::max(0, degree_cap))) {
      tail_total += ap;
      ++out.n_long_tail;
    }
  }
  if (out.n_users > 0) out.map = total / static_cast<double>(out.n_users);
  if (out.n_long_tail > 0) {
    out.long_tail_map = tail_total / static_cast<double>(out.n_long_tail);
  }
  return out;
}

double partition_agreement(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw InvariantViolation("partition_agreement: length mismatch");
  }
  const std::size_t n = a.size();
  if (n == 0) return 1.0;

  std::map<int, std::size_t> ca, cb;
  std::map<std::pair<int, int>, std::size_t> joint;
  for (std::size_t i = 0; i < n; ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++joint[{a[i], b[i]}];
  }
  const double dn = static_cast<double>(n);
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (const auto& [label, c] : ca) {
    const double p = static_cast<double>(c) / dn;
    ha -= p * std::log(p);
  }
  for (const auto& [label, c] : cb) {
    const double p = static_cast<double>(c) / dn;
    hb -= p * std::log(p);
  }
  for (const auto& [pair, c] : joint) {
    const double p = static_cast<double>(c) / dn;
    const double pa = static_cast<double>(ca[pair.first]) / dn;
    const double pb = static_cast<double>(cb[pair.second]) / dn;
    mi += p * std::log(p / (pa * pb));
  }
  if (ha <= 0.0 && hb <= 0.0) return 1.0;  // both constant: identical split
  if (ha <= 0.0 || hb <= 0.0) return 0.0;  // one side uninformative
  return mi / (0.5 * (ha + hb));
}

}  // namespace comfp
