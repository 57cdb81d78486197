#ifndef COMFP_METRICS_HPP_
#define COMFP_METRICS_HPP_

#include <functional>
#include <span>
#include <vector>

#include "comfp/split.hpp"

namespace comfp {

// One user's ranking problem: candidate dyads with scores plus the subset
// that is truly positive.
struct RankedCandidates {
  std::vector<std::pair<Dyad, double>> scored;
  std::vector<Dyad> positives;
};

// Mean over positives of precision at that positive's rank, after sorting
// by score descending with ties broken by ascending dyad order. Throws
// InvariantViolation when there is no positive, a positive is missing
// from the candidates, or a score is non-finite.
double average_precision(const RankedCandidates& ranked);

using LayerScorer = std::function<double(UserIndex, UserIndex)>;

struct LayerMetrics {
  double map = 0.0;
  std::size_t n_users = 0;       // users with >= 1 held-out positive
  double long_tail_map = 0.0;
  std::size_t n_long_tail = 0;   // evaluated users with train degree < cap
  std::vector<std::pair<UserIndex, double>> per_user_ap;
};

// Ranks, for every user owning a held-out positive, that user's held-out
// positives against their sampled candidate negatives. A held-out dyad
// contributes to both endpoints' rankings. long_tail_map restricts to
// users whose train-positive degree is below degree_cap.
LayerMetrics evaluate_layer(const LayerScorer& score, const LayerSplit& split,
                            std::size_t n, int degree_cap = 10);

// Normalized mutual information with arithmetic-mean normalization,
// invariant under relabeling of either side. Two constant labelings agree
// perfectly (1.0); one constant side carries no information (0.0).
double partition_agreement(std::span<const int> a, std::span<const int> b);

}  // namespace comfp

#endif  // COMFP_METRICS_HPP_
