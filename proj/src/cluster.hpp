#pragma once

#include <cstddef>
#include <vector>

#include "kmeasure/measure.hpp"

namespace kmeasure::detail {

// A group of original atoms summarized by total weight, first moment and the
// range [lo, hi] of the locations it contains.
struct Cluster {
  double weight = 0.0;
  double moment = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

double barycenter(const Cluster& c);

// Upper bound on sum_k w_k |x_k - b| over any atoms in [lo, hi] with total
// weight w and barycenter b; attained by splitting the mass between lo and hi.
double merge_cost(const Cluster& c);

std::vector<Cluster> clusters_of(const DiscreteMeasure& mu);

// Clusters must be ordered with disjoint ranges. Greedily merges neighbours
// with the smallest cost increase until at most `budget` remain.
CoarsenReceipt merge_clusters(std::vector<Cluster> clusters, std::size_t budget,
                              double mass_tolerance);

enum class PairOp { Sum, Product };

// Accumulates every pair (x_j op y_k, w_j v_k) into a fixed grid of fine
// clusters without materializing the pairs. Exact zeros get their own cluster.
std::vector<Cluster> binned_pairs(const DiscreteMeasure& a, const DiscreteMeasure& b, PairOp op,
                                  std::size_t fine_bins, bool symmetric);

}  // namespace kmeasure::detail
