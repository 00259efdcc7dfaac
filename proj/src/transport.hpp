#pragma once

#include <functional>
#include <vector>

namespace kmeasure::detail {

/// Minimum-cost transport from `supply` to `demand` (nonnegative, with equal
/// totals up to round-off) with cost(i, j) >= 0. Successive shortest paths
/// with node potentials over the dense bipartite residual graph.
/// Throws Error(LpFailure) if the augmentation loop does not terminate.
double min_cost_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                          const std::function<double(std::size_t, std::size_t)>& cost);

}  // namespace kmeasure::detail
