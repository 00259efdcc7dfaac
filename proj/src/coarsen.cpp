#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>

#include "cluster.hpp"
#include "kmeasure/error.hpp"
#include "kmeasure/parallel.hpp"

namespace kmeasure::detail {

double barycenter(const Cluster& c) {
  if (c.hi <= c.lo) return c.lo;
  return std::clamp(c.moment / c.weight, c.lo, c.hi);
}

double merge_cost(const Cluster& c) {
  if (c.hi <= c.lo) return 0.0;
  const double b = barycenter(c);
  return 2.0 * c.weight * ((b - c.lo) / (c.hi - c.lo)) * (c.hi - b);
}

std::vector<Cluster> clusters_of(const DiscreteMeasure& mu) {
  std::vector<Cluster> out(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double x = mu.location(k);
    const double w = mu.weight(k);
    out[k] = {w, w * x, x, x};
  }
  return out;
}

namespace {

Cluster combine(const Cluster& a, const Cluster& b) {
  return {a.weight + b.weight, a.moment + b.moment, std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

struct Candidate {
  double delta;
  std::size_t left;
  std::size_t right;
  std::uint32_t left_version;
  std::uint32_t right_version;
};

struct CandidateOrder {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.delta != b.delta) return a.delta > b.delta;
    return a.left > b.left;
  }
};

}  // namespace

CoarsenReceipt merge_clusters(std::vector<Cluster> clusters, std::size_t budget,
                              double mass_tolerance) {
  if (budget == 0) throw Error(ErrorCode::InvalidArgument, "coarsening budget must be >= 1");
  std::erase_if(clusters, [](const Cluster& c) { return !(c.weight > 0.0); });
  if (clusters.empty()) throw Error(ErrorCode::EmptyMeasure, "no clusters with positive weight");

  const std::size_t n = clusters.size();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<bool> alive(n, true);

  if (n > budget) {
    std::vector<std::size_t> prev(n), next(n);
    std::vector<std::uint32_t> version(n, 0);
    std::vector<double> cost(n);
    for (std::size_t k = 0; k < n; ++k) {
      prev[k] = k == 0 ? none : k - 1;
      next[k] = k + 1 == n ? none : k + 1;
      cost[k] = merge_cost(clusters[k]);
    }

    std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap;
    // An atom exactly at zero is never merged: mass at the origin stays exact.
    const bool keep_zero = clusters[0].hi == 0.0 && budget >= 2;
    auto push = [&](std::size_t left) {
      if (left == none || next[left] == none) return;
      if (keep_zero && left == 0) return;
      const std::size_t right = next[left];
      const double delta =
          merge_cost(combine(clusters[left], clusters[right])) - cost[left] - cost[right];
      heap.push({delta, left, right, version[left], version[right]});
    };
    for (std::size_t k = 0; k + 1 < n; ++k) push(k);

    std::size_t remaining = n;
    while (remaining > budget && !heap.empty()) {
      const Candidate c = heap.top();
      heap.pop();
      if (!alive[c.left] || !alive[c.right] || next[c.left] != c.right ||
          version[c.left] != c.left_version || version[c.right] != c.right_version) {
        continue;
      }
      clusters[c.left] = combine(clusters[c.left], clusters[c.right]);
      cost[c.left] = merge_cost(clusters[c.left]);
      ++version[c.left];
      alive[c.right] = false;
      next[c.left] = next[c.right];
      if (next[c.right] != none) prev[next[c.right]] = c.left;
      --remaining;
      push(prev[c.left]);
      push(c.left);
    }
  }

  std::vector<double> locations;
  std::vector<double> weights;
  locations.reserve(std::min(n, budget));
  weights.reserve(std::min(n, budget));
  double bound = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!alive[k]) continue;
    locations.push_back(barycenter(clusters[k]));
    weights.push_back(clusters[k].weight);
    bound += merge_cost(clusters[k]);
  }
  return {MeasureBuilder::from_sorted(std::move(locations), std::move(weights), mass_tolerance),
          bound};
}

namespace {

// Zero bin, then equal-width bins on [0, linear_end), then bins of equal
// log-width up to the largest reachable location.
class BinGrid {
 public:
  BinGrid(double bulk, double max_x, std::size_t fine_bins) {
    fine_bins = std::max<std::size_t>(fine_bins, 8);
    const double reference = bulk > 0.0 ? bulk : max_x;
    // Power-of-two edges keep the grid stable across nearby inputs.
    linear_end_ = std::exp2(std::ceil(std::log2(reference)));
    if (max_x >= linear_end_) {
      const double octaves = std::log2(max_x / linear_end_);
      const std::size_t log_cap = fine_bins / 4;
      bins_per_octave_ = 256.0;
      double wanted = std::ceil(octaves * bins_per_octave_) + 1.0;
      if (wanted > static_cast<double>(log_cap)) {
        bins_per_octave_ = static_cast<double>(log_cap - 1) / std::max(octaves, 1e-300);
        wanted = static_cast<double>(log_cap);
      }
      n_log_ = static_cast<std::size_t>(wanted);
    }
    n_linear_ = fine_bins - n_log_;
    inverse_width_ = static_cast<double>(n_linear_) / linear_end_;
  }

  std::size_t size() const { return 1 + n_linear_ + n_log_; }

  std::size_t index(double x) const {
    if (x == 0.0) return 0;
    if (x < linear_end_) {
      return 1 + std::min(n_linear_ - 1, static_cast<std::size_t>(x * inverse_width_));
    }
    if (n_log_ == 0) return n_linear_;
    const double position = std::log2(x / linear_end_) * bins_per_octave_;
    return 1 + n_linear_ + std::min(n_log_ - 1, static_cast<std::size_t>(position));
  }

 private:
  double linear_end_ = 1.0;
  double inverse_width_ = 1.0;
  double bins_per_octave_ = 0.0;
  std::size_t n_linear_ = 0;
  std::size_t n_log_ = 0;
};

struct BinAccumulator {
  std::vector<double> weight, moment, lo, hi;

  explicit BinAccumulator(std::size_t n)
      : weight(n, 0.0),
        moment(n, 0.0),
        lo(n, std::numeric_limits<double>::infinity()),
        hi(n, -std::numeric_limits<double>::infinity()) {}

  void add(std::size_t bin, double x, double w) {
    weight[bin] += w;
    moment[bin] += w * x;
    lo[bin] = std::min(lo[bin], x);
    hi[bin] = std::max(hi[bin], x);
  }
};

constexpr std::size_t kBinningChunks = 4;
constexpr double kBulkQuantile = 1.0 - 1e-6;

}  // namespace

std::vector<Cluster> binned_pairs(const DiscreteMeasure& a, const DiscreteMeasure& b, PairOp op,
                                  std::size_t fine_bins, bool symmetric) {
  const bool sum = op == PairOp::Sum;
  const double qa = a.quantile(kBulkQuantile);
  const double qb = b.quantile(kBulkQuantile);
  const double bulk = sum ? qa + qb : qa * qb;
  const double max_x = sum ? a.max_location() + b.max_location()
                           : a.max_location() * b.max_location();
  if (max_x == 0.0) {
    return {Cluster{a.total_mass() * b.total_mass(), 0.0, 0.0, 0.0}};
  }
  const BinGrid grid(bulk, max_x, fine_bins);

  const std::size_t n_outer = a.size();
  const std::size_t chunks = std::min(kBinningChunks, n_outer);
  std::vector<BinAccumulator> partial;
  partial.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) partial.emplace_back(grid.size());

  const auto xs = a.locations();
  const auto ws = a.weights();
  const auto ys = b.locations();
  const auto vs = b.weights();
  parallel::for_each_task(chunks, [&](std::size_t c) {
    BinAccumulator& acc = partial[c];
    const std::size_t begin = n_outer * c / chunks;
    const std::size_t end = n_outer * (c + 1) / chunks;
    for (std::size_t j = begin; j < end; ++j) {
      const double x = xs[j];
      const double w = ws[j];
      if (symmetric) {
        acc.add(grid.index(x + x), x + x, w * w);
        const double w2 = 2.0 * w;
        for (std::size_t k = j + 1; k < ys.size(); ++k) {
          const double s = x + ys[k];
          acc.add(grid.index(s), s, w2 * vs[k]);
        }
      } else if (sum) {
        for (std::size_t k = 0; k < ys.size(); ++k) {
          const double s = x + ys[k];
          acc.add(grid.index(s), s, w * vs[k]);
        }
      } else {
        for (std::size_t k = 0; k < ys.size(); ++k) {
          const double s = x * ys[k];
          acc.add(grid.index(s), s, w * vs[k]);
        }
      }
    }
  });

  std::vector<Cluster> out;
  for (std::size_t bin = 0; bin < grid.size(); ++bin) {
    Cluster cl{0.0, 0.0, std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity()};
    for (const auto& acc : partial) {
      cl.weight += acc.weight[bin];
      cl.moment += acc.moment[bin];
      cl.lo = std::min(cl.lo, acc.lo[bin]);
      cl.hi = std::max(cl.hi, acc.hi[bin]);
    }
    if (cl.weight > 0.0) out.push_back(cl);
  }
  return out;
}

}  // namespace kmeasure::detail
