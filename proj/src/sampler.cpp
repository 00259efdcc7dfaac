#include "kmeasure/sampler.hpp"

#include <algorithm>
#include <vector>

#include "kmeasure/error.hpp"
#include "kmeasure/parallel.hpp"

namespace kmeasure {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(splitmix(seed ^ splitmix(stream_id + kGolden))) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return splitmix(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

RngStream RngStream::substream(std::uint64_t index) const { return RngStream(key_, index); }

double sample_measure(const DiscreteMeasure& mu, RngStream& rng) {
  return mu.quantile(rng.uniform());
}

namespace {

struct ZetaSampler {
  const CollisionModel& model;
  const DiscreteMeasure& mu;
  std::vector<double> cumulative;

  ZetaSampler(const CollisionModel& m, const DiscreteMeasure& measure) : model(m), mu(measure) {
    if (model.retained().empty() || model.exceeds_component_limit()) {
      throw Error(ErrorCode::ModelInvalid, "model has no usable index set");
    }
    double acc = 0.0;
    for (const auto& c : model.retained()) {
      acc += c.alpha;
      cumulative.push_back(acc);
    }
    cumulative.back() = 1.0;
  }

  double draw(RngStream& rng) const {
    const double u = rng.uniform();
    const auto k = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const Component& c = model.retained()[std::min(k, cumulative.size() - 1)];
    const double eta = c.phi.quantile(rng.uniform());
    double sum = 0.0;
    for (unsigned j = 0; j < c.index; ++j) sum += sample_measure(mu, rng);
    return eta * sum;
  }
};

}  // namespace

double sample_zeta(const CollisionModel& model, const DiscreteMeasure& mu, RngStream& rng) {
  return ZetaSampler(model, mu).draw(rng);
}

DiscreteMeasure empirical_apply(const CollisionModel& model, const DiscreteMeasure& mu,
                                std::size_t n_draws, const RngStream& rng) {
  if (n_draws == 0) throw Error(ErrorCode::InvalidArgument, "n_draws must be >= 1");
  const ZetaSampler sampler(model, mu);
  const std::size_t batches = (n_draws + kSamplerBatch - 1) / kSamplerBatch;
  std::vector<double> values(n_draws);
  parallel::for_each_task(batches, [&](std::size_t b) {
    RngStream stream = rng.substream(b);
    const std::size_t begin = b * kSamplerBatch;
    const std::size_t end = std::min(n_draws, begin + kSamplerBatch);
    for (std::size_t k = begin; k < end; ++k) values[k] = sampler.draw(stream);
  });
  std::sort(values.begin(), values.end());
  std::vector<double> weights(n_draws, 1.0 / static_cast<double>(n_draws));
  return DiscreteMeasure::make(std::move(values), std::move(weights));
}

}  // namespace kmeasure
