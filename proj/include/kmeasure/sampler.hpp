#pragma once

#include <cstddef>
#include <cstdint>

#include "kmeasure/collision.hpp"
#include "kmeasure/measure.hpp"

namespace kmeasure {

/// Counter-based generator: draw k of stream (seed, stream_id) is a fixed
/// function of the three numbers, so sequences do not depend on scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Independent child stream, e.g. one per batch.
  RngStream substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF draw.
double sample_measure(const DiscreteMeasure& mu, RngStream& rng);

/// tau ~ retained alphas, eta ~ phi_tau (continuous laws drawn exactly),
/// xi_1..xi_tau iid ~ mu; returns eta * sum xi.
double sample_zeta(const CollisionModel& model, const DiscreteMeasure& mu, RngStream& rng);

inline constexpr std::size_t kSamplerBatch = 4096;

/// Empirical law of n_draws values of sample_zeta, weight 1/n_draws each.
/// Batch b of kSamplerBatch draws uses rng.substream(b); batches may run in
/// parallel and the result does not depend on the thread count.
DiscreteMeasure empirical_apply(const CollisionModel& model, const DiscreteMeasure& mu,
                                std::size_t n_draws, const RngStream& rng);

}  // namespace kmeasure
