#include <doctest.h>

#include <cmath>
#include <random>

#include "kmeasure/collision.hpp"
#include "kmeasure/metrics.hpp"
#include "kmeasure/parallel.hpp"
#include "kmeasure/sampler.hpp"
#include "oracles.hpp"

using namespace kmeasure;

TEST_CASE("uniform draws stay inside the open unit interval") {
  RngStream rng(1, 0);
  double lo = 1.0;
  double hi = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(rng.draws() == 100000);
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 3);
  RngStream b(42, 3);
  RngStream c(42, 4);
  RngStream d(43, 3);
  int same_c = 0;
  int same_d = 0;
  for (int k = 0; k < 10; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
  // A substream depends only on its parent's identity, not on its position.
  RngStream parent(42, 3);
  const auto s0 = parent.substream(5).next_u64();
  parent.next_u64();
  CHECK(parent.substream(5).next_u64() == s0);
}

TEST_CASE("fixed seed reproduces the first draws of a measure") {
  const auto mu = DiscreteMeasure::make({0, 1, 2.5}, {0.2, 0.5, 0.3});
  RngStream a(2024, 0);
  RngStream b(2024, 0);
  for (int k = 0; k < 10; ++k) CHECK(sample_measure(mu, a) == sample_measure(mu, b));
}

TEST_CASE("inverse-CDF draws") {
  RngStream rng(5, 0);
  for (int k = 0; k < 100; ++k) CHECK(sample_measure(DiscreteMeasure::dirac(3.25), rng) == 3.25);
  const auto coin = DiscreteMeasure::make({0, 1}, {0.5, 0.5});
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) sum += sample_measure(coin, rng);
  CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("collision draws") {
  const CollisionModel half({{2, 1.0, MixingLaw::atoms(DiscreteMeasure::dirac(0.5), 2)}});
  RngStream rng(9, 0);
  for (int k = 0; k < 100; ++k) CHECK(sample_zeta(half, DiscreteMeasure::dirac(1.0), rng) == 1.0);
}

TEST_CASE("collision draws keep the mean for random models") {
  std::mt19937_64 gen(301);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<ModelEntry> entries;
    double total = 0.0;
    for (unsigned i = 1; i <= 3; ++i) {
      const double a = u(gen);
      total += a;
      if (i == 3) {
        entries.push_back({i, a, MixingLaw::standard_uniform(i)});
      } else {
        auto phi = oracle::random_unit_mean(gen, 3, 1.0);
        for (auto& [x, w] : phi) x /= i;
        entries.push_back({i, a, MixingLaw::atoms(oracle::to_measure(phi), i)});
      }
    }
    for (auto& e : entries) e.alpha /= total;
    const CollisionModel model(std::move(entries));
    const auto mu = oracle::to_measure(oracle::random_unit_mean(gen, 4, 3.0));
    RngStream rng(77, static_cast<std::uint64_t>(trial));
    const int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const double z = sample_zeta(model, mu, rng);
      sum += z;
      sq += z * z;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean - 1.0) <= 0.02);
    CHECK(std::abs(mean - 1.0) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("empirical operator") {
  const auto tw = CollisionModel::tjon_wu();
  const auto one = empirical_apply(tw, DiscreteMeasure::dirac(1.0), 1, RngStream(1, 0));
  REQUIRE(one.size() == 1);
  CHECK(one.weight(0) == 1.0);

  const auto exact = apply(tw, DiscreteMeasure::dirac(1.0)).result;
  const auto emp = empirical_apply(tw, DiscreteMeasure::dirac(1.0), 100000, RngStream(11, 0));
  CHECK(emp.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wasserstein1(emp, exact) <= 0.02);

  const auto other = empirical_apply(tw, DiscreteMeasure::dirac(1.0), 100000, RngStream(11, 1));
  CHECK_FALSE(other == emp);
  CHECK(wasserstein1(other, emp) <= 0.03);
}

TEST_CASE("empirical operator does not depend on the thread count") {
  const auto tw = CollisionModel::tjon_wu();
  const auto mu = DiscreteMeasure::make({0.5, 1.5}, {0.5, 0.5});
  parallel::set_thread_limit(1);
  const auto a = empirical_apply(tw, mu, 20000, RngStream(99, 2));
  parallel::set_thread_limit(4);
  const auto b = empirical_apply(tw, mu, 20000, RngStream(99, 2));
  parallel::set_thread_limit(1);
  CHECK(a == b);
}

TEST_CASE("empirical error shrinks with the sample size") {
  const auto tw = CollisionModel::tjon_wu();
  const auto exact = apply(tw, DiscreteMeasure::dirac(1.0)).result;
  double previous = 1e9;
  std::uint64_t stream = 1;
  for (std::size_t n : {1000, 10000, 100000}) {
    const double d = wasserstein1(empirical_apply(tw, DiscreteMeasure::dirac(1.0), n, RngStream(5, stream++)), exact);
    CHECK(d <= previous + 0.005);
    previous = d;
  }
}
