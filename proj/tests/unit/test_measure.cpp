#include <doctest.h>

#include <cmath>
#include <random>

#include "kmeasure/error.hpp"
#include "kmeasure/measure.hpp"
#include "kmeasure/metrics.hpp"
#include "kmeasure/mixing_law.hpp"
#include "oracles.hpp"

using namespace kmeasure;

namespace {

DiscreteMeasure atoms(std::vector<double> x, std::vector<double> w) {
  return DiscreteMeasure::make(std::move(x), std::move(w));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("make sorts, merges duplicates and drops zero weights") {
  const auto a = atoms({1, 0}, {0.5, 0.5});
  REQUIRE(a.size() == 2);
  CHECK(a.location(0) == 0.0);
  CHECK(a.location(1) == 1.0);
  CHECK(a.weight(0) == 0.5);

  const auto b = atoms({2, 2}, {0.3, 0.7});
  REQUIRE(b.size() == 1);
  CHECK(b.location(0) == 2.0);
  CHECK(b.weight(0) == doctest::Approx(1.0).epsilon(1e-15));

  const auto c = atoms({0, 3, 5}, {0.5, 0.0, 0.5});
  CHECK(c.size() == 2);
}

TEST_CASE("make rejects invalid input") {
  CHECK(code_of([] { atoms({1}, {-0.1}); }) == ErrorCode::NegativeWeight);
  CHECK(code_of([] { atoms({-1}, {1}); }) == ErrorCode::NegativeLocation);
  CHECK(code_of([] { atoms({}, {}); }) == ErrorCode::EmptyMeasure);
  CHECK(code_of([] { atoms({1, 2}, {0, 0}); }) == ErrorCode::EmptyMeasure);
  CHECK(code_of([] { atoms({1, 2}, {0.5, 0.6}); }) == ErrorCode::MassOutOfTolerance);
  CHECK(code_of([] { atoms({1, 2}, {1}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { atoms({NAN}, {1}); }) == ErrorCode::NonFinite);
  // Sub-probability measures are allowed when the flag is off.
  const auto sub = DiscreteMeasure::make({1, 2}, {0.2, 0.3}, MakeOptions{false});
  CHECK(sub.total_mass() == doctest::Approx(0.5));
}

TEST_CASE("near-duplicate locations merge") {
  const auto m = atoms({1.0, 1.0 + 1e-16, 2.0}, {0.25, 0.25, 0.5});
  CHECK(m.size() == 2);
}

TEST_CASE("construction is idempotent") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = oracle::to_measure(oracle::random_atoms(rng, 1 + trial % 9, 10.0));
    std::vector<double> x(mu.locations().begin(), mu.locations().end());
    std::vector<double> w(mu.weights().begin(), mu.weights().end());
    const auto again = DiscreteMeasure::make(x, w);
    CHECK(again == mu);
  }
}

TEST_CASE("moments") {
  CHECK(moment(DiscreteMeasure::dirac(1.0), 1.0) == 1.0);
  const auto m = atoms({0, 2}, {0.5, 0.5});
  CHECK(moment(m, 1.5) == doctest::Approx(0.5 * std::pow(2.0, 1.5)).epsilon(1e-14));
  CHECK(moment(m, 1.5) == doctest::Approx(1.41421).epsilon(1e-5));
  // 0^0 = 1, so the zeroth moment is the mass.
  CHECK(moment(m, 0.0) == doctest::Approx(1.0));
  CHECK(variance(m) == doctest::Approx(1.0));

  const auto exp1 = discretize_exponential(1.0, 1024);
  CHECK(exp1.mean() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("convolution examples") {
  const auto coin = atoms({0, 1}, {0.5, 0.5});
  const auto c = convolve(coin, coin);
  REQUIRE(c.size() == 3);
  CHECK(c.location(2) == 2.0);
  CHECK(c.weight(0) == 0.25);
  CHECK(c.weight(1) == 0.5);
  CHECK(c.weight(2) == 0.25);

  const auto d = convolve(DiscreteMeasure::dirac(0.3), DiscreteMeasure::dirac(1.2));
  REQUIRE(d.size() == 1);
  CHECK(d.location(0) == doctest::Approx(1.5));
}

TEST_CASE("convolution matches brute-force pair sums") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_atoms(rng, 1 + trial % 6, 5.0);
    const auto b = oracle::random_atoms(rng, 1 + (trial / 6) % 6, 5.0);
    const auto c = convolve(oracle::to_measure(a), oracle::to_measure(b));
    const auto brute = oracle::pair_sums(a, b);
    CHECK(c.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.mean() == doctest::Approx(oracle::moment(a, 1) + oracle::moment(b, 1)).epsilon(1e-12));
    CHECK(oracle::quantile_w1(oracle::atoms_of(c), brute) < 1e-12);
  }
}

TEST_CASE("convolution mass is bilinear") {
  const auto a = DiscreteMeasure::make({0, 1}, {0.2, 0.3}, MakeOptions{false});
  const auto b = DiscreteMeasure::make({1, 4}, {0.1, 0.3}, MakeOptions{false});
  CHECK(convolve(a, b).total_mass() == doctest::Approx(0.5 * 0.4).epsilon(1e-12));
}

TEST_CASE("convolution refuses to exceed the hard cap") {
  std::vector<double> x(100);
  std::vector<double> w(100, 0.01);
  for (int k = 0; k < 100; ++k) x[k] = k * 1.37;
  const auto mu = DiscreteMeasure::make(x, w);
  CHECK_THROWS_AS(convolve(mu, mu, 1000), Error);
}

TEST_CASE("convolution power") {
  const auto coin = atoms({0, 1}, {0.5, 0.5});
  const auto one = convolve_power(coin, 1, {});
  CHECK(one.result == coin);
  CHECK(one.w1_error_bound == 0.0);
  const auto two = convolve_power(coin, 2, {3, kDefaultHardCap, 4});
  CHECK(two.result == convolve(coin, coin));
  CHECK(two.w1_error_bound == 0.0);
}

TEST_CASE("convolution power bound dominates the true error") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = oracle::random_atoms(rng, 2 + trial % 5, 3.0);
    const unsigned i = 2 + trial % 3;
    oracle::Atoms exact = a;
    for (unsigned k = 1; k < i; ++k) exact = oracle::pair_sums(exact, a);
    const BudgetOptions opt{static_cast<std::size_t>(2 + trial % 4), kDefaultHardCap, 4};
    const auto got = convolve_power(oracle::to_measure(a), i, opt);
    CHECK(got.result.size() <= opt.budget);
    const double w1 = oracle::transport_w1(oracle::atoms_of(got.result), exact);
    CHECK(w1 <= got.w1_error_bound + 1e-12);
  }
}

TEST_CASE("scale product") {
  const auto coin = atoms({0, 1}, {0.5, 0.5});
  const auto s = scale_product(coin, DiscreteMeasure::dirac(2.0));
  REQUIRE(s.size() == 2);
  CHECK(s.location(1) == 2.0);
  CHECK(s.weight(0) == 0.5);
  const auto mu = atoms({0.5, 3}, {0.4, 0.6});
  CHECK(scale_product(DiscreteMeasure::dirac(1.0), mu) == mu);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_atoms(rng, 1 + trial % 5, 2.0);
    const auto b = oracle::random_atoms(rng, 1 + trial % 7, 4.0);
    const auto p = scale_product(oracle::to_measure(a), oracle::to_measure(b));
    CHECK(p.mean() == doctest::Approx(oracle::moment(a, 1) * oracle::moment(b, 1)).epsilon(1e-12));
    CHECK(oracle::quantile_w1(oracle::atoms_of(p), oracle::pair_products(a, b)) < 1e-12);
  }
}

TEST_CASE("cdf and quantile") {
  const auto coin = atoms({0, 1}, {0.5, 0.5});
  CHECK(cdf(coin, 0.0) == 0.5);
  CHECK(cdf(coin, -1.0) == 0.0);
  CHECK(cdf(coin, 1.0) == 1.0);
  CHECK(quantile(coin, 0.75) == 1.0);
  CHECK(quantile(coin, 0.5) == 0.0);
  for (double p : {0.01, 0.3, 0.999, 1.0}) CHECK(quantile(DiscreteMeasure::dirac(2.5), p) == 2.5);
  CHECK_THROWS_AS(quantile(coin, 1.5), Error);
  CHECK_THROWS_AS(quantile(coin, -0.1), Error);

  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mu = oracle::to_measure(oracle::random_atoms(rng, 1 + trial % 8, 10.0));
    for (double p : mu.cumulative()) CHECK(cdf(mu, quantile(mu, p)) >= p - 1e-15);
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const double x = mu.location(k);
      CHECK(quantile(mu, cdf(mu, x)) <= x);
    }
  }
}

TEST_CASE("coarsen examples") {
  const auto pair = atoms({0, 0.001}, {0.5, 0.5});
  const auto c = coarsen(pair, 1);
  REQUIRE(c.result.size() == 1);
  CHECK(c.result.location(0) == doctest::Approx(0.0005).epsilon(1e-12));
  CHECK(c.w1_error_bound == doctest::Approx(0.0005).epsilon(1e-12));

  const auto mu = atoms({0, 1, 2}, {0.2, 0.3, 0.5});
  const auto same = coarsen(mu, 3);
  CHECK(same.result == mu);
  CHECK(same.w1_error_bound == 0.0);
}

TEST_CASE("coarsen preserves mass and mean and its bound dominates W1") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto a = oracle::random_atoms(rng, n, 5.0);
    const auto mu = oracle::to_measure(a);
    const std::size_t budget = 1 + trial % (n - 1 + 1);
    const auto c = coarsen(mu, budget);
    CHECK(c.result.size() <= std::max<std::size_t>(budget, 1));
    CHECK(c.result.total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-12));
    CHECK(c.result.mean() == doctest::Approx(mu.mean()).epsilon(1e-12));
    const double w1 = oracle::transport_w1(oracle::atoms_of(c.result), a);
    CHECK(w1 <= c.w1_error_bound + 1e-12);
  }
}

TEST_CASE("coarsen keeps an atom at zero when the budget allows") {
  const auto mu = atoms({0, 1e-6, 2e-6, 5}, {0.4, 0.2, 0.2, 0.2});
  const auto c = coarsen(mu, 2);
  REQUIRE(c.result.size() == 2);
  CHECK(c.result.location(0) == 0.0);
  CHECK(c.result.weight(0) == doctest::Approx(0.4));
}

TEST_CASE("budgeted products and convolutions report sound bounds") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_atoms(rng, 6, 3.0);
    const auto b = oracle::random_atoms(rng, 6, 3.0);
    // fine_bins_per_atom = 1 forces the fused binning path at 36 pairs.
    const BudgetOptions opt{5, kDefaultHardCap, static_cast<std::size_t>(1 + trial % 2)};
    const auto conv = convolve_budgeted(oracle::to_measure(a), oracle::to_measure(b), opt);
    CHECK(conv.result.size() <= 5);
    CHECK(conv.result.mean() == doctest::Approx(oracle::moment(a, 1) + oracle::moment(b, 1)).epsilon(1e-12));
    CHECK(oracle::transport_w1(oracle::atoms_of(conv.result), oracle::pair_sums(a, b)) <=
          conv.w1_error_bound + 1e-12);
    const auto prod = scale_product_budgeted(oracle::to_measure(a), oracle::to_measure(b), opt);
    CHECK(prod.result.size() <= 5);
    CHECK(oracle::transport_w1(oracle::atoms_of(prod.result), oracle::pair_products(a, b)) <=
          prod.w1_error_bound + 1e-12);
  }
}

TEST_CASE("tail first moment") {
  CHECK(tail_first_moment(DiscreteMeasure::dirac(0.5), 1.0) == 0.0);
  CHECK(tail_first_moment(DiscreteMeasure::dirac(2.0), 1.0) == 2.0);
  CHECK(tail_first_moment(atoms({0, 1, 2}, {0.25, 0.5, 0.25}), 2.0) == doctest::Approx(0.5));
}

TEST_CASE("discretized uniform law") {
  const auto two = discretize(MixingLaw::uniform(0.0, 1.0, 2), 2);
  REQUIRE(two.size() == 2);
  CHECK(two.location(0) == doctest::Approx(0.25));
  CHECK(two.location(1) == doctest::Approx(0.75));
  CHECK(two.weight(0) == doctest::Approx(0.5));

  const auto fine = discretize(MixingLaw::uniform(0.0, 1.0, 2), 512);
  CHECK(std::abs(fine.mean() - 0.5) <= 1e-12);
  CHECK(std::abs(moment(fine, 1.5) - 0.4) <= 1e-3);

  for (unsigned i = 1; i <= 6; ++i) {
    const auto law = MixingLaw::standard_uniform(i);
    CHECK(law.mean() == doctest::Approx(1.0 / i).epsilon(1e-15));
    CHECK(std::abs(discretize(law, 300).mean() - 1.0 / i) <= 1e-12);
  }
}

TEST_CASE("mix and renormalize") {
  const auto a = DiscreteMeasure::dirac(0.0);
  const auto b = DiscreteMeasure::dirac(2.0);
  const WeightedMeasure parts[] = {{0.5, &a}, {0.5, &b}};
  const auto m = mix(parts);
  CHECK(m.total_mass() == doctest::Approx(1.0));
  CHECK(m.mean() == doctest::Approx(1.0));
  const auto sub = DiscreteMeasure::make({1, 3}, {0.1, 0.3}, MakeOptions{false});
  const auto r = renormalized(sub);
  CHECK(r.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.weight(1) == doctest::Approx(0.75));
}

TEST_CASE("median") {
  CHECK(median(atoms({0, 1, 2}, {0.6, 0.2, 0.2})) == 0.0);
  CHECK(median(atoms({0, 1, 2}, {0.2, 0.2, 0.6})) == 2.0);
}
