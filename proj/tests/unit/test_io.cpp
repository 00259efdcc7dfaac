#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>

#include "kmeasure/error.hpp"
#include "kmeasure/io.hpp"
#include "oracles.hpp"

using namespace kmeasure;

TEST_CASE("doubles round-trip bit for bit") {
  std::mt19937_64 rng(501);
  std::vector<double> values{0.0, 1.0, 0.1, 1e-300, 5e-324, 1.7976931348623157e308, 2.0 / 3.0};
  for (int k = 0; k < 2000; ++k) {
    std::uint64_t bits = rng();
    double x = std::bit_cast<double>(bits);
    if (std::isfinite(x)) values.push_back(std::abs(x));
  }
  for (double x : values) {
    const double y = io::parse_double(io::format_double(x));
    CHECK(std::bit_cast<std::uint64_t>(y) == std::bit_cast<std::uint64_t>(x));
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK_THROWS_AS(io::parse_double("abc"), Error);
  CHECK_THROWS_AS(io::parse_double("1.5x"), Error);
}

TEST_CASE("CSV round trip") {
  std::mt19937_64 rng(503);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = oracle::to_measure(oracle::random_atoms(rng, 1 + trial % 20, 100.0));
    const std::string csv = io::measure_to_csv(mu);
    CHECK(csv.rfind("location,weight\n", 0) == 0);
    CHECK(io::measure_from_csv(csv) == mu);
  }
  CHECK_THROWS_AS(io::measure_from_csv("x,y\n1,1\n"), Error);
  CHECK_THROWS_AS(io::measure_from_csv("location,weight\n1\n"), Error);
}

TEST_CASE("JSON round trip") {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = oracle::to_measure(oracle::random_atoms(rng, 1 + trial % 20, 100.0));
    const auto j = io::measure_to_json(mu);
    REQUIRE(j.is_array());
    CHECK(j.size() == mu.size());
    CHECK(io::measure_from_json(nlohmann::json::parse(j.dump())) == mu);
  }
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "kmeasure_io_test";
  std::filesystem::create_directories(dir);
  io::write_text_file(dir / "a.txt", "hello\n");
  CHECK(io::read_text_file(dir / "a.txt") == "hello\n");
  try {
    io::read_text_file(dir / "missing.txt");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
  std::filesystem::remove_all(dir);
}
