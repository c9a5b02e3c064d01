#include <cmath>
#include <vector>

#include <doctest.h>

#include "bornlab/error.hpp"
#include "bornlab/rng.hpp"
#include "oracles.hpp"

using namespace bornlab::rng;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams replay and separate") {
  RngStream a(42, 3), b(42, 3), other_stream(42, 4), other_seed(43, 3);
  int same_stream = 0, same_seed = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_stream += x == other_stream.next_u64();
    same_seed += x == other_seed.next_u64();
  }
  CHECK(same_stream == 0);
  CHECK(same_seed == 0);
}

TEST_CASE("copies replay independently") {
  RngStream a(7, 0);
  a.next_u32();
  RngStream copy = a;
  for (int i = 0; i < 10; ++i) CHECK(a.next_u32() == copy.next_u32());
}

TEST_CASE("uniform lies in [0, 1) and has mean 1/2") {
  RngStream s(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Standard deviation of the mean is 1 / sqrt(12 n).
  CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("uniform passes a 16-bin chi-square test") {
  RngStream s(99, 5);
  std::vector<int> bins(16);
  const int n = 160000;
  for (int i = 0; i < n; ++i) ++bins[static_cast<std::size_t>(s.uniform() * 16.0)];
  double chi2 = 0.0;
  for (int c : bins) chi2 += std::pow(c - n / 16.0, 2) / (n / 16.0);
  // 15 degrees of freedom; the 99.9% quantile is 37.7.
  CHECK(chi2 < 37.7);
}

TEST_CASE("categorical sampler: degenerate weights") {
  const std::vector<double> w{0.0, 1.0, 0.0};
  RngStream s(0, 0);
  for (int i = 0; i < 1000; ++i) CHECK(sample_categorical(w, s) == 1);
}

TEST_CASE("categorical sampler: binomial bounds") {
  {
    const std::vector<double> w{1.0, 1.0};
    CategoricalSampler sampler(w);
    RngStream s(12, 0);
    const int n = 1000000;
    int first = 0;
    for (int i = 0; i < n; ++i) first += sampler(s) == 0;
    CHECK(std::abs(first / double(n) - 0.5) <= oracle::binomial_3sigma(0.5, n));
  }
  {
    const std::vector<double> w{2.0, 3.0};
    CategoricalSampler sampler(w);
    RngStream s(13, 0);
    const int n = 100000;
    int first = 0;
    for (int i = 0; i < n; ++i) first += sampler(s) == 0;
    CHECK(std::abs(first / double(n) - 0.4) <= oracle::binomial_3sigma(0.4, n));
  }
}

TEST_CASE("categorical sampler: invalid weights") {
  RngStream s(0, 0);
  CHECK_THROWS_AS(sample_categorical(std::vector<double>{}, s), bornlab::PreconditionError);
  CHECK_THROWS_AS(sample_categorical(std::vector<double>{0.0, 0.0}, s), bornlab::PreconditionError);
  CHECK_THROWS_AS(sample_categorical(std::vector<double>{1.0, -0.5}, s), bornlab::PreconditionError);
  CHECK_THROWS_AS(sample_categorical(std::vector<double>{1.0, NAN}, s), bornlab::PreconditionError);
}

TEST_CASE("categorical sampler passes a chi-square test at significance 0.001") {
  const std::vector<double> w{1.0, 2.0, 3.0, 0.0, 4.0, 0.5};
  const double total = 10.5;
  // 99.9% chi-square quantiles for 4 degrees of freedom: 18.467
  for (std::uint64_t seed : {1u, 7u, 2024u}) {
    CategoricalSampler sampler(w);
    RngStream s(seed, 0);
    std::vector<int> counts(w.size());
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[sampler(s)];
    CHECK(counts[3] == 0);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double expected = n * w[i] / total;
      chi2 += std::pow(counts[i] - expected, 2) / expected;
    }
    CHECK(chi2 < 18.467);
  }
}
