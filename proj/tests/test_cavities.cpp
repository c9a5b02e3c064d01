#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "bornlab/cavities.hpp"
#include "bornlab/error.hpp"
#include "bornlab/numerics.hpp"
#include "oracles.hpp"

using namespace bornlab;
using namespace bornlab::cavities;

namespace {

bool is_a(Internal label, std::size_t) { return label == Internal::A; }

CavityState final_state(unsigned m, unsigned n, std::size_t cavities, bool compensate = false) {
  return run_protocol(init_state(m, n, cavities), tau_schedule(m, n, 1.0), {compensate});
}

}  // namespace

TEST_CASE("init_state examples") {
  const CavityState s11 = init_state(1, 1, 8);
  CHECK(s11.amplitude(Internal::A, 0) == cplx(1.0));
  CHECK(s11.amplitude(Internal::B, 0) == cplx(1.0));
  const CavityState s21 = init_state(2, 1, 8);
  CHECK(std::abs(s21.amplitude(Internal::A, 0) - std::sqrt(2.0)) < 1e-15);
  CHECK(s21.amplitude(Internal::B, 0) == cplx(1.0));
  const CavityState s70 = init_state(7, 0, 8);
  for (std::size_t c = 0; c < 8; ++c) CHECK(s70.amplitude(Internal::B, c) == cplx(0.0));
  CHECK_THROWS_AS(init_state(7, 1, 8), PreconditionError);
  CHECK_THROWS_AS(init_state(0, 0, 8), PreconditionError);
}

TEST_CASE("CavityState is never normalised and rejects the zero vector") {
  const CavityState s(2, {3.0, 0.0, 0.0, 4.0});
  CHECK(s.norm() == doctest::Approx(5.0));
  CHECK(s.label_of(3) == Internal::B);
  CHECK(s.cavity_of(3) == 1);
  CHECK_THROWS_AS(CavityState(2, {0.0, 0.0, 0.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(CavityState(2, {1.0, 0.0, 0.0}), PreconditionError);
}

TEST_CASE("channel_unitary against the 2x2 exponential") {
  const auto check = [](double kappa, double V, double tau) {
    const ChannelCoefficients c = channel_unitary(kappa, V, tau);
    ComplexMatrix H(2, 2);
    H << V, kappa, kappa, V;
    ComplexVector e0(2);
    e0 << 1.0, 0.0;
    ComplexVector ref = e0;
    for (int s = 0; s < 20; ++s) ref = oracle::power_series_apply(H, tau / 20, ref);
    CHECK(std::abs(c.alpha - ref[0]) < 1e-12);
    CHECK(std::abs(c.beta - ref[1]) < 1e-12);
  };
  check(1.0, 0.0, std::numbers::pi / 2);
  check(1.0, 0.0, std::numbers::pi / 4);
  check(0.7, -0.4, 1.9);
  const ChannelCoefficients id = channel_unitary(1.0, 0.0, 0.0);
  CHECK(id.alpha == cplx(1.0));
  CHECK(id.beta == cplx(0.0));
  const ChannelCoefficients full = channel_unitary(1.0, 0.0, std::numbers::pi / 2);
  CHECK(std::abs(full.beta + oracle::kI) < 1e-15);
  const ChannelCoefficients half = channel_unitary(1.0, 0.0, std::numbers::pi / 4);
  CHECK(std::abs(half.alpha - std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(half.beta + oracle::kI * std::sqrt(0.5)) < 1e-15);
}

TEST_CASE("unimodularity of alpha +- beta") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const ChannelCoefficients c = channel_unitary(u(gen) + 5.01, u(gen), u(gen) + 5.0);
    CHECK(std::abs(std::abs(c.alpha + c.beta) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(c.alpha - c.beta) - 1.0) < 1e-12);
  }
}

TEST_CASE("open_channel examples") {
  const CavityState s(3, {1.0, 1.0, 0.5, 0.0, 0.0, 2.0});
  const CavityState same = open_channel(s, 0, 1, Internal::A, {1.0, 0.0});
  CHECK(same.amplitudes() == s.amplitudes());

  const ChannelCoefficients c{cplx(0.3, 0.1), cplx(-0.2, 0.7)};
  const CavityState sym = open_channel(s, 0, 1, Internal::A, c);
  CHECK(std::abs(sym.amplitude(Internal::A, 0) - (c.alpha + c.beta)) < 1e-15);
  CHECK(std::abs(sym.amplitude(Internal::A, 1) - (c.alpha + c.beta)) < 1e-15);
  CHECK(sym.amplitude(Internal::A, 2) == cplx(0.5));
  CHECK(sym.amplitude(Internal::B, 2) == cplx(2.0));

  const CavityState anti(2, {1.0, -1.0, 0.0, 0.0});
  const CavityState out = open_channel(anti, 0, 1, Internal::A, c);
  CHECK(std::abs(out.amplitude(Internal::A, 0) - (c.alpha - c.beta)) < 1e-15);
  CHECK(std::abs(out.amplitude(Internal::A, 1) + (c.alpha - c.beta)) < 1e-15);

  CHECK_THROWS_AS(open_channel(s, 0, 3, Internal::A, c), PreconditionError);
  CHECK_THROWS_AS(open_channel(s, 1, 1, Internal::A, c), PreconditionError);
}

TEST_CASE("opening durations move exactly one unit of modulus") {
  for (unsigned k = 1; k <= 20; ++k) {
    const double kappa = 0.7;
    const ChannelCoefficients c = channel_unitary(kappa, 0.0, opening_duration(k, kappa));
    CHECK(std::abs(std::abs(c.beta) * std::sqrt(double(k)) - 1.0) < 1e-13);
    CHECK(std::abs(std::abs(c.alpha) * std::sqrt(double(k)) - std::sqrt(k - 1.0)) < 1e-13);
  }
}

TEST_CASE("protocol invariant after every step") {
  const unsigned m = 4, n = 3;
  const auto trace = protocol_trace(init_state(m, n, 8), tau_schedule(m, n, 1.3, 0.2));
  REQUIRE(trace.size() == m + n + 1);
  for (unsigned j = 1; j <= m; ++j) {
    const CavityState& s = trace[j];
    CHECK(std::abs(std::abs(s.amplitude(Internal::A, 0)) - std::sqrt(double(m - j))) < 1e-12);
    for (unsigned c = 1; c <= j; ++c) CHECK(std::abs(std::abs(s.amplitude(Internal::A, c)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(s.amplitude(Internal::B, 0)) - std::sqrt(double(n))) < 1e-12);
  }
  const CavityState& last = trace.back();
  for (unsigned c = 1; c <= m; ++c) CHECK(std::abs(std::abs(last.amplitude(Internal::A, c)) - 1.0) < 1e-12);
  for (unsigned c = m + 1; c <= m + n; ++c) CHECK(std::abs(std::abs(last.amplitude(Internal::B, c)) - 1.0) < 1e-12);
  CHECK(std::abs(last.amplitude(Internal::A, 0)) < 1e-12);
  CHECK(std::abs(last.amplitude(Internal::B, 0)) < 1e-12);
}

TEST_CASE("phase compensation makes the amplitudes literally equal at V = 0") {
  const CavityState s = final_state(2, 3, 6, true);
  for (unsigned c = 1; c <= 2; ++c) CHECK(std::abs(s.amplitude(Internal::A, c) - 1.0) < 1e-12);
  for (unsigned c = 3; c <= 5; ++c) CHECK(std::abs(s.amplitude(Internal::B, c) - 1.0) < 1e-12);
}

TEST_CASE("schedule validation") {
  ProtocolSchedule bad = tau_schedule(2, 1, 1.0);
  bad.steps.push_back(bad.steps.front());
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  ProtocolSchedule zero = tau_schedule(1, 1, 1.0);
  zero.steps[0].duration = 0.0;
  CHECK_THROWS_AS(zero.validate(), PreconditionError);
  CHECK_THROWS_AS(channel_unitary(0.0, 0.0, 1.0), PreconditionError);
}

TEST_CASE("symmetry probability: counting gives m/(m+n)") {
  const CavityState s = final_state(2, 3, 8);
  CHECK(symmetry_probability(s, is_a) == Rational{2, 5});
  CHECK(symmetry_probability(s, [](Internal, std::size_t c) { return c == 1; }) == Rational{1, 5});
  CHECK(symmetry_probability(final_state(3, 0, 8), is_a) == Rational{1, 1});
  CHECK(symmetry_probability(final_state(2, 2, 8), is_a) == Rational{1, 2});
  CHECK(Rational{2, 5}.str() == "2/5");
}

TEST_CASE("symmetry probability refuses unequal moduli") {
  const CavityState s(2, {1.0, 2.0, 0.0, 0.0});
  CHECK_THROWS_AS(symmetry_probability(s, is_a), NumericalGuardError);
  // the unnormalised scale is irrelevant
  const CavityState scaled(2, {0.0, 7.0, 7.0, 0.0});
  CHECK(symmetry_probability(scaled, is_a) == Rational{1, 2});
}

TEST_CASE("Born sampling") {
  SUBCASE("five equal outcomes") {
    const CavityState s(5, {1.0, -1.0, oracle::kI, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0});
    rng::RngStream r(7, 1);
    const auto counts = born_sample(s, 100000, r);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::abs(counts[i] / 1e5 - 0.2) <= oracle::binomial_3sigma(0.2, 1e5));
    }
  }
  SUBCASE("event A on the (2, 3) final state") {
    const CavityState s = final_state(2, 3, 8);
    rng::RngStream r(7, 2);
    const auto counts = born_sample(s, 100000, r);
    std::uint64_t a = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) a += s.label_of(i) == Internal::A ? counts[i] : 0;
    CHECK(std::abs(a / 1e5 - 0.4) <= oracle::binomial_3sigma(0.4, 1e5));
  }
  SUBCASE("single outcome") {
    const CavityState s(2, {0.0, 0.0, 0.0, cplx(0.0, 3.0)});
    rng::RngStream r(7, 3);
    const auto counts = born_sample(s, 1000, r);
    CHECK(counts[3] == 1000);
  }
}

TEST_CASE("imbalance demo") {
  const auto grow = imbalance_demo({0.8, 0.3}, 5);
  const double expected[] = {1.1, 1.21, 1.331, 1.4641, 1.61051};
  for (std::size_t j = 0; j < 5; ++j) CHECK(grow[j] == doctest::Approx(expected[j]).epsilon(1e-12));
  const auto shrink = imbalance_demo({0.8, 0.1}, 5);
  for (std::size_t j = 0; j < 5; ++j) CHECK(shrink[j] == doctest::Approx(std::pow(0.9, j + 1.0)).epsilon(1e-12));
  for (double r : imbalance_demo(channel_unitary(1.3, 0.4, 0.77), 8)) CHECK(std::abs(r - 1.0) < 1e-12);
}
