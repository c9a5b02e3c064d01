#include "bornlab/lattice1d.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bornlab/error.hpp"

namespace bornlab::lattice1d {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_matching(const HoppingChain& chain, const WaveFunction1D& psi) {
  if (psi.size() != chain.sites) {
    throw PreconditionError("wave function has " + std::to_string(psi.size()) +
                            " amplitudes, chain has " + std::to_string(chain.sites) + " sites");
  }
}

// ln of int_lo^hi exp(g(p)) dp, g(p) = c p^2 - p, evaluated with the integrand
// rescaled by its maximum on the interval so nothing overflows.
double log_integral_piece(double c, double lo, double hi) {
  if (!(hi > lo)) return -std::numeric_limits<double>::infinity();
  auto g = [c](double p) { return c * p * p - p; };
  // g is convex, so its maximum over [lo, hi] sits at an endpoint.
  const double peak = std::isinf(hi) ? g(lo) : std::max(g(lo), g(hi));
  auto f = [&](double p) { return std::exp(g(p) - peak); };
  double error = 0.0;
  const double scaled =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 30, 1e-11, &error);
  return peak + std::log(scaled);
}

double log_spread_integral(double c, double cutoff) {
  double turning = std::numeric_limits<double>::infinity();
  if (c > 0.0) turning = 0.5 / c;
  const double falling = log_integral_piece(c, 0.0, std::min(cutoff, turning));
  const double rising = cutoff > turning ? log_integral_piece(c, turning, cutoff)
                                         : -std::numeric_limits<double>::infinity();
  const double hi = std::max(falling, rising);
  const double lo = std::min(falling, rising);
  return std::numbers::ln2 + hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

void HoppingChain::validate() const {
  if (sites < 4) throw PreconditionError("hopping chain needs at least 4 sites");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw PreconditionError("hopping chain spacing must be positive");
  }
}

double HoppingChain::momentum(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(sites) * spacing);
}

MomentumAmplitudes to_momentum(const WaveFunction1D& psi) {
  return {numerics::dft(psi.amplitudes)};
}

WaveFunction1D from_momentum(const MomentumAmplitudes& amps) {
  return {numerics::idft(amps.values)};
}

cplx dispersion(const HoppingChain& chain, double p) {
  return chain.onsite + 2.0 * chain.kappa * std::cos(p * chain.spacing);
}

cplx continuum_dispersion(const HoppingChain& chain, double p) {
  const double a = chain.spacing;
  return chain.onsite + 2.0 * chain.kappa - chain.kappa * a * a * p * p;
}

ComplexMatrix hopping_matrix(const HoppingChain& chain) {
  chain.validate();
  const auto n = static_cast<Eigen::Index>(chain.sites);
  ComplexMatrix H = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    H(i, i) = chain.onsite;
    H(i, (i + 1) % n) += chain.kappa;
    H(i, (i + n - 1) % n) += chain.kappa;
  }
  return H;
}

WaveFunction1D evolve(const HoppingChain& chain, const WaveFunction1D& psi0, double t) {
  chain.validate();
  require_matching(chain, psi0);
  MomentumAmplitudes amps = to_momentum(psi0);
  for (std::size_t k = 0; k < chain.sites; ++k) {
    amps.values[k] *= std::exp(-kI * dispersion(chain, chain.momentum(k)) * t);
  }
  return from_momentum(amps);
}

WaveFunction1D translate(const WaveFunction1D& psi, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(psi.size());
  WaveFunction1D out{std::vector<cplx>(psi.size())};
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t j = ((i + shift) % n + n) % n;
    out.amplitudes[static_cast<std::size_t>(j)] = psi.amplitudes[static_cast<std::size_t>(i)];
  }
  return out;
}

WaveFunction1D sample_packet(const HoppingChain& chain, const GaussianPacket& packet) {
  chain.validate();
  WaveFunction1D psi{std::vector<cplx>(chain.sites)};
  for (std::size_t n = 0; n < chain.sites; ++n) {
    psi.amplitudes[n] = continuum_packet(packet, 0.0, static_cast<double>(n) * chain.spacing, 0.0);
  }
  return psi;
}

cplx continuum_packet(const GaussianPacket& packet, cplx diffusion, double x, double t) {
  const double s2 = packet.width * packet.width;
  const double A = 0.25 / s2;
  const cplx B = s2 - kI * diffusion * t;
  const cplx J = 2.0 * s2 * packet.momentum + kI * (x - packet.center);
  const cplx exponent = J * J / (4.0 * B) - packet.momentum * packet.momentum * s2;
  return std::exp(kI * packet.momentum * packet.center) * std::exp(exponent) / (2.0 * std::sqrt(A * B));
}

double continuum_error(const HoppingChain& chain, const GaussianPacket& packet, double t) {
  chain.validate();
  const double a = chain.spacing;
  if (!(packet.width >= 8.0 * a)) {
    throw NumericalGuardError("unresolved packet: width " + std::to_string(packet.width) +
                              " < 8a = " + std::to_string(8.0 * a));
  }
  const cplx diffusion = a * a * chain.kappa;
  const double drift = -2.0 * diffusion.real() * packet.momentum * t;
  const double spread =
      packet.width * std::hypot(1.0, std::abs(diffusion) * t / (packet.width * packet.width));
  const double margin = 8.0 * std::max(packet.width, spread);
  const double box = chain.box_length();
  for (double c : {packet.center, packet.center + drift}) {
    if (c - margin < 0.0 || c + margin > box) {
      throw NumericalGuardError("packet wraps the periodic box by time t = " + std::to_string(t));
    }
  }

  const WaveFunction1D lattice = evolve(chain, sample_packet(chain, packet), t);
  const cplx global = std::exp(kI * (chain.onsite + 2.0 * chain.kappa) * t);
  double sup = 0.0;
  for (std::size_t n = 0; n < chain.sites; ++n) {
    const double x = static_cast<double>(n) * a;
    const cplx exact = continuum_packet(packet, diffusion, x, t);
    sup = std::max(sup, std::abs(lattice.amplitudes[n] * global - exact));
  }
  return sup;
}

double max_growth_rate(const HoppingChain& chain) {
  chain.validate();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < chain.sites; ++k) {
    best = std::max(best, dispersion(chain, chain.momentum(k)).imag());
  }
  return best;
}

double norm_growth_rate(const HoppingChain& chain, const WaveFunction1D& psi0, double horizon,
                        std::size_t samples) {
  chain.validate();
  require_matching(chain, psi0);
  if (!(horizon > 0.0)) throw PreconditionError("norm_growth_rate: horizon must be positive");
  if (samples < 2) throw PreconditionError("norm_growth_rate: need at least 2 samples");
  if (numerics::norm2(psi0.amplitudes) == 0.0) {
    throw PreconditionError("norm_growth_rate: zero state");
  }
  std::vector<double> times(samples);
  std::vector<double> log_norms(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    times[i] = 0.5 * horizon + 0.5 * horizon * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double norm = numerics::norm2(evolve(chain, psi0, times[i]).amplitudes);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw NumericalGuardError("norm_growth_rate: norm left double range at t = " +
                                std::to_string(times[i]));
    }
    log_norms[i] = std::log(norm);
  }
  return numerics::fit_linear_slope(times, log_norms);
}

SpreadIntegral lorentz_spread_integral(double spacing, double im_kappa, double t, double cutoff) {
  if (!(spacing > 0.0)) throw PreconditionError("lorentz_spread_integral: spacing must be positive");
  if (!(cutoff > 0.0)) throw PreconditionError("lorentz_spread_integral: cutoff must be positive");
  const double c = spacing * spacing * im_kappa * t;
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw PreconditionError("lorentz_spread_integral: a^2 im_kappa t must be finite and >= 0");
  }

  const double log_max = std::log(DBL_MAX);
  SpreadIntegral out;
  if (c > 0.0 && std::isinf(cutoff)) {
    out.log_value = std::numeric_limits<double>::infinity();
  } else {
    out.log_value = log_spread_integral(c, cutoff);
  }
  if (out.log_value < log_max) {
    out.value = std::exp(out.log_value);
    return out;
  }

  out.value = std::numeric_limits<double>::infinity();
  out.overflow = true;
  double lo = 0.0;
  double hi = cutoff;
  if (std::isinf(hi)) {
    hi = std::max(1.0, 1.0 / c);
    while (log_spread_integral(c, hi) < log_max) hi *= 2.0;
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (log_spread_integral(c, mid) < log_max ? lo : hi) = mid;
  }
  out.overflow_momentum = hi;
  return out;
}

double log_spread_increment(double spacing, double im_kappa, double t, double lower, double upper) {
  if (!(spacing > 0.0)) throw PreconditionError("log_spread_increment: spacing must be positive");
  if (!(lower >= 0.0) || !(upper > lower)) {
    throw PreconditionError("log_spread_increment: need 0 <= lower < upper");
  }
  const double c = spacing * spacing * im_kappa * t;
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw PreconditionError("log_spread_increment: a^2 im_kappa t must be finite and >= 0");
  }
  return std::numbers::ln2 + log_integral_piece(c, lower, upper);
}

double n_particle_imbalance(cplx onsite, unsigned n, double t) {
  if (n < 1) throw PreconditionError("n_particle_imbalance: particle count must be >= 1");
  return std::exp(static_cast<double>(n) * onsite.imag() * t);
}

}  // namespace bornlab::lattice1d
