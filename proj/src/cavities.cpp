#include "bornlab/cavities.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "bornlab/error.hpp"

namespace bornlab::cavities {

namespace {

constexpr cplx kI{0.0, 1.0};

}  // namespace

const char* to_string(Internal label) { return label == Internal::A ? "A" : "B"; }

CavityState::CavityState(std::size_t n_cavities, std::vector<cplx> amplitudes)
    : n_cavities_(n_cavities), amplitudes_(std::move(amplitudes)) {
  if (n_cavities_ < 1) throw PreconditionError("cavity state needs at least one cavity");
  if (amplitudes_.size() != 2 * n_cavities_) {
    throw PreconditionError("cavity state needs 2 * n_cavities amplitudes");
  }
  if (std::all_of(amplitudes_.begin(), amplitudes_.end(), [](const cplx& z) { return z == cplx{}; })) {
    throw PreconditionError("cavity state has no nonzero amplitude");
  }
}

std::size_t CavityState::flat_index(Internal label, std::size_t cavity) const {
  if (cavity >= n_cavities_) {
    throw PreconditionError("cavity index " + std::to_string(cavity) + " out of range (" +
                            std::to_string(n_cavities_) + " cavities)");
  }
  return static_cast<std::size_t>(label) * n_cavities_ + cavity;
}

void ProtocolSchedule::validate() const {
  std::set<std::pair<Internal, std::size_t>> seen;
  for (const auto& step : steps) {
    if (!(step.duration > 0.0)) throw PreconditionError("protocol step durations must be positive");
    if (!seen.emplace(step.selector, step.to).second) {
      throw PreconditionError("protocol opens channel to cavity " + std::to_string(step.to) + " for " +
                              to_string(step.selector) + " more than once");
    }
  }
}

CavityState init_state(unsigned m, unsigned n, std::size_t n_cavities) {
  if (m == 0 && n == 0) throw PreconditionError("init_state: m and n cannot both be zero");
  if (n_cavities < static_cast<std::size_t>(m) + n + 1) {
    throw PreconditionError("init_state: need at least m + n + 1 = " + std::to_string(m + n + 1) +
                            " cavities, got " + std::to_string(n_cavities));
  }
  std::vector<cplx> amps(2 * n_cavities);
  amps[0] = std::sqrt(static_cast<double>(m));
  amps[n_cavities] = std::sqrt(static_cast<double>(n));
  return CavityState(n_cavities, std::move(amps));
}

ChannelCoefficients channel_unitary(double kappa, double onsite, double tau) {
  if (kappa == 0.0) throw PreconditionError("channel_unitary: kappa must be nonzero");
  const cplx phase = std::exp(-kI * onsite * tau);
  return {phase * std::cos(kappa * tau), -kI * phase * std::sin(kappa * tau)};
}

CavityState open_channel(const CavityState& state, std::size_t i, std::size_t j, Internal selector,
                         const ChannelCoefficients& coeffs) {
  if (i == j) throw PreconditionError("open_channel: a channel needs two distinct cavities");
  CavityState out = state;
  const cplx psi_i = state.amplitude(selector, i);
  const cplx psi_j = state.amplitude(selector, j);
  out.amplitude(selector, i) = coeffs.alpha * psi_i + coeffs.beta * psi_j;
  out.amplitude(selector, j) = coeffs.alpha * psi_j + coeffs.beta * psi_i;
  return out;
}

double opening_duration(unsigned k, double kappa) {
  if (k < 1) throw PreconditionError("opening_duration: k must be >= 1");
  if (!(kappa > 0.0)) throw PreconditionError("opening_duration: kappa must be positive");
  return std::asin(1.0 / std::sqrt(static_cast<double>(k))) / kappa;
}

ProtocolSchedule tau_schedule(unsigned m, unsigned n, double kappa, double onsite) {
  if (m == 0 && n == 0) throw PreconditionError("tau_schedule: m and n cannot both be zero");
  if (!(kappa > 0.0)) throw PreconditionError("tau_schedule: kappa must be positive");
  ProtocolSchedule schedule;
  auto add_sector = [&](Internal selector, unsigned count, std::size_t first_cavity) {
    for (unsigned step = 0; step < count; ++step) {
      const double tau = opening_duration(count - step, kappa);
      schedule.steps.push_back({0, first_cavity + step, selector, tau, channel_unitary(kappa, onsite, tau)});
    }
  };
  add_sector(Internal::A, m, 1);
  add_sector(Internal::B, n, static_cast<std::size_t>(m) + 1);
  return schedule;
}

std::vector<CavityState> protocol_trace(const CavityState& state, const ProtocolSchedule& schedule,
                                        const ProtocolOptions& options) {
  schedule.validate();
  std::vector<CavityState> trace{state};
  trace.reserve(schedule.steps.size() + 1);
  for (const auto& step : schedule.steps) {
    CavityState next = open_channel(trace.back(), step.from, step.to, step.selector, step.coefficients);
    if (options.phase_compensate) {
      const cplx beta = step.coefficients.beta;
      if (std::abs(beta) > 0.0) next.amplitude(step.selector, step.to) *= std::abs(beta) / beta;
    }
    trace.push_back(std::move(next));
  }
  return trace;
}

CavityState run_protocol(const CavityState& state, const ProtocolSchedule& schedule,
                         const ProtocolOptions& options) {
  return protocol_trace(state, schedule, options).back();
}

Rational symmetry_probability(const CavityState& state, const EventPredicate& event, double tol) {
  if (!(tol >= 0.0)) throw PreconditionError("symmetry_probability: tolerance must be >= 0");
  const auto& amps = state.amplitudes();
  double largest = 0.0;
  for (const auto& z : amps) largest = std::max(largest, std::abs(z));

  std::int64_t total = 0;
  std::int64_t matching = 0;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const double modulus = std::abs(amps[k]);
    if (modulus <= tol * largest) continue;
    if (largest - modulus > tol * largest) {
      throw NumericalGuardError("symmetry precondition violated: moduli " + std::to_string(modulus) +
                                " and " + std::to_string(largest) + " differ beyond tolerance");
    }
    ++total;
    if (event(state.label_of(k), state.cavity_of(k))) ++matching;
  }
  const std::int64_t g = std::gcd(matching, total);
  return {matching / g, total / g};
}

std::vector<std::uint64_t> born_sample(const CavityState& state, std::uint64_t shots, rng::RngStream& rng) {
  if (shots < 1) throw PreconditionError("born_sample: shots must be >= 1");
  std::vector<double> weights(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) weights[k] = std::norm(state.amplitudes()[k]);
  const rng::CategoricalSampler sampler(weights);
  std::vector<std::uint64_t> counts(state.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) ++counts[sampler(rng)];
  return counts;
}

std::vector<double> imbalance_demo(const ChannelCoefficients& coeffs, std::size_t k) {
  if (k < 1) throw PreconditionError("imbalance_demo: k must be >= 1");
  CavityState state(3, {1.0, 1.0, 1.0, 0.0, 0.0, 0.0});
  const double connected0 = std::hypot(std::abs(state.amplitude(Internal::A, 0)), std::abs(state.amplitude(Internal::A, 1)));
  const double rest0 = std::abs(state.amplitude(Internal::A, 2));
  std::vector<double> ratios;
  ratios.reserve(k);
  for (std::size_t j = 1; j <= k; ++j) {
    state = open_channel(state, 0, 1, Internal::A, coeffs);
    const double connected =
        std::hypot(std::abs(state.amplitude(Internal::A, 0)), std::abs(state.amplitude(Internal::A, 1)));
    const double rest = std::abs(state.amplitude(Internal::A, 2));
    ratios.push_back((connected / connected0) / (rest / rest0));
  }
  return ratios;
}

}  // namespace bornlab::cavities
