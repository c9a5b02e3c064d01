#pragma once

// Array of equal cavities connected to a central one by channels that open for
// one internal state at a time. Drives sqrt(m)|A>|0> + sqrt(n)|B>|0> into an
// equal-modulus superposition over m + n peripheral cavities and assigns
// probabilities by counting, never by normalising.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bornlab/numerics.hpp"
#include "bornlab/rng.hpp"

namespace bornlab::cavities {

enum class Internal : std::uint8_t { A = 0, B = 1 };

const char* to_string(Internal label);

/// Amplitudes over (internal label, cavity). Cavity 0 is the central one.
class CavityState {
 public:
  /// Throws PreconditionError if every amplitude is zero.
  CavityState(std::size_t n_cavities, std::vector<cplx> amplitudes);

  std::size_t n_cavities() const noexcept { return n_cavities_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }
  std::size_t flat_index(Internal label, std::size_t cavity) const;

  cplx amplitude(Internal label, std::size_t cavity) const { return amplitudes_[flat_index(label, cavity)]; }
  cplx& amplitude(Internal label, std::size_t cavity) { return amplitudes_[flat_index(label, cavity)]; }
  const std::vector<cplx>& amplitudes() const noexcept { return amplitudes_; }

  Internal label_of(std::size_t flat) const { return flat < n_cavities_ ? Internal::A : Internal::B; }
  std::size_t cavity_of(std::size_t flat) const { return flat % n_cavities_; }

  double norm() const { return numerics::norm2(amplitudes_); }

 private:
  std::size_t n_cavities_;
  std::vector<cplx> amplitudes_;
};

/// Two-site transfer coefficients: |0,t> = alpha |0,t'> + beta |1,t'>.
struct ChannelCoefficients {
  cplx alpha{1.0, 0.0};
  cplx beta{0.0, 0.0};

  double phi() const { return std::arg(alpha + beta); }
  double phi_prime() const { return std::arg(alpha - beta); }
};

struct ProtocolStep {
  std::size_t from = 0;
  std::size_t to = 1;
  Internal selector = Internal::A;
  double duration = 0.0;
  ChannelCoefficients coefficients;
};

struct ProtocolSchedule {
  std::vector<ProtocolStep> steps;
  /// Durations positive and each (selector, to) pair at most once.
  void validate() const;
};

struct ProtocolOptions {
  /// Multiply each transferred amplitude by |beta| / beta, which restores
  /// literally equal complex amplitudes when V = 0.
  bool phase_compensate = false;
};

/// sqrt(m) on (A, 0) and sqrt(n) on (B, 0). Requires n_cavities >= m + n + 1.
CavityState init_state(unsigned m, unsigned n, std::size_t n_cavities);

/// exp(-i H tau) for H = [[V, kappa], [kappa, V]]:
/// alpha = e^{-iV tau} cos(kappa tau), beta = -i e^{-iV tau} sin(kappa tau).
ChannelCoefficients channel_unitary(double kappa, double onsite, double tau);

/// (psi_i, psi_j) <- (alpha psi_i + beta psi_j, alpha psi_j + beta psi_i) in the
/// selected internal sector; everything else is left untouched.
CavityState open_channel(const CavityState& state, std::size_t i, std::size_t j, Internal selector,
                         const ChannelCoefficients& coeffs);

/// tau_k = arcsin(1 / sqrt(k)) / kappa: moves one unit of modulus out of a
/// central amplitude of modulus sqrt(k).
double opening_duration(unsigned k, double kappa);

/// A-steps on channels 0-1 .. 0-m with tau_m .. tau_1, then B-steps on channels
/// 0-(m+1) .. 0-(m+n) with tau_n .. tau_1.
ProtocolSchedule tau_schedule(unsigned m, unsigned n, double kappa, double onsite = 0.0);

CavityState run_protocol(const CavityState& state, const ProtocolSchedule& schedule,
                         const ProtocolOptions& options = {});

/// State after every step; element 0 is the input.
std::vector<CavityState> protocol_trace(const CavityState& state, const ProtocolSchedule& schedule,
                                        const ProtocolOptions& options = {});

struct Rational {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  std::string str() const { return std::to_string(numerator) + "/" + std::to_string(denominator); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

using EventPredicate = std::function<bool(Internal, std::size_t)>;

inline constexpr double kDefaultSymmetryTol = 1e-9;

/// Probability of `event` by counting equal-modulus outcomes. Amplitudes with
/// modulus <= tol * max modulus count as absent; the rest must agree with the
/// maximum to within tol * max, otherwise NumericalGuardError
/// ("symmetry precondition violated").
Rational symmetry_probability(const CavityState& state, const EventPredicate& event,
                              double tol = kDefaultSymmetryTol);

/// Counts per flat (internal, cavity) index from `shots` draws weighted by |amplitude|^2.
std::vector<std::uint64_t> born_sample(const CavityState& state, std::uint64_t shots, rng::RngStream& rng);

/// r_j = connected / disconnected norm ratio after j applications of `coeffs`
/// to the symmetric state (|0> + |1>) next to an untouched cavity, j = 1..k.
std::vector<double> imbalance_demo(const ChannelCoefficients& coeffs, std::size_t k);

}  // namespace bornlab::cavities
