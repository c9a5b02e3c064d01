#pragma once

// Spinless particle hopping on a periodic 1D chain,
//   i d psi(n)/dt = V psi(n) + kappa psi(n+1) + kappa psi(n-1),
// with complex kappa and V so that non-unitary generators stay representable.

#include <cstddef>
#include <vector>

#include "bornlab/numerics.hpp"

namespace bornlab::lattice1d {

struct HoppingChain {
  std::size_t sites = 64;
  double spacing = 0.1;
  cplx kappa{1.0, 0.0};
  cplx onsite{0.0, 0.0};

  /// Throws PreconditionError unless sites >= 4 and spacing > 0.
  void validate() const;
  /// p_k = 2 pi k / (N a).
  double momentum(std::size_t k) const;
  double box_length() const { return static_cast<double>(sites) * spacing; }
};

/// psi(n) for n = 0..N-1. Deliberately not normalised.
struct WaveFunction1D {
  std::vector<cplx> amplitudes;
  std::size_t size() const { return amplitudes.size(); }
};

/// psi~(p_k) for k = 0..N-1, unitary DFT of a WaveFunction1D.
struct MomentumAmplitudes {
  std::vector<cplx> values;
};

MomentumAmplitudes to_momentum(const WaveFunction1D& psi);
WaveFunction1D from_momentum(const MomentumAmplitudes& amps);

/// omega(p) = V + 2 kappa cos(p a).
cplx dispersion(const HoppingChain& chain, double p);

/// Small-a expansion (V + 2 kappa) - kappa a^2 p^2 of the dispersion.
cplx continuum_dispersion(const HoppingChain& chain, double p);

/// Dense N x N generator, used for brute-force cross checks.
ComplexMatrix hopping_matrix(const HoppingChain& chain);

/// Spectrally exact evolution: each lattice mode picks up exp(-i omega(p_k) t).
WaveFunction1D evolve(const HoppingChain& chain, const WaveFunction1D& psi0, double t);

/// Cyclic shift psi(n) -> psi(n - shift).
WaveFunction1D translate(const WaveFunction1D& psi, std::ptrdiff_t shift);

/// psi(x, 0) = exp(-(x - center)^2 / (4 width^2) + i momentum x).
struct GaussianPacket {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
};

WaveFunction1D sample_packet(const HoppingChain& chain, const GaussianPacket& packet);

/// Closed-form solution of i d psi/dt = D d^2 psi/dx^2 for a Gaussian initial state.
/// The lattice limit has D = a^2 kappa (free particle with 1/(2m) = -D).
cplx continuum_packet(const GaussianPacket& packet, cplx diffusion, double x, double t);

/// Sup-norm distance between the lattice evolution (global phase exp(-i(V+2 kappa)t)
/// removed) and the continuum Gaussian at the lattice sites. Throws
/// NumericalGuardError("unresolved packet") if width < 8a or if the packet would
/// reach the box boundary by time t.
double continuum_error(const HoppingChain& chain, const GaussianPacket& packet, double t);

/// max_k Im omega(p_k) over the lattice momenta.
double max_growth_rate(const HoppingChain& chain);

/// Least-squares slope of ln ||psi(t)|| over `samples` equally spaced times in [T/2, T].
double norm_growth_rate(const HoppingChain& chain, const WaveFunction1D& psi0, double horizon,
                        std::size_t samples = 33);

struct SpreadIntegral {
  double value = 0.0;      ///< I(P); +inf once it leaves double range
  double log_value = 0.0;  ///< ln I(P), finite even when `value` overflowed
  bool overflow = false;
  double overflow_momentum = 0.0;  ///< smallest P with I(P) > DBL_MAX, when `overflow`
};

/// I(P) = int_{-P}^{P} exp(-|p|) exp(a^2 im_kappa p^2 t) dp, the momentum integral of
/// the Lorentz-shape state 1/(1+x^2) under the growing evolution factor. Adaptive
/// Gauss-Kronrod with relative accuracy 1e-8. P may be +inf when a^2 im_kappa t = 0.
SpreadIntegral lorentz_spread_integral(double spacing, double im_kappa, double t, double cutoff);

/// ln(I(upper) - I(lower)) for 0 <= lower < upper, computed directly from the
/// shell lower < |p| < upper. Stays resolvable where I itself has stopped
/// changing in double precision.
double log_spread_increment(double spacing, double im_kappa, double t, double lower, double upper);

/// |(exp(-i V t))^n| = exp(n Im(V) t).
double n_particle_imbalance(cplx onsite, unsigned n, double t);

}  // namespace bornlab::lattice1d
