#pragma once

// Two-component spinor hopping on a periodic L^3 lattice:
//   d psi/dt = eps psi - kappa sum_k sigma^k [psi(x + a k) - psi(x - a k)] / 2
//              - s_gamma kappa a (gamma_0 + sigma^k gamma_k) psi
// plus the probability current, the connection coefficients Gamma^mu_{nu alpha}
// determined by gamma, and the covariant divergence of the current.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "bornlab/numerics.hpp"

namespace bornlab::weyl3d {

/// Coupling sign selected by calibrate_coupling_sign; see tests/test_weyl3d.cpp.
inline constexpr int kGammaCouplingSign = -1;

/// Largest dt * (|eps| + 3 kappa + max ||gamma||) accepted by evolve_weyl.
inline constexpr double kStabilityBound = 0.1;
/// Largest ||a gamma_alpha|| accepted by evolve_weyl.
inline constexpr double kPerturbativeBound = 0.5;

using Spinor = Eigen::Vector2cd;
using GammaSite = std::array<Matrix2, 4>;

/// psi_s(x) with s in {0, 1}; site index (x * L + y) * L + z, spinor components interleaved.
struct SpinorField {
  std::size_t L = 0;
  double spacing = 0.1;
  std::vector<cplx> psi;

  SpinorField() = default;
  SpinorField(std::size_t sites_per_dim, double a);

  std::size_t sites() const { return L * L * L; }
  std::size_t site_index(std::size_t x, std::size_t y, std::size_t z) const { return (x * L + y) * L + z; }
  Spinor at(std::size_t site) const { return {psi[2 * site], psi[2 * site + 1]}; }
  void set(std::size_t site, const Spinor& s) {
    psi[2 * site] = s[0];
    psi[2 * site + 1] = s[1];
  }
};

struct HoppingInhomogeneity {
  cplx epsilon{0.0, 0.0};
  double kappa = 1.0;
  /// gamma_alpha(x) in units of 1/length; empty means gamma = 0 everywhere.
  std::vector<GammaSite> gamma;
  int coupling_sign = kGammaCouplingSign;

  bool has_gamma() const { return !gamma.empty(); }
  /// max over sites and alpha of the Frobenius norm of gamma_alpha.
  double max_gamma_norm() const;
  /// max over sites and alpha of ||a gamma_alpha||, the lattice-units coupling.
  double max_lattice_coupling(double spacing) const;
};

/// Gamma^mu_{nu alpha} at one site, stored [mu][nu][alpha].
struct ConnectionCoefficients {
  std::array<double, 64> values{};
  double& operator()(int mu, int nu, int alpha) { return values[static_cast<std::size_t>(16 * mu + 4 * nu + alpha)]; }
  double operator()(int mu, int nu, int alpha) const {
    return values[static_cast<std::size_t>(16 * mu + 4 * nu + alpha)];
  }
  /// sum_alpha Gamma^alpha_{beta alpha}.
  double contracted(int beta) const;
};

struct Connection {
  std::size_t L = 0;
  std::vector<ConnectionCoefficients> gamma;
};

using CurrentVector = std::array<double, 4>;

struct CurrentField {
  std::size_t L = 0;
  std::vector<CurrentVector> j;
};

struct EvolveOptions {
  unsigned threads = 0;  ///< 0 selects default_thread_count()
};

/// u exp(i p.x) with u the eigenvector of sigma.s, s_k = sin(p_k a), for eigenvalue
/// helicity * |s|. `momentum_index` gives p = 2 pi n / (L a) per axis.
SpinorField plane_wave_spinor(std::size_t L, double a, const std::array<double, 3>& p, int helicity);
SpinorField plane_wave_spinor_indexed(std::size_t L, double a, const std::array<int, 3>& momentum_index,
                                      int helicity);

/// |s(p)| with s_k = sin(p_k a).
double lattice_speed_factor(const std::array<double, 3>& p, double a);

/// Per-site stability guard; throws StabilityGuardError with a suggested dt.
void check_stability(const HoppingInhomogeneity& inh, double dt);

/// Right-hand side of the lattice equation applied to `field`.
std::vector<cplx> apply_generator(const SpinorField& field, const HoppingInhomogeneity& inh,
                                  unsigned threads = 0);

/// Classical RK4, double-buffered.
SpinorField evolve_weyl(const SpinorField& field, const HoppingInhomogeneity& inh, double dt,
                        std::size_t steps, const EvolveOptions& options = {});

/// Exact evolution of the gamma = 0 equation in momentum space.
SpinorField evolve_free_spectral(const SpinorField& field, cplx epsilon, double kappa, double t);

double field_norm(const SpinorField& field);

/// Cyclic shift by whole sites.
SpinorField translate(const SpinorField& field, const std::array<std::ptrdiff_t, 3>& shift);

/// j^mu = psi^+ sigma^mu psi at every site.
CurrentField current(const SpinorField& field);

/// Gamma^mu_{nu alpha} = pauli_expand(-(sigma^mu gamma_alpha + gamma_alpha^+ sigma^mu))_nu.
ConnectionCoefficients solve_connection(const GammaSite& gamma);

/// max_{mu,alpha} ||Gamma^mu_{nu alpha} sigma^nu + sigma^mu gamma_alpha + gamma_alpha^+ sigma^mu||_max.
double connection_residual(const GammaSite& gamma, const ConnectionCoefficients& conn);

/// ||Gamma^alpha_{nu alpha} sigma^nu + sum_alpha (sigma^alpha gamma_alpha + gamma_alpha^+ sigma^alpha)||_max.
double contracted_identity_residual(const GammaSite& gamma, const ConnectionCoefficients& conn);

/// Connection at every site; empty gamma yields Gamma = 0.
Connection solve_connection_field(const HoppingInhomogeneity& inh, std::size_t L);

struct DivergenceReport {
  std::vector<double> residual;
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

/// D(x) = [j^0(t+dt) - j^0(t-dt)] / (2 dt)
///        + a kappa { sum_k [j^k(x + a k) - j^k(x - a k)] / (2a) + Gamma^alpha_{beta alpha} j^beta }.
/// The factor a kappa converts the spatial part to the lattice time unit.
DivergenceReport covariant_divergence(const CurrentField& previous, const CurrentField& now,
                                      const CurrentField& next, const Connection& gamma, double a,
                                      double dt, double kappa);

/// gamma_alpha = g * identity for all alpha at every site.
std::vector<GammaSite> scalar_gamma(std::size_t L, cplx g);

/// Smooth random gamma built from the lowest lattice Fourier modes, scaled so the
/// largest entry modulus (over sites, alpha and matrix entries) equals `magnitude`.
std::vector<GammaSite> random_smooth_gamma(std::size_t L, double magnitude, std::uint64_t seed);

struct ConservationSetup {
  std::size_t L = 32;
  double spacing = 0.1;
  double dt = 0.02;
  std::size_t steps = 100;  ///< residual is evaluated at step `steps`, which needs steps + 1 states
  double kappa = 1.0;
  cplx epsilon{0.0, 0.0};
  std::vector<GammaSite> gamma;
  int coupling_sign = kGammaCouplingSign;
  std::array<int, 3> momentum_index{1, 0, 0};
  int helicity = 1;
  unsigned threads = 0;
};

struct ConservationReport {
  double norm_initial = 0.0;
  double norm_final = 0.0;
  double connection_max_residual = 0.0;
  double contracted_max_residual = 0.0;
  double divergence_max = 0.0;
  double divergence_mean = 0.0;
};

/// Evolves a plane wave under the given gamma and reports the covariant divergence
/// of the current at t = steps * dt.
ConservationReport measure_conservation(const ConservationSetup& setup);

struct SignCalibration {
  int chosen_sign = 0;
  double residual_plus = 0.0;
  double residual_minus = 0.0;
};

/// Runs `setup` with both coupling signs and picks the one with the smaller
/// covariant-divergence maximum.
SignCalibration calibrate_coupling_sign(ConservationSetup setup);

}  // namespace bornlab::weyl3d
