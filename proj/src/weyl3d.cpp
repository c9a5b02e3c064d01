#include "bornlab/weyl3d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bornlab/error.hpp"
#include "bornlab/parallel.hpp"
#include "bornlab/rng.hpp"

namespace bornlab::weyl3d {

namespace {

constexpr cplx kI{0.0, 1.0};

struct Neighbours {
  std::array<std::size_t, 3> plus;
  std::array<std::size_t, 3> minus;
};

Neighbours neighbours(std::size_t site, std::size_t L) {
  const std::size_t z = site % L;
  const std::size_t y = (site / L) % L;
  const std::size_t x = site / (L * L);
  auto idx = [L](std::size_t i, std::size_t j, std::size_t k) { return (i * L + j) * L + k; };
  const std::size_t xp = (x + 1) % L, xm = (x + L - 1) % L;
  const std::size_t yp = (y + 1) % L, ym = (y + L - 1) % L;
  const std::size_t zp = (z + 1) % L, zm = (z + L - 1) % L;
  return {{idx(xp, y, z), idx(x, yp, z), idx(x, y, zp)}, {idx(xm, y, z), idx(x, ym, z), idx(x, y, zm)}};
}

void require_lattice(std::size_t L, double a) {
  if (L < 3) throw PreconditionError("spinor lattice needs L >= 3");
  if (!(a > 0.0)) throw PreconditionError("lattice spacing must be positive");
}

// -s kappa a (gamma_0 + sigma^k gamma_k) at every site.
std::vector<Matrix2> coupling_matrices(const HoppingInhomogeneity& inh, double a) {
  std::vector<Matrix2> out;
  if (!inh.has_gamma()) return out;
  out.resize(inh.gamma.size());
  const double scale = -static_cast<double>(inh.coupling_sign) * inh.kappa * a;
  for (std::size_t s = 0; s < inh.gamma.size(); ++s) {
    const GammaSite& g = inh.gamma[s];
    Matrix2 m = g[0];
    for (int k = 1; k <= 3; ++k) m += numerics::pauli(k) * g[static_cast<std::size_t>(k)];
    out[s] = scale * m;
  }
  return out;
}

void generator_into(const cplx* psi, cplx* out, std::size_t L, const HoppingInhomogeneity& inh,
                    const std::vector<Matrix2>& coupling, unsigned threads) {
  const std::size_t sites = L * L * L;
  const double half_kappa = 0.5 * inh.kappa;
  const cplx eps = inh.epsilon;
  parallel_for(sites, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const Neighbours nb = neighbours(s, L);
      const cplx u0 = psi[2 * s];
      const cplx u1 = psi[2 * s + 1];
      // d_k = psi(x + k) - psi(x - k)
      const cplx dx0 = psi[2 * nb.plus[0]] - psi[2 * nb.minus[0]];
      const cplx dx1 = psi[2 * nb.plus[0] + 1] - psi[2 * nb.minus[0] + 1];
      const cplx dy0 = psi[2 * nb.plus[1]] - psi[2 * nb.minus[1]];
      const cplx dy1 = psi[2 * nb.plus[1] + 1] - psi[2 * nb.minus[1] + 1];
      const cplx dz0 = psi[2 * nb.plus[2]] - psi[2 * nb.minus[2]];
      const cplx dz1 = psi[2 * nb.plus[2] + 1] - psi[2 * nb.minus[2] + 1];
      // sigma^x d_x + sigma^y d_y + sigma^z d_z
      const cplx hop0 = dx1 - kI * dy1 + dz0;
      const cplx hop1 = dx0 + kI * dy0 - dz1;
      cplx r0 = eps * u0 - half_kappa * hop0;
      cplx r1 = eps * u1 - half_kappa * hop1;
      if (!coupling.empty()) {
        const Matrix2& c = coupling[s];
        r0 += c(0, 0) * u0 + c(0, 1) * u1;
        r1 += c(1, 0) * u0 + c(1, 1) * u1;
      }
      out[2 * s] = r0;
      out[2 * s + 1] = r1;
    }
  });
}

}  // namespace

SpinorField::SpinorField(std::size_t sites_per_dim, double a)
    : L(sites_per_dim), spacing(a), psi(2 * sites_per_dim * sites_per_dim * sites_per_dim) {}

double HoppingInhomogeneity::max_gamma_norm() const {
  double best = 0.0;
  for (const auto& site : gamma) {
    for (const auto& g : site) best = std::max(best, g.norm());
  }
  return best;
}

double HoppingInhomogeneity::max_lattice_coupling(double spacing) const {
  return spacing * max_gamma_norm();
}

double ConnectionCoefficients::contracted(int beta) const {
  double sum = 0.0;
  for (int alpha = 0; alpha < 4; ++alpha) sum += (*this)(alpha, beta, alpha);
  return sum;
}

double lattice_speed_factor(const std::array<double, 3>& p, double a) {
  return std::sqrt(std::pow(std::sin(p[0] * a), 2) + std::pow(std::sin(p[1] * a), 2) +
                   std::pow(std::sin(p[2] * a), 2));
}

SpinorField plane_wave_spinor(std::size_t L, double a, const std::array<double, 3>& p, int helicity) {
  require_lattice(L, a);
  if (helicity != 1 && helicity != -1) throw PreconditionError("helicity must be +1 or -1");
  const double quantum = 2.0 * std::numbers::pi / (static_cast<double>(L) * a);
  std::array<double, 3> n{};
  for (int k = 0; k < 3; ++k) {
    n[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k)] / quantum;
    if (std::abs(n[static_cast<std::size_t>(k)] - std::round(n[static_cast<std::size_t>(k)])) > 1e-9) {
      throw PreconditionError("plane_wave_spinor: momentum component " + std::to_string(k) +
                              " is not a multiple of 2 pi / (L a)");
    }
  }

  const double s1 = std::sin(p[0] * a), s2 = std::sin(p[1] * a), s3 = std::sin(p[2] * a);
  const double speed = std::sqrt(s1 * s1 + s2 * s2 + s3 * s3);
  Spinor u(1.0, 0.0);
  if (speed > 1e-14) {
    const double lambda = helicity * speed;
    // Two equivalent null-space vectors of sigma.s - lambda; take the longer one.
    const Spinor first(s1 - kI * s2, lambda - s3);
    const Spinor second(lambda + s3, s1 + kI * s2);
    u = first.norm() >= second.norm() ? first : second;
    u.normalize();
  }

  SpinorField field(L, a);
  for (std::size_t x = 0; x < L; ++x) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t z = 0; z < L; ++z) {
        const double phase = a * (p[0] * static_cast<double>(x) + p[1] * static_cast<double>(y) +
                                  p[2] * static_cast<double>(z));
        field.set(field.site_index(x, y, z), u * std::exp(kI * phase));
      }
    }
  }
  return field;
}

SpinorField plane_wave_spinor_indexed(std::size_t L, double a, const std::array<int, 3>& momentum_index,
                                      int helicity) {
  const double quantum = 2.0 * std::numbers::pi / (static_cast<double>(L) * a);
  return plane_wave_spinor(L, a,
                           {quantum * momentum_index[0], quantum * momentum_index[1], quantum * momentum_index[2]},
                           helicity);
}

void check_stability(const HoppingInhomogeneity& inh, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  if (!(inh.kappa > 0.0)) throw PreconditionError("kappa must be positive");
  const double rate = std::abs(inh.epsilon) + 3.0 * inh.kappa + inh.max_gamma_norm();
  if (dt * rate > kStabilityBound) {
    const double suggested = kStabilityBound / rate;
    throw StabilityGuardError("stability guard violated: dt * (|eps| + 3 kappa + max|gamma|) = " +
                                  std::to_string(dt * rate) + " > " + std::to_string(kStabilityBound) +
                                  "; use dt <= " + std::to_string(suggested),
                              suggested);
  }
}

std::vector<cplx> apply_generator(const SpinorField& field, const HoppingInhomogeneity& inh,
                                  unsigned threads) {
  require_lattice(field.L, field.spacing);
  if (inh.has_gamma() && inh.gamma.size() != field.sites()) {
    throw PreconditionError("gamma array does not match the lattice");
  }
  std::vector<cplx> out(field.psi.size());
  generator_into(field.psi.data(), out.data(), field.L, inh, coupling_matrices(inh, field.spacing), threads);
  return out;
}

SpinorField evolve_weyl(const SpinorField& field, const HoppingInhomogeneity& inh, double dt,
                        std::size_t steps, const EvolveOptions& options) {
  require_lattice(field.L, field.spacing);
  if (field.psi.size() != 2 * field.sites()) throw PreconditionError("spinor storage is not 2 L^3");
  if (inh.has_gamma() && inh.gamma.size() != field.sites()) {
    throw PreconditionError("gamma array does not match the lattice");
  }
  check_stability(inh, dt);
  if (inh.max_lattice_coupling(field.spacing) > kPerturbativeBound) {
    throw PreconditionError("gamma outside the perturbative regime: max ||a gamma|| = " +
                            std::to_string(inh.max_lattice_coupling(field.spacing)) + " > " +
                            std::to_string(kPerturbativeBound));
  }

  const std::vector<Matrix2> coupling = coupling_matrices(inh, field.spacing);
  const std::size_t n = field.psi.size();
  const unsigned threads = options.threads;
  SpinorField current = field;
  std::vector<cplx> stage(n), k(n), next(n);

  auto axpy = [&](std::vector<cplx>& dst, const std::vector<cplx>& base, double h, const std::vector<cplx>& dir) {
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) dst[i] = base[i] + h * dir[i];
    });
  };
  auto accumulate = [&](double w) {
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) next[i] += w * k[i];
    });
  };

  for (std::size_t step = 0; step < steps; ++step) {
    const std::vector<cplx>& y = current.psi;
    next = y;
    generator_into(y.data(), k.data(), field.L, inh, coupling, threads);
    accumulate(dt / 6.0);
    axpy(stage, y, 0.5 * dt, k);
    generator_into(stage.data(), k.data(), field.L, inh, coupling, threads);
    accumulate(dt / 3.0);
    axpy(stage, y, 0.5 * dt, k);
    generator_into(stage.data(), k.data(), field.L, inh, coupling, threads);
    accumulate(dt / 3.0);
    axpy(stage, y, dt, k);
    generator_into(stage.data(), k.data(), field.L, inh, coupling, threads);
    accumulate(dt / 6.0);
    current.psi.swap(next);
  }
  return current;
}

SpinorField evolve_free_spectral(const SpinorField& field, cplx epsilon, double kappa, double t) {
  require_lattice(field.L, field.spacing);
  const std::size_t L = field.L;
  std::vector<cplx> modes = numerics::dft3(field.psi, L, 2, false);
  const double a = field.spacing;
  const double quantum = 2.0 * std::numbers::pi / (static_cast<double>(L) * a);
  const cplx growth = std::exp(epsilon * t);
  for (std::size_t x = 0; x < L; ++x) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t z = 0; z < L; ++z) {
        const std::size_t site = (x * L + y) * L + z;
        const double s1 = std::sin(quantum * static_cast<double>(x) * a);
        const double s2 = std::sin(quantum * static_cast<double>(y) * a);
        const double s3 = std::sin(quantum * static_cast<double>(z) * a);
        const double speed = std::sqrt(s1 * s1 + s2 * s2 + s3 * s3);
        Matrix2 propagator = Matrix2::Identity() * std::cos(kappa * speed * t);
        if (speed > 0.0) {
          const Matrix2 unit = (s1 * numerics::pauli(1) + s2 * numerics::pauli(2) + s3 * numerics::pauli(3)) / speed;
          propagator -= kI * std::sin(kappa * speed * t) * unit;
        }
        const Spinor v = growth * (propagator * Spinor(modes[2 * site], modes[2 * site + 1]));
        modes[2 * site] = v[0];
        modes[2 * site + 1] = v[1];
      }
    }
  }
  SpinorField out = field;
  out.psi = numerics::dft3(modes, L, 2, true);
  return out;
}

double field_norm(const SpinorField& field) { return numerics::norm2(field.psi); }

SpinorField translate(const SpinorField& field, const std::array<std::ptrdiff_t, 3>& shift) {
  const auto L = static_cast<std::ptrdiff_t>(field.L);
  auto wrap = [L](std::ptrdiff_t v) { return static_cast<std::size_t>(((v % L) + L) % L); };
  SpinorField out(field.L, field.spacing);
  for (std::ptrdiff_t x = 0; x < L; ++x) {
    for (std::ptrdiff_t y = 0; y < L; ++y) {
      for (std::ptrdiff_t z = 0; z < L; ++z) {
        const std::size_t from = field.site_index(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                                                  static_cast<std::size_t>(z));
        const std::size_t to = field.site_index(wrap(x + shift[0]), wrap(y + shift[1]), wrap(z + shift[2]));
        out.set(to, field.at(from));
      }
    }
  }
  return out;
}

CurrentField current(const SpinorField& field) {
  CurrentField out{field.L, std::vector<CurrentVector>(field.sites())};
  for (std::size_t s = 0; s < field.sites(); ++s) {
    const cplx u0 = field.psi[2 * s];
    const cplx u1 = field.psi[2 * s + 1];
    const cplx cross = std::conj(u0) * u1;
    const double n0 = std::norm(u0);
    const double n1 = std::norm(u1);
    out.j[s] = {n0 + n1, 2.0 * cross.real(), 2.0 * cross.imag(), n0 - n1};
  }
  return out;
}

ConnectionCoefficients solve_connection(const GammaSite& gamma) {
  ConnectionCoefficients out;
  for (int mu = 0; mu < 4; ++mu) {
    const Matrix2& sigma = numerics::pauli(mu);
    for (int alpha = 0; alpha < 4; ++alpha) {
      const Matrix2& g = gamma[static_cast<std::size_t>(alpha)];
      const Matrix2 rhs = -(sigma * g + g.adjoint() * sigma);
      const numerics::PauliCoefficients c = numerics::pauli_expand(rhs, 1e-10 * std::max(1.0, numerics::max_abs(rhs)));
      for (int nu = 0; nu < 4; ++nu) out(mu, nu, alpha) = c[nu];
    }
  }
  return out;
}

double connection_residual(const GammaSite& gamma, const ConnectionCoefficients& conn) {
  double worst = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    const Matrix2& sigma = numerics::pauli(mu);
    for (int alpha = 0; alpha < 4; ++alpha) {
      const Matrix2& g = gamma[static_cast<std::size_t>(alpha)];
      Matrix2 lhs = sigma * g + g.adjoint() * sigma;
      for (int nu = 0; nu < 4; ++nu) lhs += conn(mu, nu, alpha) * numerics::pauli(nu);
      worst = std::max(worst, numerics::max_abs(lhs));
    }
  }
  return worst;
}

double contracted_identity_residual(const GammaSite& gamma, const ConnectionCoefficients& conn) {
  Matrix2 lhs = Matrix2::Zero();
  for (int nu = 0; nu < 4; ++nu) lhs += conn.contracted(nu) * numerics::pauli(nu);
  for (int alpha = 0; alpha < 4; ++alpha) {
    const Matrix2& sigma = numerics::pauli(alpha);
    const Matrix2& g = gamma[static_cast<std::size_t>(alpha)];
    lhs += sigma * g + g.adjoint() * sigma;
  }
  return numerics::max_abs(lhs);
}

Connection solve_connection_field(const HoppingInhomogeneity& inh, std::size_t L) {
  Connection out{L, std::vector<ConnectionCoefficients>(L * L * L)};
  if (!inh.has_gamma()) return out;
  if (inh.gamma.size() != L * L * L) throw PreconditionError("gamma array does not match the lattice");
  for (std::size_t s = 0; s < inh.gamma.size(); ++s) out.gamma[s] = solve_connection(inh.gamma[s]);
  return out;
}

DivergenceReport covariant_divergence(const CurrentField& previous, const CurrentField& now,
                                      const CurrentField& next, const Connection& gamma, double a,
                                      double dt, double kappa) {
  const std::size_t L = now.L;
  const std::size_t sites = L * L * L;
  if (previous.L != L || next.L != L || previous.j.size() != sites || now.j.size() != sites ||
      next.j.size() != sites) {
    throw PreconditionError("covariant_divergence: current fields have mismatched shapes");
  }
  const bool with_connection = !gamma.gamma.empty();
  if (with_connection && (gamma.L != L || gamma.gamma.size() != sites)) {
    throw PreconditionError("covariant_divergence: connection does not match the lattice");
  }
  if (!(a > 0.0) || !(dt > 0.0)) throw PreconditionError("covariant_divergence: a and dt must be positive");

  DivergenceReport report;
  report.residual.resize(sites);
  double sum = 0.0;
  for (std::size_t s = 0; s < sites; ++s) {
    const Neighbours nb = neighbours(s, L);
    double d = (next.j[s][0] - previous.j[s][0]) / (2.0 * dt);
    double spatial = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      spatial += (now.j[nb.plus[k]][k + 1] - now.j[nb.minus[k]][k + 1]) / (2.0 * a);
    }
    double connection = 0.0;
    if (with_connection) {
      for (int beta = 0; beta < 4; ++beta) {
        connection += gamma.gamma[s].contracted(beta) * now.j[s][static_cast<std::size_t>(beta)];
      }
    }
    d += a * kappa * (spatial + connection);
    report.residual[s] = d;
    report.max_abs = std::max(report.max_abs, std::abs(d));
    sum += std::abs(d);
  }
  report.mean_abs = sum / static_cast<double>(sites);
  return report;
}

std::vector<GammaSite> scalar_gamma(std::size_t L, cplx g) {
  GammaSite site;
  for (auto& m : site) m = g * Matrix2::Identity();
  return std::vector<GammaSite>(L * L * L, site);
}

std::vector<GammaSite> random_smooth_gamma(std::size_t L, double magnitude, std::uint64_t seed) {
  if (L < 3) throw PreconditionError("random_smooth_gamma: L must be >= 3");
  if (!(magnitude >= 0.0)) throw PreconditionError("random_smooth_gamma: magnitude must be >= 0");
  // Modes q in {-1, 0, 1}^3; coefficient per (mode, alpha, matrix entry).
  constexpr int kModes = 27;
  rng::RngStream stream(seed, 0x67616d6d61ull);
  std::array<std::array<std::array<cplx, 4>, 4>, kModes> coeff{};
  for (auto& mode : coeff) {
    for (auto& alpha : mode) {
      for (auto& entry : alpha) {
        const double re = 2.0 * stream.uniform() - 1.0;
        const double im = 2.0 * stream.uniform() - 1.0;
        entry = {re, im};
      }
    }
  }
  std::vector<std::array<cplx, 3>> axis_phase(L);
  for (std::size_t n = 0; n < L; ++n) {
    for (int q = -1; q <= 1; ++q) {
      axis_phase[n][static_cast<std::size_t>(q + 1)] =
          std::exp(kI * (2.0 * std::numbers::pi * q * static_cast<double>(n) / static_cast<double>(L)));
    }
  }

  std::vector<GammaSite> out(L * L * L);
  double largest = 0.0;
  for (std::size_t x = 0; x < L; ++x) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t z = 0; z < L; ++z) {
        GammaSite site;
        for (auto& m : site) m.setZero();
        int mode = 0;
        for (std::size_t qx = 0; qx < 3; ++qx) {
          for (std::size_t qy = 0; qy < 3; ++qy) {
            for (std::size_t qz = 0; qz < 3; ++qz, ++mode) {
              const cplx wave = axis_phase[x][qx] * axis_phase[y][qy] * axis_phase[z][qz];
              for (std::size_t alpha = 0; alpha < 4; ++alpha) {
                const auto& c = coeff[static_cast<std::size_t>(mode)][alpha];
                site[alpha](0, 0) += c[0] * wave;
                site[alpha](0, 1) += c[1] * wave;
                site[alpha](1, 0) += c[2] * wave;
                site[alpha](1, 1) += c[3] * wave;
              }
            }
          }
        }
        for (const auto& m : site) largest = std::max(largest, numerics::max_abs(m));
        out[(x * L + y) * L + z] = site;
      }
    }
  }
  const double scale = largest > 0.0 ? magnitude / largest : 0.0;
  for (auto& site : out) {
    for (auto& m : site) m *= scale;
  }
  return out;
}

ConservationReport measure_conservation(const ConservationSetup& setup) {
  if (setup.steps < 1) throw PreconditionError("measure_conservation: steps must be >= 1");
  const SpinorField initial =
      plane_wave_spinor_indexed(setup.L, setup.spacing, setup.momentum_index, setup.helicity);
  HoppingInhomogeneity inh{setup.epsilon, setup.kappa, setup.gamma, setup.coupling_sign};
  const EvolveOptions options{setup.threads};

  const SpinorField before = evolve_weyl(initial, inh, setup.dt, setup.steps - 1, options);
  const SpinorField at = evolve_weyl(before, inh, setup.dt, 1, options);
  const SpinorField after = evolve_weyl(at, inh, setup.dt, 1, options);

  const Connection conn = solve_connection_field(inh, setup.L);
  ConservationReport report;
  report.norm_initial = field_norm(initial);
  report.norm_final = field_norm(at);
  for (std::size_t s = 0; s < inh.gamma.size(); ++s) {
    report.connection_max_residual = std::max(report.connection_max_residual, connection_residual(inh.gamma[s], conn.gamma[s]));
    report.contracted_max_residual =
        std::max(report.contracted_max_residual, contracted_identity_residual(inh.gamma[s], conn.gamma[s]));
  }
  const DivergenceReport div =
      covariant_divergence(current(before), current(at), current(after), conn, setup.spacing, setup.dt, setup.kappa);
  report.divergence_max = div.max_abs;
  report.divergence_mean = div.mean_abs;
  return report;
}

SignCalibration calibrate_coupling_sign(ConservationSetup setup) {
  SignCalibration out;
  setup.coupling_sign = +1;
  out.residual_plus = measure_conservation(setup).divergence_max;
  setup.coupling_sign = -1;
  out.residual_minus = measure_conservation(setup).divergence_max;
  out.chosen_sign = out.residual_minus <= out.residual_plus ? -1 : +1;
  return out;
}

}  // namespace bornlab::weyl3d
