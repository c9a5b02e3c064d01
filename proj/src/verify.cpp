#include "bornlab/verify.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "bornlab/cavities.hpp"
#include "bornlab/experiments.hpp"
#include "bornlab/lattice1d.hpp"
#include "bornlab/numerics.hpp"
#include "bornlab/rng.hpp"
#include "bornlab/weyl3d.hpp"

namespace bornlab::verify {

namespace {

using json = nlohmann::json;
constexpr cplx kI{0.0, 1.0};

// Sub-run stream ids, one per criterion, so criteria never share random numbers.
enum Stream : std::uint64_t {
  kUnitarityStream = 1,
  kBlowupStream = 3,
  kConnectionStream = 6,
  kConservationStream = 7,
  kUnimodularityStream = 8,
  kDeutschStream = 9,
};

lattice1d::WaveFunction1D random_state(std::size_t n, rng::RngStream& stream) {
  lattice1d::WaveFunction1D psi{std::vector<cplx>(n)};
  for (auto& z : psi.amplitudes) {
    const double re = 2.0 * stream.uniform() - 1.0;
    z = {re, 2.0 * stream.uniform() - 1.0};
  }
  const double norm = numerics::norm2(psi.amplitudes);
  for (auto& z : psi.amplitudes) z /= norm;
  return psi;
}

double weyl_mode_error(double dt, std::size_t steps, int helicity, unsigned threads) {
  constexpr std::size_t L = 16;
  constexpr double a = 0.1;
  const weyl3d::SpinorField initial = weyl3d::plane_wave_spinor_indexed(L, a, {4, 0, 0}, helicity);
  const weyl3d::HoppingInhomogeneity free{{0.0, 0.0}, 1.0, {}, weyl3d::kGammaCouplingSign};
  const weyl3d::SpinorField evolved = weyl3d::evolve_weyl(initial, free, dt, steps, {threads});
  const double quantum = 2.0 * std::numbers::pi / (static_cast<double>(L) * a);
  const double speed = weyl3d::lattice_speed_factor({4 * quantum, 0.0, 0.0}, a);
  const cplx phase = std::exp(-kI * static_cast<double>(helicity) * speed * dt * static_cast<double>(steps));
  double worst = 0.0;
  for (std::size_t i = 0; i < initial.psi.size(); ++i) {
    worst = std::max(worst, std::abs(evolved.psi[i] - initial.psi[i] * phase));
  }
  return worst;
}

}  // namespace

CriterionResult unitarity(const VerifyOptions& options) {
  CriterionResult r{1, "unitarity for real kappa, V (N = 1024, a = 0.1)"};
  rng::RngStream stream = rng::derive_stream(options.seed, kUnitarityStream);
  const lattice1d::HoppingChain chain{1024, 0.1, {1.0, 0.0}, {0.3, 0.0}};
  const lattice1d::WaveFunction1D psi0 = random_state(chain.sites, stream);
  double worst = 0.0;
  for (double t : {1.0, 10.0, 100.0}) {
    const double norm = numerics::norm2(lattice1d::evolve(chain, psi0, t).amplitudes);
    worst = std::max(worst, std::abs(norm - 1.0));
  }
  r.measured = {{"max_norm_deviation", worst}, {"tolerance", 1e-12}};
  r.passed = worst <= 1e-12;
  return r;
}

CriterionResult schrodinger_limit(const VerifyOptions&) {
  CriterionResult r{2, "Schrodinger limit: Gaussian error slope 2.0 +- 0.2"};
  constexpr double kBox = 51.2;
  constexpr double kDiffusion = -0.5;  // a^2 kappa held fixed: i dpsi/dt = -(1/2) psi''
  const lattice1d::GaussianPacket packet{0.5 * kBox, 1.0, 2.0};
  std::vector<double> spacings{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errors;
  for (double a : spacings) {
    const lattice1d::HoppingChain chain{static_cast<std::size_t>(std::lround(kBox / a)), a, kDiffusion / (a * a), 0.0};
    errors.push_back(lattice1d::continuum_error(chain, packet, 1.0));
  }
  const double slope = numerics::fit_loglog_slope(spacings, errors);
  r.measured = {{"spacings", spacings}, {"errors", errors}, {"slope", slope}};
  r.passed = std::abs(slope - 2.0) <= 0.2;
  return r;
}

CriterionResult blowup(const VerifyOptions& options) {
  CriterionResult r{3, "blow-up: growth rate 0.2 within 1%, I(P) > 1e6 I(1) before P = 1e4"};
  rng::RngStream stream = rng::derive_stream(options.seed, kBlowupStream);
  const lattice1d::HoppingChain chain{16, 0.1, {0.5, 0.1}, 0.0};
  const double predicted = lattice1d::max_growth_rate(chain);
  const double measured = lattice1d::norm_growth_rate(chain, random_state(chain.sites, stream), 200.0);
  const double rel = std::abs(measured - 0.2) / 0.2;
  const bool rate_ok = rel <= 0.01 && std::abs(predicted - 0.2) <= 1e-12;

  // a^2 Im(kappa) t = 1e-3
  constexpr double a = 0.1, im_kappa = 0.1, t = 1.0;
  const double base = lattice1d::lorentz_spread_integral(a, im_kappa, t, 1.0).value;
  // Monotonicity is read off the shell increments: past P ~ 40 they fall below
  // one ulp of I and the sampled values alone stop moving.
  bool increasing = true;
  double smallest_log_increment = std::numeric_limits<double>::infinity();
  double previous_P = 0.0;
  double crossing = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 32; ++i) {
    const double P = std::pow(10.0, i / 8.0);
    const double log_inc = lattice1d::log_spread_increment(a, im_kappa, t, previous_P, P);
    if (!std::isfinite(log_inc)) increasing = false;
    smallest_log_increment = std::min(smallest_log_increment, log_inc);
    previous_P = P;
    const lattice1d::SpreadIntegral s = lattice1d::lorentz_spread_integral(a, im_kappa, t, P);
    if (s.overflow || s.value > 1e6 * base) crossing = std::min(crossing, P);
  }
  r.measured = {{"predicted_rate", predicted},
                {"measured_rate", measured},
                {"relative_error", rel},
                {"I_of_1", base},
                {"strictly_increasing", increasing},
                {"smallest_log_increment", smallest_log_increment},
                {"first_P_above_1e6_I1", std::isfinite(crossing) ? json(crossing) : json(nullptr)}};
  r.passed = rate_ok && increasing && crossing < 1e4;
  return r;
}

CriterionResult n_particle_phase(const VerifyOptions&) {
  CriterionResult r{4, "n-particle factor |exp(-iVt)|^n = exp(n Im V t), 1 iff Im V = 0"};
  const std::vector<cplx> potentials{{0.3, 0.0}, {-0.7, 0.0}, {0.0, 0.2}, {0.0, -0.1}, {0.5, 0.05}, {1.0, -0.02}};
  double worst = 0.0;
  bool iff_ok = true;
  std::size_t cases = 0;
  for (const cplx V : potentials) {
    for (unsigned n : {1u, 2u, 3u, 5u, 10u}) {
      for (double t : {0.0, 0.5, 1.0, 10.0}) {
        const double factor = lattice1d::n_particle_imbalance(V, n, t);
        const double direct = std::abs(std::pow(std::exp(-kI * V * t), static_cast<int>(n)));
        worst = std::max(worst, std::abs(factor - direct) / direct);
        const bool unit = std::abs(factor - 1.0) <= 1e-12;
        iff_ok = iff_ok && (unit == (V.imag() == 0.0 || t == 0.0));
        ++cases;
      }
    }
  }
  r.measured = {{"cases", cases}, {"max_relative_deviation", worst}, {"unit_iff_real", iff_ok}};
  r.passed = worst <= 1e-12 && iff_ok;
  return r;
}

CriterionResult weyl_free_mode(const VerifyOptions& options) {
  CriterionResult r{5, "Weyl plane-wave phase, RK4 error ratio 16 +- 4 under dt halving"};
  json rows = json::array();
  bool ok = true;
  for (int helicity : {1, -1}) {
    const double coarse = weyl_mode_error(0.032, 300, helicity, options.threads);
    const double fine = weyl_mode_error(0.016, 600, helicity, options.threads);
    const double ratio = coarse / fine;
    rows.push_back({{"helicity", helicity}, {"error_dt", coarse}, {"error_dt_half", fine}, {"ratio", ratio}});
    ok = ok && std::abs(ratio - 16.0) <= 4.0;
  }
  r.measured = {{"modes", rows}};
  r.passed = ok;
  return r;
}

CriterionResult connection_solver(const VerifyOptions& options) {
  CriterionResult r{6, "connection solver residual <= 1e-12, scalar gamma gives -2g delta"};
  rng::RngStream stream = rng::derive_stream(options.seed, kConnectionStream);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    weyl3d::GammaSite g;
    for (auto& m : g) {
      for (int i = 0; i < 4; ++i) {
        const double re = 2.0 * stream.uniform() - 1.0;
        m(i / 2, i % 2) = {re, 2.0 * stream.uniform() - 1.0};
      }
    }
    worst = std::max(worst, weyl3d::connection_residual(g, weyl3d::solve_connection(g)));
  }
  bool exact = true;
  for (double gval : {0.05, -1.25, 3.0}) {
    weyl3d::GammaSite g;
    for (auto& m : g) m = gval * Matrix2::Identity();
    const weyl3d::ConnectionCoefficients conn = weyl3d::solve_connection(g);
    for (int mu = 0; mu < 4; ++mu) {
      for (int nu = 0; nu < 4; ++nu) {
        for (int alpha = 0; alpha < 4; ++alpha) {
          exact = exact && conn(mu, nu, alpha) == (mu == nu ? -2.0 * gval : 0.0);
        }
      }
    }
  }
  r.measured = {{"draws", 1000}, {"max_residual", worst}, {"scalar_exact", exact}};
  r.passed = worst <= 1e-12 && exact;
  return r;
}

CriterionResult covariant_conservation(const VerifyOptions& options) {
  CriterionResult r{7, "covariant conservation: residual slope >= 1.0 - 0.3 (L = 32)"};
  weyl3d::ConservationSetup setup;
  setup.L = 32;
  setup.spacing = 0.1;
  setup.dt = 0.02;
  setup.steps = 100;
  setup.threads = options.threads;
  // |a gamma| = 0.05 at the coarsest spacing; gamma itself is fixed in 1/length.
  setup.gamma = weyl3d::random_smooth_gamma(setup.L, 0.5, options.seed ^ kConservationStream);

  std::vector<double> spacings, residuals;
  json levels = json::array();
  for (int level = 0; level < 3; ++level) {
    const weyl3d::ConservationReport rep = weyl3d::measure_conservation(setup);
    spacings.push_back(setup.spacing);
    residuals.push_back(rep.divergence_max);
    levels.push_back({{"a", setup.spacing}, {"dt", setup.dt}, {"steps", setup.steps}, {"divergence_max", rep.divergence_max},
                      {"divergence_mean", rep.divergence_mean}});
    setup.spacing *= 0.5;
    setup.dt *= 0.5;
    setup.steps *= 2;
  }
  const double slope = numerics::fit_loglog_slope(spacings, residuals);

  // Opposite sign at the coarsest level, for the calibration record.
  weyl3d::ConservationSetup flipped = setup;
  flipped.spacing = 0.1;
  flipped.dt = 0.02;
  flipped.steps = 100;
  flipped.coupling_sign = -weyl3d::kGammaCouplingSign;
  const double flipped_residual = weyl3d::measure_conservation(flipped).divergence_max;

  r.measured = {{"coupling_sign", weyl3d::kGammaCouplingSign},
                {"levels", levels},
                {"slope", slope},
                {"opposite_sign_residual", flipped_residual}};
  r.passed = slope >= 0.7 && residuals.front() < flipped_residual;
  return r;
}

CriterionResult unimodularity(const VerifyOptions& options) {
  CriterionResult r{8, "unimodular channel, imbalance ratios 1.1^j"};
  rng::RngStream stream = rng::derive_stream(options.seed, kUnimodularityStream);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    double kappa = 0.1 + 4.9 * stream.uniform();
    if (stream.uniform() < 0.5) kappa = -kappa;
    const double V = -5.0 + 10.0 * stream.uniform();
    const double tau = 10.0 * stream.uniform();
    const cavities::ChannelCoefficients c = cavities::channel_unitary(kappa, V, tau);
    worst = std::max({worst, std::abs(std::abs(c.alpha + c.beta) - 1.0), std::abs(std::abs(c.alpha - c.beta) - 1.0)});
  }
  const std::vector<double> ratios = cavities::imbalance_demo({0.8, 0.3}, 10);
  double ratio_dev = 0.0;
  for (std::size_t j = 0; j < ratios.size(); ++j) {
    const double expected = std::pow(1.1, static_cast<double>(j + 1));
    ratio_dev = std::max(ratio_dev, std::abs(ratios[j] - expected) / expected);
  }
  r.measured = {{"draws", 1000}, {"max_unimodularity_deviation", worst}, {"imbalance_ratios", ratios},
                {"max_ratio_deviation", ratio_dev}};
  r.passed = worst <= 1e-12 && ratio_dev <= 1e-12;
  return r;
}

CriterionResult deutsch_protocol(const VerifyOptions& options) {
  CriterionResult r{9, "Deutsch protocol: equal moduli, p(A) = m/(m+n), Born sampling within 3 sigma"};
  double worst_modulus = 0.0;
  double worst_empty = 0.0;  // central cavity and unused cavities
  bool exact = true;
  for (unsigned m = 1; m <= 12; ++m) {
    for (unsigned n = 1; n <= 12; ++n) {
      const auto state = cavities::run_protocol(cavities::init_state(m, n, m + n + 1), cavities::tau_schedule(m, n, 1.0));
      for (std::size_t k = 0; k < state.size(); ++k) {
        const std::size_t cavity = state.cavity_of(k);
        const bool should_fill = state.label_of(k) == cavities::Internal::A ? (cavity >= 1 && cavity <= m)
                                                                            : (cavity > m && cavity <= m + n);
        const double modulus = std::abs(state.amplitudes()[k]);
        if (should_fill) {
          worst_modulus = std::max(worst_modulus, std::abs(modulus - 1.0));
        } else {
          worst_empty = std::max(worst_empty, modulus);
        }
      }
      const auto p = cavities::symmetry_probability(state, [](cavities::Internal l, std::size_t) { return l == cavities::Internal::A; });
      const auto g = std::gcd(static_cast<std::int64_t>(m), static_cast<std::int64_t>(m + n));
      exact = exact && p == cavities::Rational{m / g, (m + n) / g};
    }
  }

  json samples = json::array();
  bool sampled_ok = true;
  const std::pair<unsigned, unsigned> pairs[] = {{1, 1}, {2, 1}, {2, 3}, {5, 7}};
  std::uint64_t index = 0;
  for (const auto& [m, n] : pairs) {
    const auto state = cavities::run_protocol(cavities::init_state(m, n, m + n + 1), cavities::tau_schedule(m, n, 1.0));
    rng::RngStream stream = rng::derive_stream(options.seed, (kDeutschStream << 32) | index++);
    constexpr std::uint64_t kShots = 100000;
    const auto counts = cavities::born_sample(state, kShots, stream);
    std::uint64_t count_a = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (state.label_of(k) == cavities::Internal::A) count_a += counts[k];
    }
    const double p = static_cast<double>(m) / (m + n);
    const double freq = static_cast<double>(count_a) / kShots;
    const double sigma = std::sqrt(p * (1.0 - p) / kShots);
    const bool ok = std::abs(freq - p) <= 3.0 * sigma;
    sampled_ok = sampled_ok && ok;
    samples.push_back({{"m", m}, {"n", n}, {"frequency_A", freq}, {"expected", p}, {"sigma", sigma}, {"within_3sigma", ok}});
  }
  r.measured = {{"max_modulus_deviation", worst_modulus},
                {"max_empty_modulus", worst_empty},
                {"exact_rationals", exact},
                {"sampling", samples}};
  r.passed = worst_modulus <= 1e-12 && worst_empty <= 1e-12 && exact && sampled_ok;
  return r;
}

CriterionResult determinism(const VerifyOptions& options) {
  CriterionResult r{10, "determinism: identical payloads across runs and thread counts"};
  auto fingerprint = [&](unsigned threads) {
    json out;
    out["deutsch"] = cli::deutsch_payload(cli::make_config("deutsch", {{"m", 2}, {"n", 3}, {"shots", 20000}}, options.seed));
    out["blowup"] = cli::blowup_payload(cli::make_config("blowup", json::object(), options.seed));
    out["weyl"] = cli::weyl_payload(
        cli::make_config("weyl", {{"L", 8}, {"steps", 20}, {"gamma", "random-smooth"}}, options.seed), threads);
    return out.dump();
  };
  const std::string first = fingerprint(1);
  const std::string second = fingerprint(1);
  const std::string threaded = fingerprint(3);
  r.measured = {{"repeat_identical", first == second}, {"thread_count_identical", first == threaded},
                {"bytes", first.size()}};
  r.passed = first == second && first == threaded;
  return r;
}

std::vector<CriterionResult> run_all(const VerifyOptions& options) {
  return {unitarity(options),      schrodinger_limit(options), blowup(options),
          n_particle_phase(options), weyl_free_mode(options),  connection_solver(options),
          covariant_conservation(options), unimodularity(options), deutsch_protocol(options),
          determinism(options)};
}

json to_json(const std::vector<CriterionResult>& results) {
  json criteria = json::array();
  bool all = true;
  for (const auto& c : results) {
    criteria.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
    all = all && c.passed;
  }
  return {{"criteria", criteria}, {"all_passed", all}};
}

std::string format_table(const std::vector<CriterionResult>& results) {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const auto& c : results) {
    char line[256];
    std::snprintf(line, sizeof line, "[%s] %2d  %s\n", c.passed ? "PASS" : "FAIL", c.id, c.name.c_str());
    out << line;
    passed += c.passed ? 1 : 0;
  }
  out << passed << "/" << results.size() << " criteria passed\n";
  return out.str();
}

}  // namespace bornlab::verify
