#include "bornlab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "bornlab/cavities.hpp"
#include "bornlab/error.hpp"
#include "bornlab/lattice1d.hpp"
#include "bornlab/rng.hpp"
#include "bornlab/verify.hpp"
#include "bornlab/weyl3d.hpp"

namespace bornlab::cli {

namespace {

constexpr cplx kI{0.0, 1.0};

ParamSpec number(std::string name, double def, std::string help) {
  return {std::move(name), ParamKind::Number, def, std::move(help)};
}
ParamSpec integer(std::string name, std::int64_t def, std::string help) {
  return {std::move(name), ParamKind::Integer, def, std::move(help)};
}
ParamSpec boolean(std::string name, bool def, std::string help) {
  return {std::move(name), ParamKind::Boolean, def, std::move(help)};
}
ParamSpec choice(std::string name, std::string def, std::vector<std::string> choices, std::string help) {
  return {std::move(name), ParamKind::Choice, std::move(def), std::move(help), std::move(choices)};
}

double num(const ExperimentConfig& c, const char* key) { return c.params.at(key).get<double>(); }
std::int64_t integer_param(const ExperimentConfig& c, const char* key) { return c.params.at(key).get<std::int64_t>(); }
bool flag(const ExperimentConfig& c, const char* key) { return c.params.at(key).get<bool>(); }
std::string text(const ExperimentConfig& c, const char* key) { return c.params.at(key).get<std::string>(); }

std::size_t positive_size(const ExperimentConfig& c, const char* key, std::int64_t minimum) {
  const std::int64_t v = integer_param(c, key);
  if (v < minimum) {
    throw PreconditionError(std::string("--") + key + " must be >= " + std::to_string(minimum));
  }
  return static_cast<std::size_t>(v);
}

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

// JSON has no infinity; overflowed values are written as null next to a flag.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<ExperimentSpec>& experiment_specs() {
  static const std::vector<ExperimentSpec> specs = {
      {"dispersion",
       "Lattice dispersion omega(p) = V + 2 kappa cos(pa) against its small-a continuum form",
       {number("kappa", 1.0, "real part of the hopping amplitude"),
        number("kappa-im", 0.0, "imaginary part of the hopping amplitude"),
        number("V", 0.0, "real part of the on-site amplitude"),
        number("V-im", 0.0, "imaginary part of the on-site amplitude"),
        number("a", 0.1, "lattice spacing"),
        number("p-min", 0.0, "first momentum"),
        number("p-max", 3.0, "last momentum"),
        integer("points", 64, "number of momenta (>= 2)")},
       true},
      {"blowup",
       "Norm growth under complex hopping (lattice) or divergence of the Lorentz-shape spectrum integral",
       {choice("mode", "lattice", {"lattice", "integral"}, "lattice norm growth or continuum integral"),
        number("kappa", 0.5, "real part of the hopping amplitude"),
        number("kappa-im", 0.1, "imaginary part of the hopping amplitude"),
        number("V", 0.0, "real part of the on-site amplitude"),
        number("V-im", 0.0, "imaginary part of the on-site amplitude"),
        number("a", 0.1, "lattice spacing"),
        number("t", 200.0, "horizon T (lattice) or evolution time t (integral)"),
        integer("sites", 16, "chain length for the lattice mode"),
        number("p-max", 1e4, "largest cutoff P in the integral sweep"),
        integer("points-per-decade", 8, "cutoffs per decade in the integral sweep")}},
      {"weyl",
       "Spinor lattice evolution, connection solver and covariant current conservation",
       {integer("L", 32, "sites per dimension"),
        number("a", 0.1, "lattice spacing"),
        number("dt", 0.02, "RK4 time step"),
        integer("steps", 100, "number of RK4 steps"),
        number("kappa", 1.0, "hopping scale"),
        number("epsilon-re", 0.0, "real part of the on-site parameter"),
        number("epsilon-im", 0.0, "imaginary part of the on-site parameter"),
        choice("gamma", "zero", {"zero", "scalar", "random-smooth"}, "spin-connection perturbation"),
        number("gamma-scale", 0.5, "gamma magnitude in 1/length (scalar value g, or max entry modulus)"),
        integer("momentum", 1, "plane-wave momentum index along x, p = 2 pi n / (L a)"),
        integer("helicity", 1, "plane-wave helicity (+1 or -1)"),
        boolean("sweep", false, "halve (a, dt) twice and fit the residual convergence slope")}},
      {"deutsch",
       "Channel-opening protocol turning sqrt(m)|A> + sqrt(n)|B> into m + n equal-modulus branches",
       {integer("m", 2, "weight of branch A"),
        integer("n", 3, "weight of branch B"),
        number("kappa", 1.0, "channel hopping amplitude"),
        number("V", 0.0, "channel on-site amplitude"),
        integer("cavities", 0, "number of cavities (0: max(8, m + n + 1))"),
        integer("shots", 0, "Born-rule samples (0: amplitudes only)"),
        boolean("phase-compensate", false, "rotate transferred amplitudes to equal complex phases")}},
      {"verify", "Runs every acceptance check and prints a pass/fail table", {}},
  };
  return specs;
}

const ExperimentSpec& find_experiment(const std::string& name) {
  for (const auto& spec : experiment_specs()) {
    if (spec.name == name) return spec;
  }
  throw PreconditionError("unknown experiment '" + name + "'");
}

ExperimentConfig make_config(const std::string& experiment, const json& overrides, std::uint64_t seed,
                             std::string output) {
  const ExperimentSpec& spec = find_experiment(experiment);
  if (!overrides.is_object()) throw PreconditionError("experiment parameters must be a JSON object");
  ExperimentConfig config{experiment, json::object(), seed, std::move(output)};
  for (const auto& p : spec.params) config.params[p.name] = p.default_value;

  for (const auto& [key, value] : overrides.items()) {
    const ParamSpec* param = nullptr;
    for (const auto& p : spec.params) {
      if (p.name == key) param = &p;
    }
    if (param == nullptr) throw PreconditionError("unknown parameter '" + key + "' for " + experiment);
    switch (param->kind) {
      case ParamKind::Number:
        if (!value.is_number()) throw PreconditionError("parameter '" + key + "' must be a number");
        config.params[key] = value.get<double>();
        break;
      case ParamKind::Integer:
        if (!value.is_number_integer()) {
          if (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>()) {
            config.params[key] = static_cast<std::int64_t>(value.get<double>());
            break;
          }
          throw PreconditionError("parameter '" + key + "' must be an integer");
        }
        config.params[key] = value.get<std::int64_t>();
        break;
      case ParamKind::Boolean:
        if (!value.is_boolean()) throw PreconditionError("parameter '" + key + "' must be true or false");
        config.params[key] = value;
        break;
      case ParamKind::Choice: {
        if (!value.is_string()) throw PreconditionError("parameter '" + key + "' must be a string");
        const auto s = value.get<std::string>();
        if (std::find(param->choices.begin(), param->choices.end(), s) == param->choices.end()) {
          throw PreconditionError("parameter '" + key + "' has invalid value '" + s + "'");
        }
        config.params[key] = s;
        break;
      }
    }
  }
  return config;
}

json dispersion_table_json(const ExperimentConfig& config) {
  const std::size_t points = positive_size(config, "points", 2);
  const double p_min = num(config, "p-min");
  const double p_max = num(config, "p-max");
  if (!(p_max > p_min)) throw PreconditionError("--p-max must exceed --p-min");
  lattice1d::HoppingChain chain;
  chain.spacing = num(config, "a");
  if (!(chain.spacing > 0.0)) throw PreconditionError("--a must be positive");
  chain.kappa = {num(config, "kappa"), num(config, "kappa-im")};
  chain.onsite = {num(config, "V"), num(config, "V-im")};
  json rows = json::array();
  for (std::size_t i = 0; i < points; ++i) {
    const double p = p_min + (p_max - p_min) * static_cast<double>(i) / static_cast<double>(points - 1);
    const cplx w = lattice1d::dispersion(chain, p);
    const cplx c = lattice1d::continuum_dispersion(chain, p);
    rows.push_back({p, w.real(), w.imag(), c.real(), c.imag()});
  }
  return {{"columns", {"p", "re_omega", "im_omega", "continuum_re", "continuum_im"}}, {"rows", rows}};
}

std::string dispersion_csv(const ExperimentConfig& config) {
  const json table = dispersion_table_json(config);
  std::ostringstream out;
  out << "p,re_omega,im_omega,continuum_re,continuum_im\n";
  for (const auto& row : table["rows"]) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out << ',';
      out << format_double(row[k].get<double>());
    }
    out << '\n';
  }
  return out.str();
}

json blowup_payload(const ExperimentConfig& config) {
  const std::string mode = text(config, "mode");
  const double a = num(config, "a");
  const double t = num(config, "t");
  if (!(a > 0.0)) throw PreconditionError("--a must be positive");
  if (!(t > 0.0)) throw PreconditionError("--t must be positive");
  const cplx kappa{num(config, "kappa"), num(config, "kappa-im")};
  const cplx onsite{num(config, "V"), num(config, "V-im")};

  if (mode == "lattice") {
    lattice1d::HoppingChain chain{positive_size(config, "sites", 4), a, kappa, onsite};
    rng::RngStream stream = rng::derive_stream(config.seed, 0);
    lattice1d::WaveFunction1D psi0{std::vector<cplx>(chain.sites)};
    for (auto& z : psi0.amplitudes) {
      const double re = 2.0 * stream.uniform() - 1.0;
      z = {re, 2.0 * stream.uniform() - 1.0};
    }
    const double predicted = lattice1d::max_growth_rate(chain);
    const double measured = lattice1d::norm_growth_rate(chain, psi0, t);
    const double rel = predicted != 0.0 ? std::abs(measured - predicted) / std::abs(predicted) : std::abs(measured);
    return {{"mode", mode},
            {"sites", chain.sites},
            {"predicted_rate", predicted},
            {"closed_form_rate", onsite.imag() + 2.0 * std::abs(kappa.imag())},
            {"measured_rate", measured},
            {"relative_error", rel},
            {"horizon", t}};
  }

  const double im_kappa = kappa.imag();
  const double p_max = num(config, "p-max");
  const std::size_t per_decade = positive_size(config, "points-per-decade", 1);
  if (!(p_max > 1.0)) throw PreconditionError("--p-max must exceed 1");
  const double c = a * a * im_kappa * t;
  json sweep = json::array();
  bool increasing = true;
  double previous_P = 0.0;
  const lattice1d::SpreadIntegral base = lattice1d::lorentz_spread_integral(a, im_kappa, t, 1.0);
  json overflow = {{"occurred", false}, {"momentum", nullptr}};
  const std::size_t total = static_cast<std::size_t>(std::ceil(std::log10(p_max) * static_cast<double>(per_decade)));
  for (std::size_t i = 0; i <= total; ++i) {
    const double P = std::min(p_max, std::pow(10.0, static_cast<double>(i) / static_cast<double>(per_decade)));
    if (!(P > previous_P)) break;
    const double log_inc = lattice1d::log_spread_increment(a, im_kappa, t, previous_P, P);
    if (!std::isfinite(log_inc)) increasing = false;
    previous_P = P;
    const lattice1d::SpreadIntegral r = lattice1d::lorentz_spread_integral(a, im_kappa, t, P);
    if (r.overflow) {
      overflow = {{"occurred", true}, {"momentum", r.overflow_momentum}};
      sweep.push_back({{"P", P}, {"value", nullptr}, {"log_value", r.log_value}, {"log_increment", log_inc},
                       {"overflow", true}});
      break;
    }
    sweep.push_back({{"P", P}, {"value", r.value}, {"log_value", r.log_value}, {"log_increment", log_inc},
                     {"overflow", false}});
  }
  json payload = {{"mode", mode},
                  {"growth_coefficient", c},
                  {"turning_momentum", c > 0.0 ? json(0.5 / c) : json(nullptr)},
                  {"I_of_1", finite_or_null(base.value)},
                  {"sweep", sweep},
                  {"strictly_increasing", increasing},
                  {"overflow", overflow}};
  if (c == 0.0) {
    payload["I_infinity"] =
        finite_or_null(lattice1d::lorentz_spread_integral(a, 0.0, 1.0, std::numeric_limits<double>::infinity()).value);
  } else {
    payload["I_infinity"] = nullptr;
  }
  return payload;
}

json weyl_payload(const ExperimentConfig& config, unsigned threads) {
  weyl3d::ConservationSetup setup;
  setup.L = positive_size(config, "L", 3);
  setup.spacing = num(config, "a");
  setup.dt = num(config, "dt");
  setup.steps = positive_size(config, "steps", 1);
  setup.kappa = num(config, "kappa");
  setup.epsilon = {num(config, "epsilon-re"), num(config, "epsilon-im")};
  setup.momentum_index = {static_cast<int>(integer_param(config, "momentum")), 0, 0};
  setup.helicity = static_cast<int>(integer_param(config, "helicity"));
  setup.threads = threads;
  const std::string gamma_kind = text(config, "gamma");
  const double scale = num(config, "gamma-scale");
  if (!(setup.spacing > 0.0)) throw PreconditionError("--a must be positive");

  auto make_gamma = [&](std::size_t L) -> std::vector<weyl3d::GammaSite> {
    if (gamma_kind == "scalar") return weyl3d::scalar_gamma(L, scale);
    if (gamma_kind == "random-smooth") return weyl3d::random_smooth_gamma(L, scale, config.seed);
    return {};
  };
  setup.gamma = make_gamma(setup.L);
  // Reject an unstable configuration before doing any work.
  weyl3d::check_stability({setup.epsilon, setup.kappa, setup.gamma, setup.coupling_sign}, setup.dt);

  const weyl3d::ConservationReport report = weyl3d::measure_conservation(setup);
  json payload = {{"L", setup.L},
                  {"a", setup.spacing},
                  {"dt", setup.dt},
                  {"steps", setup.steps},
                  {"gamma", gamma_kind},
                  {"coupling_sign", setup.coupling_sign},
                  {"norm_initial", report.norm_initial},
                  {"norm_final", report.norm_final},
                  {"norm_drift", (report.norm_final - report.norm_initial) / report.norm_initial},
                  {"connection_max_residual", report.connection_max_residual},
                  {"contracted_identity_residual", report.contracted_max_residual},
                  {"divergence_max", report.divergence_max},
                  {"divergence_mean", report.divergence_mean}};

  if (gamma_kind == "scalar") {
    const weyl3d::ConnectionCoefficients conn = weyl3d::solve_connection(setup.gamma.front());
    double deviation = 0.0;
    json averaged = json::array();
    for (int mu = 0; mu < 4; ++mu) {
      json row = json::array();
      for (int nu = 0; nu < 4; ++nu) {
        double mean = 0.0;
        for (int alpha = 0; alpha < 4; ++alpha) {
          const double expected = mu == nu ? -2.0 * scale : 0.0;
          deviation = std::max(deviation, std::abs(conn(mu, nu, alpha) - expected));
          mean += 0.25 * conn(mu, nu, alpha);
        }
        row.push_back(mean);
      }
      averaged.push_back(row);
    }
    payload["gamma_averaged_connection"] = averaged;
    payload["scalar_pattern_deviation"] = deviation;
  }

  if (flag(config, "sweep")) {
    json levels = json::array();
    std::vector<double> spacings, residuals;
    weyl3d::ConservationSetup level = setup;
    for (int i = 0; i < 3; ++i) {
      const weyl3d::ConservationReport r = i == 0 ? report : weyl3d::measure_conservation(level);
      levels.push_back({{"a", level.spacing}, {"dt", level.dt}, {"steps", level.steps}, {"divergence_max", r.divergence_max}});
      spacings.push_back(level.spacing);
      residuals.push_back(r.divergence_max);
      level.spacing *= 0.5;
      level.dt *= 0.5;
      level.steps *= 2;
    }
    payload["sweep"] = levels;
    bool positive = true;
    for (double r : residuals) positive = positive && r > 0.0;
    payload["sweep_slope"] = positive ? json(numerics::fit_loglog_slope(spacings, residuals)) : json(nullptr);
  }
  return payload;
}

json deutsch_payload(const ExperimentConfig& config) {
  const std::int64_t m = integer_param(config, "m");
  const std::int64_t n = integer_param(config, "n");
  if (m < 0 || n < 0) throw PreconditionError("--m and --n must be nonnegative");
  if (m == 0 && n == 0) throw PreconditionError("--m and --n cannot both be zero");
  const double kappa = num(config, "kappa");
  const double onsite = num(config, "V");
  const std::int64_t shots = integer_param(config, "shots");
  if (shots < 0) throw PreconditionError("--shots must be >= 0");
  std::int64_t cavities = integer_param(config, "cavities");
  if (cavities == 0) cavities = std::max<std::int64_t>(8, m + n + 1);
  if (cavities < m + n + 1) throw PreconditionError("--cavities must be at least m + n + 1");

  const auto um = static_cast<unsigned>(m);
  const auto un = static_cast<unsigned>(n);
  const cavities::CavityState initial = cavities::init_state(um, un, static_cast<std::size_t>(cavities));
  const cavities::ProtocolSchedule schedule = cavities::tau_schedule(um, un, kappa, onsite);
  const cavities::CavityState final_state =
      cavities::run_protocol(initial, schedule, {flag(config, "phase-compensate")});

  json steps = json::array();
  for (const auto& s : schedule.steps) {
    steps.push_back({{"from", s.from},
                     {"to", s.to},
                     {"selector", cavities::to_string(s.selector)},
                     {"tau", s.duration},
                     {"alpha", complex_json(s.coefficients.alpha)},
                     {"beta", complex_json(s.coefficients.beta)}});
  }
  json amplitudes = json::array();
  for (std::size_t k = 0; k < final_state.size(); ++k) {
    const cplx z = final_state.amplitudes()[k];
    amplitudes.push_back({{"internal", cavities::to_string(final_state.label_of(k))},
                          {"cavity", final_state.cavity_of(k)},
                          {"re", z.real()},
                          {"im", z.imag()},
                          {"modulus", std::abs(z)}});
  }
  const cavities::Rational p_a = cavities::symmetry_probability(
      final_state, [](cavities::Internal label, std::size_t) { return label == cavities::Internal::A; });

  json payload = {{"m", m},
                  {"n", n},
                  {"cavities", cavities},
                  {"schedule", steps},
                  {"final_amplitudes", amplitudes},
                  {"central_modulus",
                   std::max(std::abs(final_state.amplitude(cavities::Internal::A, 0)),
                            std::abs(final_state.amplitude(cavities::Internal::B, 0)))},
                  {"p_A", {{"exact", p_a.str()}, {"decimal", p_a.value()}}}};
  if (shots > 0) {
    rng::RngStream stream = rng::derive_stream(config.seed, 0);
    const auto counts = cavities::born_sample(final_state, static_cast<std::uint64_t>(shots), stream);
    std::uint64_t count_a = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (final_state.label_of(k) == cavities::Internal::A) count_a += counts[k];
    }
    const double freq = static_cast<double>(count_a) / static_cast<double>(shots);
    const double p = p_a.value();
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(shots));
    payload["sampled"] = {{"shots", shots},
                          {"rng", rng::kAlgorithm},
                          {"count_A", count_a},
                          {"frequency_A", freq},
                          {"sigma", sigma},
                          {"within_3sigma", std::abs(freq - p) <= 3.0 * sigma}};
  }
  return payload;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  ExperimentResult result;
  if (config.experiment == "dispersion") {
    result.csv = dispersion_csv(config);
  } else if (config.experiment == "blowup") {
    result.payload = blowup_payload(config);
  } else if (config.experiment == "weyl") {
    result.payload = weyl_payload(config, threads);
  } else if (config.experiment == "deutsch") {
    result.payload = deutsch_payload(config);
  } else if (config.experiment == "verify") {
    const auto criteria = verify::run_all({config.seed, threads});
    result.payload = verify::to_json(criteria);
    result.report = verify::format_table(criteria);
    for (const auto& c : criteria) result.all_passed = result.all_passed && c.passed;
  } else {
    throw PreconditionError("unknown experiment '" + config.experiment + "'");
  }
  return result;
}

json config_echo(const ExperimentConfig& config) {
  return {{"experiment", config.experiment}, {"params", config.params}, {"seed", config.seed}};
}

json make_envelope(const ExperimentConfig& config, const json& payload, double duration_seconds) {
  // nlohmann::json keeps keys sorted; duration_seconds is the only run-dependent field.
  return {{"schema", kEnvelopeSchema},
          {"experiment", config.experiment},
          {"tool_version", kToolVersion},
          {"rng", rng::kAlgorithm},
          {"config", config_echo(config)},
          {"payload", payload},
          {"duration_seconds", duration_seconds}};
}

std::string render_output(const ExperimentConfig& config, const ExperimentResult& result, double duration_seconds) {
  if (find_experiment(config.experiment).csv_output) {
    return "# schema=bornlab." + config.experiment + "/1 tool_version=" + kToolVersion + "\n" + result.csv;
  }
  return make_envelope(config, result.payload, duration_seconds).dump(2) + "\n";
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PreconditionError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw PreconditionError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw PreconditionError("cannot move output into place: " + ec.message());
  }
}

}  // namespace bornlab::cli
