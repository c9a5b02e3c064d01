// bornlab: runs the lattice, spinor and cavity experiments and writes
// JSON envelopes (or CSV tables) with their results.
//
// Exit codes: 0 success, 1 verify found a failing criterion,
// 2 configuration or precondition error, 3 numerical guard violation.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "bornlab/error.hpp"
#include "bornlab/experiments.hpp"

namespace {

using bornlab::cli::json;
using bornlab::cli::ParamKind;

struct SubcommandState {
  const bornlab::cli::ExperimentSpec* spec = nullptr;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out = "-";
  unsigned threads = 0;
};

std::string describe_default(const bornlab::cli::ParamSpec& p) {
  if (p.default_value.is_string()) return p.default_value.get<std::string>();
  return p.default_value.dump();
}

json parse_value(const bornlab::cli::ParamSpec& p, const std::string& raw) {
  try {
    switch (p.kind) {
      case ParamKind::Number: {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case ParamKind::Integer: {
        std::size_t used = 0;
        const long long v = std::stoll(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case ParamKind::Choice:
        return raw;
      case ParamKind::Boolean:
        return raw == "true" || raw == "1";
    }
  } catch (const std::exception&) {
  }
  throw bornlab::PreconditionError("--" + p.name + ": cannot parse '" + raw + "'");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bornlab::PreconditionError("cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw bornlab::PreconditionError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

int run(SubcommandState& state) {
  json overrides = json::object();
  std::uint64_t seed = state.seed;
  std::string out = state.out;
  bool seed_from_flag = state.app->get_option("--seed")->count() > 0;
  bool out_from_flag = state.app->get_option("--out")->count() > 0;

  if (!state.config_path.empty()) {
    json file = load_config_file(state.config_path);
    if (!file.is_object()) throw bornlab::PreconditionError("config file must hold a JSON object");
    if (file.contains("seed")) {
      if (!seed_from_flag) seed = file["seed"].get<std::uint64_t>();
      file.erase("seed");
    }
    if (file.contains("out")) {
      if (!out_from_flag) out = file["out"].get<std::string>();
      file.erase("out");
    }
    overrides = file;
  }
  for (const auto& p : state.spec->params) {
    if (p.kind == ParamKind::Boolean) {
      if (state.app->get_option("--" + p.name)->count() > 0) overrides[p.name] = state.flags[p.name];
    } else if (state.app->get_option("--" + p.name)->count() > 0) {
      overrides[p.name] = parse_value(p, state.values[p.name]);
    }
  }
  if (const char* env = std::getenv("BORNLAB_SEED"); env != nullptr && *env != '\0') {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      throw bornlab::PreconditionError("BORNLAB_SEED is not an unsigned integer");
    }
  }

  const auto config = bornlab::cli::make_config(state.spec->name, overrides, seed, out);
  const auto start = std::chrono::steady_clock::now();
  const auto result = bornlab::cli::run_experiment(config, state.threads);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bornlab::cli::write_output(config.output, bornlab::cli::render_output(config, result, seconds));
  if (!result.report.empty()) {
    (config.output == "-" ? std::cerr : std::cout) << result.report;
  }
  return result.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bornlab: hopping-chain, lattice Weyl and cavity-array experiments"};
  app.set_version_flag("--version", std::string(bornlab::cli::kToolVersion));
  app.require_subcommand(1);

  std::vector<SubcommandState> states(bornlab::cli::experiment_specs().size());
  std::size_t i = 0;
  for (const auto& spec : bornlab::cli::experiment_specs()) {
    SubcommandState& state = states[i++];
    state.spec = &spec;
    state.app = app.add_subcommand(spec.name, spec.description);
    for (const auto& p : spec.params) {
      const std::string flag = "--" + p.name;
      const std::string help = p.help + " (default: " + describe_default(p) + ")";
      if (p.kind == ParamKind::Boolean) {
        state.flags[p.name] = p.default_value.get<bool>();
        state.app->add_flag(flag, state.flags[p.name], help);
      } else {
        auto* opt = state.app->add_option(flag, state.values[p.name], help);
        if (p.kind == ParamKind::Number) opt->type_name("NUM");
        if (p.kind == ParamKind::Integer) opt->type_name("INT");
        if (p.kind == ParamKind::Choice) opt->check(CLI::IsMember(p.choices));
      }
    }
    state.app->add_option("--config", state.config_path, "JSON file with parameter values (flags win)");
    state.app->add_option("--seed", state.seed, "64-bit seed; $BORNLAB_SEED overrides (default: 0)");
    state.app->add_option("--out", state.out, "output path, '-' for stdout (default: -)");
    state.app->add_option("--threads", state.threads, "worker threads, 0 = $BORNLAB_THREADS or hardware (default: 0)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto& state : states) {
    if (!state.app->parsed()) continue;
    try {
      return run(state);
    } catch (const bornlab::StabilityGuardError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const bornlab::PreconditionError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const bornlab::NumericalGuardError& e) {
      std::cerr << "numerical guard: " << e.what() << "\n";
      return 3;
    } catch (const json::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "fatal: " << e.what() << "\n";
      return 3;
    }
  }
  return 2;
}
