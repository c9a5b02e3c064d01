#pragma once

// Named experiments behind the `bornlab` command line: parameter tables,
// config validation, payload construction and the result envelope.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace bornlab::cli {

using json = nlohmann::json;

inline constexpr const char* kEnvelopeSchema = "bornlab.result/1";
inline constexpr const char* kToolVersion = BORNLAB_VERSION;

enum class ParamKind { Number, Integer, Boolean, Choice };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::Number;
  json default_value;
  std::string help;
  std::vector<std::string> choices = {};
};

struct ExperimentSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  bool csv_output = false;
};

const std::vector<ExperimentSpec>& experiment_specs();
const ExperimentSpec& find_experiment(const std::string& name);

struct ExperimentConfig {
  std::string experiment;
  json params = json::object();
  std::uint64_t seed = 0;
  std::string output = "-";
};

/// Fills defaults and validates `overrides` (flag-name keys). Unknown keys,
/// wrong types and bad choices throw PreconditionError.
ExperimentConfig make_config(const std::string& experiment, const json& overrides, std::uint64_t seed = 0,
                             std::string output = "-");

struct ExperimentResult {
  json payload;
  std::string csv;          ///< set instead of `payload` for CSV experiments
  std::string report;       ///< human-readable table (verify only)
  bool all_passed = true;   ///< verify only
};

/// Runs the experiment. `threads` only affects speed, never results.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0);

json config_echo(const ExperimentConfig& config);
json make_envelope(const ExperimentConfig& config, const json& payload, double duration_seconds);

/// The text written for a finished run: CSV with a schema comment line, or the
/// JSON envelope (2-space indent, trailing newline).
std::string render_output(const ExperimentConfig& config, const ExperimentResult& result, double duration_seconds);

/// Writes to stdout for "-", otherwise to a temporary sibling file renamed into place.
void write_output(const std::string& path, const std::string& content);

json dispersion_table_json(const ExperimentConfig& config);
std::string dispersion_csv(const ExperimentConfig& config);
json blowup_payload(const ExperimentConfig& config);
json weyl_payload(const ExperimentConfig& config, unsigned threads = 0);
json deutsch_payload(const ExperimentConfig& config);

}  // namespace bornlab::cli
