#pragma once

// The acceptance checks behind `bornlab verify`, one function per criterion.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bornlab::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  nlohmann::json measured = nlohmann::json::object();
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

CriterionResult unitarity(const VerifyOptions& options);
CriterionResult schrodinger_limit(const VerifyOptions& options);
CriterionResult blowup(const VerifyOptions& options);
CriterionResult n_particle_phase(const VerifyOptions& options);
CriterionResult weyl_free_mode(const VerifyOptions& options);
CriterionResult connection_solver(const VerifyOptions& options);
CriterionResult covariant_conservation(const VerifyOptions& options);
CriterionResult unimodularity(const VerifyOptions& options);
CriterionResult deutsch_protocol(const VerifyOptions& options);
/// Re-runs seeded sub-computations twice and with 1 and 3 threads and compares
/// the serialised results byte for byte.
CriterionResult determinism(const VerifyOptions& options);

std::vector<CriterionResult> run_all(const VerifyOptions& options);

nlohmann::json to_json(const std::vector<CriterionResult>& results);
std::string format_table(const std::vector<CriterionResult>& results);

}  // namespace bornlab::verify
