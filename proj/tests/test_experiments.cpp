#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "bornlab/error.hpp"
#include "bornlab/experiments.hpp"

using namespace bornlab;
using namespace bornlab::cli;

namespace {

std::vector<std::vector<double>> csv_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'p') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("make_config fills defaults and rejects bad input") {
  const ExperimentConfig c = make_config("dispersion", json::object());
  CHECK(c.seed == 0);
  CHECK(c.params["points"] == 64);
  CHECK(c.params["kappa"] == 1.0);
  CHECK_THROWS_AS(make_config("dispersion", {{"bogus", 1}}), PreconditionError);
  CHECK_THROWS_AS(make_config("dispersion", {{"points", "many"}}), PreconditionError);
  CHECK_THROWS_AS(make_config("dispersion", {{"points", 2.5}}), PreconditionError);
  CHECK(make_config("dispersion", {{"points", 4.0}}).params["points"] == 4);
  CHECK_THROWS_AS(make_config("weyl", {{"gamma", "curly"}}), PreconditionError);
  CHECK_THROWS_AS(make_config("nope", json::object()), PreconditionError);
}

TEST_CASE("every parameter documents its default") {
  for (const auto& spec : experiment_specs()) {
    for (const auto& p : spec.params) {
      CHECK_FALSE(p.help.empty());
      CHECK_FALSE(p.default_value.is_null());
    }
  }
}

TEST_CASE("dispersion table rows") {
  const auto rows = csv_rows(dispersion_csv(make_config(
      "dispersion", {{"kappa", 1}, {"V", 0}, {"a", 0.1}, {"p-min", 0}, {"p-max", 3}, {"points", 4}})));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == 0.0);
  CHECK(rows[0][1] == 2.0);
  CHECK(rows[3][0] == doctest::Approx(3.0));

  const auto complex_rows = csv_rows(dispersion_csv(make_config("dispersion", {{"kappa-im", 0.1}, {"points", 7}})));
  for (const auto& r : complex_rows) CHECK(r[2] == doctest::Approx(0.2 * std::cos(r[0] * 0.1)).epsilon(1e-14));
  CHECK_THROWS_AS(dispersion_csv(make_config("dispersion", {{"points", 1}})), PreconditionError);
}

TEST_CASE("rendered dispersion CSV starts with a schema comment") {
  const ExperimentConfig c = make_config("dispersion", {{"points", 2}});
  const std::string csv = render_output(c, run_experiment(c, 1), 0.0);
  CHECK(csv.rfind("# schema=bornlab.dispersion/1", 0) == 0);
  CHECK(csv.find("p,re_omega,im_omega,continuum_re,continuum_im\n") != std::string::npos);
}

TEST_CASE("blowup payloads") {
  const json lattice = blowup_payload(make_config("blowup", {{"mode", "lattice"}, {"kappa-im", 0.1}}));
  CHECK(lattice["predicted_rate"].get<double>() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(lattice["measured_rate"].get<double>() - 0.2) / 0.2 <= 0.01);

  const json laplace = blowup_payload(make_config("blowup", {{"mode", "integral"}, {"kappa-im", 0}}));
  CHECK(std::abs(laplace["I_infinity"].get<double>() - 2.0) <= 1e-6);

  const json growing = blowup_payload(
      make_config("blowup", {{"mode", "integral"}, {"a", 0.1}, {"kappa-im", 0.1}, {"t", 1}}));
  CHECK(growing["strictly_increasing"] == true);
  CHECK(growing["overflow"]["occurred"] == true);
}

TEST_CASE("weyl payloads") {
  const json zero = weyl_payload(make_config("weyl", {{"L", 8}, {"steps", 10}}), 1);
  CHECK(zero["divergence_max"].get<double>() < 1e-3);
  const json scalar =
      weyl_payload(make_config("weyl", {{"L", 8}, {"steps", 10}, {"gamma", "scalar"}, {"gamma-scale", 0.05}}), 1);
  CHECK(scalar["scalar_pattern_deviation"].get<double>() <= 1e-12);
  CHECK_THROWS_AS(weyl_payload(make_config("weyl", {{"L", 8}, {"dt", 0.5}}), 1), StabilityGuardError);
}

TEST_CASE("deutsch payloads") {
  const json p23 = deutsch_payload(make_config("deutsch", {{"m", 2}, {"n", 3}, {"shots", 100000}}, 7));
  CHECK(p23["p_A"]["exact"] == "2/5");
  CHECK(p23["sampled"]["within_3sigma"] == true);
  CHECK(std::abs(p23["sampled"]["frequency_A"].get<double>() - 0.4) <= 3 * std::sqrt(0.24 / 1e5));

  const json p11 = deutsch_payload(make_config("deutsch", {{"m", 1}, {"n", 1}}));
  CHECK(p11["p_A"]["exact"] == "1/2");
  CHECK_FALSE(p11.contains("sampled"));
  int filled = 0;
  for (const auto& a : p11["final_amplitudes"]) {
    if (a["modulus"].get<double>() > 0.5) {
      CHECK(a["modulus"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
      ++filled;
    }
  }
  CHECK(filled == 2);

  CHECK(deutsch_payload(make_config("deutsch", {{"m", 3}, {"n", 0}}))["p_A"]["exact"] == "1/1");
  CHECK_THROWS_AS(deutsch_payload(make_config("deutsch", {{"m", 0}, {"n", 0}})), PreconditionError);
}

TEST_CASE("envelope layout") {
  const ExperimentConfig c = make_config("deutsch", {{"m", 1}, {"n", 2}}, 5);
  const ExperimentResult r = run_experiment(c, 1);
  const json env = json::parse(render_output(c, r, 0.25));
  CHECK(env["schema"] == kEnvelopeSchema);
  CHECK(env["experiment"] == "deutsch");
  CHECK(env["tool_version"] == kToolVersion);
  CHECK(env["rng"] == "philox4x32-10");
  CHECK(env["config"]["seed"] == 5);
  CHECK(env["config"]["params"]["m"] == 1);
  CHECK(env["duration_seconds"] == 0.25);
  CHECK(env["payload"] == r.payload);
}

TEST_CASE("write_output replaces the target file") {
  const std::string path = "bornlab_write_output_test.json";
  write_output(path, "first\n");
  write_output(path, "second\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  CHECK(content == "second\n");
  std::remove(path.c_str());
}
