#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "bornlab/cavities.hpp"
#include "bornlab/error.hpp"
#include "bornlab/experiments.hpp"
#include "bornlab/lattice1d.hpp"
#include "bornlab/rng.hpp"
#include "bornlab/weyl3d.hpp"

namespace py = pybind11;
using namespace bornlab;

namespace {

using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

std::vector<cplx> to_vector(const ComplexArray& a) {
  if (a.ndim() != 1) throw PreconditionError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

ComplexArray to_array(const std::vector<cplx>& v) {
  ComplexArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

lattice1d::HoppingChain chain(std::size_t sites, double spacing, cplx kappa, cplx onsite) {
  lattice1d::HoppingChain c{sites, spacing, kappa, onsite};
  c.validate();
  return c;
}

weyl3d::GammaSite gamma_site(const py::array_t<cplx, py::array::c_style | py::array::forcecast>& g) {
  if (g.ndim() != 3 || g.shape(0) != 4 || g.shape(1) != 2 || g.shape(2) != 2) {
    throw PreconditionError("gamma must have shape (4, 2, 2)");
  }
  weyl3d::GammaSite site;
  auto r = g.unchecked<3>();
  for (py::ssize_t alpha = 0; alpha < 4; ++alpha)
    for (py::ssize_t i = 0; i < 2; ++i)
      for (py::ssize_t j = 0; j < 2; ++j) site[static_cast<std::size_t>(alpha)](i, j) = r(alpha, i, j);
  return site;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hopping chains, lattice spinor evolution and the cavity-array protocol.";
  m.attr("__version__") = cli::kToolVersion;

  auto base = py::register_exception<Error>(m, "BornlabError", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<NumericalGuardError>(m, "NumericalGuardError", base.ptr());

  m.def("philox4x32_10", &rng::philox4x32_10, py::arg("counter"), py::arg("key"));

  m.def(
      "dispersion",
      [](double p, cplx kappa, cplx onsite, double spacing) {
        return lattice1d::dispersion(chain(4, spacing, kappa, onsite), p);
      },
      py::arg("p"), py::arg("kappa") = cplx(1.0), py::arg("V") = cplx(0.0), py::arg("a") = 0.1);

  m.def(
      "evolve",
      [](const ComplexArray& psi, double t, cplx kappa, cplx onsite, double spacing) {
        const auto c = chain(static_cast<std::size_t>(psi.size()), spacing, kappa, onsite);
        return to_array(lattice1d::evolve(c, {to_vector(psi)}, t).amplitudes);
      },
      py::arg("psi"), py::arg("t"), py::arg("kappa") = cplx(1.0), py::arg("V") = cplx(0.0), py::arg("a") = 0.1);

  m.def(
      "norm_growth_rate",
      [](const ComplexArray& psi, double horizon, cplx kappa, cplx onsite, double spacing) {
        const auto c = chain(static_cast<std::size_t>(psi.size()), spacing, kappa, onsite);
        return lattice1d::norm_growth_rate(c, {to_vector(psi)}, horizon);
      },
      py::arg("psi"), py::arg("horizon"), py::arg("kappa") = cplx(1.0), py::arg("V") = cplx(0.0),
      py::arg("a") = 0.1);

  m.def(
      "max_growth_rate",
      [](std::size_t sites, cplx kappa, cplx onsite, double spacing) {
        return lattice1d::max_growth_rate(chain(sites, spacing, kappa, onsite));
      },
      py::arg("sites"), py::arg("kappa") = cplx(1.0), py::arg("V") = cplx(0.0), py::arg("a") = 0.1);

  m.def(
      "lorentz_spread_integral",
      [](double a, double im_kappa, double t, double cutoff) {
        const auto r = lattice1d::lorentz_spread_integral(a, im_kappa, t, cutoff);
        py::dict d;
        d["value"] = r.value;
        d["log_value"] = r.log_value;
        d["overflow"] = r.overflow;
        d["overflow_momentum"] = r.overflow ? py::object(py::float_(r.overflow_momentum)) : py::none();
        return d;
      },
      py::arg("a"), py::arg("im_kappa"), py::arg("t"), py::arg("P"));

  m.def("n_particle_imbalance", &lattice1d::n_particle_imbalance, py::arg("V"), py::arg("n"), py::arg("t"));

  m.def(
      "solve_connection",
      [](const py::array_t<cplx, py::array::c_style | py::array::forcecast>& gamma) {
        const auto conn = weyl3d::solve_connection(gamma_site(gamma));
        py::array_t<double> out({4, 4, 4});
        std::copy(conn.values.begin(), conn.values.end(), out.mutable_data());
        return out;
      },
      py::arg("gamma"), "Gamma[mu, nu, alpha] for gamma of shape (4, 2, 2).");

  m.def(
      "weyl_mode_phase_error",
      [](std::size_t L, double a, std::array<int, 3> momentum, int helicity, double dt, std::size_t steps) {
        const auto f = weyl3d::plane_wave_spinor_indexed(L, a, momentum, helicity);
        const auto out = weyl3d::evolve_weyl(f, {}, dt, steps, {1});
        const double q = 2.0 * std::numbers::pi / (static_cast<double>(L) * a);
        const double speed = weyl3d::lattice_speed_factor({q * momentum[0], q * momentum[1], q * momentum[2]}, a);
        const cplx phase = std::exp(cplx(0.0, -1.0) * static_cast<double>(helicity) * speed * dt *
                                    static_cast<double>(steps));
        double worst = 0.0;
        for (std::size_t i = 0; i < f.psi.size(); ++i) worst = std::max(worst, std::abs(out.psi[i] - phase * f.psi[i]));
        return worst;
      },
      py::arg("L"), py::arg("a"), py::arg("momentum"), py::arg("helicity"), py::arg("dt"), py::arg("steps"));

  m.def(
      "channel_unitary",
      [](double kappa, double onsite, double tau) {
        const auto c = cavities::channel_unitary(kappa, onsite, tau);
        return py::make_tuple(c.alpha, c.beta);
      },
      py::arg("kappa"), py::arg("V"), py::arg("tau"));

  m.def("opening_duration", &cavities::opening_duration, py::arg("k"), py::arg("kappa"));

  m.def(
      "imbalance_demo",
      [](cplx alpha, cplx beta, std::size_t k) { return cavities::imbalance_demo({alpha, beta}, k); },
      py::arg("alpha"), py::arg("beta"), py::arg("k"));

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& params_json, std::uint64_t seed, unsigned threads) {
        const auto config = cli::make_config(experiment, cli::json::parse(params_json), seed);
        cli::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = cli::run_experiment(config, threads);
        }
        return cli::render_output(config, result, 0.0);
      },
      py::arg("experiment"), py::arg("params_json") = "{}", py::arg("seed") = 0, py::arg("threads") = 0,
      "Runs a named experiment; returns the JSON envelope (CSV for 'dispersion').");
}
