// Distributed under the MIT License.
// See LICENSE.txt for details.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <vector>

#include "unisphere/io.hpp"
#include "unisphere/random.hpp"
#include "unisphere/report.hpp"
#include "unisphere/stability.hpp"
#include "unisphere/uniformize.hpp"

namespace py = pybind11;
using namespace unisphere;

namespace {

// The pybind layer works with value types and plain resolutions; grids are
// built (and shared) internally through the build_grid cache.
ConformalMetric round_metric(int bandlimit) {
  return ConformalMetric(build_grid(bandlimit));
}

py::object metric_from_json_str(const std::string& text) {
  const MetricFile f = metric_from_json(Json::parse(text));
  if (f.is_conformal()) return py::cast(std::get<ConformalMetric>(f.metric));
  return py::cast(std::get<PerturbedMetric>(f.metric));
}

template <typename Metric>
Eigen::VectorXd spectrum_of(const Metric& m, int count) {
  return galerkin_spectrum(m, count).eigenvalues;
}

}  // namespace

PYBIND11_MODULE(_unisphere, mod) {
  mod.doc() =
      "Spectral experiments on the 2-sphere: uniformization to the round "
      "metric, lightcone structure identities, Laplace spectra, and "
      "embedding-stability comparisons.";
  mod.attr("__version__") = kLibraryVersion;

  py::register_exception<Error>(mod, "UnisphereError");

  py::class_<ConformalMetric>(mod, "ConformalMetric",
                              "Metric e^{2u} g_round given by band-limited "
                              "spectral coefficients of u = log Omega.")
      .def_property_readonly(
          "bandlimit",
          [](const ConformalMetric& m) { return m.grid->bandlimit(); })
      .def("area", &ConformalMetric::area)
      .def(
          "log_factor",
          [](const ConformalMetric& m) { return m.log_omega_field().values; },
          "Samples of log Omega on the (theta, phi) grid.")
      .def(
          "curvature",
          [](const ConformalMetric& m) { return gauss_curvature(m).values; },
          "Gauss curvature samples on the (theta, phi) grid.")
      .def("to_json",
           [](const ConformalMetric& m) { return metric_to_json(m).dump(2); })
      .def("__repr__", [](const ConformalMetric& m) {
        return "<ConformalMetric L=" + std::to_string(m.grid->bandlimit()) +
               ">";
      });

  py::class_<PerturbedMetric>(mod, "PerturbedMetric",
                              "Metric g_round + h given by frame samples of "
                              "the symmetric perturbation h.")
      .def_property_readonly(
          "bandlimit",
          [](const PerturbedMetric& m) { return m.grid->bandlimit(); })
      .def("area", &PerturbedMetric::area)
      .def("positive_definite", &PerturbedMetric::positive_definite)
      .def(
          "sup_norm", [](const PerturbedMetric& m) { return m.h.sup_norm(); },
          "Largest frame component of h over the grid.")
      .def(
          "curvature",
          [](const PerturbedMetric& m) { return gauss_curvature(m).values; },
          "Gauss curvature samples on the (theta, phi) grid.")
      .def("to_json",
           [](const PerturbedMetric& m) { return metric_to_json(m).dump(2); })
      .def("__repr__", [](const PerturbedMetric& m) {
        return "<PerturbedMetric L=" + std::to_string(m.grid->bandlimit()) +
               ">";
      });

  mod.def("round_metric", &round_metric, py::arg("bandlimit"),
          "The round sphere as a conformal chart (u = 0).");

  mod.def(
      "random_conformal",
      [](int bandlimit, std::uint64_t seed, double epsilon, int lmax) {
        return random_conformal_metric(build_grid(bandlimit), seed, epsilon,
                                       lmax);
      },
      py::arg("bandlimit"), py::arg("seed"), py::arg("epsilon"),
      py::arg("lmax") = 4,
      "Random conformal chart calibrated so sup|K - 1| hits epsilon "
      "(deterministic per seed).");

  mod.def(
      "random_perturbed",
      [](int bandlimit, std::uint64_t seed, double epsilon, int lmax) {
        return random_perturbed_metric(build_grid(bandlimit), seed, epsilon,
                                       lmax);
      },
      py::arg("bandlimit"), py::arg("seed"), py::arg("epsilon"),
      py::arg("lmax") = 4,
      "Random symmetric perturbation rescaled so sup|h| equals epsilon "
      "(deterministic per seed).");

  mod.def("metric_from_json", &metric_from_json_str, py::arg("text"),
          "Parse a metric spec JSON string into the matching metric class.");

  mod.def(
      "uniformize_log_factor",
      [](const ConformalMetric& m) {
        const UniformizationResult r = uniformize(m);
        return py::make_tuple(synthesize(r.log_omega, m.grid).values,
                              r.residual_linf, r.newton_iters);
      },
      py::arg("metric"),
      "Solve for the normalized conformal factor to the round sphere; "
      "returns (log-factor samples, solver residual, Newton iterations).");

  mod.def("spectrum", &spectrum_of<ConformalMetric>, py::arg("metric"),
          py::arg("count"),
          "Lowest Laplace-Beltrami eigenvalues (ascending).");
  mod.def("spectrum", &spectrum_of<PerturbedMetric>, py::arg("metric"),
          py::arg("count"));

  mod.def(
      "suite_report",
      [](int bandlimit, std::uint64_t seed, int members,
         const std::vector<double>& epsilons, double p) {
        SuiteConfig config;
        config.bandlimit = bandlimit;
        config.seed = seed;
        config.ensemble = members;
        config.epsilons = epsilons;
        config.p = p;
        return report_to_json(run_suite(config)).dump(2);
      },
      py::arg("bandlimit") = 24, py::arg("seed") = 1, py::arg("members") = 16,
      py::arg("epsilons") = std::vector<double>{0.04, 0.02, 0.01},
      py::arg("p") = 4.0,
      "Run the full experiment sequence and return the report as a JSON "
      "string.");
}
