#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vortsphere/coeff_io.hpp"
#include "vortsphere/diagnostics.hpp"
#include "vortsphere/dynamics.hpp"
#include "vortsphere/elliptic.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rearrange.hpp"
#include "vortsphere/rotation.hpp"
#include "vortsphere/stability.hpp"
#include "vortsphere/transform.hpp"
#include "vortsphere/version.hpp"
#include "vortsphere/waves.hpp"

namespace py = pybind11;
using namespace vortsphere;

namespace {

py::dict orbit_report(const OrbitDistanceReport& r) {
  py::dict d;
  d["distance"] = r.distance;
  d["rotation"] = r.rotation;
  d["axis"] = r.argmin.axis;
  d["angle"] = r.argmin.angle;
  d["e2_coeffs"] = r.e2_coeffs;
  d["class_violation"] = r.class_violation;
  d["converged"] = r.converged;
  return d;
}

RotationGroup group_of(const std::string& name) {
  if (name == "H") return RotationGroup::H;
  if (name == "SO3") return RotationGroup::SO3;
  throw py::value_error("group must be 'H' or 'SO3'");
}

// Values on the transform grid as an (nlat, nlon) array plus the node coordinates.
py::tuple grid_values(const SpectralField& a, std::size_t nlat) {
  const Grid g = nlat == 0 ? transform_grid(a.truncation()) : make_grid(nlat, 2 * nlat);
  const GridField f = synthesize(a, g);
  py::array_t<double> values({g.nlat, g.nlon});
  std::copy(f.values.begin(), f.values.end(), values.mutable_data());
  return py::make_tuple(py::array(py::cast(g.mu_nodes)), py::array(py::cast(g.lon_nodes)), values);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Barotropic vorticity dynamics on the unit sphere";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_RuntimeError);

  py::class_<SpectralField>(m, "SpectralField")
      .def(py::init<std::size_t>(), py::arg("J"))
      .def_property_readonly("J", &SpectralField::truncation)
      .def("__getitem__", [](const SpectralField& a, std::pair<std::size_t, int> jm) {
        if (jm.first > a.truncation() || std::abs(jm.second) > static_cast<int>(jm.first))
          throw py::index_error("degree/order out of range");
        return a(jm.first, jm.second);
      })
      .def("set_real_pair", &SpectralField::set_real_pair, py::arg("j"), py::arg("m"), py::arg("value"))
      .def("coeffs", [](const SpectralField& a) { return py::array(py::cast(a.coeffs())); },
           "Packed coefficients, index j(j+1)+m.")
      .def_static(
          "from_coeffs",
          [](std::size_t J, const std::vector<Complex>& c) {
            SpectralField a(J);
            if (c.size() != a.size()) throw py::value_error("expected (J+1)^2 coefficients");
            a.coeffs() = c;
            return a;
          },
          py::arg("J"), py::arg("coeffs"))
      .def("resized", &SpectralField::resized)
      .def("values", &grid_values, py::arg("nlat") = 0,
           "(mu, lon, values) on a Gauss grid; nlat = 0 uses the transform grid.")
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * double())
      .def(double() * py::self)
      .def("__repr__", [](const SpectralField& a) { return "<SpectralField J=" + std::to_string(a.truncation()) + ">"; });

  m.def("coordinate_field", &coordinate_field, py::arg("J"), py::arg("axis"));
  m.def("linear_field", &linear_field, py::arg("J"), py::arg("q"));
  m.def("unit_x1x3", &unit_x1x3, py::arg("J"));
  m.def("degree_part", &degree_part, py::arg("a"), py::arg("j"));
  m.def(
      "random_field",
      [](std::size_t J, std::size_t jmin, std::size_t jmax, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return random_band_limited(J, jmin, jmax, rng);
      },
      py::arg("J"), py::arg("jmin") = 1, py::arg("jmax") = 8, py::arg("seed") = 1);

  m.def("laplacian", &laplacian);
  m.def("green", &green, py::arg("a"), py::arg("mean_tol") = 1e-10);
  m.def(
      "jacobian", [](const SpectralField& psi, const SpectralField& zeta) {
        return jacobian(psi, zeta, dealiased_grid(std::max(psi.truncation(), zeta.truncation())));
      },
      py::arg("psi"), py::arg("zeta"));
  m.def("inner", &inner);
  m.def("l2_norm", &l2_norm);
  m.def("energy", &energy);
  m.def("moment", &moment);
  m.def(
      "rotate",
      [](const SpectralField& a, const Vec3& axis, double angle) { return rotate(a, RotationSpec(normalized(axis), angle)); },
      py::arg("a"), py::arg("axis"), py::arg("angle"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("J", &SimConfig::J)
      .def_readwrite("Omega", &SimConfig::Omega)
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("t_end", &SimConfig::t_end)
      .def_readwrite("diag_every", &SimConfig::diag_every)
      .def_readwrite("dealias", &SimConfig::dealias)
      .def_readwrite("p_list", &SimConfig::p_list)
      .def_readwrite("casimir_order", &SimConfig::casimir_order)
      .def_readwrite("damping", &SimConfig::damping);

  m.def(
      "simulate",
      [](const SpectralField& zeta0, const SimConfig& cfg) {
        py::list out;
        py::gil_scoped_release release;
        const auto recs = simulate(zeta0, cfg);
        py::gil_scoped_acquire acquire;
        for (const TrajectoryRecord& r : recs) {
          py::dict d;
          d["t"] = r.t;
          d["zeta"] = r.zeta;
          d["energy"] = r.diag.energy;
          d["enstrophy"] = r.diag.enstrophy;
          d["moment"] = r.diag.moment;
          d["casimirs"] = r.diag.casimir_moments;
          out.append(d);
        }
        return out;
      },
      py::arg("zeta0"), py::arg("config"), "Integrates and returns the diagnostic records as dicts.");

  py::class_<RHWaveSpec>(m, "RHWave")
      .def_readonly("degree", &RHWaveSpec::degree)
      .def_readonly("alpha", &RHWaveSpec::alpha)
      .def_readonly("beta", &RHWaveSpec::beta)
      .def_readonly("Omega", &RHWaveSpec::Omega)
      .def("exact", &exact_rh_solution, py::arg("t"));
  m.def("make_rh_wave", &make_rh_wave, py::arg("degree"), py::arg("Y"), py::arg("alpha"), py::arg("Omega") = 0.0,
        py::arg("beta_degree_one") = 0.0);
  m.def("rh_rotation_rate", &rh_rotation_rate, py::arg("degree"), py::arg("alpha"));

  py::class_<SteadyState>(m, "SteadyState")
      .def_readonly("zeta", &SteadyState::zeta)
      .def_readonly("residual", &SteadyState::residual)
      .def_readonly("iterations", &SteadyState::iterations)
      .def_readonly("converged", &SteadyState::converged);
  m.def(
      "solve_fixed_point",
      [](const std::string& nonlinearity, double beta, const Vec3& p, const SpectralField& init, double tol,
         std::size_t max_iter) {
        FixedPointOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        return solve_fixed_point(nonlinearity_preset(nonlinearity), beta, normalized(p), init, opts);
      },
      py::arg("nonlinearity"), py::arg("beta"), py::arg("p"), py::arg("init"), py::arg("tol") = 1e-12,
      py::arg("max_iter") = 10000);
  m.def("zonality_defect", &zonality_defect, py::arg("zeta"), py::arg("axis"));

  m.def("lp_distance", &lp_distance, py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
  m.def(
      "class_distance",
      [](const SpectralField& a, const SpectralField& b, double p) {
        const std::size_t J = std::max(a.truncation(), b.truncation());
        const Grid g = class_grid(J);
        return class_distance(synthesize(a.resized(J), g), synthesize(b.resized(J), g), p);
      },
      py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
  m.def(
      "orbit_distance",
      [](const SpectralField& w, const SpectralField& zeta, const std::string& group, double p) {
        return orbit_report(orbit_distance(w, zeta, group_of(group), p));
      },
      py::arg("w"), py::arg("zeta"), py::arg("group") = "H", py::arg("p") = 2.0);
  m.def(
      "e2_orbit_distance",
      [](const SpectralField& w, const SpectralField& zeta, double p, double kappa) {
        E2SearchOptions opts;
        opts.kappa = kappa;
        return orbit_report(e2_orbit_distance(w, zeta, p, opts));
      },
      py::arg("w"), py::arg("zeta"), py::arg("p") = 2.0, py::arg("kappa") = 10.0);
  m.def(
      "flow_perturbation", [](const SpectralField& zeta, const SpectralField& chi, double eps) {
        return flow_perturbation(zeta, chi, eps);
      },
      py::arg("zeta"), py::arg("chi"), py::arg("eps"));
  m.def(
      "extremality_probe",
      [](const SpectralField& zeta, const std::string& mode, std::size_t samples, double eps, std::uint64_t seed) {
        if (mode != "min" && mode != "max") throw py::value_error("mode must be 'min' or 'max'");
        ProbeOptions opts;
        opts.seed = seed;
        const ProbeReport r = extremality_probe(zeta, mode == "min" ? ProbeMode::min : ProbeMode::max, samples, eps, opts);
        py::dict d;
        d["samples"] = r.samples;
        d["skipped"] = r.skipped;
        d["violations"] = r.violations;
        d["tolerance"] = r.tolerance;
        d["worst_signed_change"] = r.worst_signed_change;
        d["energy_changes"] = r.energy_changes;
        d["passed"] = r.passed();
        return d;
      },
      py::arg("zeta"), py::arg("mode"), py::arg("samples") = 64, py::arg("eps") = 1e-2, py::arg("seed") = 1);

  m.def(
      "run_stability",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = experiment_config_from_json(config_json);
        StabilityTimeSeries s;
        {
          py::gil_scoped_release release;
          s = run_stability_experiment(cfg);
        }
        py::dict d;
        d["columns"] = s.columns;
        std::vector<double> t;
        std::vector<std::vector<double>> dist;
        for (const StabilityRecord& r : s.records) {
          t.push_back(r.t);
          dist.push_back(r.distances);
        }
        d["t"] = t;
        d["distances"] = dist;
        d["initial_offset"] = s.initial_offset;
        d["blew_up"] = s.blew_up;
        d["failure"] = s.failure;
        return d;
      },
      py::arg("config_json"), "Runs a stability experiment from its JSON configuration.");
  m.def("config_schema", &experiment_config_schema);

  m.def("save_coeffs", &save_coeffs, py::arg("path"), py::arg("a"));
  m.def("load_coeffs", &load_coeffs, py::arg("path"));
}
