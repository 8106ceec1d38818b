#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

#include "dampwave/commands.hpp"
#include "dampwave/config.hpp"
#include "dampwave/dynamics.hpp"
#include "dampwave/geometry.hpp"
#include "dampwave/spectra.hpp"

namespace py = pybind11;
using namespace dampwave;

namespace {

// json -> python via the json module; keeps the binding free of a converter
py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<cplx> taus(const Spectrum& s, bool trusted_only) {
  std::vector<cplx> out;
  for (const auto& r : s.records)
    if (!trusted_only || r.trusted)
      out.push_back(r.tau);
  return out;
}

} // namespace

PYBIND11_MODULE(_dampwave, m) {
  m.doc() = "Damped wave spectra, geodesic averages and propagators on model manifolds";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::enum_<GeometryKind>(m, "GeometryKind")
      .value("torus", GeometryKind::torus)
      .value("sphere", GeometryKind::sphere)
      .value("revolution", GeometryKind::revolution);

  py::class_<DampingSpec>(m, "DampingSpec")
      .def_static("constant", &DampingSpec::constant, py::arg("value"))
      .def_static("zero", &DampingSpec::zero)
      .def_static("trig",
                  [](const std::vector<std::tuple<int, int, cplx>>& terms) {
                    std::vector<TrigTerm> t;
                    for (const auto& [k1, k2, c] : terms)
                      t.push_back({k1, k2, c});
                    return DampingSpec::trig(std::move(t));
                  },
                  py::arg("terms"))
      .def_static("zonal", &DampingSpec::zonal, py::arg("cos_powers"))
      .def_static("zonal_caps", &DampingSpec::zonal_caps, py::arg("amplitude"), py::arg("power"))
      .def_static("caps_profile", &DampingSpec::caps_profile, py::arg("amplitude"), py::arg("north"),
                  py::arg("south"))
      .def_static("disk_complement", &DampingSpec::disk_complement, py::arg("amplitude"),
                  py::arg("radius"), py::arg("transition"), py::arg("degree"), py::arg("grid") = 256)
      .def_property_readonly("kind", &DampingSpec::kind_name)
      .def("at_torus", &DampingSpec::at_torus)
      .def("at_sphere", &DampingSpec::at_sphere)
      .def("at_profile", &DampingSpec::at_profile)
      .def("to_dict", [](const DampingSpec& d) { return to_py(d.to_json()); });

  py::class_<RevolutionProfile>(m, "RevolutionProfile")
      .def_static("round_sphere", &RevolutionProfile::round_sphere, py::arg("radius") = 1.0)
      .def_static("sin_cubed", &RevolutionProfile::sin_cubed, py::arg("eps"))
      .def_static("spheroid", &RevolutionProfile::spheroid, py::arg("equatorial"), py::arg("polar"))
      .def_static("tabulated", &RevolutionProfile::tabulated, py::arg("length"), py::arg("samples"))
      .def_readonly("name", &RevolutionProfile::name)
      .def_readonly("length", &RevolutionProfile::length)
      .def("r", [](const RevolutionProfile& p, double s) { return p.r(s); })
      .def("equator", &RevolutionProfile::equator);

  py::class_<SpectralModel>(m, "SpectralModel")
      .def_readonly("geometry", &SpectralModel::geometry)
      .def_readonly("dim", &SpectralModel::dim)
      .def_readonly("K", &SpectralModel::K)
      .def_readonly("A", &SpectralModel::A)
      .def_readonly("lambda_max", &SpectralModel::lambda_max)
      .def_readonly("trust_radius", &SpectralModel::trust_radius)
      .def_readonly("damping_sup", &SpectralModel::damping_sup)
      .def_readonly("basis_labels", &SpectralModel::basis_labels)
      .def_readonly("constant_coeffs", &SpectralModel::constant_coeffs);

  m.def("build_torus_model", &build_torus_model, py::arg("kmax"), py::arg("damping"));
  m.def("build_sphere_model",
        [](int lmax, const DampingSpec& a) { return build_sphere_model(lmax, a); }, py::arg("lmax"),
        py::arg("damping"));
  m.def("build_revolution_model", &build_revolution_model, py::arg("profile"), py::arg("m"),
        py::arg("damping"), py::arg("n"));

  py::class_<GeneratorMatrix>(m, "GeneratorMatrix")
      .def_readonly("G", &GeneratorMatrix::G)
      .def_readonly("dim", &GeneratorMatrix::dim);
  m.def("assemble_generator", &assemble_generator, py::arg("model"));

  py::class_<EigenRecord>(m, "EigenRecord")
      .def_readonly("tau", &EigenRecord::tau)
      .def_readonly("right", &EigenRecord::right)
      .def_readonly("residual", &EigenRecord::residual)
      .def_readonly("group_id", &EigenRecord::group_id)
      .def_readonly("trusted", &EigenRecord::trusted)
      .def_readonly("defective", &EigenRecord::defective)
      .def_readonly("cluster_k", &EigenRecord::cluster_k);

  py::class_<Spectrum>(m, "Spectrum")
      .def_readonly("records", &Spectrum::records)
      .def_readonly("groups", &Spectrum::groups)
      .def_readonly("trust_radius", &Spectrum::trust_radius)
      .def_readonly("converged", &Spectrum::converged)
      .def("taus", &taus, py::arg("trusted_only") = true)
      .def("csv", &spectrum_csv);

  m.def("compute_eigenfrequencies",
        [](const GeneratorMatrix& g) { return compute_eigenfrequencies(g); }, py::arg("generator"));
  m.def("eigenfrequencies",
        [](const SpectralModel& model) { return compute_eigenfrequencies(assemble_generator(model)); },
        py::arg("model"), "Assemble the generator and solve in one call.");

  py::enum_<NormSpace>(m, "NormSpace").value("L2", NormSpace::L2).value("H", NormSpace::H);
  m.def("resolvent_norm",
        [](const SpectralModel& model, cplx tau, NormSpace space) { return resolvent_norm(model, tau, space); },
        py::arg("model"), py::arg("tau"), py::arg("space") = NormSpace::L2);

  py::class_<ClusterReport>(m, "ClusterReport")
      .def_readonly("C_fit", &ClusterReport::C_fit)
      .def_readonly("outliers", &ClusterReport::outliers)
      .def_property_readonly("cluster_sizes", [](const ClusterReport& r) {
        std::vector<std::pair<int, std::size_t>> out;
        for (const auto& c : r.clusters)
          out.emplace_back(c.k, c.members.size());
        return out;
      });
  m.def("cluster_partition", &cluster_partition, py::arg("spectrum"), py::arg("geometry"),
        py::arg("alpha") = 2, py::arg("k0") = 1, py::arg("trusted_only") = true);

  // geometry
  py::class_<FlowGeometry>(m, "FlowGeometry")
      .def_static("torus", &FlowGeometry::torus)
      .def_static("sphere", &FlowGeometry::sphere)
      .def_static("revolution", &FlowGeometry::revolution, py::arg("profile"));
  py::class_<PhasePoint>(m, "PhasePoint")
      .def_readonly("x", &PhasePoint::x)
      .def_readonly("xi", &PhasePoint::xi);
  m.def("torus_point", &torus_point, py::arg("x"), py::arg("y"), py::arg("beta"));
  m.def("sphere_point", &sphere_point, py::arg("theta"), py::arg("phi"), py::arg("beta"));
  m.def("revolution_point", &revolution_point, py::arg("profile"), py::arg("s"), py::arg("beta"));
  m.def("equator_point", &equator_point, py::arg("profile"));

  py::class_<GeodesicOrbit>(m, "GeodesicOrbit")
      .def_readonly("t", &GeodesicOrbit::t)
      .def_readonly("samples", &GeodesicOrbit::samples)
      .def_readonly("max_p_drift", &GeodesicOrbit::max_p_drift)
      .def_property_readonly("period", [](const GeodesicOrbit& o) -> std::optional<double> {
        return o.closure ? std::optional<double>(o.closure->period) : std::nullopt;
      });
  m.def("geodesic_flow", &geodesic_flow, py::arg("geometry"), py::arg("start"), py::arg("T"),
        py::arg("step") = 1e-2);
  m.def("trajectory_average", &trajectory_average, py::arg("orbit"), py::arg("geometry"),
        py::arg("damping"), py::arg("T"));

  py::class_<SamplingGrid>(m, "SamplingGrid")
      .def(py::init<int, int, int>(), py::arg("n1") = 64, py::arg("n2") = 64, py::arg("directions") = 128);
  py::class_<ACurve>(m, "ACurve")
      .def_readonly("T", &ACurve::T)
      .def_readonly("A", &ACurve::A)
      .def_readonly("A_inf_hat", &ACurve::A_inf_hat)
      .def_readonly("gap", &ACurve::gap)
      .def_readonly("stabilized", &ACurve::stabilized);
  m.def("estimate_A", &estimate_A, py::arg("geometry"), py::arg("damping"), py::arg("T_list"),
        py::arg("grid") = SamplingGrid{});
  m.def("check_geometric_control",
        [](const FlowGeometry& g, const DampingSpec& a, double T0, SamplingGrid grid) {
          return to_py(to_json(check_geometric_control(g, a, T0, grid)));
        },
        py::arg("geometry"), py::arg("damping"), py::arg("T0"), py::arg("grid") = SamplingGrid{});
  m.def("poincare_map",
        [](const FlowGeometry& g, const GeodesicOrbit& o, int N) { return to_py(to_json(poincare_map(g, o, N))); },
        py::arg("geometry"), py::arg("orbit"), py::arg("N") = 4);

  // dynamics
  py::enum_<PropagationMethod>(m, "PropagationMethod")
      .value("expm", PropagationMethod::expm)
      .value("stepper", PropagationMethod::stepper);
  py::class_<FieldState>(m, "FieldState")
      .def_readonly("t", &FieldState::t)
      .def_readonly("u0", &FieldState::u0)
      .def_readonly("u1", &FieldState::u1);
  m.def("propagate",
        [](const GeneratorMatrix& g, const CVector& f, const std::vector<double>& t, PropagationMethod method) {
          return propagate(g, f, t, method);
        },
        py::arg("generator"), py::arg("f"), py::arg("t_grid"), py::arg("method") = PropagationMethod::expm);
  m.def("energy", &energy, py::arg("state"), py::arg("model"));
  m.def("zero_mode", &zero_mode, py::arg("f"), py::arg("model"));
  m.def("modal_expansion",
        [](const Spectrum& s, const GeneratorMatrix& g, const CVector& f, const std::vector<double>& t,
           double cutoff, double lo, double hi) {
          return to_py(to_json(modal_expansion(s, g, f, t, cutoff, ModalOptions{lo, hi})));
        },
        py::arg("spectrum"), py::arg("generator"), py::arg("f"), py::arg("t_grid"), py::arg("strip_cutoff"),
        py::arg("window_lo") = 5.0, py::arg("window_hi") = 20.0);
  m.def("fit_decay_rate",
        [](const SpectralModel& model, const GeneratorMatrix& g, const Spectrum& s, double D, double A,
           int ensemble, std::uint64_t seed) {
          DecayOptions o;
          o.ensemble = ensemble;
          o.seed = seed;
          return to_py(to_json(fit_decay_rate(model, g, s, D, A, o)));
        },
        py::arg("model"), py::arg("generator"), py::arg("spectrum"), py::arg("D_hat"), py::arg("A_inf_hat"),
        py::arg("ensemble") = 10, py::arg("seed") = 20240601);
  m.def("random_vector", &random_vector, py::arg("n"), py::arg("seed"));

  // commands
  m.def("command_names", &command_names);
  m.def("run_command",
        [](const std::string& command, const std::string& yaml, const std::string& out) {
          RunConfig cfg = parse_config(yaml);
          if (!out.empty())
            cfg.out = out;
          return to_py(run_command(command, cfg).manifest());
        },
        py::arg("command"), py::arg("config_yaml") = "", py::arg("out") = "",
        "Run one experiment from a YAML config string; returns the manifest.");
}
