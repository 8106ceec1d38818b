#include "dampwave/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "dampwave/dynamics.hpp"
#include "dampwave/geometry.hpp"
#include "dampwave/spectra.hpp"

namespace dampwave {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i)
    v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return v;
}

std::vector<double> time_grid(const ExperimentConfig& e) {
  const int steps = static_cast<int>(std::llround(e.t_max / e.dt));
  std::vector<double> t;
  for (int s = 0; s <= steps; ++s)
    t.push_back(s * e.dt);
  return t;
}

nlohmann::json spectrum_summary(const Spectrum& spec, const SpectralModel& model) {
  int trusted = 0, defective = 0;
  for (const auto& r : spec.records) {
    trusted += r.trusted;
    defective += r.defective;
  }
  return {{"geometry", to_string(model.geometry)},
          {"dim", model.dim},
          {"records", spec.records.size()},
          {"groups", spec.groups.size()},
          {"trusted", trusted},
          {"defective_records", defective},
          {"converged", spec.converged},
          {"trust_radius", spec.trust_radius},
          {"lambda_max", model.lambda_max},
          {"damping_sup", model.damping_sup}};
}

double a_inf_for(const RunConfig& cfg, ReportBundle& bundle) {
  if (cfg.experiment.A_inf)
    return *cfg.experiment.A_inf;
  Stopwatch sw;
  const ACurve curve = estimate_A(make_flow_geometry(cfg), make_damping(cfg), cfg.experiment.T_list,
                                  cfg.experiment.grid);
  bundle.time("estimate_A", sw.seconds());
  bundle.write_text("A_curve.csv", a_curve_csv(curve));
  return curve.A_inf_hat;
}

struct Solved {
  SpectralModel model;
  GeneratorMatrix gen;
  Spectrum spec;
};

Solved solve(const RunConfig& cfg, ReportBundle& bundle) {
  Stopwatch sw;
  Solved s{make_model(cfg), {}, {}};
  bundle.time("build_model", sw.seconds());
  s.gen = assemble_generator(s.model);
  Stopwatch se;
  s.spec = compute_eigenfrequencies(s.gen);
  bundle.time("eigensolve", se.seconds());
  return s;
}

void cmd_spectrum(const RunConfig& cfg, ReportBundle& b) {
  const bool scan = geometry_from_string(cfg.geometry.kind) == GeometryKind::revolution &&
                    !cfg.experiment.modes.empty();
  if (!scan) {
    const Solved s = solve(cfg, b);
    b.write_text("spectrum.csv", spectrum_csv(s.spec));
    b.write_json("spectrum.json", spectrum_summary(s.spec, s.model));
    return;
  }
  CsvTable t({"m", "re_tau", "im_tau_dense", "im_tau", "damped_mass", "candidates"});
  std::vector<double> lx, ly;
  Stopwatch sw;
  for (int m : cfg.experiment.modes) {
    const SpectralModel model = make_model(cfg, m);
    const Spectrum spec = compute_eigenfrequencies(assemble_generator(model));
    const auto w = whispering_mode(model, spec);
    if (!w)
      throw NumericalError("no whispering record found for m = " + std::to_string(m));
    t.row({double(m), w->tau.real(), w->tau_dense.imag(), w->tau.imag(), w->damped_mass,
           double(w->candidates)});
    if (w->tau.imag() > 0.0) {
      lx.push_back(std::log(w->tau.real()));
      ly.push_back(std::log(w->tau.imag()));
    }
  }
  b.time("whispering_scan", sw.seconds());
  b.write_text("whispering.csv", t.str());
  b.write_json("whispering.json", {{"modes", cfg.experiment.modes},
                                   {"loglog_slope", ols_slope(lx, ly).first}});
}

void cmd_resolvent_scan(const RunConfig& cfg, ReportBundle& b) {
  const SpectralModel model = make_model(cfg);
  const ResolventEvaluator ev(model);
  const auto& r = cfg.experiment.rect;
  CsvTable t({"re_tau", "im_tau", "norm_L2", "norm_H"});
  Stopwatch sw;
  for (double im : linspace(r.im_min, r.im_max, r.im_steps))
    for (double re : linspace(r.re_min, r.re_max, r.re_steps)) {
      const cplx tau(re, im);
      t.row({re, im, ev.l2(tau), ev.energy(tau)});
    }
  b.time("scan", sw.seconds());
  b.write_text("resolvent_scan.csv", t.str());
}

void cmd_band(const RunConfig& cfg, ReportBundle& b) {
  Solved s = solve(cfg, b);
  const double A_inf = a_inf_for(cfg, b);
  const double eps = cfg.experiment.eps ? *cfg.experiment.eps : default_strip_eps(s.spec, A_inf);
  const BandReport rep = band_summary(s.spec, s.model, A_inf, eps);
  b.write_text("spectrum.csv", spectrum_csv(s.spec));
  b.write_json("band.json", {{"D_hat", rep.D_hat},
                             {"A_inf_hat", rep.A_inf_hat},
                             {"eps", rep.eps},
                             {"strip_counts", rep.strip_counts},
                             {"strip_total", rep.strip_total},
                             {"high_band_strip_count", rep.high_band_strip_count},
                             {"high_band_min_im", rep.high_band_min_im},
                             {"zero_mode_ok", rep.zero_mode_ok},
                             {"spectrum", spectrum_summary(s.spec, s.model)}});
}

void cmd_clusters(const RunConfig& cfg, ReportBundle& b) {
  Solved s = solve(cfg, b);
  const auto& e = cfg.experiment;
  const ClusterReport rep =
      cluster_partition(s.spec, s.model.geometry, e.alpha, e.k0, e.trusted_only);
  CsvTable t({"k", "lo", "hi", "members"});
  for (const auto* list : {&rep.clusters, &rep.reflected})
    for (const auto& c : *list)
      t.row({double(c.k), c.lo, c.hi, double(c.members.size())});
  b.write_text("clusters.csv", t.str());
  b.write_text("spectrum.csv", spectrum_csv(s.spec));

  const ResolventEvaluator ev(s.model);
  CsvTable g({"k", "re_tau", "im_tau", "norm_L2", "normalized"});
  std::vector<double> consts;
  nlohmann::json per_k = nlohmann::json::array();
  for (int k = static_cast<int>(e.gap_k_lo); k <= static_cast<int>(e.gap_k_hi); ++k) {
    const double re = k + e.alpha / 4.0 + 0.5;
    double worst = 0.0;
    for (double im : linspace(-1.0, 2.0 * s.model.damping_sup + 1.0, e.gap_im_steps)) {
      const cplx tau(re, im);
      const double nrm = ev.l2(tau);
      const double normalized = (1.0 + std::abs(tau)) * nrm;
      worst = std::max(worst, normalized);
      g.row({double(k), re, im, nrm, normalized});
    }
    consts.push_back(worst);
    per_k.push_back({{"k", k}, {"constant", worst}});
  }
  b.write_text("gap_scan.csv", g.str());
  double ratio = 0.0;
  if (!consts.empty())
    ratio = *std::max_element(consts.begin(), consts.end()) /
            *std::min_element(consts.begin(), consts.end());
  b.write_json("clusters.json", {{"maslov_alpha", rep.maslov_alpha},
                                 {"k0", rep.k0},
                                 {"C_fit", rep.C_fit},
                                 {"clusters", rep.clusters.size()},
                                 {"reflected", rep.reflected.size()},
                                 {"outliers", rep.outliers},
                                 {"low_modes", rep.low_modes.size()},
                                 {"gap_constants", per_k},
                                 {"gap_ratio", ratio}});
}

void cmd_control(const RunConfig& cfg, ReportBundle& b) {
  const FlowGeometry geom = make_flow_geometry(cfg);
  Stopwatch sw;
  const ControlVerdict v =
      check_geometric_control(geom, make_damping(cfg), cfg.experiment.T0, cfg.experiment.grid);
  b.time("control", sw.seconds());
  if (v.orbit)
    b.write_text("counterexample_orbit.csv", orbit_csv(*v.orbit));
  b.write_json("control.json", to_json(v));
}

void cmd_averages(const RunConfig& cfg, ReportBundle& b) {
  Stopwatch sw;
  const ACurve c = estimate_A(make_flow_geometry(cfg), make_damping(cfg), cfg.experiment.T_list,
                              cfg.experiment.grid);
  b.time("estimate_A", sw.seconds());
  b.write_text("A_curve.csv", a_curve_csv(c));
  b.write_json("averages.json", {{"A_inf_hat", c.A_inf_hat},
                                 {"gap", c.gap},
                                 {"stabilized", c.stabilized},
                                 {"orbits", c.orbits},
                                 {"T", c.T},
                                 {"A", c.A}});
}

void cmd_poincare(const RunConfig& cfg, ReportBundle& b) {
  const FlowGeometry geom = make_flow_geometry(cfg);
  PhasePoint start;
  double period_guess = kPi;
  nlohmann::json extra = nlohmann::json::object();
  switch (geom.kind) {
  case GeometryKind::torus:
    start = torus_point(0.0, 0.0, 0.0);
    break;
  case GeometryKind::sphere:
    start = sphere_point(0.5 * kPi, 0.0, 0.5 * kPi);
    break;
  case GeometryKind::revolution: {
    const auto& p = *geom.profile;
    start = equator_point(p);
    const double s0 = p.equator();
    period_guess = kPi * p.r(s0);
    extra = {{"equator_s", s0}, {"r0", p.r(s0)}, {"d2r0", p.d2r(s0)}};
    break;
  }
  }
  const GeodesicOrbit orbit = geodesic_flow(geom, start, 1.1 * period_guess, 1e-2);
  if (!orbit.closure)
    throw NumericalError("reference orbit did not close");
  const PoincareData pd = poincare_map(geom, orbit, cfg.experiment.N);
  nlohmann::json j = to_json(pd);
  j["orbit"] = extra;
  b.write_text("orbit.csv", orbit_csv(orbit));
  b.write_json("poincare.json", j);
}

void cmd_expansion(const RunConfig& cfg, ReportBundle& b) {
  Solved s = solve(cfg, b);
  const auto& e = cfg.experiment;
  const auto t = time_grid(e);
  CVector g = random_vector(s.model.dim, cfg.seed);
  g /= g.norm();
  ExpansionResult r;
  nlohmann::json meta;
  Stopwatch sw;
  if (e.expansion == "cluster") {
    const ClusterReport rep = cluster_partition(s.spec, s.model.geometry, e.alpha, e.k0, e.trusted_only);
    const CVector f = sobolev_weighted(s.model, g, e.theta);
    r = cluster_expansion(rep, s.spec, s.gen, s.model, f, t, ClusterOptions{e.theta, e.k_max, 1.0});
    CsvTable tail({"k", "norm"});
    for (std::size_t i = 0; i < r.tail_k.size(); ++i)
      tail.row({double(r.tail_k[i]), r.tail_norms[i]});
    b.write_text("tail_norms.csv", tail.str());
    meta = {{"kind", "cluster"}, {"theta", e.theta}, {"C_fit", rep.C_fit}};
  } else {
    const double A_inf = a_inf_for(cfg, b);
    const double eps = e.eps ? *e.eps : default_strip_eps(s.spec, A_inf);
    r = modal_expansion(s.spec, s.gen, g, t, A_inf - eps, ModalOptions{e.window[0], e.window[1]});
    meta = {{"kind", "modal"}, {"A_inf_hat", A_inf}, {"eps", eps}, {"strip_cutoff", A_inf - eps}};
  }
  b.time("expansion", sw.seconds());
  nlohmann::json j = to_json(r);
  j["expansion"] = meta;
  j["seed"] = cfg.seed;
  j["declared_window"] = e.window;
  b.write_text("expansion.csv", expansion_csv(r));
  b.write_json("expansion.json", j);
}

void cmd_decay(const RunConfig& cfg, ReportBundle& b) {
  Solved s = solve(cfg, b);
  const auto& e = cfg.experiment;
  const double A_inf = a_inf_for(cfg, b);
  const double eps = e.eps ? *e.eps : default_strip_eps(s.spec, A_inf);
  const BandReport band = band_summary(s.spec, s.model, A_inf, eps);
  DecayOptions opts;
  opts.ensemble = e.ensemble;
  opts.seed = cfg.seed;
  opts.window_lo = e.decay_window[0];
  opts.window_hi = e.decay_window[1];
  opts.dt = e.dt;
  Stopwatch sw;
  const DecayFit fit = fit_decay_rate(s.model, s.gen, s.spec, band.D_hat, A_inf, opts);
  b.time("decay_fit", sw.seconds());
  std::vector<std::string> header{"t"};
  for (int j = 0; j < opts.ensemble; ++j)
    header.push_back("E" + std::to_string(j));
  CsvTable t(header);
  for (std::size_t i = 0; i < fit.t.size(); ++i) {
    std::vector<double> row{fit.t[i]};
    for (const auto& series : fit.energies)
      row.push_back(series[i]);
    t.row(row);
  }
  b.write_text("energy.csv", t.str());
  b.write_json("decay.json", to_json(fit));
}

using Handler = std::function<void(const RunConfig&, ReportBundle&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"spectrum", cmd_spectrum},   {"resolvent-scan", cmd_resolvent_scan},
      {"band", cmd_band},           {"clusters", cmd_clusters},
      {"control", cmd_control},     {"averages", cmd_averages},
      {"poincare", cmd_poincare},   {"expansion", cmd_expansion},
      {"decay", cmd_decay}};
  return h;
}

// Reference configurations behind the composite target.
std::vector<std::pair<std::string, RunConfig>> acceptance_suite(const RunConfig& base) {
  std::vector<std::pair<std::string, RunConfig>> suite;
  auto add = [&](const std::string& cmd, const std::function<void(RunConfig&)>& edit) {
    RunConfig c;
    c.seed = base.seed;
    c.threads = base.threads;
    edit(c);
    suite.emplace_back(cmd, c);
  };
  auto disk = [](RunConfig& c) {
    c.geometry.kind = "torus";
    c.damping.kind = "disk_complement";
    c.damping.amplitude = 2.0;
    c.damping.radius = 1.0;
    c.damping.transition = 0.5;
    c.damping.degree = 8;
  };
  auto caps = [](RunConfig& c) {
    c.geometry.kind = "sphere";
    c.damping.kind = "zonal_caps";
    c.damping.amplitude = 0.5;
    c.damping.power = 4;
    c.truncation.lmax = 30;
  };
  auto rev = [](RunConfig& c) {
    c.geometry.kind = "revolution";
    c.geometry.profile.kind = "sin_cubed";
    c.geometry.profile.eps = 0.3;
    c.damping.kind = "caps_profile";
    c.damping.amplitude = 0.5;
    c.damping.north = c.damping.south = 0.3;
  };
  add("spectrum", [](RunConfig& c) { c.truncation.kmax = 4; });
  add("decay", [](RunConfig& c) { c.truncation.kmax = 8; });
  add("averages", disk);
  add("control", disk);
  add("band", [&](RunConfig& c) { disk(c); c.truncation.kmax = 16; });
  add("expansion", [&](RunConfig& c) { disk(c); c.truncation.kmax = 16; });
  add("decay", [&](RunConfig& c) { disk(c); c.truncation.kmax = 12; });
  add("clusters", caps);
  add("expansion", [&](RunConfig& c) {
    caps(c);
    c.experiment.expansion = "cluster";
    c.experiment.trusted_only = false;
    c.experiment.t_max = 1.0;
    c.experiment.dt = 0.5;
  });
  add("control", [&](RunConfig& c) { caps(c); c.experiment.grid = {16, 1, 32}; });
  add("poincare", rev);
  add("spectrum", [&](RunConfig& c) {
    rev(c);
    for (int m = 10; m <= 40; m += 5)
      c.experiment.modes.push_back(m);
  });
  add("resolvent-scan", [](RunConfig& c) { c.truncation.kmax = 8; });
  return suite;
}

} // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"spectrum", "resolvent-scan", "band",
                                              "clusters", "control",        "averages",
                                              "poincare", "expansion",      "decay",
                                              "acceptance"};
  return names;
}

ReportBundle run_command(const std::string& command, const RunConfig& cfg) {
  if (command == "acceptance") {
    ReportBundle bundle(command, cfg.to_json(), cfg.out);
    nlohmann::json runs = nlohmann::json::array();
    int i = 0;
    for (const auto& [cmd, sub] : acceptance_suite(cfg)) {
      RunConfig c = sub;
      const std::string dir = std::to_string(i++) + "_" + cmd;
      c.out = (std::filesystem::path(cfg.out) / dir).string();
      Stopwatch sw;
      ReportBundle part = run_command(cmd, c);
      bundle.time(dir, sw.seconds());
      runs.push_back({{"command", cmd}, {"dir", dir}, {"manifest", part.manifest()["files"]}});
    }
    bundle.write_json("acceptance.json", {{"runs", runs}});
    bundle.finish();
    return bundle;
  }
  const auto& h = handlers();
  const auto it = h.find(command);
  if (it == h.end())
    throw ValidationError("unknown command " + command);
  ReportBundle bundle(command, cfg.to_json(), cfg.out);
  Stopwatch sw;
  it->second(cfg, bundle);
  bundle.time("total", sw.seconds());
  bundle.finish();
  return bundle;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e))
    return 2;
  return 3;
}

} // namespace dampwave
