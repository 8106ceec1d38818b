#include "dampwave/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace dampwave {

namespace {

class Section {
public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ValidationError(path_ + ": expected a mapping");
  }

  template <class T> void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull() || !node_[key])
      return;
    try {
      out = node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      throw ValidationError(path_ + "." + key + ": malformed value");
    }
  }

  template <class T> void get(const std::string& key, std::optional<T>& out) {
    T value{};
    seen_.insert(key);
    if (!node_ || node_.IsNull() || !node_[key])
      return;
    try {
      value = node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      throw ValidationError(path_ + "." + key + ": malformed value");
    }
    out = value;
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), path_ + "." + key);
  }

  void finish() const {
    if (!node_ || node_.IsNull())
      return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key))
        throw ValidationError("unknown configuration key " + path_ + "." + key);
    }
  }

private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

} // namespace

nlohmann::json RunConfig::to_json() const {
  const auto& p = geometry.profile;
  const auto& d = damping;
  const auto& t = truncation;
  const auto& e = experiment;
  nlohmann::json j;
  j["geometry"] = {{"kind", geometry.kind},
                   {"profile",
                    {{"kind", p.kind},
                     {"radius", p.radius},
                     {"eps", p.eps},
                     {"equatorial", p.equatorial},
                     {"polar", p.polar},
                     {"length", p.length},
                     {"samples", p.samples}}}};
  j["damping"] = {{"kind", d.kind},           {"value", d.value},
                  {"terms", d.terms},         {"cos_powers", d.cos_powers},
                  {"amplitude", d.amplitude}, {"power", d.power},
                  {"north", d.north},         {"south", d.south},
                  {"radius", d.radius},       {"transition", d.transition},
                  {"degree", d.degree},       {"grid", d.grid},
                  {"check_resolution", d.check_resolution}};
  j["truncation"] = {{"kmax", t.kmax},
                     {"lmax", t.lmax},
                     {"n", t.n},
                     {"m", t.m},
                     {"trust_radius", t.trust_radius ? nlohmann::json(*t.trust_radius) : nlohmann::json()},
                     {"n_theta", t.n_theta},
                     {"n_phi", t.n_phi}};
  j["experiment"] = {
      {"rect",
       {{"re_min", e.rect.re_min},
        {"re_max", e.rect.re_max},
        {"re_steps", e.rect.re_steps},
        {"im_min", e.rect.im_min},
        {"im_max", e.rect.im_max},
        {"im_steps", e.rect.im_steps}}},
      {"T_list", e.T_list},
      {"grid", {{"n1", e.grid.n1}, {"n2", e.grid.n2}, {"directions", e.grid.directions}}},
      {"T0", e.T0},
      {"N", e.N},
      {"t_max", e.t_max},
      {"dt", e.dt},
      {"window", e.window},
      {"decay_window", e.decay_window},
      {"ensemble", e.ensemble},
      {"eps", e.eps ? nlohmann::json(*e.eps) : nlohmann::json()},
      {"A_inf", e.A_inf ? nlohmann::json(*e.A_inf) : nlohmann::json()},
      {"alpha", e.alpha},
      {"k0", e.k0},
      {"theta", e.theta},
      {"k_max", e.k_max},
      {"trusted_only", e.trusted_only},
      {"expansion", e.expansion},
      {"modes", e.modes},
      {"gap_k_lo", e.gap_k_lo},
      {"gap_k_hi", e.gap_k_hi},
      {"gap_im_steps", e.gap_im_steps}};
  j["output"] = {{"dir", out}};
  j["seed"] = seed;
  j["threads"] = threads;
  return j;
}

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("configuration is not valid YAML: ") + e.what());
  }
  RunConfig c;
  Section top(root, "config");

  Section g = top.child("geometry");
  g.get("kind", c.geometry.kind);
  Section p = g.child("profile");
  p.get("kind", c.geometry.profile.kind);
  p.get("radius", c.geometry.profile.radius);
  p.get("eps", c.geometry.profile.eps);
  p.get("equatorial", c.geometry.profile.equatorial);
  p.get("polar", c.geometry.profile.polar);
  p.get("length", c.geometry.profile.length);
  p.get("samples", c.geometry.profile.samples);
  p.finish();
  g.finish();

  Section d = top.child("damping");
  d.get("kind", c.damping.kind);
  d.get("value", c.damping.value);
  d.get("terms", c.damping.terms);
  d.get("cos_powers", c.damping.cos_powers);
  d.get("amplitude", c.damping.amplitude);
  d.get("power", c.damping.power);
  d.get("north", c.damping.north);
  d.get("south", c.damping.south);
  d.get("radius", c.damping.radius);
  d.get("transition", c.damping.transition);
  d.get("degree", c.damping.degree);
  d.get("grid", c.damping.grid);
  d.get("check_resolution", c.damping.check_resolution);
  d.finish();

  Section t = top.child("truncation");
  t.get("kmax", c.truncation.kmax);
  t.get("lmax", c.truncation.lmax);
  t.get("n", c.truncation.n);
  t.get("m", c.truncation.m);
  t.get("trust_radius", c.truncation.trust_radius);
  t.get("n_theta", c.truncation.n_theta);
  t.get("n_phi", c.truncation.n_phi);
  t.finish();

  Section e = top.child("experiment");
  Section r = e.child("rect");
  r.get("re_min", c.experiment.rect.re_min);
  r.get("re_max", c.experiment.rect.re_max);
  r.get("re_steps", c.experiment.rect.re_steps);
  r.get("im_min", c.experiment.rect.im_min);
  r.get("im_max", c.experiment.rect.im_max);
  r.get("im_steps", c.experiment.rect.im_steps);
  r.finish();
  e.get("T_list", c.experiment.T_list);
  Section gr = e.child("grid");
  gr.get("n1", c.experiment.grid.n1);
  gr.get("n2", c.experiment.grid.n2);
  gr.get("directions", c.experiment.grid.directions);
  gr.finish();
  e.get("T0", c.experiment.T0);
  e.get("N", c.experiment.N);
  e.get("t_max", c.experiment.t_max);
  e.get("dt", c.experiment.dt);
  e.get("window", c.experiment.window);
  e.get("decay_window", c.experiment.decay_window);
  e.get("ensemble", c.experiment.ensemble);
  e.get("eps", c.experiment.eps);
  e.get("A_inf", c.experiment.A_inf);
  e.get("alpha", c.experiment.alpha);
  e.get("k0", c.experiment.k0);
  e.get("theta", c.experiment.theta);
  e.get("k_max", c.experiment.k_max);
  e.get("trusted_only", c.experiment.trusted_only);
  e.get("expansion", c.experiment.expansion);
  e.get("modes", c.experiment.modes);
  e.get("gap_k_lo", c.experiment.gap_k_lo);
  e.get("gap_k_hi", c.experiment.gap_k_hi);
  e.get("gap_im_steps", c.experiment.gap_im_steps);
  e.finish();

  Section o = top.child("output");
  o.get("dir", c.out);
  o.finish();
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  top.finish();

  if (c.experiment.window.size() != 2 || c.experiment.decay_window.size() != 2)
    throw ValidationError("windows must have exactly two entries");
  if (c.experiment.rect.re_steps < 0 || c.experiment.rect.im_steps < 0)
    throw ValidationError("scan step counts must be nonnegative");
  if (!(c.experiment.dt > 0.0) || !(c.experiment.t_max >= 0.0))
    throw ValidationError("time grid needs dt > 0 and t_max >= 0");
  if (c.threads < 1)
    throw ValidationError("threads must be >= 1");
  for (const auto& term : c.damping.terms)
    if (term.size() != 4)
      throw ValidationError("damping terms are [k1, k2, re, im]");
  if (c.experiment.expansion != "modal" && c.experiment.expansion != "cluster")
    throw ValidationError("experiment.expansion must be modal or cluster");
  geometry_from_string(c.geometry.kind);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw ValidationError("cannot read configuration " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

DampingSpec make_damping(const RunConfig& cfg) {
  const auto& d = cfg.damping;
  DampingSpec spec;
  if (d.kind == "constant") {
    spec = DampingSpec::constant(d.value);
  } else if (d.kind == "zero") {
    spec = DampingSpec::zero();
  } else if (d.kind == "trig") {
    std::vector<TrigTerm> terms;
    for (const auto& t : d.terms)
      terms.push_back({static_cast<int>(t[0]), static_cast<int>(t[1]), cplx(t[2], t[3])});
    spec = DampingSpec::trig(std::move(terms));
  } else if (d.kind == "zonal") {
    spec = DampingSpec::zonal(d.cos_powers);
  } else if (d.kind == "zonal_caps") {
    spec = DampingSpec::zonal_caps(d.amplitude, d.power);
  } else if (d.kind == "caps_profile") {
    spec = DampingSpec::caps_profile(d.amplitude, d.north, d.south);
  } else if (d.kind == "disk_complement") {
    spec = DampingSpec::disk_complement(d.amplitude, d.radius, d.transition, d.degree, d.grid);
  } else {
    throw ValidationError("unknown damping kind " + d.kind);
  }
  spec.set_check_resolution(d.check_resolution);
  return spec;
}

RevolutionProfile make_profile(const RunConfig& cfg) {
  const auto& p = cfg.geometry.profile;
  if (p.kind == "round_sphere")
    return RevolutionProfile::round_sphere(p.radius);
  if (p.kind == "sin_cubed")
    return RevolutionProfile::sin_cubed(p.eps);
  if (p.kind == "spheroid")
    return RevolutionProfile::spheroid(p.equatorial, p.polar);
  if (p.kind == "tabulated")
    return RevolutionProfile::tabulated(p.length, p.samples);
  throw ValidationError("unknown profile kind " + p.kind);
}

FlowGeometry make_flow_geometry(const RunConfig& cfg) {
  switch (geometry_from_string(cfg.geometry.kind)) {
  case GeometryKind::torus:
    return FlowGeometry::torus();
  case GeometryKind::sphere:
    return FlowGeometry::sphere();
  case GeometryKind::revolution:
    return FlowGeometry::revolution(make_profile(cfg));
  }
  throw ValidationError("unknown geometry");
}

SpectralModel make_model(const RunConfig& cfg, int revolution_mode) {
  const DampingSpec a = make_damping(cfg);
  SpectralModel model;
  switch (geometry_from_string(cfg.geometry.kind)) {
  case GeometryKind::torus:
    model = build_torus_model(cfg.truncation.kmax, a);
    break;
  case GeometryKind::sphere:
    model = build_sphere_model(cfg.truncation.lmax, a,
                               SphereQuadrature{cfg.truncation.n_theta, cfg.truncation.n_phi});
    break;
  case GeometryKind::revolution:
    model = build_revolution_model(make_profile(cfg), revolution_mode, a, cfg.truncation.n);
    break;
  }
  if (cfg.truncation.trust_radius) {
    if (!(*cfg.truncation.trust_radius > 0.0))
      throw ValidationError("trust_radius override must be positive");
    model.trust_radius = *cfg.truncation.trust_radius;
  }
  return model;
}

SpectralModel make_model(const RunConfig& cfg) { return make_model(cfg, cfg.truncation.m); }

} // namespace dampwave
