// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dampwave/dynamics.hpp"
#include "dampwave/geometry.hpp"
#include "dampwave/report.hpp"
#include "dampwave/runtime.hpp"
#include "dampwave/spectra.hpp"
#include "fixtures.hpp"

using namespace dampwave;

namespace {

// pinned tolerances
constexpr double kC1Tol = 1e-8;
constexpr double kC1Seconds = 10.0;
constexpr double kStripTol = 1e-7;
constexpr double kReflectTol = 1e-6;
constexpr double kZeroTol = 1e-10;
constexpr double kSlopeMargin = 0.05;
constexpr double kLongSeconds = 300.0;
constexpr double kLebeauRel = 0.15;
constexpr double kClusterC = 0.5;
constexpr double kGapRatio = 3.0;
constexpr double kClusterRel = 1e-3;
constexpr double kTailSlope = -1.2;
constexpr double kWhisperSlope = -3.0;
constexpr double kAngleTol = 1e-6;
constexpr double kDetTol = 1e-8;
constexpr double kBoundFactor = 10.0;
constexpr double kSemiclassicalTol = 1e-12;
constexpr double kPropagationRel = 1e-7;
constexpr double kEnergySlack = 1e-10;

int failures = 0;
std::vector<int> selected; // empty: run everything

void report(int id, bool pass, const std::string& detail) {
  std::printf("C%-2d %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass)
    ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void guarded(int id, const std::function<void()>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end())
    return;
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

struct Solved {
  SpectralModel model;
  GeneratorMatrix gen;
  Spectrum spec;
  double seconds = 0.0;
};

Solved solve(SpectralModel model) {
  Stopwatch sw;
  Solved s{std::move(model), {}, {}};
  s.gen = assemble_generator(s.model);
  s.spec = compute_eigenfrequencies(s.gen);
  s.seconds = sw.seconds();
  return s;
}

std::vector<double> grid(double lo, double hi, double dt) {
  std::vector<double> t;
  const int n = static_cast<int>(std::llround((hi - lo) / dt));
  for (int i = 0; i <= n; ++i)
    t.push_back(lo + i * dt);
  return t;
}

const std::vector<double> kTList{5, 10, 20, 40, 80, 160};

double torus_A_inf(const DampingSpec& a) {
  return estimate_A(FlowGeometry::torus(), a, kTList, SamplingGrid{64, 64, 128}).A_inf_hat;
}

// greedy multiset matching of trusted tau against -conj(tau)
double reflection_mismatch(const Spectrum& spec) {
  std::vector<cplx> t;
  for (const auto& r : spec.records)
    if (r.trusted)
      t.push_back(r.tau);
  std::vector<bool> used(t.size(), false);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const cplx target = -std::conj(t[i]);
    double best = std::numeric_limits<double>::infinity();
    std::size_t bj = 0;
    for (std::size_t j = 0; j < t.size(); ++j)
      if (!used[j] && std::abs(t[j] - target) < best) {
        best = std::abs(t[j] - target);
        bj = j;
      }
    if (!std::isfinite(best))
      return best;
    used[bj] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

// sup of f over the upper half of [lo, hi] divided by its sup over the lower half
double growth_ratio(double lo, double hi, int n, const std::function<double(double)>& f) {
  double a = 0.0, b = 0.0;
  const double mid = 0.5 * (lo + hi);
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double v = f(x);
    (x <= mid ? a : b) = std::max(x <= mid ? a : b, v);
  }
  return b / a;
}

// ---------------------------------------------------------------------------

void c1() {
  Stopwatch sw;
  const double c = 0.1;
  Solved s = solve(build_torus_model(4, DampingSpec::constant(c)));
  const double secs = sw.seconds();
  std::vector<cplx> oracle{0.0, cplx(0.0, 2 * c)};
  for (int k1 = -4; k1 <= 4; ++k1)
    for (int k2 = -4; k2 <= 4; ++k2) {
      const double lambda = k1 * k1 + k2 * k2;
      if (lambda == 0)
        continue;
      const double w = std::sqrt(lambda - c * c);
      oracle.push_back(cplx(w, c));
      oracle.push_back(cplx(-w, c));
    }
  double worst = 0.0;
  int trusted = 0;
  for (const auto& r : s.spec.records) {
    if (!r.trusted)
      continue;
    ++trusted;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : oracle)
      d = std::min(d, std::abs(r.tau - o));
    worst = std::max(worst, d);
  }
  report(1, trusted > 0 && worst <= kC1Tol && secs < kC1Seconds,
         "trusted=" + std::to_string(trusted) + fmt(" max_dist=%.3e", worst) +
             fmt(" runtime=%.2fs", secs));
}

void c2(const std::vector<fixtures::Named>& models) {
  bool ok = models.size() >= 6;
  double worst_strip = 0.0, worst_reflect = 0.0;
  std::string bad;
  for (const auto& m : models) {
    Solved s = solve(m.model);
    const double upper = 2.0 * s.model.damping_sup;
    for (const auto& r : s.spec.records) {
      if (!r.trusted)
        continue;
      const double im = r.tau.imag();
      const double v = std::max(-im, im - upper);
      worst_strip = std::max(worst_strip, v);
      if (v > kStripTol) {
        ok = false;
        bad = m.name;
      }
    }
    const double mm = reflection_mismatch(s.spec);
    worst_reflect = std::max(worst_reflect, mm);
    if (!(mm <= kReflectTol)) {
      ok = false;
      bad = m.name;
    }
  }
  report(2, ok,
         "configs=" + std::to_string(models.size()) + fmt(" strip_excess=%.3e", worst_strip) +
             fmt(" reflection=%.3e", worst_reflect) + (bad.empty() ? "" : " first_bad=" + bad));
}

void c3(const std::vector<fixtures::Named>& models) {
  bool ok = true;
  double worst = 0.0;
  int checked = 0;
  for (const auto& m : models) {
    if (!m.model.has_constant())
      continue;
    Solved s = solve(m.model);
    const BandReport band = band_summary(s.spec, s.model, 0.0, 0.0);
    if (!band.zero_mode_ok) {
      ok = false;
      continue;
    }
    const auto& group = s.spec.groups[s.spec.records[band.zero_mode_record].group_id];
    const ModeTerm pi0 = spectral_projector(s.spec, s.gen, group);
    for (int j = 0; j < 3; ++j) {
      const CVector f = random_vector(s.model.dim, 7000 + j);
      CVector X = CVector::Zero(2 * s.model.dim);
      X.tail(s.model.dim) = f;
      const CVector proj = pi0.apply(X, 0.0).head(s.model.dim);
      const CVector formula = zero_mode(f, s.model) * s.model.constant_coeffs;
      const double err = (proj - formula).norm() / std::max(1.0, f.norm());
      worst = std::max(worst, err);
    }
    ++checked;
  }
  ok = ok && checked >= 3 && worst <= kZeroTol;
  report(3, ok, "models=" + std::to_string(checked) + fmt(" projector_vs_formula=%.3e", worst));
}

void c4(const Solved& s, double A_inf) {
  Stopwatch sw;
  const double eps = default_strip_eps(s.spec, A_inf);
  const double cutoff = A_inf - eps;
  const auto t = grid(0.0, 20.0, 0.25);
  double worst = -std::numeric_limits<double>::infinity();
  int points = 0;
  for (int j = 0; j < 10; ++j) {
    CVector f = random_vector(s.model.dim, 20240601 + j);
    f /= f.norm();
    const ExpansionResult r = modal_expansion(s.spec, s.gen, f, t, cutoff, ModalOptions{5.0, 20.0});
    worst = std::max(worst, r.fitted_slope);
    points = r.fit_points;
  }
  const double secs = sw.seconds() + s.seconds;
  report(4, worst <= -cutoff + kSlopeMargin && secs < kLongSeconds,
         fmt("A_inf_hat=%.4f", A_inf) + fmt(" eps=%.4f", eps) + fmt(" worst_slope=%.4f", worst) +
             fmt(" bound=%.4f", -cutoff + kSlopeMargin) + " fit_points=" + std::to_string(points) +
             fmt(" runtime=%.1fs", secs));
}

double lebeau_ratio(const Solved& s, double A_inf, double& secs, std::string& info) {
  Stopwatch sw;
  const double eps = default_strip_eps(s.spec, A_inf);
  const BandReport band = band_summary(s.spec, s.model, A_inf, eps);
  const DecayFit fit = fit_decay_rate(s.model, s.gen, s.spec, band.D_hat, A_inf);
  secs = sw.seconds() + s.seconds;
  info = fmt("D_hat=%.4f", band.D_hat) + fmt(" A_inf=%.4f", A_inf) + fmt(" alpha_hat=%.4f", fit.alpha_hat) +
         fmt(" ratio=%.4f", fit.ratio) + fmt(" %.1fs", secs);
  return fit.ratio;
}

void c5(const Solved& constant, double A_const, const Solved& disk, double A_disk) {
  double t1 = 0.0, t2 = 0.0;
  std::string i1, i2;
  const double r1 = lebeau_ratio(constant, A_const, t1, i1);
  const double r2 = lebeau_ratio(disk, A_disk, t2, i2);
  const bool ok = std::abs(r1 - 1.0) <= kLebeauRel && std::abs(r2 - 1.0) <= kLebeauRel &&
                  t1 < kLongSeconds && t2 < kLongSeconds;
  report(5, ok, "const[" + i1 + "] disk[" + i2 + "]");
}

void c6(Solved& s) {
  double C = 0.0;
  int n = 0;
  for (const auto& r : s.spec.records) {
    const double re = r.tau.real();
    if (!r.trusted || re < 5.0)
      continue;
    const int k = static_cast<int>(std::lround(re - 0.5));
    C = std::max(C, k * std::abs(re - (k + 0.5)));
    ++n;
  }
  const ResolventEvaluator ev(s.model);
  const double top = 2.0 * s.model.damping_sup + 1.0;
  std::vector<double> consts;
  for (int k = 5; k <= 25; ++k) {
    const double re = k + 0.5 + 0.5;
    double worst = 0.0;
    for (int i = 0; i < 9; ++i) {
      const cplx tau(re, -1.0 + (top + 1.0) * i / 8.0);
      worst = std::max(worst, (1.0 + std::abs(tau)) * ev.l2(tau));
    }
    consts.push_back(worst);
  }
  const double ratio = *std::max_element(consts.begin(), consts.end()) /
                       *std::min_element(consts.begin(), consts.end());
  report(6, n > 0 && C <= kClusterC && ratio <= kGapRatio,
         "records=" + std::to_string(n) + fmt(" C=%.4f", C) + fmt(" gap_ratio=%.3f", ratio));
}

void c7(Solved& s) {
  const ClusterReport rep = cluster_partition(s.spec, GeometryKind::sphere, 2, 1, false);
  CVector g = random_vector(s.model.dim, 20240601);
  g /= g.norm();
  const CVector f = sobolev_weighted(s.model, g, 1.0);
  ClusterOptions opts;
  opts.theta = 1.0;
  opts.tail_time = 1.0;
  opts.tail_fit_lo = 5;
  opts.tail_fit_hi = 25;
  const ExpansionResult r = cluster_expansion(rep, s.spec, s.gen, s.model, f, {0.0, 0.5, 1.0}, opts);
  const double rel = r.error_by_K.empty() ? 1.0 : r.error_by_K.back();
  report(7, rel <= kClusterRel && r.tail_slope <= kTailSlope,
         "clusters=" + std::to_string(r.included.size()) + fmt(" rel_err=%.3e", rel) +
             fmt(" tail_slope=%.3f", r.tail_slope));
}

std::optional<PoincareData> equator_poincare(const RevolutionProfile& p) {
  const FlowGeometry geom = FlowGeometry::revolution(p);
  const double s0 = p.equator();
  const GeodesicOrbit orbit = geodesic_flow(geom, equator_point(p), 1.1 * kPi * p.r(s0), 1e-2);
  if (!orbit.closure)
    return std::nullopt;
  return poincare_map(geom, orbit, 4);
}

void c8() {
  Stopwatch sw;
  const RevolutionProfile p = fixtures::whispering_profile();
  const auto pd = equator_poincare(p);
  const bool elliptic = pd && pd->classification == OrbitClass::elliptic_nondegenerate &&
                        pd->n_elementary_up_to >= 4;
  std::vector<double> lx, ly;
  int missing = 0;
  for (int m = 10; m <= 40; ++m) {
    const SpectralModel model = build_revolution_model(p, m, fixtures::pole_caps(), 400);
    const Spectrum spec = compute_eigenfrequencies(assemble_generator(model));
    const auto w = whispering_mode(model, spec);
    if (!w || !(w->tau.imag() > 0.0)) {
      ++missing;
      continue;
    }
    lx.push_back(std::log(w->tau.real()));
    ly.push_back(std::log(w->tau.imag()));
  }
  const double slope = ols_slope(lx, ly).first;
  const double secs = sw.seconds();
  report(8, elliptic && missing == 0 && slope <= kWhisperSlope && secs < kLongSeconds,
         std::string("equator=") + (pd ? to_string(pd->classification) : "no-closure") +
             " N'=" + std::to_string(pd ? pd->n_elementary_up_to : 0) + " modes=" +
             std::to_string(lx.size()) + " missing=" + std::to_string(missing) +
             fmt(" slope=%.3f", slope) + fmt(" runtime=%.1fs", secs));
}

void c9() {
  const double eps = 0.3;
  const double r0 = 1.0 + eps, d2r = -(1.0 + 3.0 * eps);
  const double alpha = std::acos(std::cos(2.0 * kPi * std::sqrt(-r0 * d2r)));
  const auto pd = equator_poincare(fixtures::whispering_profile());
  double angle_err = 1.0, det_err = 1.0;
  if (pd && !pd->rotation_angles.empty()) {
    angle_err = std::abs(pd->rotation_angles.front() - alpha);
    det_err = std::abs(pd->det - 1.0);
  }
  const GeodesicOrbit torus = geodesic_flow(FlowGeometry::torus(), torus_point(0, 0, 0), 3.3, 1e-2);
  const GeodesicOrbit sphere =
      geodesic_flow(FlowGeometry::sphere(), sphere_point(0.5 * kPi, 0.0, 0.5 * kPi), 3.3, 1e-2);
  const PoincareData pt = poincare_map(FlowGeometry::torus(), torus, 4);
  const PoincareData ps = poincare_map(FlowGeometry::sphere(), sphere, 4);
  det_err = std::max({det_err, std::abs(pt.det - 1.0), std::abs(ps.det - 1.0)});
  const bool degenerate = pt.classification == OrbitClass::degenerate &&
                          ps.classification == OrbitClass::degenerate;
  report(9, angle_err <= kAngleTol && det_err <= kDetTol && degenerate,
         fmt("alpha_oracle=%.10f", alpha) + fmt(" angle_err=%.3e", angle_err) +
             fmt(" det_err=%.3e", det_err) + " torus=" + to_string(pt.classification) +
             " sphere=" + to_string(ps.classification));
}

void c10(const Solved& disk, double A_disk) {
  const ResolventEvaluator ev(disk.model);
  const double L = disk.spec.trust_radius;
  const int n = 400;
  // lower half lines
  std::vector<double> C;
  for (double beta : {0.25, 0.5, 1.0}) {
    double sup = 0.0;
    for (int i = 0; i <= n; ++i) {
      const cplx tau(L * i / n, -beta);
      sup = std::max(sup, std::abs(tau) * beta * ev.l2(tau));
    }
    C.push_back(sup);
  }
  const bool lower = C[0] <= kBoundFactor * C[2] && C[1] <= kBoundFactor * C[2];
  // upper line
  const double a2 = 2.0 * disk.model.damping_sup;
  const double upper = growth_ratio(0.0, L, n, [&](double re) {
    const cplx tau(re, a2 + 1.0);
    return std::abs(tau) * (tau.imag() - a2) * ev.l2(tau);
  });
  // controlled strip
  const double eps = default_strip_eps(disk.spec, A_disk);
  double c0 = 0.0;
  for (const auto& r : disk.spec.records)
    if (r.trusted && r.tau.imag() < A_disk - eps)
      c0 = std::max(c0, std::abs(r.tau.real()));
  c0 += 1.0;
  const double strip_im = 0.5 * (A_disk - eps);
  const double strip = c0 < L ? growth_ratio(c0, L, n, [&](double re) {
    const cplx tau(re, strip_im);
    return (1.0 + std::abs(tau)) * ev.l2(tau);
  })
                              : std::numeric_limits<double>::infinity();
  // semiclassical identity
  double semi = 0.0;
  for (double h : {0.1, 0.05})
    for (cplx z : {cplx(0.5, 0.0), cplx(1.0, 0.1), cplx(2.0, -0.05), cplx(1.3, 0.02)}) {
      const double lhs = ev.semiclassical(z, h);
      const double rhs = ev.l2(std::sqrt(z) / h) / (h * h);
      semi = std::max(semi, std::abs(lhs - rhs) / rhs);
    }
  const bool ok = lower && upper <= kBoundFactor && strip <= kBoundFactor && semi <= kSemiclassicalTol;
  report(10, ok,
         fmt("C_0.25/C_1=%.3f", C[0] / C[2]) + fmt(" C_0.5/C_1=%.3f", C[1] / C[2]) +
             fmt(" upper_growth=%.3f", upper) + fmt(" strip[C=%.2f", c0) +
             fmt(" Im=%.4f", strip_im) + fmt(" growth=%.3f]", strip) + fmt(" semiclassical=%.2e", semi));
}

void c11(const std::vector<fixtures::Named>& models) {
  const auto t = grid(0.0, 20.0, 0.25);
  double worst = 0.0, rise = 0.0;
  for (const auto& m : models) {
    const GeneratorMatrix gen = assemble_generator(m.model);
    CVector X0 = random_vector(2 * m.model.dim, 99);
    X0 /= X0.norm();
    const auto a = propagate_cauchy(gen, X0, t, PropagationMethod::expm);
    const auto b = propagate_cauchy(gen, X0, t, PropagationMethod::stepper);
    for (std::size_t i = 0; i < t.size(); ++i)
      worst = std::max(worst, (a[i].stacked() - b[i].stacked()).norm() / a[i].stacked().norm());
    const double E0 = energy(a[0], m.model);
    for (std::size_t i = 1; i < t.size(); ++i)
      rise = std::max(rise, (energy(a[i], m.model) - energy(a[i - 1], m.model)) / E0);
  }
  report(11, worst <= kPropagationRel && rise <= kEnergySlack,
         "configs=" + std::to_string(models.size()) + fmt(" max_rel=%.3e", worst) +
             fmt(" max_energy_rise=%.3e", rise));
}

} // namespace

int main(int argc, char** argv) {
  select_blas_kernels(argv);
  for (int i = 1; i < argc; ++i)
    selected.push_back(std::atoi(argv[i]));
  Stopwatch total;
  const auto models = fixtures::regression_models();

  guarded(1, c1);
  guarded(2, [&] { c2(models); });
  guarded(3, [&] { c3(models); });

  std::optional<Solved> disk16;
  double A_disk = 0.0;
  guarded(4, [&] {
    A_disk = torus_A_inf(fixtures::disk_damping());
    disk16 = solve(build_torus_model(16, fixtures::disk_damping()));
    c4(*disk16, A_disk);
  });
  disk16.reset();

  std::optional<Solved> disk12;
  guarded(5, [&] {
    if (A_disk == 0.0)
      A_disk = torus_A_inf(fixtures::disk_damping());
    const Solved constant = solve(build_torus_model(8, DampingSpec::constant(0.1)));
    const double A_const = torus_A_inf(DampingSpec::constant(0.1));
    disk12 = solve(build_torus_model(12, fixtures::disk_damping()));
    c5(constant, A_const, *disk12, A_disk);
  });

  {
    std::optional<Solved> sphere;
    guarded(6, [&] {
      sphere = solve(build_sphere_model(30, DampingSpec::zonal_caps(0.5, 4)));
      c6(*sphere);
    });
    guarded(7, [&] {
      if (!sphere)
        throw NumericalError("sphere spectrum unavailable");
      c7(*sphere);
    });
  }

  guarded(8, c8);
  guarded(9, c9);
  guarded(10, [&] {
    if (!disk12)
      disk12 = solve(build_torus_model(12, fixtures::disk_damping()));
    c10(*disk12, A_disk);
  });
  guarded(11, [&] { c11(models); });

  std::printf("%d of 11 criteria failed (%.1fs)\n", failures, total.seconds());
  return failures == 0 ? 0 : 1;
}
