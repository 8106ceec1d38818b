#include "dampwave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "dampwave/report.hpp"

namespace dampwave {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap(double x) { return std::remainder(x, kTwoPi); }

const RevolutionProfile& profile_of(const FlowGeometry& geom) {
  if (!geom.profile)
    throw ValidationError("revolution geometry needs a profile");
  return *geom.profile;
}

using RevState = std::array<double, 4>; // s, theta, xi_s, xi_theta

struct RevRhs {
  const RevolutionProfile* p;
  void operator()(const RevState& z, RevState& dz, double) const {
    const double r = p->r(z[0]);
    const double dr = p->dr(z[0]);
    dz[0] = 2.0 * z[2];
    dz[1] = 2.0 * z[3] / (r * r);
    dz[2] = 2.0 * z[3] * z[3] * dr / (r * r * r);
    dz[3] = 0.0;
  }
};

// Meridians (xi_theta = 0) run through the poles; unfold them on a circle of
// length 2L and flip theta by pi on the far half.
PhasePoint meridian_advance(const RevolutionProfile& p, const PhasePoint& z, double dt) {
  const double L = p.length;
  double sigma = z.x[0] + 2.0 * dt * z.xi[0];
  sigma = std::fmod(sigma, 2.0 * L);
  if (sigma < 0.0)
    sigma += 2.0 * L;
  PhasePoint out = z;
  if (sigma <= L) {
    out.x[0] = sigma;
  } else {
    out.x[0] = 2.0 * L - sigma;
    out.xi[0] = -z.xi[0];
    out.x[1] = wrap(z.x[1] + kPi);
  }
  return out;
}

PhasePoint rev_advance(const RevolutionProfile& p, const PhasePoint& z, double dt) {
  if (dt == 0.0)
    return z;
  if (z.xi[1] == 0.0)
    return meridian_advance(p, z, dt);
  if (std::abs(z.xi[1]) < 1e-6)
    throw NumericalError("geodesic passes within 1e-6 of a pole off the meridian chart");
  RevState s{z.x[0], z.x[1], z.xi[0], z.xi[1]};
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_fehlberg78<RevState>());
  odeint::integrate_adaptive(stepper, RevRhs{&p}, s, 0.0, dt, std::min(dt, 1e-2));
  PhasePoint out;
  out.x = {s[0], s[1], 0.0};
  out.xi = {s[2], s[3], 0.0};
  return out;
}

PhasePoint exact_advance(GeometryKind kind, const PhasePoint& z, double t) {
  PhasePoint out;
  if (kind == GeometryKind::torus) {
    for (int i = 0; i < 2; ++i) {
      double x = std::fmod(z.x[i] + 2.0 * t * z.xi[i], kTwoPi);
      if (x < 0.0)
        x += kTwoPi;
      out.x[i] = x;
      out.xi[i] = z.xi[i];
    }
    return out;
  }
  const double c = std::cos(2.0 * t), s = std::sin(2.0 * t);
  for (int i = 0; i < 3; ++i) {
    out.x[i] = z.x[i] * c + z.xi[i] * s;
    out.xi[i] = -z.x[i] * s + z.xi[i] * c;
  }
  return out;
}

// Signed progress along the initial velocity (changes sign from - to + at a return)
// and phase-space distance to the start.
std::pair<double, double> return_measure(const FlowGeometry& geom, const PhasePoint& z0,
                                         const PhasePoint& z) {
  double f = 0.0, dx = 0.0, dxi = 0.0;
  switch (geom.kind) {
  case GeometryKind::torus:
    for (int i = 0; i < 2; ++i) {
      const double d = wrap(z.x[i] - z0.x[i]);
      f += d * z0.xi[i];
      dx += d * d;
      dxi += (z.xi[i] - z0.xi[i]) * (z.xi[i] - z0.xi[i]);
    }
    break;
  case GeometryKind::sphere:
    for (int i = 0; i < 3; ++i) {
      const double d = z.x[i] - z0.x[i];
      f += d * z0.xi[i];
      dx += d * d;
      dxi += (z.xi[i] - z0.xi[i]) * (z.xi[i] - z0.xi[i]);
    }
    break;
  case GeometryKind::revolution: {
    const double r0 = profile_of(geom).r(z0.x[0]);
    const double ds = z.x[0] - z0.x[0];
    const double dth = wrap(z.x[1] - z0.x[1]);
    f = ds * z0.xi[0] + dth * z0.xi[1];
    dx = ds * ds + r0 * r0 * dth * dth;
    dxi = (z.xi[0] - z0.xi[0]) * (z.xi[0] - z0.xi[0]) + (z.xi[1] - z0.xi[1]) * (z.xi[1] - z0.xi[1]);
    break;
  }
  }
  return {f, std::sqrt(dx) + std::sqrt(dxi)};
}

GeodesicOrbit sample_orbit(const FlowGeometry& geom, const PhasePoint& start, double T, double step,
                           bool find_closure) {
  if (!(step > 0.0) || step > 1e-2)
    throw ValidationError("geodesic step must lie in (0, 1e-2]");
  if (!(T >= 0.0))
    throw ValidationError("geodesic time must be nonnegative");
  if (std::abs(hamiltonian(geom, start) - 1.0) > 1e-10)
    throw ValidationError("initial point is not on p = 1");
  GeodesicOrbit orbit;
  orbit.geometry = geom.kind;
  orbit.start = start;
  orbit.step = step;
  const int J = static_cast<int>(std::ceil(T / step - 1e-9));
  orbit.t.reserve(J + 1);
  orbit.samples.reserve(J + 1);
  PhasePoint z = start;
  for (int j = 0; j <= J; ++j) {
    const double t = j * step;
    if (j > 0)
      z = geom.kind == GeometryKind::revolution ? rev_advance(*geom.profile, z, step)
                                                : exact_advance(geom.kind, start, t);
    orbit.t.push_back(t);
    orbit.samples.push_back(z);
    orbit.max_p_drift = std::max(orbit.max_p_drift, std::abs(hamiltonian(geom, z) - 1.0));
    if (geom.kind == GeometryKind::revolution && start.xi[1] != 0.0)
      orbit.clairaut_drift =
          std::max(orbit.clairaut_drift, std::abs(z.xi[1] - start.xi[1]) / std::abs(start.xi[1]));
  }
  if (orbit.max_p_drift > 1e-8)
    throw NumericalError("energy drift " + fmt17(orbit.max_p_drift) + " exceeds 1e-8");

  if (!find_closure)
    return orbit;
  auto state_at = [&](double t) {
    if (geom.kind != GeometryKind::revolution)
      return exact_advance(geom.kind, start, t);
    const int j = std::clamp(static_cast<int>(std::floor(t / step)), 0, J);
    return rev_advance(*geom.profile, orbit.samples[j], t - orbit.t[j]);
  };
  const double gate = 10.0 * step;
  auto prev = return_measure(geom, start, orbit.samples[1 <= J ? 1 : 0]);
  for (int j = 1; j < J; ++j) {
    const auto next = return_measure(geom, start, orbit.samples[j + 1]);
    if (prev.first < 0.0 && next.first >= 0.0 && std::min(prev.second, next.second) <= gate) {
      auto f = [&](double t) { return return_measure(geom, start, state_at(t)).first; };
      boost::uintmax_t iters = 200;
      const auto root = boost::math::tools::toms748_solve(
          f, orbit.t[j], orbit.t[j + 1], prev.first, next.first,
          boost::math::tools::eps_tolerance<double>(52), iters);
      const double tc = 0.5 * (root.first + root.second);
      const double dist = return_measure(geom, start, state_at(tc)).second;
      if (dist <= 1e-6) {
        orbit.closure = Closure{tc, dist};
        break;
      }
    }
    prev = next;
  }
  return orbit;
}

// int_{u=a}^{b} of the cubic through (0,f0),(1,f1),(2,f2),(3,f3), two-point Gauss
double cubic_integral(const double* f, double a, double b) {
  auto p = [&](double u) {
    const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
    const double l1 = u * (u - 2) * (u - 3) / 2.0;
    const double l2 = -u * (u - 1) * (u - 3) / 2.0;
    const double l3 = u * (u - 1) * (u - 2) / 6.0;
    return l0 * f[0] + l1 * f[1] + l2 * f[2] + l3 * f[3];
  };
  const double m = 0.5 * (a + b), h = 0.5 * (b - a), g = 1.0 / std::sqrt(3.0);
  return h * (p(m - h * g) + p(m + h * g));
}

// int_0^T of uniformly sampled values (spacing h), fourth order.
double sampled_integral(const std::vector<double>& f, double h, double T) {
  const int n = static_cast<int>(f.size());
  if (T <= 0.0)
    return 0.0;
  if (T > (n - 1) * h * (1.0 + 1e-12))
    throw ValidationError("averaging time exceeds the orbit length");
  if (n < 4) {
    double acc = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
      const double lo = j * h, hi = std::min((j + 1) * h, T);
      if (hi <= lo)
        break;
      const double fl = f[j], fh = f[j] + (f[j + 1] - f[j]) * (hi - lo) / h;
      acc += 0.5 * (fl + fh) * (hi - lo);
    }
    return acc;
  }
  double acc = 0.0;
  const double u_end = std::min(T / h, double(n - 1));
  for (int j = 0; j < n - 1 && j < u_end; ++j) {
    const int s = std::clamp(j - 1, 0, n - 4);
    const double b = std::min(double(j + 1), u_end);
    acc += cubic_integral(&f[s], j - s, b - s);
  }
  return acc * h;
}

std::vector<double> sampled_damping(const GeodesicOrbit& orbit, const FlowGeometry& geom,
                                    const DampingSpec& a) {
  std::vector<double> f;
  f.reserve(orbit.samples.size());
  for (const auto& z : orbit.samples)
    f.push_back(damping_at(geom, a, z));
  return f;
}

struct GridMasses {
  std::vector<double> min_mass;
  std::vector<PhasePoint> argmin;
  int orbits = 0;
};

void record_mass(GridMasses& out, std::size_t i, double mass, const PhasePoint& z) {
  if (mass < out.min_mass[i]) {
    out.min_mass[i] = mass;
    out.argmin[i] = z;
  }
}

GridMasses torus_masses(const DampingSpec& a, const std::vector<double>& Ts, SamplingGrid g) {
  std::vector<TrigTerm> terms;
  if (const auto* c = std::get_if<ConstantDamping>(&a.params()))
    terms.push_back({0, 0, c->value});
  else if (const auto* t = std::get_if<TrigDamping>(&a.params()))
    terms = t->terms;
  else
    throw ValidationError(a.kind_name() + " damping cannot live on the torus");
  int M = 0;
  for (const auto& t : terms)
    M = std::max({M, std::abs(t.k1), std::abs(t.k2)});
  const int W = 2 * M + 1;
  CMatrix E1(g.n1, W), E2(g.n2, W);
  for (int i = 0; i < g.n1; ++i)
    for (int k = -M; k <= M; ++k)
      E1(i, k + M) = std::exp(kI * (k * kTwoPi * i / g.n1));
  for (int i = 0; i < g.n2; ++i)
    for (int k = -M; k <= M; ++k)
      E2(i, k + M) = std::exp(kI * (k * kTwoPi * i / g.n2));

  GridMasses out;
  out.min_mass.assign(Ts.size(), std::numeric_limits<double>::infinity());
  out.argmin.resize(Ts.size());
  out.orbits = g.n1 * g.n2 * g.directions;
  for (int d = 0; d < g.directions; ++d) {
    const double beta = kTwoPi * d / g.directions;
    const double c = std::cos(beta), s = std::sin(beta);
    for (std::size_t ti = 0; ti < Ts.size(); ++ti) {
      const double T = Ts[ti];
      CMatrix Wk = CMatrix::Zero(W, W);
      for (const auto& t : terms) {
        // int_0^T exp(2 i w t) dt = exp(i w T) sin(w T) / w
        const double w = t.k1 * c + t.k2 * s;
        const cplx gint = std::abs(w * T) < 1e-12 ? cplx(T) : std::exp(kI * w * T) * std::sin(w * T) / w;
        Wk(t.k1 + M, t.k2 + M) += t.coeff * gint;
      }
      const RMatrix mass = (E1 * Wk * E2.transpose()).real();
      Eigen::Index r, col;
      const double mn = mass.minCoeff(&r, &col);
      record_mass(out, ti, mn, torus_point(kTwoPi * r / g.n1, kTwoPi * col / g.n2, beta));
    }
  }
  return out;
}

GridMasses sphere_masses(const DampingSpec& a, const std::vector<double>& Ts, SamplingGrid g) {
  if (!a.compatible_with(GeometryKind::sphere))
    throw ValidationError(a.kind_name() + " damping cannot live on the sphere");
  GridMasses out;
  out.min_mass.assign(Ts.size(), std::numeric_limits<double>::infinity());
  out.argmin.resize(Ts.size());
  constexpr int nodes = 128;
  // zonal damping: the longitude of the start point does not matter
  for (int i = 1; i < g.n1; ++i) {
    const double theta = kPi * i / g.n1;
    for (int d = 0; d < g.directions; ++d) {
      const double beta = kTwoPi * d / g.directions;
      const PhasePoint z = sphere_point(theta, 0.0, beta);
      ++out.orbits;
      auto a_t = [&](double t) { return a.at_sphere(z.x[2] * std::cos(2 * t) + z.xi[2] * std::sin(2 * t)); };
      double full = 0.0;
      for (int q = 0; q < nodes; ++q)
        full += a_t(kPi * q / nodes);
      full *= kPi / nodes;
      for (std::size_t ti = 0; ti < Ts.size(); ++ti) {
        const double T = Ts[ti];
        const double periods = std::floor(T / kPi);
        const double rem = T - periods * kPi;
        double part = 0.0;
        const int pieces = std::max(1, static_cast<int>(std::ceil(rem / (kPi / 8))));
        for (int p = 0; p < pieces && rem > 0.0; ++p)
          part += boost::math::quadrature::gauss<double, 20>::integrate(a_t, rem * p / pieces,
                                                                       rem * (p + 1) / pieces);
        record_mass(out, ti, periods * full + part, z);
      }
    }
  }
  return out;
}

GridMasses revolution_masses(const FlowGeometry& geom, const DampingSpec& a,
                             const std::vector<double>& Ts, SamplingGrid g) {
  const auto& p = profile_of(geom);
  GridMasses out;
  out.min_mass.assign(Ts.size(), std::numeric_limits<double>::infinity());
  out.argmin.resize(Ts.size());
  std::vector<double> ss;
  for (int i = 1; i < g.n1; ++i)
    ss.push_back(p.length * i / g.n1);
  ss.push_back(p.equator());
  const double Tmax = *std::max_element(Ts.begin(), Ts.end());
  for (double s : ss)
    for (int d = 0; d < g.directions; ++d) {
      const PhasePoint z = revolution_point(p, s, kTwoPi * d / g.directions);
      const GeodesicOrbit orbit = sample_orbit(geom, z, Tmax, 1e-2, false);
      const auto f = sampled_damping(orbit, geom, a);
      ++out.orbits;
      for (std::size_t ti = 0; ti < Ts.size(); ++ti)
        record_mass(out, ti, sampled_integral(f, orbit.step, Ts[ti]), z);
    }
  return out;
}

GridMasses grid_masses(const FlowGeometry& geom, const DampingSpec& a, const std::vector<double>& Ts,
                       SamplingGrid g) {
  if (g.n1 < 2 || g.n2 < 1 || g.directions < 1)
    throw ValidationError("sampling grid too small");
  switch (geom.kind) {
  case GeometryKind::torus:
    return torus_masses(a, Ts, g);
  case GeometryKind::sphere:
    return sphere_masses(a, Ts, g);
  case GeometryKind::revolution:
    return revolution_masses(geom, a, Ts, g);
  }
  throw ValidationError("unknown geometry");
}

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

struct Canonical {
  std::function<Vec4(const Vec4&)> grad;
  std::function<Mat4(const Vec4&)> hess;
};

Canonical torus_canonical() {
  Canonical c;
  c.grad = [](const Vec4& z) { return Vec4(0.0, 0.0, 2 * z[2], 2 * z[3]); };
  c.hess = [](const Vec4&) {
    Mat4 H = Mat4::Zero();
    H(2, 2) = H(3, 3) = 2.0;
    return H;
  };
  return c;
}

Canonical revolution_canonical(const RevolutionProfile& p) {
  Canonical c;
  c.grad = [&p](const Vec4& z) {
    const double r = p.r(z[0]), dr = p.dr(z[0]);
    return Vec4(-2 * z[3] * z[3] * dr / (r * r * r), 0.0, 2 * z[2], 2 * z[3] / (r * r));
  };
  c.hess = [&p](const Vec4& z) {
    const double r = p.r(z[0]), dr = p.dr(z[0]), d2r = p.d2r(z[0]);
    Mat4 H = Mat4::Zero();
    H(0, 0) = z[3] * z[3] * (6 * dr * dr / std::pow(r, 4) - 2 * d2r / std::pow(r, 3));
    H(0, 3) = H(3, 0) = -4 * z[3] * dr / std::pow(r, 3);
    H(2, 2) = 2.0;
    H(3, 3) = 2.0 / (r * r);
    return H;
  };
  return c;
}

Mat4 symplectic_J() {
  Mat4 J = Mat4::Zero();
  J.topRightCorner<2, 2>().setIdentity();
  J.bottomLeftCorner<2, 2>() = -Eigen::Matrix2d::Identity();
  return J;
}

} // namespace

double hamiltonian(const FlowGeometry& geom, const PhasePoint& z) {
  switch (geom.kind) {
  case GeometryKind::torus:
    return z.xi[0] * z.xi[0] + z.xi[1] * z.xi[1];
  case GeometryKind::sphere:
    return z.xi[0] * z.xi[0] + z.xi[1] * z.xi[1] + z.xi[2] * z.xi[2];
  case GeometryKind::revolution: {
    const double r = profile_of(geom).r(z.x[0]);
    return z.xi[0] * z.xi[0] + z.xi[1] * z.xi[1] / (r * r);
  }
  }
  return 0.0;
}

double damping_at(const FlowGeometry& geom, const DampingSpec& a, const PhasePoint& z) {
  switch (geom.kind) {
  case GeometryKind::torus:
    return a.at_torus(z.x[0], z.x[1]);
  case GeometryKind::sphere:
    return a.at_sphere(z.x[2]);
  case GeometryKind::revolution:
    return a.at_profile(z.x[0], profile_of(geom).length);
  }
  return 0.0;
}

PhasePoint torus_point(double x, double y, double beta) {
  PhasePoint z;
  z.x = {x, y, 0.0};
  z.xi = {std::cos(beta), std::sin(beta), 0.0};
  return z;
}

PhasePoint sphere_point(double theta, double phi, double beta) {
  const double st = std::sin(theta), ct = std::cos(theta), sp = std::sin(phi), cp = std::cos(phi);
  const std::array<double, 3> e_theta{ct * cp, ct * sp, -st};
  const std::array<double, 3> e_phi{-sp, cp, 0.0};
  PhasePoint z;
  z.x = {st * cp, st * sp, ct};
  for (int i = 0; i < 3; ++i)
    z.xi[i] = std::cos(beta) * e_theta[i] + std::sin(beta) * e_phi[i];
  return z;
}

PhasePoint revolution_point(const RevolutionProfile& profile, double s, double beta) {
  if (!(s > 0.0 && s < profile.length))
    throw ValidationError("revolution base point must lie strictly between the poles");
  PhasePoint z;
  z.x = {s, 0.0, 0.0};
  z.xi = {std::cos(beta), profile.r(s) * std::sin(beta), 0.0};
  if (std::abs(std::sin(beta)) < 1e-15)
    z.xi[1] = 0.0;
  return z;
}

PhasePoint equator_point(const RevolutionProfile& profile) {
  const double s0 = profile.equator();
  PhasePoint z;
  z.x = {s0, 0.0, 0.0};
  z.xi = {0.0, profile.r(s0), 0.0};
  return z;
}

GeodesicOrbit geodesic_flow(const FlowGeometry& geom, const PhasePoint& start, double T,
                            double step) {
  return sample_orbit(geom, start, T, step, true);
}

double trajectory_average(const GeodesicOrbit& orbit, const FlowGeometry& geom,
                          const DampingSpec& a, double T) {
  if (!(T > 0.0))
    throw ValidationError("averaging time must be positive");
  return sampled_integral(sampled_damping(orbit, geom, a), orbit.step, T) / T;
}

ACurve estimate_A(const FlowGeometry& geom, const DampingSpec& a, const std::vector<double>& T_list,
                  SamplingGrid grid) {
  if (T_list.empty())
    throw ValidationError("estimate_A needs at least one time");
  for (std::size_t i = 0; i < T_list.size(); ++i)
    if (!(T_list[i] > 0.0) || (i && T_list[i] <= T_list[i - 1]))
      throw ValidationError("T_list must be positive and increasing");
  const GridMasses m = grid_masses(geom, a, T_list, grid);
  ACurve out;
  out.T = T_list;
  out.grid = grid;
  out.orbits = m.orbits;
  std::size_t best = 0;
  for (std::size_t i = 0; i < T_list.size(); ++i) {
    out.A.push_back(std::max(0.0, m.min_mass[i]) / T_list[i]);
    if (out.A[i] > out.A[best])
      best = i;
  }
  out.A_inf_hat = out.A[best];
  const std::size_t last = T_list.size() - 1;
  out.gap = last ? std::abs(out.A[last] - out.A[last - 1]) : 0.0;
  out.stabilized = out.gap <= 0.05 * out.A_inf_hat && out.A[best] <= out.A[last];
  return out;
}

ControlVerdict check_geometric_control(const FlowGeometry& geom, const DampingSpec& a, double T0,
                                       SamplingGrid grid) {
  if (!(T0 > 0.0))
    throw ValidationError("control length must be positive");
  const double T = 0.5 * T0;
  const GridMasses m = grid_masses(geom, a, {T}, grid);
  ControlVerdict v;
  v.T0 = T0;
  v.resolution = grid;
  v.min_mass = m.min_mass[0];
  v.worst = m.argmin[0];
  v.counterexample = v.min_mass <= 1e-10;
  if (v.counterexample)
    v.orbit = geodesic_flow(geom, v.worst, T, 1e-2);
  return v;
}

std::string to_string(OrbitClass c) {
  switch (c) {
  case OrbitClass::elliptic_nondegenerate:
    return "elliptic-nondegenerate";
  case OrbitClass::hyperbolic:
    return "hyperbolic";
  case OrbitClass::degenerate:
    return "degenerate";
  }
  return "?";
}

PoincareData poincare_map(const FlowGeometry& geom, const GeodesicOrbit& closed_orbit, int N) {
  if (!closed_orbit.closure)
    throw ValidationError("poincare_map needs a closed orbit");
  if (N < 1)
    throw ValidationError("N must be >= 1");
  const double T = closed_orbit.closure->period;
  Canonical can;
  Vec4 z0;
  std::optional<RevolutionProfile> round;
  switch (geom.kind) {
  case GeometryKind::torus: {
    can = torus_canonical();
    const auto& s = closed_orbit.start;
    z0 << s.x[0], s.x[1], s.xi[0], s.xi[1];
    break;
  }
  case GeometryKind::sphere: {
    round = RevolutionProfile::round_sphere(1.0);
    can = revolution_canonical(*round);
    const PhasePoint e = equator_point(*round);
    z0 << e.x[0], e.x[1], e.xi[0], e.xi[1];
    break;
  }
  case GeometryKind::revolution: {
    can = revolution_canonical(profile_of(geom));
    const auto& s = closed_orbit.start;
    z0 << s.x[0], s.x[1], s.xi[0], s.xi[1];
    break;
  }
  }
  const Mat4 J = symplectic_J();
  using Big = std::array<double, 20>;
  auto rhs = [&](const Big& y, Big& dy, double) {
    Vec4 z(y[0], y[1], y[2], y[3]);
    const Vec4 dz = J * can.grad(z);
    const Mat4 Hs = J * can.hess(z);
    Eigen::Map<const Mat4> V(y.data() + 4);
    Eigen::Map<Mat4> dV(dy.data() + 4);
    for (int i = 0; i < 4; ++i)
      dy[i] = dz[i];
    dV = Hs * V;
  };
  Big y{};
  for (int i = 0; i < 4; ++i)
    y[i] = z0[i];
  Eigen::Map<Mat4>(y.data() + 4).setIdentity();
  auto stepper = odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<Big>());
  odeint::integrate_adaptive(stepper, rhs, y, 0.0, T, 1e-3);
  const Mat4 M = Eigen::Map<const Mat4>(y.data() + 4);

  const Vec4 X = J * can.grad(z0);
  Eigen::Matrix<double, 2, 4> C;
  C.row(0) = (J * X).transpose();
  C.row(1) = X.transpose();
  Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>> svd(C, Eigen::ComputeFullV);
  Vec4 e1 = svd.matrixV().col(2), e2 = svd.matrixV().col(3);
  auto omega = [&](const Vec4& u, const Vec4& v) { return u.dot(J * v); };
  const double s12 = omega(e1, e2);
  if (std::abs(s12) < 1e-12)
    throw NumericalError("transversal is not symplectic");
  e2 /= s12;

  PoincareData out;
  out.period = T;
  out.P.resize(2, 2);
  const Vec4 Me1 = M * e1, Me2 = M * e2;
  out.P(0, 0) = omega(Me1, e2);
  out.P(0, 1) = omega(Me2, e2);
  out.P(1, 0) = omega(e1, Me1);
  out.P(1, 1) = omega(e1, Me2);
  out.det = out.P.determinant();
  const double tr = out.P.trace();
  const cplx disc = std::sqrt(cplx(tr * tr / 4.0 - out.det, 0.0));
  out.eigenvalues = {tr / 2.0 + disc, tr / 2.0 - disc};
  bool degenerate = false, on_circle = true;
  for (const cplx& l : out.eigenvalues) {
    degenerate = degenerate || std::abs(l - 1.0) <= 1e-6;
    on_circle = on_circle && std::abs(std::abs(l) - 1.0) <= 1e-8;
  }
  if (degenerate)
    out.classification = OrbitClass::degenerate;
  else if (on_circle)
    out.classification = OrbitClass::elliptic_nondegenerate;
  else
    out.classification = OrbitClass::hyperbolic;
  if (out.classification == OrbitClass::elliptic_nondegenerate) {
    const cplx l = out.eigenvalues[0];
    const double alpha = std::atan2(std::abs(l.imag()), l.real());
    out.rotation_angles = {alpha};
    int good = 0;
    for (int k = 1; k <= N; ++k) {
      if (std::abs(wrap(k * alpha)) <= 1e-6)
        break;
      good = k;
    }
    out.n_elementary_up_to = good;
  }
  return out;
}

std::string orbit_csv(const GeodesicOrbit& orbit) {
  CsvTable t({"t", "x1", "x2", "x3", "xi1", "xi2", "xi3"});
  for (std::size_t j = 0; j < orbit.samples.size(); ++j) {
    const auto& z = orbit.samples[j];
    t.row({orbit.t[j], z.x[0], z.x[1], z.x[2], z.xi[0], z.xi[1], z.xi[2]});
  }
  return t.str();
}

std::string a_curve_csv(const ACurve& curve) {
  CsvTable t({"T", "A_T"});
  for (std::size_t i = 0; i < curve.T.size(); ++i)
    t.row({curve.T[i], curve.A[i]});
  return t.str();
}

nlohmann::json to_json(const PhasePoint& z) { return {{"x", z.x}, {"xi", z.xi}}; }

nlohmann::json to_json(const ControlVerdict& v) {
  nlohmann::json j{{"T0", v.T0},
                   {"hp_time", 0.5 * v.T0},
                   {"resolution",
                    {{"n1", v.resolution.n1}, {"n2", v.resolution.n2}, {"directions", v.resolution.directions}}},
                   {"result", v.counterexample ? "counterexample" : "no-violation-found"},
                   {"min_mass", v.min_mass},
                   {"worst_start", to_json(v.worst)}};
  return j;
}

nlohmann::json to_json(const PoincareData& p) {
  nlohmann::json eig = nlohmann::json::array();
  for (const cplx& l : p.eigenvalues)
    eig.push_back({l.real(), l.imag()});
  return {{"P", {{p.P(0, 0), p.P(0, 1)}, {p.P(1, 0), p.P(1, 1)}}},
          {"det", p.det},
          {"eigenvalues", eig},
          {"classification", to_string(p.classification)},
          {"rotation_angles", p.rotation_angles},
          {"n_elementary_up_to", p.n_elementary_up_to},
          {"period", p.period}};
}

} // namespace dampwave
