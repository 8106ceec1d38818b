#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dampwave/damping.hpp"
#include "dampwave/manifolds.hpp"
#include "dampwave/types.hpp"

namespace dampwave {

/// Where the geodesic flow lives. Flow convention: p = |xi|^2, so on p = 1
/// the H_p flow moves at speed 2 and arclength L corresponds to H_p-time L/2.
struct FlowGeometry {
  GeometryKind kind = GeometryKind::torus;
  std::optional<RevolutionProfile> profile;

  static FlowGeometry torus() { return {GeometryKind::torus, std::nullopt}; }
  static FlowGeometry sphere() { return {GeometryKind::sphere, std::nullopt}; }
  static FlowGeometry revolution(RevolutionProfile p) { return {GeometryKind::revolution, std::move(p)}; }
};

/// Phase-space point. Torus: x = (x, y), xi = (xi_x, xi_y). Sphere: unit x in
/// R^3 and tangent xi. Revolution: x = (s, theta), xi = (xi_s, xi_theta).
struct PhasePoint {
  std::array<double, 3> x{};
  std::array<double, 3> xi{};
};

double hamiltonian(const FlowGeometry& geom, const PhasePoint& z);
/// Damping at the base point of z.
double damping_at(const FlowGeometry& geom, const DampingSpec& a, const PhasePoint& z);

/// Unit covector at a base point: direction angle beta measured from the
/// first coordinate direction (torus: x axis, sphere: e_theta, revolution: e_s).
PhasePoint torus_point(double x, double y, double beta);
PhasePoint sphere_point(double theta, double phi, double beta);
PhasePoint revolution_point(const RevolutionProfile& profile, double s, double beta);
/// Start of the equator orbit, moving in +theta.
PhasePoint equator_point(const RevolutionProfile& profile);

struct Closure {
  double period = 0.0;   ///< H_p-time of first return
  double distance = 0.0; ///< phase-space distance at return
};

struct GeodesicOrbit {
  GeometryKind geometry = GeometryKind::torus;
  PhasePoint start;
  double step = 0.0;
  std::vector<double> t;
  std::vector<PhasePoint> samples;
  std::optional<Closure> closure;
  double max_p_drift = 0.0;
  double clairaut_drift = 0.0; ///< revolution: max relative change of xi_theta
};

/// Samples exp(t H_p)(x0, xi0) at t = j * step for 0 <= t <= T, with closure
/// detection (return within 1e-6 of the start).
GeodesicOrbit geodesic_flow(const FlowGeometry& geom, const PhasePoint& start, double T,
                            double step);

/// <a>_T = (1/T) int_0^T a(exp(t H_p)) dt by fourth-order composite quadrature on the samples.
double trajectory_average(const GeodesicOrbit& orbit, const FlowGeometry& geom,
                          const DampingSpec& a, double T);

/// Positions n1 x n2 and `directions` covector angles in [0, 2 pi).
/// Sphere: colatitudes pi i / n1, i = 1..n1-1, include the equator for even n1.
/// Revolution: arclengths L i / n1, i = 1..n1-1, plus the equator.
struct SamplingGrid {
  int n1 = 64;
  int n2 = 64;
  int directions = 128;
};

struct ACurve {
  std::vector<double> T;
  std::vector<double> A;
  double A_inf_hat = 0.0;
  double gap = 0.0; ///< |A(T_max) - A(previous T)|
  bool stabilized = true;
  SamplingGrid grid;
  int orbits = 0; ///< distinct orbits actually evaluated
};

ACurve estimate_A(const FlowGeometry& geom, const DampingSpec& a, const std::vector<double>& T_list,
                  SamplingGrid grid = {});

struct ControlVerdict {
  double T0 = 0.0; ///< geodesic length; H_p-time T0 / 2
  SamplingGrid resolution;
  bool counterexample = false;
  double min_mass = 0.0; ///< min over sampled orbits of int_0^{T0/2} a dt
  PhasePoint worst;
  std::optional<GeodesicOrbit> orbit; ///< set for counterexamples
};

ControlVerdict check_geometric_control(const FlowGeometry& geom, const DampingSpec& a, double T0,
                                       SamplingGrid grid = {});

enum class OrbitClass { elliptic_nondegenerate, hyperbolic, degenerate };
std::string to_string(OrbitClass c);

struct PoincareData {
  RMatrix P; ///< 2 x 2 in a symplectic basis of the transversal
  std::vector<cplx> eigenvalues;
  OrbitClass classification = OrbitClass::degenerate;
  std::vector<double> rotation_angles; ///< in (0, pi], elliptic only
  int n_elementary_up_to = 0;
  double det = 0.0;
  double period = 0.0;
};

/// Linearised Poincare map of a closed orbit from the variational equations,
/// restricted to the symplectic complement of span(H_p, grad p). Sphere orbits
/// are mapped to the equator of the profile r = sin s by an isometry.
PoincareData poincare_map(const FlowGeometry& geom, const GeodesicOrbit& closed_orbit, int N);

std::string orbit_csv(const GeodesicOrbit& orbit);
std::string a_curve_csv(const ACurve& curve);
nlohmann::json to_json(const PhasePoint& z);
nlohmann::json to_json(const ControlVerdict& v);
nlohmann::json to_json(const PoincareData& p);

} // namespace dampwave
