#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dampwave/damping.hpp"
#include "dampwave/types.hpp"

namespace dampwave {

/// Meridian profile s -> r(s) of a surface of revolution, parametrised by
/// arclength on [0, length] and closing smoothly at both poles.
struct RevolutionProfile {
  std::string name;
  double length = 0.0;
  std::function<double(double)> r;
  std::function<double(double)> dr;
  std::function<double(double)> d2r;
  nlohmann::json params;

  /// r(s) = R sin(s/R): the round sphere of radius R.
  static RevolutionProfile round_sphere(double radius = 1.0);
  /// r(s) = sin s + eps sin^3 s on [0, pi]. For eps > 0 the equator s = pi/2
  /// is an elliptic closed geodesic with r0 = 1 + eps, r''(s0) = -(1 + 3 eps).
  static RevolutionProfile sin_cubed(double eps);
  /// Spheroid with equatorial radius `equatorial` and polar semi-axis `polar`,
  /// reparametrised by arclength (adaptive quadrature to 1e-10).
  static RevolutionProfile spheroid(double equatorial, double polar);
  /// Cubic B-spline through uniform samples r_i = r(i L / (n-1)) with the
  /// pole slopes r'(0) = 1 and r'(L) = -1 imposed.
  static RevolutionProfile tabulated(double length, std::vector<double> samples);

  /// Throws ValidationError unless r > 0 on the interior of an n-point grid
  /// and |r'(0) - 1|, |r'(L) + 1| <= 1e-6.
  void validate(int n) const;

  /// Arclength of the widest parallel (r' = 0, r maximal), located on a fine grid
  /// and polished by Newton on r'.
  double equator() const;
};

/// Truncated orthonormal-basis discretisation of -Laplacian (K) and of
/// multiplication by the damping (A). Immutable once built.
struct SpectralModel {
  GeometryKind geometry = GeometryKind::torus;
  int truncation = 0;      ///< kmax (torus), lmax (sphere) or cell count n (revolution)
  int revolution_mode = 0; ///< angular mode m (revolution only)
  int dim = 0;
  CMatrix K;
  CMatrix A;
  double lambda_max = 0.0;
  double trust_radius = 0.0;
  double damping_sup = 0.0; ///< max of a over its check grid
  double volume = 0.0;
  DampingSpec damping;
  std::optional<RevolutionProfile> profile;
  std::vector<std::string> basis_labels;
  /// Coefficients of the constant function 1; empty when 1 is not in the span.
  CVector constant_coeffs;
  /// Revolution only: cell centres and the real tridiagonal form of K.
  std::vector<double> grid;
  RVector tri_diag;
  RVector tri_off;
  nlohmann::json quadrature;

  bool has_constant() const { return constant_coeffs.size() == dim && dim > 0; }
};

/// Fourier basis e^{i k.x}/(2 pi) on (R/2piZ)^2 with |k1|,|k2| <= kmax, sorted by |k|^2.
SpectralModel build_torus_model(int kmax, const DampingSpec& damping);

struct SphereQuadrature {
  int n_theta = 0; ///< Gauss-Legendre nodes in cos(theta); 0 picks the exact minimum
  int n_phi = 0;   ///< uniform nodes in phi; 0 picks the exact minimum
};

/// Real spherical harmonics Y_l^m, l <= lmax. A is assembled by product
/// quadrature and must be exact for the zonal damping degree.
SpectralModel build_sphere_model(int lmax, const DampingSpec& damping,
                                 SphereQuadrature quadrature = {});

/// Angular mode m of -Laplacian on a surface of revolution: cell-centred
/// finite volumes on n cells, symmetrised by w = (2 pi h r)^{1/2} v.
SpectralModel build_revolution_model(const RevolutionProfile& profile, int m,
                                     const DampingSpec& damping, int n);

struct ModelDiagnostics {
  double k_asymmetry = 0.0;  ///< max |K - K*| entry
  double a_asymmetry = 0.0;  ///< max |A - A*| entry
  double k_min_eigenvalue = 0.0;
  double a_min_eigenvalue = 0.0;
  double constant_residual = 0.0; ///< |K c| / |c| for the constant vector, 0 if absent
};

ModelDiagnostics diagnose(const SpectralModel& model);

/// JSON document: dimension, basis labels, K and A as row-major split real/imag arrays.
nlohmann::json model_to_json(const SpectralModel& model);

} // namespace dampwave
