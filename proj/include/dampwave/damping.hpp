#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dampwave/types.hpp"

namespace dampwave {

enum class GeometryKind { torus, sphere, revolution };

std::string to_string(GeometryKind kind);
GeometryKind geometry_from_string(const std::string& name);

/// One Fourier term coeff * exp(i (k1 x + k2 y)) of a torus damping.
struct TrigTerm {
  int k1 = 0;
  int k2 = 0;
  cplx coeff{};
};

struct ConstantDamping {
  double value = 0.0;
};

/// Real trigonometric polynomial on (R/2piZ)^2; terms must come in conjugate pairs.
struct TrigDamping {
  std::vector<TrigTerm> terms;
};

/// a(theta) = sum_j cos_powers[j] * cos(theta)^j on the round sphere.
struct ZonalDamping {
  std::vector<double> cos_powers;
};

/// Rotationally invariant a(s) on a surface of revolution: amplitude times a
/// smooth plateau near each pole. The plateau is flat on s < north*L/2 and
/// vanishes for s >= north*L (mirrored at the south pole).
struct CapsProfileDamping {
  double amplitude = 0.0;
  double north = 0.0;
  double south = 0.0;
};

struct DampingRange {
  double min = 0.0;
  double max = 0.0;
};

/// Nonnegative damping coefficient a(x) drawn from a small set of parametric
/// families. Each family is tied to the geometries it can live on.
class DampingSpec {
public:
  using Params = std::variant<ConstantDamping, TrigDamping, ZonalDamping, CapsProfileDamping>;

  DampingSpec() = default;
  explicit DampingSpec(Params params, int check_resolution = 512);

  static DampingSpec constant(double value);
  /// Identically zero damping; only accepted because it is flagged as an
  /// explicit undamped reference (all other specs must be nonzero).
  static DampingSpec zero();
  static DampingSpec trig(std::vector<TrigTerm> terms);
  static DampingSpec zonal(std::vector<double> cos_powers);
  static DampingSpec zonal_caps(double amplitude, int power);
  static DampingSpec caps_profile(double amplitude, double north, double south);
  /// Fejer-smoothed band-limited approximation of amplitude * step(|x| - radius)
  /// on the torus (disk centred at the origin). Fejer weights keep it nonnegative.
  static DampingSpec disk_complement(double amplitude, double radius, double transition,
                                     int degree, int grid = 256);

  const Params& params() const { return params_; }
  std::string kind_name() const;
  bool is_constant() const { return std::holds_alternative<ConstantDamping>(params_); }
  bool allows_zero() const { return allow_zero_; }
  int check_resolution() const { return check_resolution_; }
  void set_check_resolution(int n);

  double at_torus(double x, double y) const;
  double at_sphere(double cos_theta) const;
  double at_profile(double s, double length) const;

  /// Largest |k1|,|k2| over trig terms (0 for constants).
  int trig_degree() const;
  /// Polynomial degree in cos(theta) (0 for constants).
  int zonal_degree() const;

  bool compatible_with(GeometryKind kind) const;

  /// Samples a on the nonnegativity grid of the geometry. Throws
  /// ValidationError if any sample is negative, or if all vanish and the spec
  /// is not the explicit zero reference.
  DampingRange validate_for(GeometryKind kind, double profile_length = 0.0) const;

  nlohmann::json to_json() const;

private:
  Params params_ = ConstantDamping{};
  int check_resolution_ = 512;
  bool allow_zero_ = false;
};

/// Smooth C-infinity plateau: 1 for u <= 1/2, 0 for u >= 1.
double smooth_plateau(double u);

} // namespace dampwave
