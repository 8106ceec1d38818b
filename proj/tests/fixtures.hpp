#pragma once

#include <string>
#include <vector>

#include "dampwave/damping.hpp"
#include "dampwave/manifolds.hpp"

namespace fixtures {

struct Named {
  std::string name;
  dampwave::SpectralModel model;
};

inline dampwave::DampingSpec disk_damping() {
  return dampwave::DampingSpec::disk_complement(2.0, 1.0, 0.5, 8);
}

inline dampwave::DampingSpec cos_damping(double scale) {
  using dampwave::TrigTerm;
  return dampwave::DampingSpec::trig({{0, 0, scale}, {1, 0, 0.5 * scale}, {-1, 0, 0.5 * scale}});
}

inline dampwave::RevolutionProfile whispering_profile() {
  return dampwave::RevolutionProfile::sin_cubed(0.3);
}

inline dampwave::DampingSpec pole_caps() {
  return dampwave::DampingSpec::caps_profile(0.5, 0.3, 0.3);
}

/// Small models covering every geometry and damping family.
inline std::vector<Named> regression_models() {
  using namespace dampwave;
  std::vector<Named> out;
  out.push_back({"torus k4 a=0.1", build_torus_model(4, DampingSpec::constant(0.1))});
  out.push_back({"torus k5 a=0.1(1+cos x)", build_torus_model(5, cos_damping(0.1))});
  out.push_back({"torus k8 disk", build_torus_model(8, disk_damping())});
  out.push_back({"sphere l8 a=0.2", build_sphere_model(8, DampingSpec::constant(0.2))});
  out.push_back({"sphere l12 caps", build_sphere_model(12, DampingSpec::zonal_caps(0.5, 4))});
  out.push_back({"revolution m0", build_revolution_model(whispering_profile(), 0, pole_caps(), 120)});
  out.push_back({"revolution m6", build_revolution_model(whispering_profile(), 6, pole_caps(), 120)});
  return out;
}

} // namespace fixtures
