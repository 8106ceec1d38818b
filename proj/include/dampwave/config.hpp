#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dampwave/damping.hpp"
#include "dampwave/geometry.hpp"
#include "dampwave/manifolds.hpp"

namespace dampwave {

struct ProfileConfig {
  std::string kind = "sin_cubed"; ///< round_sphere | sin_cubed | spheroid | tabulated
  double radius = 1.0;
  double eps = 0.3;
  double equatorial = 1.2;
  double polar = 1.0;
  double length = 3.141592653589793;
  std::vector<double> samples;
};

struct GeometryConfig {
  std::string kind = "torus";
  ProfileConfig profile;
};

struct DampingConfig {
  /// constant | zero | trig | zonal | zonal_caps | caps_profile | disk_complement
  std::string kind = "constant";
  double value = 0.1;
  std::vector<std::vector<double>> terms; ///< [k1, k2, re, im]
  std::vector<double> cos_powers;
  double amplitude = 2.0;
  int power = 4;
  double north = 0.3;
  double south = 0.3;
  double radius = 1.0;
  double transition = 0.5;
  int degree = 8;
  int grid = 256;
  int check_resolution = 512;
};

struct TruncationConfig {
  int kmax = 4;
  int lmax = 20;
  int n = 400;
  int m = 0;
  std::optional<double> trust_radius; ///< overrides 0.5 sqrt(lambda_max)
  int n_theta = 0;
  int n_phi = 0;
};

struct RectConfig {
  double re_min = 0.0, re_max = 10.0;
  int re_steps = 11;
  double im_min = -0.5, im_max = -0.5;
  int im_steps = 1;
};

struct ExperimentConfig {
  RectConfig rect;
  std::vector<double> T_list{5, 10, 20, 40, 80, 160};
  SamplingGrid grid;
  double T0 = 8.0;
  int N = 4;
  double t_max = 20.0;
  double dt = 0.25;
  std::vector<double> window{5.0, 20.0};
  std::vector<double> decay_window{5.0, 30.0};
  int ensemble = 10;
  std::optional<double> eps;
  std::optional<double> A_inf; ///< skips the geodesic estimate when given
  int alpha = 2;
  int k0 = 1;
  double theta = 1.0;
  int k_max = -1;
  bool trusted_only = true;
  std::string expansion = "modal"; ///< modal | cluster
  std::vector<int> modes;          ///< revolution angular modes for whispering scans
  double gap_k_lo = 5, gap_k_hi = 25;
  int gap_im_steps = 9;
};

struct RunConfig {
  GeometryConfig geometry;
  DampingConfig damping;
  TruncationConfig truncation;
  ExperimentConfig experiment;
  std::string out = "out";
  std::uint64_t seed = 20240601;
  int threads = 1;

  /// Resolved configuration (every field, defaults filled in).
  nlohmann::json to_json() const;
};

/// Parses a YAML document; unknown keys and malformed values raise ValidationError.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

DampingSpec make_damping(const RunConfig& cfg);
RevolutionProfile make_profile(const RunConfig& cfg);
FlowGeometry make_flow_geometry(const RunConfig& cfg);
SpectralModel make_model(const RunConfig& cfg);
SpectralModel make_model(const RunConfig& cfg, int revolution_mode);

} // namespace dampwave
