#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "dampwave/manifolds.hpp"
#include "dampwave/spectra.hpp"
#include "dampwave/types.hpp"

namespace dampwave {

/// Cauchy data (u, D_t u) in basis coefficients at time t.
struct FieldState {
  double t = 0.0;
  CVector u0;
  CVector u1;

  CVector stacked() const;
  static FieldState from_stacked(double t, const CVector& X);
};

enum class PropagationMethod { expm, stepper };

struct StepperOptions {
  double rtol = 1e-9;
  double atol = 1e-13; ///< relative to |X(0)|
  std::size_t max_steps = 20'000'000;
};

/// exp(i t G) X0 on an increasing grid t >= 0. expm reuses one step matrix per
/// distinct increment; the stepper is adaptive Dormand-Prince 5(4) on the
/// sparse generator.
std::vector<FieldState> propagate_cauchy(const GeneratorMatrix& gen, const CVector& X0,
                                         const std::vector<double>& t_grid,
                                         PropagationMethod method, StepperOptions opts = {});

/// Propagator data (0, f): first components are U(t) f.
std::vector<FieldState> propagate(const GeneratorMatrix& gen, const CVector& f,
                                  const std::vector<double>& t_grid, PropagationMethod method,
                                  StepperOptions opts = {});

/// E = (<K u0, u0> + |u1|^2) / 2.
double energy(const FieldState& state, const SpectralModel& model);

/// i int f / int 2a, the value of the constant function p_0 f.
cplx zero_mode(const CVector& f, const SpectralModel& model);

/// Half the distance from A_inf_hat down to the largest trusted Im tau below it.
double default_strip_eps(const Spectrum& spec, double A_inf_hat);

struct ExpansionResult {
  std::vector<int> included;            ///< group ids (modal) or cluster indices k (cluster)
  int untrusted_included = 0;
  std::vector<double> t;
  std::vector<CVector> partial_sum;     ///< first component of the partial sum at each t
  std::vector<double> error;            ///< |U(t) f - partial sum| in L2
  std::vector<double> floor;            ///< rounding floor of the error at each t
  double window_lo = 0.0, window_hi = 0.0; ///< effective fit window
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  int fit_points = 0;
  // cluster expansion only
  std::vector<int> tail_k;
  std::vector<double> tail_norms;       ///< |U_k(t_tail)| in L(H^theta, L2)
  double tail_slope = 0.0;
  std::vector<double> error_by_K;       ///< relative error at the last t, summing through k_min..K
};

struct ModalOptions {
  double window_lo = 5.0;
  double window_hi = 20.0;
};

/// Sum of e^{i tau t} p_tau(t) f over the groups with Im tau < strip_cutoff,
/// compared with the expm propagator.
ExpansionResult modal_expansion(const Spectrum& spec, const GeneratorMatrix& gen, const CVector& f,
                                const std::vector<double>& t_grid, double strip_cutoff,
                                ModalOptions opts = {});

/// Coefficients scaled by (1 + K_ii)^(-theta/2) (K diagonal).
CVector sobolev_weighted(const SpectralModel& model, const CVector& g, double theta);

struct ClusterOptions {
  double theta = 1.0;
  int k_max = -1;        ///< last cluster summed; -1 means every assigned cluster
  double tail_time = 1.0;
  int tail_fit_lo = -1; ///< k range of the log-log tail fit; -1 means k0 .. k_max
  int tail_fit_hi = -1;
};

/// Low-frequency modal sum plus cluster sums U_k(t) for k0 <= k <= k_max (each
/// with its reflected cluster). Outliers go with the low-frequency part.
ExpansionResult cluster_expansion(const ClusterReport& clusters, const Spectrum& spec,
                                  const GeneratorMatrix& gen, const SpectralModel& model,
                                  const CVector& f, const std::vector<double>& t_grid,
                                  ClusterOptions opts = {});

struct DecayOptions {
  int ensemble = 10;
  std::uint64_t seed = 20240601;
  double window_lo = 5.0;
  double window_hi = 30.0;
  double dt = 0.25;
};

struct DecayFit {
  double alpha_hat = 0.0;
  double D_hat = 0.0;
  double A_inf_hat = 0.0;
  double alpha_formula = 0.0;
  double ratio = 0.0;
  std::vector<double> slopes; ///< slope of log(E)/2 per datum
  std::vector<double> t;
  std::vector<std::vector<double>> energies;
  DecayOptions options;
};

/// Worst-case energy decay of seeded random Cauchy data projected off tau = 0.
DecayFit fit_decay_rate(const SpectralModel& model, const GeneratorMatrix& gen, const Spectrum& spec,
                        double D_hat, double A_inf_hat, DecayOptions opts = {});

/// Least-squares slope of y against x with its standard error.
std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Seeded complex Gaussian vector.
CVector random_vector(int n, std::uint64_t seed);

std::string expansion_csv(const ExpansionResult& r);
nlohmann::json to_json(const ExpansionResult& r);
nlohmann::json to_json(const DecayFit& d);

} // namespace dampwave
