#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dampwave/manifolds.hpp"
#include "dampwave/types.hpp"

namespace dampwave {

/// Discretised generator acting on Cauchy data (u0, u1): blocks (0, I; K, 2iA).
struct GeneratorMatrix {
  CMatrix G;
  int dim = 0; ///< N; G is 2N x 2N
  double trust_radius = 0.0;
  double damping_sup = 0.0;
  GeometryKind geometry = GeometryKind::torus;
  /// exp(i dt G) step matrices computed so far, shared by copies.
  std::shared_ptr<std::deque<std::pair<double, CMatrix>>> step_cache =
      std::make_shared<std::deque<std::pair<double, CMatrix>>>();

  CVector apply(const CVector& state) const { return G * state; }
};

GeneratorMatrix assemble_generator(const SpectralModel& model);

struct EigenRecord {
  cplx tau{};
  CVector right; ///< 2N, unit norm
  CVector left;  ///< 2N, dual to right within its group: <left_i, right_j> = delta_ij
  double residual = 0.0;
  int group_id = -1;
  bool trusted = false;
  bool defective = false; ///< group biorthogonal system is ill-conditioned
  int cluster_k = 0;      ///< signed cluster index, 0 when unassigned
};

struct Spectrum {
  std::vector<EigenRecord> records;
  std::vector<std::vector<int>> groups; ///< record indices per group id
  int dim = 0;
  double trust_radius = 0.0;
  double damping_sup = 0.0;
  bool converged = true;
  double tol = 1e-8;
};

struct EigenOptions {
  double tol = 1e-8;             ///< residual threshold for the trusted flag
  double group_rel_tol = 1e-6;   ///< |tau_i - tau_j| <= group_rel_tol (1 + |tau|)
  double defect_threshold = 1e8; ///< condition of the group Gram matrix
};

/// Full dense eigensolve of the generator with biorthogonalised left/right
/// vectors, pencil residuals and trust flags.
Spectrum compute_eigenfrequencies(const GeneratorMatrix& gen, EigenOptions options = {});

/// Relative pencil residual |P(tau) u0| / ((1 + |tau|^2) |u0|) using the blocks of G.
double pencil_residual(const GeneratorMatrix& gen, cplx tau, const CVector& right);

/// Restriction of the propagator to the invariant subspace of one group:
/// state(t) = right * exp(i t reduced) * dual^H * state(0).
class ModeTerm {
public:
  ModeTerm() = default;
  ModeTerm(std::vector<int> members, CMatrix right, CMatrix dual, CMatrix reduced,
           bool schur_fallback);

  const std::vector<int>& members() const { return members_; }
  const CMatrix& right() const { return right_; }
  const CMatrix& dual() const { return dual_; }
  const CMatrix& reduced() const { return reduced_; }
  int rank() const { return static_cast<int>(right_.cols()); }
  bool schur_fallback() const { return schur_fallback_; }
  cplx center() const;

  /// e^{i tau t} p_tau(t) applied to Cauchy data.
  CVector apply(const CVector& state, double t) const;
  /// Coefficients dual^H * state; evaluate(c, t) = right * exp(i t reduced) * c.
  CVector coefficients(const CVector& state) const { return dual_.adjoint() * state; }
  CVector evaluate(const CVector& coeffs, double t) const;
  CMatrix projector() const { return right_ * dual_.adjoint(); }
  /// |Pi^2 - Pi|_F / |Pi|_F
  double idempotency_residual() const;

private:
  std::vector<int> members_;
  CMatrix right_;
  CMatrix dual_;
  CMatrix reduced_;
  bool schur_fallback_ = false;
};

/// Spectral projector term for one group (record indices into spec.records).
/// Ill-conditioned groups fall back to a Schur-based invariant-subspace projector.
ModeTerm spectral_projector(const Spectrum& spec, const GeneratorMatrix& gen,
                            const std::vector<int>& members);

/// Group containing the eigenfrequency closest to tau.
int group_nearest(const Spectrum& spec, cplx tau);

enum class NormSpace { L2, H };

/// Resolvent norms of one model, with the block structure of K and A exploited.
class ResolventEvaluator {
public:
  explicit ResolventEvaluator(const SpectralModel& model);

  /// |R(tau)| = 1 / sigma_min(K + 2 i tau A - tau^2).
  double l2(cplx tau) const;
  /// |W (tau - G)^{-1} W^{-1}| with W = diag((K+I)^{1/2}, I).
  double energy(cplx tau) const;
  double norm(cplx tau, NormSpace space) const { return space == NormSpace::L2 ? l2(tau) : energy(tau); }
  /// |(P_h - z)^{-1}| with P_h - z = h^2 K + 2 i h sqrt(z) A - z.
  double semiclassical(cplx z, double h) const;
  std::size_t block_count() const { return blocks_.size(); }

private:
  struct Block {
    std::vector<int> idx;
    CMatrix K, A, sqrtKI, invSqrtKI;
  };
  std::vector<Block> blocks_;
  double scale_ = 1.0;
};

/// Convenience wrapper; when `spec` is given, tau within 1e-10 of a computed
/// eigenfrequency is rejected before any factorisation.
double resolvent_norm(const SpectralModel& model, cplx tau, NormSpace space,
                      const Spectrum* spec = nullptr);

struct BandReport {
  double D_hat = 0.0;
  double A_inf_hat = 0.0;
  double eps = 0.0;
  /// counts of trusted records with Im tau < A_inf_hat - eps, keyed by |Re tau| decade
  std::map<std::string, int> strip_counts;
  int strip_total = 0;
  int high_band_strip_count = 0;         ///< strip members with |Re tau| in [Lambda/2, Lambda]
  double high_band_min_im = 0.0;         ///< min Im tau over trusted nonzero records in [Lambda/2, Lambda]
  bool zero_mode_ok = false;
  int zero_mode_record = -1;
};

BandReport band_summary(const Spectrum& spec, const SpectralModel& model, double A_inf_hat,
                        double eps);

struct Cluster {
  int k = 0; ///< signed: negative for the reflected side
  std::vector<int> members;
  double lo = 0.0, hi = 0.0; ///< bounds of |Re tau| rectangle
};

struct ClusterReport {
  int maslov_alpha = 2;
  int k0 = 1;
  double C_fit = 0.0;
  std::vector<Cluster> clusters;  ///< k >= k0
  std::vector<Cluster> reflected; ///< mirror clusters with Re tau <= -(k0 - 1/4)
  std::vector<int> outliers;
  std::vector<int> low_modes; ///< |Re tau| < k0 - 1/4
};

/// Assigns records with |Re tau| >= k0 - 1/4 to the nearest centre k + alpha/4
/// (ties toward smaller k). Records farther than 1/4 from every centre, or
/// farther than 3 C_fit / k, are outliers. By default only trusted records
/// are assigned; untrusted ones then count as outliers.
ClusterReport cluster_partition(Spectrum& spec, GeometryKind geometry, int alpha, int k0,
                                bool trusted_only = true);

/// Rayleigh-functional refinement of one eigenfrequency of a tridiagonal
/// pencil (revolution models), using twisted factorisations so that
/// exponentially small eigenvector tails keep full relative accuracy.
/// Im tau is returned as <A u, u> / <u, u>, exact for any true eigenpair.
struct RefinedMode {
  cplx tau{};
  RVector weights; ///< |u_i|^2 normalised
  int iterations = 0;
  bool converged = false;
};
RefinedMode refine_tridiagonal_mode(const SpectralModel& model, cplx tau0);

/// Whispering record of a revolution mode: trusted, Re tau > 0, with at most
/// `mass_threshold` of |u0|^2 where a > 0; the one of least refined Im tau.
struct WhisperingMode {
  int m = 0;
  cplx tau_dense{};
  cplx tau{}; ///< refined
  double damped_mass = 0.0;
  int candidates = 0;
};
std::optional<WhisperingMode> whispering_mode(const SpectralModel& model, const Spectrum& spec,
                                              double mass_threshold = 1e-2);

/// Eigenfrequency table rows: re_tau, im_tau, residual, group_id, trusted, cluster_k.
std::string spectrum_csv(const Spectrum& spec);

} // namespace dampwave
