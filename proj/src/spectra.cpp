#include "dampwave/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dampwave/linalg.hpp"
#include "dampwave/report.hpp"

namespace dampwave {

GeneratorMatrix assemble_generator(const SpectralModel& model) {
  const int N = model.dim;
  GeneratorMatrix gen;
  gen.dim = N;
  gen.trust_radius = model.trust_radius;
  gen.damping_sup = model.damping_sup;
  gen.geometry = model.geometry;
  gen.G = CMatrix::Zero(2 * N, 2 * N);
  gen.G.topRightCorner(N, N).setIdentity();
  gen.G.bottomLeftCorner(N, N) = model.K;
  gen.G.bottomRightCorner(N, N) = 2.0 * kI * model.A;
  return gen;
}

double pencil_residual(const GeneratorMatrix& gen, cplx tau, const CVector& right) {
  const int N = gen.dim;
  const CVector u0 = right.head(N);
  const double nu = u0.norm();
  if (nu == 0.0)
    return std::numeric_limits<double>::infinity();
  const CVector r = gen.G.bottomLeftCorner(N, N) * u0 + tau * (gen.G.bottomRightCorner(N, N) * u0) -
                    tau * tau * u0;
  return r.norm() / ((1.0 + std::norm(tau)) * nu);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i)
      i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
};

bool tau_less(cplx a, cplx b) {
  if (a.real() != b.real())
    return a.real() < b.real();
  return a.imag() < b.imag();
}

double condition_number(const CMatrix& M) {
  Eigen::JacobiSVD<CMatrix> svd(M);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

} // namespace

Spectrum compute_eigenfrequencies(const GeneratorMatrix& gen, EigenOptions options) {
  if (options.tol <= 0.0)
    throw ValidationError("eigen tolerance must be positive");
  const int n2 = static_cast<int>(gen.G.rows());
  const int N = gen.dim;
  linalg::EigenSystem es = linalg::eig(gen.G, true);

  Spectrum spec;
  spec.dim = N;
  spec.trust_radius = gen.trust_radius;
  spec.damping_sup = gen.damping_sup;
  spec.converged = es.converged;
  spec.tol = options.tol;

  for (int j = 0; j < n2; ++j) {
    const double nr = es.right.col(j).norm();
    if (nr > 0.0)
      es.right.col(j) /= nr;
    const double nl = es.left.col(j).norm();
    if (nl > 0.0)
      es.left.col(j) /= nl;
  }

  // groups of numerically coincident eigenvalues
  std::vector<int> order(n2);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return tau_less(es.values(a), es.values(b)); });
  double max_abs = 0.0;
  for (int j = 0; j < n2; ++j)
    max_abs = std::max(max_abs, std::abs(es.values(j)));
  const double window = options.group_rel_tol * (1.0 + max_abs);
  UnionFind uf(n2);
  for (int p = 0; p < n2; ++p) {
    const cplx ti = es.values(order[p]);
    for (int q = p + 1; q < n2; ++q) {
      const cplx tj = es.values(order[q]);
      if (tj.real() - ti.real() > window)
        break;
      const double scale = 1.0 + std::max(std::abs(ti), std::abs(tj));
      if (std::abs(ti - tj) <= options.group_rel_tol * scale)
        uf.unite(order[p], order[q]);
    }
  }
  std::vector<std::vector<int>> raw_groups;
  {
    std::vector<int> slot(n2, -1);
    for (int idx : order) {
      const int root = uf.find(idx);
      if (slot[root] < 0) {
        slot[root] = static_cast<int>(raw_groups.size());
        raw_groups.emplace_back();
      }
      raw_groups[slot[root]].push_back(idx);
    }
  }

  // batched pencil residuals
  const CMatrix U0 = es.right.topRows(N);
  const CMatrix KU = gen.G.bottomLeftCorner(N, N) * U0;
  const CMatrix AU = gen.G.bottomRightCorner(N, N) * U0;

  for (const auto& members : raw_groups) {
    const int gid = static_cast<int>(spec.groups.size());
    const int m = static_cast<int>(members.size());
    CMatrix R(n2, m), L(n2, m);
    for (int j = 0; j < m; ++j) {
      R.col(j) = es.right.col(members[j]);
      L.col(j) = es.left.col(members[j]);
    }
    const CMatrix gram = L.adjoint() * R;
    const double cond = condition_number(gram);
    const double smin = Eigen::JacobiSVD<CMatrix>(gram).singularValues()(m - 1);
    const bool defective = !(cond <= options.defect_threshold) || smin < 1e-12;
    CMatrix dual = L;
    if (!defective)
      dual = L * gram.inverse().adjoint();

    std::vector<int> ids;
    for (int j = 0; j < m; ++j) {
      const int col = members[j];
      EigenRecord rec;
      rec.tau = es.values(col);
      rec.right = R.col(j);
      rec.left = dual.col(j);
      const double nu = U0.col(col).norm();
      const CVector res = KU.col(col) + rec.tau * AU.col(col) - rec.tau * rec.tau * U0.col(col);
      rec.residual = nu > 0.0 ? res.norm() / ((1.0 + std::norm(rec.tau)) * nu)
                              : std::numeric_limits<double>::infinity();
      rec.group_id = gid;
      rec.defective = defective;
      rec.trusted = spec.converged && std::abs(rec.tau.real()) <= spec.trust_radius &&
                    rec.residual <= options.tol;
      ids.push_back(static_cast<int>(spec.records.size()));
      spec.records.push_back(std::move(rec));
    }
    spec.groups.push_back(std::move(ids));
  }
  return spec;
}

ModeTerm::ModeTerm(std::vector<int> members, CMatrix right, CMatrix dual, CMatrix reduced,
                   bool schur_fallback)
    : members_(std::move(members)), right_(std::move(right)), dual_(std::move(dual)),
      reduced_(std::move(reduced)), schur_fallback_(schur_fallback) {}

cplx ModeTerm::center() const {
  return reduced_.rows() ? reduced_.trace() / static_cast<double>(reduced_.rows()) : cplx{};
}

CVector ModeTerm::evaluate(const CVector& coeffs, double t) const {
  const int r = rank();
  if (r == 1)
    return right_.col(0) * (std::exp(kI * t * reduced_(0, 0)) * coeffs(0));
  const CMatrix E = linalg::expm(kI * t * reduced_);
  return right_ * (E * coeffs);
}

CVector ModeTerm::apply(const CVector& state, double t) const {
  return evaluate(coefficients(state), t);
}

double ModeTerm::idempotency_residual() const {
  const int r = rank();
  if (r == 0)
    return 0.0;
  const CMatrix RR = right_.adjoint() * right_;
  const CMatrix DD = dual_.adjoint() * dual_;
  const CMatrix E = dual_.adjoint() * right_ - CMatrix::Identity(r, r);
  const double num = std::abs((E.adjoint() * RR * E * DD).trace());
  const double den = std::abs((RR * DD).trace());
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

ModeTerm spectral_projector(const Spectrum& spec, const GeneratorMatrix& gen,
                            const std::vector<int>& members) {
  if (members.empty())
    throw ValidationError("spectral_projector: empty group");
  const int n2 = static_cast<int>(gen.G.rows());
  const int m = static_cast<int>(members.size());
  bool defective = false;
  for (int id : members)
    defective = defective || spec.records.at(id).defective;

  if (!defective) {
    CMatrix R(n2, m), D(n2, m);
    for (int j = 0; j < m; ++j) {
      R.col(j) = spec.records[members[j]].right;
      D.col(j) = spec.records[members[j]].left;
    }
    // the records of one group are biorthogonal only among themselves
    const CMatrix gram = D.adjoint() * R;
    if ((gram - CMatrix::Identity(m, m)).norm() > 1e-8)
      D = D * gram.inverse().adjoint();
    CMatrix B = D.adjoint() * (gen.G * R);
    return ModeTerm(members, std::move(R), std::move(D), std::move(B), false);
  }

  cplx c{};
  for (int id : members)
    c += spec.records[id].tau;
  c /= static_cast<double>(m);
  double spread = 0.0;
  for (int id : members)
    spread = std::max(spread, std::abs(spec.records[id].tau - c));
  const double radius = std::max(10.0 * spread, 2e-6 * (1.0 + std::abs(c)));
  const CMatrix QR = linalg::invariant_subspace(gen.G, [&](cplx z) { return std::abs(z - c) <= radius; });
  const CMatrix QL = linalg::invariant_subspace(
      gen.G.adjoint(), [&](cplx z) { return std::abs(z - std::conj(c)) <= radius; });
  if (QR.cols() != QL.cols() || QR.cols() == 0)
    throw NumericalError("Schur projector: left/right invariant subspaces differ in dimension");
  const CMatrix cross = QR.adjoint() * QL;
  const CMatrix D = QL * cross.inverse();
  CMatrix B = D.adjoint() * (gen.G * QR);
  return ModeTerm(members, QR, D, std::move(B), true);
}

int group_nearest(const Spectrum& spec, cplx tau) {
  int best = -1;
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& rec : spec.records) {
    const double d = std::abs(rec.tau - tau);
    if (d < dist) {
      dist = d;
      best = rec.group_id;
    }
  }
  if (best < 0)
    throw ValidationError("group_nearest: empty spectrum");
  return best;
}

ResolventEvaluator::ResolventEvaluator(const SpectralModel& model) {
  const auto blocks = linalg::coupling_blocks({&model.K, &model.A});
  scale_ = 1.0 + model.lambda_max;
  for (const auto& idx : blocks) {
    Block b;
    b.idx = idx;
    const int n = static_cast<int>(idx.size());
    b.K.resize(n, n);
    b.A.resize(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        b.K(i, j) = model.K(idx[i], idx[j]);
        b.A(i, j) = model.A(idx[i], idx[j]);
      }
    const CMatrix KI = b.K + CMatrix::Identity(n, n);
    const auto he = linalg::hermitian_eig(KI, true);
    const RVector s = he.values.cwiseMax(1.0).cwiseSqrt();
    b.sqrtKI = he.vectors * s.cast<cplx>().asDiagonal() * he.vectors.adjoint();
    b.invSqrtKI = he.vectors * s.cwiseInverse().cast<cplx>().asDiagonal() * he.vectors.adjoint();
    blocks_.push_back(std::move(b));
  }
}

double ResolventEvaluator::l2(cplx tau) const {
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) {
    const int n = static_cast<int>(b.idx.size());
    const CMatrix P = b.K + 2.0 * kI * tau * b.A - tau * tau * CMatrix::Identity(n, n);
    smin = std::min(smin, linalg::smallest_singular_value(P));
  }
  if (!(smin > 1e-14 * (scale_ + std::norm(tau))))
    throw NumericalError("resolvent: tau is an eigenfrequency to working precision");
  return 1.0 / smin;
}

double ResolventEvaluator::energy(cplx tau) const {
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) {
    const int n = static_cast<int>(b.idx.size());
    const CMatrix I = CMatrix::Identity(n, n);
    CMatrix M(2 * n, 2 * n);
    M.topLeftCorner(n, n) = tau * I;
    M.topRightCorner(n, n) = -b.sqrtKI;
    M.bottomLeftCorner(n, n) = -b.K * b.invSqrtKI;
    M.bottomRightCorner(n, n) = tau * I - 2.0 * kI * b.A;
    smin = std::min(smin, linalg::smallest_singular_value(M));
  }
  if (!(smin > 1e-14 * (std::sqrt(scale_) + std::abs(tau))))
    throw NumericalError("resolvent: tau is an eigenfrequency to working precision");
  return 1.0 / smin;
}

double ResolventEvaluator::semiclassical(cplx z, double h) const {
  if (!(h > 0.0))
    throw ValidationError("semiclassical parameter h must be positive");
  const cplx sz = std::sqrt(z);
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) {
    const int n = static_cast<int>(b.idx.size());
    const CMatrix P = h * h * b.K + 2.0 * kI * h * sz * b.A - z * CMatrix::Identity(n, n);
    smin = std::min(smin, linalg::smallest_singular_value(P));
  }
  if (!(smin > 0.0))
    throw NumericalError("semiclassical resolvent: singular");
  return 1.0 / smin;
}

double resolvent_norm(const SpectralModel& model, cplx tau, NormSpace space, const Spectrum* spec) {
  if (spec) {
    for (const auto& rec : spec->records)
      if (std::abs(rec.tau - tau) <= 1e-10)
        throw NumericalError("resolvent: tau within 1e-10 of an eigenfrequency");
  }
  return ResolventEvaluator(model).norm(tau, space);
}

namespace {
std::string decade_label(double x) {
  if (x < 1.0)
    return "[0,1)";
  const int d = static_cast<int>(std::floor(std::log10(x)));
  const auto p = [](int e) {
    std::string s = "1";
    for (int i = 0; i < e; ++i)
      s += '0';
    return s;
  };
  return "[" + p(d) + "," + p(d + 1) + ")";
}
} // namespace

BandReport band_summary(const Spectrum& spec, const SpectralModel& model, double A_inf_hat,
                        double eps) {
  BandReport rep;
  rep.A_inf_hat = A_inf_hat;
  rep.eps = eps;
  bool any = false;
  rep.D_hat = std::numeric_limits<double>::infinity();
  rep.high_band_min_im = std::numeric_limits<double>::infinity();
  const double Lambda = spec.trust_radius;
  const double cut = A_inf_hat - eps;
  for (std::size_t i = 0; i < spec.records.size(); ++i) {
    const auto& rec = spec.records[i];
    if (!rec.trusted)
      continue;
    any = true;
    const double re = std::abs(rec.tau.real());
    const double im = rec.tau.imag();
    const bool zero = std::abs(rec.tau) <= 1e-8;
    if (zero) {
      if (rep.zero_mode_record < 0 && model.has_constant()) {
        const CVector u0 = rec.right.head(spec.dim);
        const CVector c = model.constant_coeffs.normalized();
        const double dev = (u0 - c * c.dot(u0)).norm() / u0.norm();
        if (dev <= 1e-6) {
          rep.zero_mode_ok = true;
          rep.zero_mode_record = static_cast<int>(i);
        }
      }
    } else {
      rep.D_hat = std::min(rep.D_hat, im);
      if (re >= 0.5 * Lambda && re <= Lambda)
        rep.high_band_min_im = std::min(rep.high_band_min_im, im);
    }
    if (im < cut) {
      rep.strip_counts[decade_label(re)] += 1;
      rep.strip_total += 1;
      if (!zero && re >= 0.5 * Lambda && re <= Lambda)
        rep.high_band_strip_count += 1;
    }
  }
  if (!any)
    throw ValidationError("band_summary: no trusted records");
  return rep;
}

ClusterReport cluster_partition(Spectrum& spec, GeometryKind geometry, int alpha, int k0,
                                bool trusted_only) {
  if (geometry != GeometryKind::sphere)
    throw ValidationError("cluster_partition requires the sphere (Zoll) geometry");
  if (k0 < 1)
    throw ValidationError("cluster_partition: k0 must be >= 1");
  ClusterReport rep;
  rep.maslov_alpha = alpha;
  rep.k0 = k0;
  const double shift = alpha / 4.0;
  std::map<int, Cluster> pos, neg;
  std::vector<std::pair<int, double>> assigned; // record, k * dev
  for (std::size_t i = 0; i < spec.records.size(); ++i) {
    auto& rec = spec.records[i];
    rec.cluster_k = 0;
    if (trusted_only && !rec.trusted)
      continue;
    const double x = std::abs(rec.tau.real());
    if (x < k0 - 0.25) {
      rep.low_modes.push_back(static_cast<int>(i));
      continue;
    }
    int k = static_cast<int>(std::ceil(x - shift - 0.5));
    k = std::max(k, k0);
    const double dev = std::abs(x - (k + shift));
    if (dev > 0.25) {
      rep.outliers.push_back(static_cast<int>(i));
      continue;
    }
    const int side = rec.tau.real() < 0.0 ? -1 : 1;
    auto& cl = side > 0 ? pos[k] : neg[k];
    cl.k = side * k;
    cl.members.push_back(static_cast<int>(i));
    rec.cluster_k = side * k;
    rep.C_fit = std::max(rep.C_fit, k * dev);
  }
  auto finish = [&](std::map<int, Cluster>& src, std::vector<Cluster>& dst) {
    for (auto& [k, cl] : src) {
      cl.lo = k + shift - rep.C_fit / k;
      cl.hi = k + shift + rep.C_fit / k;
      dst.push_back(std::move(cl));
    }
  };
  finish(pos, rep.clusters);
  finish(neg, rep.reflected);
  return rep;
}

RefinedMode refine_tridiagonal_mode(const SpectralModel& model, cplx tau0) {
  if (model.geometry != GeometryKind::revolution || model.tri_diag.size() != model.dim)
    throw ValidationError("refine_tridiagonal_mode needs a revolution model");
  const int n = model.dim;
  const RVector& d = model.tri_diag;
  const RVector& e = model.tri_off;
  RVector a(n);
  for (int i = 0; i < n; ++i)
    a(i) = model.A(i, i).real();

  RefinedMode out;
  cplx tau = tau0;
  std::vector<cplx> Dp(n), Dm(n), u(n);
  const double tiny = 1e-300;
  double prev_step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= 50; ++it) {
    out.iterations = it;
    // T(tau) = tridiag(e, d + 2 i tau a - tau^2, e)
    auto diag = [&](int i) { return d(i) + 2.0 * kI * tau * a(i) - tau * tau; };
    Dp[0] = diag(0);
    for (int i = 1; i < n; ++i) {
      if (Dp[i - 1] == cplx{})
        Dp[i - 1] = tiny;
      Dp[i] = diag(i) - e(i - 1) * e(i - 1) / Dp[i - 1];
    }
    Dm[n - 1] = diag(n - 1);
    for (int i = n - 2; i >= 0; --i) {
      if (Dm[i + 1] == cplx{})
        Dm[i + 1] = tiny;
      Dm[i] = diag(i) - e(i) * e(i) / Dm[i + 1];
    }
    int k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const cplx g = Dp[i] + Dm[i] - diag(i);
      if (std::abs(g) < best) {
        best = std::abs(g);
        k = i;
      }
    }
    u[k] = 1.0;
    for (int i = k - 1; i >= 0; --i)
      u[i] = -e(i) * u[i + 1] / Dp[i];
    for (int i = k + 1; i < n; ++i)
      u[i] = -e(i - 1) * u[i - 1] / Dm[i];
    // T(tau) is complex symmetric, so u^T T(t) u = 0 is the stationary
    // two-sided functional; its update converges quadratically
    cplx sk{}, sa{}, s1{};
    for (int i = 0; i < n; ++i) {
      const cplx u2 = u[i] * u[i];
      sk += d(i) * u2;
      sa += a(i) * u2;
      s1 += u2;
    }
    for (int i = 0; i + 1 < n; ++i)
      sk += 2.0 * e(i) * u[i] * u[i + 1];
    const cplx disc = std::sqrt(s1 * sk - sa * sa);
    const cplx t1 = (kI * sa + disc) / s1, t2 = (kI * sa - disc) / s1;
    const cplx next = std::abs(t1 - tau) <= std::abs(t2 - tau) ? t1 : t2;
    const double step = std::abs(next - tau);
    tau = next;
    const double scale = std::max(1.0, std::abs(tau));
    // stagnation at the rounding floor also counts
    if (step <= 1e-14 * scale || (it > 3 && step >= prev_step && step <= 1e-11 * scale)) {
      out.converged = true;
      break;
    }
    prev_step = step;
  }
  // report through <K u, u> and <A u, u>: exact for a true eigenpair and
  // keeps exponentially small Im tau to full relative accuracy
  {
    double nrm = 0.0;
    for (int i = 0; i < n; ++i)
      nrm += std::norm(u[i]);
    double ku = 0.0, au = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = std::norm(u[i]) / nrm;
      ku += d(i) * w;
      au += a(i) * w;
    }
    for (int i = 0; i + 1 < n; ++i)
      ku += 2.0 * e(i) * (std::conj(u[i]) * u[i + 1]).real() / nrm;
    const cplx root = std::sqrt(cplx(ku - au * au, 0.0));
    const cplx t1 = kI * au + root, t2 = kI * au - root;
    tau = std::abs(t1 - tau) <= std::abs(t2 - tau) ? t1 : t2;
  }
  out.tau = tau;
  out.weights.resize(n);
  double nrm = 0.0;
  for (int i = 0; i < n; ++i)
    nrm += std::norm(u[i]);
  for (int i = 0; i < n; ++i)
    out.weights(i) = std::norm(u[i]) / nrm;
  return out;
}

std::optional<WhisperingMode> whispering_mode(const SpectralModel& model, const Spectrum& spec,
                                              double mass_threshold) {
  if (model.geometry != GeometryKind::revolution)
    throw ValidationError("whispering modes are defined for revolution models");
  const int n = model.dim;
  std::optional<WhisperingMode> best;
  int candidates = 0;
  for (const auto& rec : spec.records) {
    if (!rec.trusted || rec.tau.real() <= 0.0)
      continue;
    const CVector u0 = rec.right.head(n);
    double damped = 0.0;
    for (int i = 0; i < n; ++i)
      if (model.A(i, i).real() > 0.0)
        damped += std::norm(u0(i));
    damped /= u0.squaredNorm();
    if (damped > mass_threshold)
      continue;
    ++candidates;
    const RefinedMode ref = refine_tridiagonal_mode(model, rec.tau);
    if (!ref.converged || std::abs(ref.tau - rec.tau) > 1e-6 * (1.0 + std::abs(rec.tau)))
      continue;
    if (!best || ref.tau.imag() < best->tau.imag())
      best = WhisperingMode{model.revolution_mode, rec.tau, ref.tau, damped, 0};
  }
  if (best)
    best->candidates = candidates;
  return best;
}

std::string spectrum_csv(const Spectrum& spec) {
  CsvTable t({"re_tau", "im_tau", "residual", "group_id", "trusted", "cluster_k"});
  for (const auto& rec : spec.records)
    t.raw_row({fmt17(rec.tau.real()), fmt17(rec.tau.imag()), fmt17(rec.residual),
               std::to_string(rec.group_id), rec.trusted ? "1" : "0",
               std::to_string(rec.cluster_k)});
  return t.str();
}

} // namespace dampwave
