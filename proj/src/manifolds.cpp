#include "dampwave/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dampwave/linalg.hpp"

namespace dampwave {

// ---------------------------------------------------------------------------
// Profiles

RevolutionProfile RevolutionProfile::round_sphere(double radius) {
  if (!(radius > 0.0))
    throw ValidationError("round sphere radius must be positive");
  RevolutionProfile p;
  p.name = "round_sphere";
  p.length = kPi * radius;
  p.r = [radius](double s) { return radius * std::sin(s / radius); };
  p.dr = [radius](double s) { return std::cos(s / radius); };
  p.d2r = [radius](double s) { return -std::sin(s / radius) / radius; };
  p.params = {{"kind", "round_sphere"}, {"radius", radius}};
  return p;
}

RevolutionProfile RevolutionProfile::sin_cubed(double eps) {
  if (!(eps > -1.0 / 3.0))
    throw ValidationError("sin_cubed profile needs eps > -1/3");
  RevolutionProfile p;
  p.name = "sin_cubed";
  p.length = kPi;
  p.r = [eps](double s) {
    const double sn = std::sin(s);
    return sn + eps * sn * sn * sn;
  };
  p.dr = [eps](double s) {
    const double sn = std::sin(s);
    return std::cos(s) * (1.0 + 3.0 * eps * sn * sn);
  };
  p.d2r = [eps](double s) {
    const double sn = std::sin(s), cs = std::cos(s);
    return -sn + eps * (6.0 * sn * cs * cs - 3.0 * sn * sn * sn);
  };
  p.params = {{"kind", "sin_cubed"}, {"eps", eps}};
  return p;
}

namespace {

/// Arclength inversion for the spheroid x = a sin(phi), z = b cos(phi).
struct SpheroidArclength {
  double a, b;
  std::vector<double> phi_nodes;
  std::vector<double> s_nodes;

  double speed(double phi) const {
    const double c = std::cos(phi), s = std::sin(phi);
    return std::sqrt(a * a * c * c + b * b * s * s);
  }

  SpheroidArclength(double a_, double b_) : a(a_), b(b_) {
    const int m = 512;
    phi_nodes.resize(m + 1);
    s_nodes.resize(m + 1);
    s_nodes[0] = 0.0;
    for (int j = 0; j <= m; ++j)
      phi_nodes[j] = kPi * j / m;
    for (int j = 1; j <= m; ++j) {
      double err = 0.0;
      s_nodes[j] = s_nodes[j - 1] + boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                                        [this](double t) { return speed(t); }, phi_nodes[j - 1],
                                        phi_nodes[j], 15, 1e-13, &err);
    }
  }

  double total() const { return s_nodes.back(); }

  double arclength(double phi) const {
    auto it = std::upper_bound(phi_nodes.begin(), phi_nodes.end(), phi);
    const std::size_t j = it == phi_nodes.begin() ? 0 : std::min<std::size_t>(it - phi_nodes.begin() - 1, phi_nodes.size() - 2);
    return s_nodes[j] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                            [this](double t) { return speed(t); }, phi_nodes[j], phi, 0, 0.0);
  }

  double invert(double s) const {
    s = std::clamp(s, 0.0, total());
    auto it = std::upper_bound(s_nodes.begin(), s_nodes.end(), s);
    const std::size_t j = it == s_nodes.begin() ? 0 : std::min<std::size_t>(it - s_nodes.begin() - 1, s_nodes.size() - 2);
    const double frac = (s - s_nodes[j]) / (s_nodes[j + 1] - s_nodes[j]);
    double phi = phi_nodes[j] + frac * (phi_nodes[j + 1] - phi_nodes[j]);
    for (int it2 = 0; it2 < 50; ++it2) {
      const double step = (arclength(phi) - s) / speed(phi);
      phi -= step;
      if (std::abs(step) < 1e-15)
        break;
    }
    return phi;
  }
};

} // namespace

RevolutionProfile RevolutionProfile::spheroid(double equatorial, double polar) {
  if (!(equatorial > 0.0 && polar > 0.0))
    throw ValidationError("spheroid semi-axes must be positive");
  auto arc = std::make_shared<SpheroidArclength>(equatorial, polar);
  RevolutionProfile p;
  p.name = "spheroid";
  p.length = arc->total();
  const double a = equatorial, b = polar;
  p.r = [arc, a](double s) { return a * std::sin(arc->invert(s)); };
  p.dr = [arc, a](double s) {
    const double phi = arc->invert(s);
    return a * std::cos(phi) / arc->speed(phi);
  };
  p.d2r = [arc, a, b](double s) {
    const double phi = arc->invert(s);
    const double g = arc->speed(phi);
    const double dg = (b * b - a * a) * std::sin(phi) * std::cos(phi) / g;
    return (-a * std::sin(phi) / g - a * std::cos(phi) * dg / (g * g)) / g;
  };
  p.params = {{"kind", "spheroid"}, {"equatorial", equatorial}, {"polar", polar}};
  return p;
}

RevolutionProfile RevolutionProfile::tabulated(double length, std::vector<double> samples) {
  if (samples.size() < 8 || !(length > 0.0))
    throw ValidationError("tabulated profile needs >= 8 samples and a positive length");
  const double h = length / double(samples.size() - 1);
  auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      samples.begin(), samples.end(), 0.0, h, 1.0, -1.0);
  RevolutionProfile p;
  p.name = "tabulated";
  p.length = length;
  p.r = [spline](double s) { return (*spline)(s); };
  p.dr = [spline](double s) { return spline->prime(s); };
  p.d2r = [spline](double s) { return spline->double_prime(s); };
  p.params = {{"kind", "tabulated"}, {"length", length}, {"samples", samples}};
  return p;
}

void RevolutionProfile::validate(int n) const {
  if (!r || !dr || !d2r || !(length > 0.0))
    throw ValidationError("revolution profile is incomplete");
  if (n < 3)
    throw ValidationError("profile validation grid too small");
  for (int i = 1; i < n - 1; ++i) {
    const double s = length * i / (n - 1);
    if (!(r(s) > 0.0))
      throw ValidationError("profile radius vanishes in the interior at s = " + std::to_string(s));
  }
  if (std::abs(dr(0.0) - 1.0) > 1e-6 || std::abs(dr(length) + 1.0) > 1e-6)
    throw ValidationError("profile does not close smoothly at the poles (r'(0) != 1 or r'(L) != -1)");
}

double RevolutionProfile::equator() const {
  const int n = 4000;
  double best = 0.0, s_best = 0.5 * length;
  for (int i = 1; i < n; ++i) {
    const double s = length * i / n;
    const double v = r(s);
    if (v > best) {
      best = v;
      s_best = s;
    }
  }
  double s = s_best;
  for (int it = 0; it < 50; ++it) {
    const double step = dr(s) / d2r(s);
    s -= step;
    if (std::abs(step) < 1e-15)
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Torus

SpectralModel build_torus_model(int kmax, const DampingSpec& damping) {
  if (kmax < 1)
    throw ValidationError("torus model needs kmax >= 1");
  const DampingRange range = damping.validate_for(GeometryKind::torus);
  const int deg = damping.trig_degree();
  if (deg > kmax)
    throw ValidationError("kmax = " + std::to_string(kmax) +
                          " cannot hold the damping spectrum (degree " + std::to_string(deg) + ")");

  struct Mode {
    int k1, k2;
  };
  std::vector<Mode> modes;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = -kmax; k2 <= kmax; ++k2)
      modes.push_back({k1, k2});
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    const int na = a.k1 * a.k1 + a.k2 * a.k2, nb = b.k1 * b.k1 + b.k2 * b.k2;
    if (na != nb)
      return na < nb;
    if (a.k1 != b.k1)
      return a.k1 < b.k1;
    return a.k2 < b.k2;
  });
  const int N = static_cast<int>(modes.size());

  SpectralModel model;
  model.geometry = GeometryKind::torus;
  model.truncation = kmax;
  model.dim = N;
  model.damping = damping;
  model.damping_sup = range.max;
  model.volume = 4.0 * kPi * kPi;
  model.K = CMatrix::Zero(N, N);
  model.A = CMatrix::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    model.K(i, i) = double(modes[i].k1 * modes[i].k1 + modes[i].k2 * modes[i].k2);
    model.basis_labels.push_back("e(" + std::to_string(modes[i].k1) + "," +
                                 std::to_string(modes[i].k2) + ")");
  }

  // dense lookup of hat a over offsets in [-2 kmax, 2 kmax]^2
  const int span = 4 * kmax + 1;
  std::vector<cplx> hat(static_cast<std::size_t>(span) * span);
  auto slot = [&](int d1, int d2) { return std::size_t(d1 + 2 * kmax) * span + (d2 + 2 * kmax); };
  if (damping.is_constant()) {
    hat[slot(0, 0)] = std::get<ConstantDamping>(damping.params()).value;
  } else {
    for (const auto& t : std::get<TrigDamping>(damping.params()).terms)
      hat[slot(t.k1, t.k2)] += t.coeff;
  }
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i)
      model.A(i, j) = hat[slot(modes[i].k1 - modes[j].k1, modes[i].k2 - modes[j].k2)];

  model.lambda_max = 2.0 * kmax * kmax;
  model.trust_radius = 0.5 * std::sqrt(model.lambda_max);
  model.constant_coeffs = CVector::Zero(N);
  model.constant_coeffs(0) = 2.0 * kPi;
  model.quadrature = {{"kind", "exact_convolution"}, {"damping_degree", deg}};
  return model;
}

// ---------------------------------------------------------------------------
// Sphere

namespace {

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16)
        break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

/// Fully normalised associated Legendre functions Q_l^m(x), so that
/// Y_l^0 = Q_l^0 and sqrt(2) Q_l^m cos(m phi) are orthonormal on S^2.
/// Result indexed [l][m], m <= l.
std::vector<std::vector<double>> normalized_legendre(int lmax, double x) {
  std::vector<std::vector<double>> q(lmax + 1);
  for (int l = 0; l <= lmax; ++l)
    q[l].assign(l + 1, 0.0);
  const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
  q[0][0] = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 1; m <= lmax; ++m)
    q[m][m] = q[m - 1][m - 1] * std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx;
  for (int m = 0; m < lmax; ++m)
    q[m + 1][m] = x * std::sqrt(2.0 * m + 3.0) * q[m][m];
  for (int m = 0; m <= lmax; ++m)
    for (int l = m + 2; l <= lmax; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                 (4.0 * double(l - 1) * (l - 1) - 1.0));
      q[l][m] = a * (x * q[l - 1][m] - b * q[l - 2][m]);
    }
  return q;
}

} // namespace

SpectralModel build_sphere_model(int lmax, const DampingSpec& damping, SphereQuadrature quadrature) {
  if (lmax < 2)
    throw ValidationError("sphere model needs lmax >= 2");
  const DampingRange range = damping.validate_for(GeometryKind::sphere);
  const int deg = damping.zonal_degree();
  if (2 * deg > lmax)
    throw ValidationError("zonal damping degree " + std::to_string(deg) + " exceeds lmax/2");
  const int need_theta = lmax + (deg + 2) / 2;
  const int need_phi = 2 * lmax + 1;
  const int n_theta = quadrature.n_theta ? quadrature.n_theta : need_theta;
  const int n_phi = quadrature.n_phi ? quadrature.n_phi : need_phi;
  if (n_theta < need_theta || n_phi < need_phi)
    throw ValidationError("sphere quadrature too coarse for exact assembly: need n_theta >= " +
                          std::to_string(need_theta) + " and n_phi >= " + std::to_string(need_phi));

  const int N = (lmax + 1) * (lmax + 1);
  SpectralModel model;
  model.geometry = GeometryKind::sphere;
  model.truncation = lmax;
  model.dim = N;
  model.damping = damping;
  model.damping_sup = range.max;
  model.volume = 4.0 * kPi;
  model.K = CMatrix::Zero(N, N);
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) {
      const int idx = l * l + (m + l);
      model.K(idx, idx) = double(l) * (l + 1);
      model.basis_labels.push_back("Y(" + std::to_string(l) + "," + std::to_string(m) + ")");
    }

  std::vector<double> xs, ws;
  gauss_legendre(n_theta, xs, ws);
  const int Q = n_theta * n_phi;
  RMatrix B(Q, N);
  RVector weight(Q);
  const double sqrt2 = std::sqrt(2.0);
  for (int it = 0; it < n_theta; ++it) {
    const auto leg = normalized_legendre(lmax, xs[it]);
    const double a_here = damping.at_sphere(xs[it]);
    for (int ip = 0; ip < n_phi; ++ip) {
      const int row = it * n_phi + ip;
      const double phi = 2.0 * kPi * ip / n_phi;
      weight(row) = ws[it] * (2.0 * kPi / n_phi) * a_here;
      for (int l = 0; l <= lmax; ++l) {
        B(row, l * l + l) = leg[l][0];
        for (int m = 1; m <= l; ++m) {
          B(row, l * l + l + m) = sqrt2 * leg[l][m] * std::cos(m * phi);
          B(row, l * l + l - m) = sqrt2 * leg[l][m] * std::sin(m * phi);
        }
      }
    }
  }
  RMatrix A = B.transpose() * weight.asDiagonal() * B;
  A = 0.5 * (A + A.transpose()).eval();
  model.A = A.cast<cplx>();

  model.lambda_max = double(lmax) * (lmax + 1);
  model.trust_radius = 0.5 * std::sqrt(model.lambda_max);
  model.constant_coeffs = CVector::Zero(N);
  model.constant_coeffs(0) = std::sqrt(4.0 * kPi);
  model.quadrature = {{"kind", "gauss_legendre_x_uniform"},
                      {"n_theta", n_theta},
                      {"n_phi", n_phi},
                      {"damping_degree", deg}};
  return model;
}

// ---------------------------------------------------------------------------
// Surface of revolution

SpectralModel build_revolution_model(const RevolutionProfile& profile, int m,
                                     const DampingSpec& damping, int n) {
  if (m < 0)
    throw ValidationError("angular mode m must be >= 0");
  if (n < 50)
    throw ValidationError("revolution model needs n >= 50 cells");
  profile.validate(std::max(n + 1, 64));
  const double L = profile.length;
  const DampingRange range = damping.validate_for(GeometryKind::revolution, L);
  const double h = L / n;

  std::vector<double> s(n), rc(n), rf(n + 1);
  for (int i = 0; i < n; ++i) {
    s[i] = (i + 0.5) * h;
    rc[i] = profile.r(s[i]);
    if (!(rc[i] > 0.0))
      throw ValidationError("profile radius vanishes at a cell centre");
  }
  for (int j = 0; j <= n; ++j)
    rf[j] = (j == 0 || j == n) ? 0.0 : profile.r(j * h);

  SpectralModel model;
  model.geometry = GeometryKind::revolution;
  model.truncation = n;
  model.revolution_mode = m;
  model.dim = n;
  model.damping = damping;
  model.damping_sup = range.max;
  model.profile = profile;
  model.grid = s;
  model.tri_diag.resize(n);
  model.tri_off.resize(n - 1);
  const double h2 = h * h;
  for (int i = 0; i < n; ++i)
    model.tri_diag(i) = (rf[i] + rf[i + 1]) / (h2 * rc[i]) + double(m) * m / (rc[i] * rc[i]);
  for (int i = 0; i + 1 < n; ++i)
    model.tri_off(i) = -rf[i + 1] / (h2 * std::sqrt(rc[i] * rc[i + 1]));

  model.K = CMatrix::Zero(n, n);
  model.A = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    model.K(i, i) = model.tri_diag(i);
    model.A(i, i) = damping.at_profile(s[i], L);
    model.basis_labels.push_back("w(" + std::to_string(i) + ")");
  }
  for (int i = 0; i + 1 < n; ++i)
    model.K(i, i + 1) = model.K(i + 1, i) = model.tri_off(i);

  const RVector ev = linalg::tridiagonal_eigenvalues(model.tri_diag, model.tri_off);
  model.lambda_max = ev.maxCoeff();
  model.trust_radius = 0.5 * std::sqrt(model.lambda_max);
  double vol = 0.0;
  for (int i = 0; i < n; ++i)
    vol += 2.0 * kPi * h * rc[i];
  model.volume = vol;
  if (m == 0) {
    model.constant_coeffs.resize(n);
    for (int i = 0; i < n; ++i)
      model.constant_coeffs(i) = std::sqrt(2.0 * kPi * h * rc[i]);
  }
  model.quadrature = {{"kind", "cell_centred_finite_volume"}, {"cells", n}, {"h", h}};
  return model;
}

// ---------------------------------------------------------------------------

ModelDiagnostics diagnose(const SpectralModel& model) {
  ModelDiagnostics d;
  d.k_asymmetry = (model.K - model.K.adjoint()).cwiseAbs().maxCoeff();
  d.a_asymmetry = (model.A - model.A.adjoint()).cwiseAbs().maxCoeff();
  const CMatrix Ks = 0.5 * (model.K + model.K.adjoint());
  const CMatrix As = 0.5 * (model.A + model.A.adjoint());
  d.k_min_eigenvalue = linalg::hermitian_eig(Ks, false).values.minCoeff();
  d.a_min_eigenvalue = linalg::hermitian_eig(As, false).values.minCoeff();
  if (model.has_constant())
    d.constant_residual = (model.K * model.constant_coeffs).norm() / model.constant_coeffs.norm();
  return d;
}

nlohmann::json model_to_json(const SpectralModel& model) {
  auto split = [&](const CMatrix& M, std::vector<double>& re, std::vector<double>& im) {
    re.reserve(M.size());
    im.reserve(M.size());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) {
        re.push_back(M(i, j).real());
        im.push_back(M(i, j).imag());
      }
  };
  std::vector<double> kre, kim, are, aim;
  split(model.K, kre, kim);
  split(model.A, are, aim);
  nlohmann::json j;
  j["geometry"] = to_string(model.geometry);
  j["dimension"] = model.dim;
  j["truncation"] = model.truncation;
  if (model.geometry == GeometryKind::revolution) {
    j["mode"] = model.revolution_mode;
    j["profile"] = model.profile->params;
  }
  j["basis"] = model.basis_labels;
  j["lambda_max"] = model.lambda_max;
  j["trust_radius"] = model.trust_radius;
  j["damping"] = model.damping.to_json();
  j["damping_sup"] = model.damping_sup;
  j["quadrature"] = model.quadrature;
  j["K"] = {{"re", kre}, {"im", kim}};
  j["A"] = {{"re", are}, {"im", aim}};
  return j;
}

} // namespace dampwave
