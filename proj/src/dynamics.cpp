#include "dampwave/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <Eigen/Sparse>
#include <boost/numeric/odeint.hpp>

#include "dampwave/linalg.hpp"
#include "dampwave/report.hpp"

namespace dampwave {

namespace odeint = boost::numeric::odeint;

CVector FieldState::stacked() const {
  CVector X(u0.size() + u1.size());
  X << u0, u1;
  return X;
}

FieldState FieldState::from_stacked(double t, const CVector& X) {
  const Eigen::Index n = X.size() / 2;
  return FieldState{t, X.head(n), X.tail(n)};
}

namespace {

void check_grid(const std::vector<double>& t_grid) {
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (!(t_grid[i] >= 0.0) || (i && t_grid[i] < t_grid[i - 1]))
      throw ValidationError("time grid must be nonnegative and increasing");
}

const CMatrix& step_matrix(const GeneratorMatrix& gen, double dt) {
  auto& cache = *gen.step_cache;
  for (const auto& [d, S] : cache)
    if (std::abs(d - dt) <= 1e-14 * std::max(1.0, dt))
      return S;
  cache.emplace_back(dt, linalg::expm(kI * dt * gen.G));
  return cache.back().second;
}

std::vector<CMatrix> expm_states(const GeneratorMatrix& gen, const CMatrix& X0,
                                 const std::vector<double>& t_grid) {
  std::vector<CMatrix> out;
  out.reserve(t_grid.size());
  CMatrix X = X0;
  double prev = 0.0;
  for (double t : t_grid) {
    const double dt = t - prev;
    if (dt > 0.0)
      X = step_matrix(gen, dt) * X;
    out.push_back(X);
    prev = t;
  }
  return out;
}

using RealState = std::vector<double>;

std::vector<CVector> stepper_states(const GeneratorMatrix& gen, const CVector& X0,
                                    const std::vector<double>& t_grid, const StepperOptions& opts) {
  const int n2 = static_cast<int>(X0.size());
  const Eigen::SparseMatrix<cplx> iG = (kI * gen.G).sparseView(0.0, 0.0);
  auto rhs = [&](const RealState& x, RealState& dx, double) {
    Eigen::Map<const Eigen::VectorXd> re(x.data(), n2), im(x.data() + n2, n2);
    const CVector X = re.cast<cplx>() + kI * im.cast<cplx>();
    const CVector dX = iG * X;
    Eigen::Map<Eigen::VectorXd>(dx.data(), n2) = dX.real();
    Eigen::Map<Eigen::VectorXd>(dx.data() + n2, n2) = dX.imag();
  };
  RealState x(2 * n2);
  Eigen::Map<Eigen::VectorXd>(x.data(), n2) = X0.real();
  Eigen::Map<Eigen::VectorXd>(x.data() + n2, n2) = X0.imag();
  const double atol = opts.atol * std::max(X0.norm(), 1e-300);

  std::vector<CVector> out;
  out.reserve(t_grid.size());
  std::vector<double> times;
  if (t_grid.empty() || t_grid.front() > 0.0)
    times.push_back(0.0);
  times.insert(times.end(), t_grid.begin(), t_grid.end());
  auto observer = [&](const RealState& y, double t) {
    if (out.size() >= t_grid.size() || t < t_grid[out.size()])
      return;
    Eigen::Map<const Eigen::VectorXd> re(y.data(), n2), im(y.data() + n2, n2);
    out.push_back(re.cast<cplx>() + kI * im.cast<cplx>());
  };
  if (times.size() == 1) {
    observer(x, 0.0);
    return out;
  }
  auto stepper = odeint::make_dense_output(atol, opts.rtol, odeint::runge_kutta_dopri5<RealState>());
  odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3, observer,
                          odeint::max_step_checker(opts.max_steps));
  if (out.size() != t_grid.size())
    throw NumericalError("stepper did not reach every requested time");
  return out;
}

} // namespace

std::vector<FieldState> propagate_cauchy(const GeneratorMatrix& gen, const CVector& X0,
                                         const std::vector<double>& t_grid,
                                         PropagationMethod method, StepperOptions opts) {
  if (X0.size() != 2 * gen.dim)
    throw ValidationError("Cauchy data dimension does not match the model");
  if (!X0.allFinite())
    throw ValidationError("Cauchy data must be finite");
  check_grid(t_grid);
  std::vector<FieldState> out;
  if (method == PropagationMethod::expm) {
    const auto states = expm_states(gen, X0, t_grid);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      out.push_back(FieldState::from_stacked(t_grid[i], states[i].col(0)));
  } else {
    std::vector<CVector> states;
    try {
      states = stepper_states(gen, X0, t_grid, opts);
    } catch (const odeint::step_adjustment_error& e) {
      throw NumericalError(std::string("stepper: ") + e.what());
    } catch (const odeint::no_progress_error& e) {
      throw NumericalError(std::string("stepper: ") + e.what());
    }
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      out.push_back(FieldState::from_stacked(t_grid[i], states[i]));
  }
  return out;
}

std::vector<FieldState> propagate(const GeneratorMatrix& gen, const CVector& f,
                                  const std::vector<double>& t_grid, PropagationMethod method,
                                  StepperOptions opts) {
  if (f.size() != gen.dim)
    throw ValidationError("data dimension does not match the model");
  CVector X0 = CVector::Zero(2 * gen.dim);
  X0.tail(gen.dim) = f;
  return propagate_cauchy(gen, X0, t_grid, method, opts);
}

double energy(const FieldState& state, const SpectralModel& model) {
  if (state.u0.size() != model.dim || state.u1.size() != model.dim)
    throw ValidationError("state dimension does not match the model");
  const double pot = state.u0.dot(model.K * state.u0).real();
  return 0.5 * (pot + state.u1.squaredNorm());
}

cplx zero_mode(const CVector& f, const SpectralModel& model) {
  if (!model.has_constant())
    throw ValidationError("the constant function is not in this basis");
  if (f.size() != model.dim)
    throw ValidationError("data dimension does not match the model");
  const CVector& c = model.constant_coeffs;
  const double int_a = c.dot(model.A * c).real();
  if (!(int_a > 0.0))
    throw ValidationError("zero_mode needs a damping with positive integral");
  return kI * c.dot(f) / (2.0 * int_a);
}

double default_strip_eps(const Spectrum& spec, double A_inf_hat) {
  double below = 0.0;
  for (const auto& rec : spec.records)
    if (rec.trusted && rec.tau.imag() < A_inf_hat)
      below = std::max(below, rec.tau.imag());
  return 0.5 * (A_inf_hat - below);
}

std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - my - slope * (x[i] - mx);
    sse += r * r;
  }
  const double stderr_ = n > 2 ? std::sqrt(sse / double(n - 2) / sxx) : 0.0;
  return {slope, stderr_};
}

CVector random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CVector v(n);
  for (int i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

namespace {

cplx group_center(const Spectrum& spec, const std::vector<int>& members) {
  cplx c{};
  for (int id : members)
    c += spec.records[id].tau;
  return c / static_cast<double>(members.size());
}

void fit_error_window(ExpansionResult& r, double lo, double hi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.t.size(); ++i)
    if (r.t[i] >= lo && r.t[i] <= hi && r.error[i] > 1e3 * r.floor[i]) {
      xs.push_back(r.t[i]);
      ys.push_back(std::log(r.error[i]));
    }
  r.fit_points = static_cast<int>(xs.size());
  r.window_lo = xs.empty() ? lo : xs.front();
  r.window_hi = xs.empty() ? lo : xs.back();
  std::tie(r.fitted_slope, r.slope_stderr) = ols_slope(xs, ys);
}

} // namespace

ExpansionResult modal_expansion(const Spectrum& spec, const GeneratorMatrix& gen, const CVector& f,
                                const std::vector<double>& t_grid, double strip_cutoff,
                                ModalOptions opts) {
  const int N = gen.dim;
  if (f.size() != N)
    throw ValidationError("data dimension does not match the model");
  for (const auto& rec : spec.records)
    if (rec.trusted && std::abs(rec.tau.imag() - strip_cutoff) < 1e-3)
      throw ValidationError("strip cutoff " + fmt17(strip_cutoff) +
                            " lies within 1e-3 of an eigenfrequency");
  CVector X0 = CVector::Zero(2 * N);
  X0.tail(N) = f;

  ExpansionResult r;
  std::vector<ModeTerm> terms;
  std::vector<CVector> coeffs;
  double cond_sum = 1.0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const auto& members = spec.groups[g];
    if (group_center(spec, members).imag() >= strip_cutoff)
      continue;
    terms.push_back(spectral_projector(spec, gen, members));
    coeffs.push_back(terms.back().coefficients(X0));
    cond_sum += terms.back().right().norm() * terms.back().dual().norm();
    r.included.push_back(static_cast<int>(g));
    for (int id : members)
      r.untrusted_included += spec.records[id].trusted ? 0 : 1;
  }
  const auto oracle = propagate_cauchy(gen, X0, t_grid, PropagationMethod::expm);
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    CVector sum = CVector::Zero(N);
    for (std::size_t k = 0; k < terms.size(); ++k)
      sum += terms[k].evaluate(coeffs[k], t_grid[i]).head(N);
    r.t.push_back(t_grid[i]);
    r.error.push_back((oracle[i].u0 - sum).norm());
    r.floor.push_back(eps * cond_sum * X0.norm());
    r.partial_sum.push_back(std::move(sum));
  }
  fit_error_window(r, opts.window_lo, opts.window_hi);
  return r;
}

CVector sobolev_weighted(const SpectralModel& model, const CVector& g, double theta) {
  if (g.size() != model.dim)
    throw ValidationError("data dimension does not match the model");
  CVector f = g;
  for (int i = 0; i < model.dim; ++i)
    f(i) *= std::pow(1.0 + model.K(i, i).real(), -0.5 * theta);
  return f;
}

ExpansionResult cluster_expansion(const ClusterReport& clusters, const Spectrum& spec,
                                  const GeneratorMatrix& gen, const SpectralModel& model,
                                  const CVector& f, const std::vector<double>& t_grid,
                                  ClusterOptions opts) {
  if (model.geometry != GeometryKind::sphere)
    throw ValidationError("cluster_expansion needs the sphere model");
  if (!(opts.theta > 0.0))
    throw ValidationError("cluster expansion needs theta > 0");
  const int N = gen.dim;
  if (f.size() != N)
    throw ValidationError("data dimension does not match the model");
  if (t_grid.empty())
    throw ValidationError("cluster expansion needs at least one time");
  CVector X0 = CVector::Zero(2 * N);
  X0.tail(N) = f;

  int k_top = clusters.k0 - 1;
  for (const auto& c : clusters.clusters)
    k_top = std::max(k_top, c.k);
  for (const auto& c : clusters.reflected)
    k_top = std::max(k_top, -c.k);
  const int k_max = opts.k_max < 0 ? k_top : std::min(opts.k_max, k_top);

  // group -> |cluster index| (0 = low-frequency part)
  std::map<int, std::vector<ModeTerm>> by_k;
  for (const auto& members : spec.groups) {
    const int k = std::abs(spec.records[members.front()].cluster_k);
    if (k > k_max)
      continue;
    by_k[k].push_back(spectral_projector(spec, gen, members));
  }

  ExpansionResult r;
  for (const auto& [k, terms] : by_k)
    if (k > 0)
      r.included.push_back(k);

  const auto oracle = propagate_cauchy(gen, X0, t_grid, PropagationMethod::expm);
  std::map<int, CVector> last_by_k;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    CVector sum = CVector::Zero(N);
    for (const auto& [k, terms] : by_k) {
      CVector part = CVector::Zero(N);
      for (const auto& term : terms)
        part += term.apply(X0, t_grid[i]).head(N);
      sum += part;
      if (i + 1 == t_grid.size())
        last_by_k[k] = part;
    }
    r.t.push_back(t_grid[i]);
    r.error.push_back((oracle[i].u0 - sum).norm());
    r.floor.push_back(std::numeric_limits<double>::epsilon() * X0.norm());
    r.partial_sum.push_back(std::move(sum));
  }
  const double ref = oracle.back().u0.norm();
  CVector acc = last_by_k.count(0) ? last_by_k[0] : CVector::Zero(N);
  for (int k = clusters.k0; k <= k_max; ++k) {
    if (last_by_k.count(k))
      acc += last_by_k[k];
    r.error_by_K.push_back((oracle.back().u0 - acc).norm() / ref);
  }

  // |U_k(t)| from H^theta to L2
  RVector w(N);
  for (int i = 0; i < N; ++i)
    w(i) = std::pow(1.0 + model.K(i, i).real(), -0.5 * opts.theta);
  std::vector<double> lx, ly;
  for (const auto& [k, terms] : by_k) {
    if (k == 0)
      continue;
    int rank = 0;
    for (const auto& term : terms)
      rank += term.rank();
    CMatrix U(N, rank), V(N, rank), M = CMatrix::Zero(rank, rank);
    int off = 0;
    for (const auto& term : terms) {
      const int m = term.rank();
      U.middleCols(off, m) = term.right().topRows(N);
      V.middleCols(off, m) = w.cast<cplx>().asDiagonal() * term.dual().bottomRows(N);
      M.block(off, off, m, m) = m == 1 ? CMatrix::Constant(1, 1, std::exp(kI * opts.tail_time * term.reduced()(0, 0)))
                                       : linalg::expm(kI * opts.tail_time * term.reduced());
      off += m;
    }
    const double nrm = linalg::low_rank_norm(U, M, V);
    r.tail_k.push_back(k);
    r.tail_norms.push_back(nrm);
    const int fit_lo = opts.tail_fit_lo < 0 ? clusters.k0 : opts.tail_fit_lo;
    const int fit_hi = opts.tail_fit_hi < 0 ? k_max : opts.tail_fit_hi;
    if (k >= fit_lo && k <= fit_hi && nrm > 0.0) {
      lx.push_back(std::log(double(k)));
      ly.push_back(std::log(nrm));
    }
  }
  r.tail_slope = ols_slope(lx, ly).first;
  fit_error_window(r, t_grid.front(), t_grid.back());
  return r;
}

DecayFit fit_decay_rate(const SpectralModel& model, const GeneratorMatrix& gen, const Spectrum& spec,
                        double D_hat, double A_inf_hat, DecayOptions opts) {
  if (opts.ensemble < 10)
    throw ValidationError("decay fit needs an ensemble of at least 10 data");
  if (!(opts.window_lo >= 0.0 && opts.window_hi > opts.window_lo && opts.dt > 0.0))
    throw ValidationError("invalid decay window");
  const int N = gen.dim;
  DecayFit out;
  out.options = opts;
  out.D_hat = D_hat;
  out.A_inf_hat = A_inf_hat;
  out.alpha_formula = 2.0 * std::min(D_hat, A_inf_hat);

  CMatrix X(2 * N, opts.ensemble);
  for (int j = 0; j < opts.ensemble; ++j)
    X.col(j) = random_vector(2 * N, opts.seed + static_cast<std::uint64_t>(j));
  int zero_group = -1;
  for (const auto& rec : spec.records)
    if (std::abs(rec.tau) <= 1e-8)
      zero_group = rec.group_id;
  if (zero_group >= 0) {
    const ModeTerm pi0 = spectral_projector(spec, gen, spec.groups[zero_group]);
    X -= pi0.right() * (pi0.dual().adjoint() * X);
  }

  const int steps = static_cast<int>(std::llround(opts.window_hi / opts.dt));
  std::vector<double> grid;
  for (int s = 0; s <= steps; ++s)
    grid.push_back(s * opts.dt);
  const auto states = expm_states(gen, X, grid);
  out.t = grid;
  out.energies.assign(opts.ensemble, {});
  for (int j = 0; j < opts.ensemble; ++j) {
    std::vector<double> xs, ys;
    double E0 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double E = energy(FieldState::from_stacked(grid[i], states[i].col(j)), model);
      if (i == 0)
        E0 = E;
      out.energies[j].push_back(E);
      if (grid[i] >= opts.window_lo - 1e-12) {
        if (!(E > 1e-14 * E0))
          throw NumericalError("energy fell below the 1e-14 floor inside the window; shrink it");
        xs.push_back(grid[i]);
        ys.push_back(0.5 * std::log(E));
      }
    }
    out.slopes.push_back(ols_slope(xs, ys).first);
  }
  out.alpha_hat = -2.0 * *std::max_element(out.slopes.begin(), out.slopes.end());
  out.ratio = out.alpha_formula > 0.0 ? out.alpha_hat / out.alpha_formula
                                      : std::numeric_limits<double>::infinity();
  return out;
}

std::string expansion_csv(const ExpansionResult& r) {
  CsvTable t({"t", "error", "floor"});
  for (std::size_t i = 0; i < r.t.size(); ++i)
    t.row({r.t[i], r.error[i], r.floor[i]});
  return t.str();
}

nlohmann::json to_json(const ExpansionResult& r) {
  return {{"included", r.included},
          {"untrusted_included", r.untrusted_included},
          {"window", {r.window_lo, r.window_hi}},
          {"fitted_slope", r.fitted_slope},
          {"slope_stderr", r.slope_stderr},
          {"fit_points", r.fit_points},
          {"tail_k", r.tail_k},
          {"tail_norms", r.tail_norms},
          {"tail_slope", r.tail_slope},
          {"error_by_K", r.error_by_K}};
}

nlohmann::json to_json(const DecayFit& d) {
  return {{"alpha_hat", d.alpha_hat},
          {"D_hat", d.D_hat},
          {"A_inf_hat", d.A_inf_hat},
          {"alpha_formula", d.alpha_formula},
          {"ratio", d.ratio},
          {"slopes", d.slopes},
          {"window", {d.options.window_lo, d.options.window_hi}},
          {"dt", d.options.dt},
          {"ensemble", d.options.ensemble},
          {"seed", d.options.seed}};
}

} // namespace dampwave
