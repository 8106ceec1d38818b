#include <doctest.h>

#include <cmath>

#include "dampwave/dynamics.hpp"

using namespace dampwave;

namespace {

std::vector<double> grid(double hi, double dt) {
  std::vector<double> t;
  for (int i = 0; i <= static_cast<int>(std::llround(hi / dt)); ++i)
    t.push_back(i * dt);
  return t;
}

} // namespace

TEST_CASE("propagator at t = 0 is (0, f)") {
  const auto m = build_torus_model(2, DampingSpec::constant(0.1));
  const auto gen = assemble_generator(m);
  const CVector f = random_vector(m.dim, 3);
  for (auto method : {PropagationMethod::expm, PropagationMethod::stepper}) {
    const auto s = propagate(gen, f, {0.0, 1.0}, method);
    CHECK(s[0].u0.norm() == 0.0);
    CHECK((s[0].u1 - f).norm() == 0.0);
  }
}

TEST_CASE("undamped propagator is i sin(t sqrt(lambda)) / sqrt(lambda)") {
  const auto m = build_torus_model(2, DampingSpec::zero());
  const auto gen = assemble_generator(m);
  int k = -1;
  for (int i = 0; i < m.dim; ++i)
    if (std::abs(m.K(i, i).real() - 5.0) < 1e-12)
      k = i;
  REQUIRE(k >= 0);
  CVector f = CVector::Zero(m.dim);
  f(k) = 1.0;
  const auto t = grid(10.0, 0.5);
  const auto s = propagate(gen, f, t, PropagationMethod::expm);
  const double w = std::sqrt(5.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CVector expected = CVector::Zero(m.dim);
    expected(k) = kI * std::sin(w * t[i]) / w;
    CHECK((s[i].u0 - expected).norm() <= 1e-10);
  }
}

TEST_CASE("energy") {
  const auto m = build_torus_model(2, DampingSpec::constant(0.1));
  FieldState st;
  st.u0 = m.constant_coeffs;
  st.u1 = CVector::Zero(m.dim);
  CHECK(energy(st, m) == doctest::Approx(0.0).scale(1.0));
  st.u0 = CVector::Zero(m.dim);
  st.u1 = CVector::Zero(m.dim);
  st.u1(3) = 1.0;
  CHECK(energy(st, m) == doctest::Approx(0.5));

  // conservative case
  const auto m0 = build_sphere_model(4, DampingSpec::zero());
  const auto gen = assemble_generator(m0);
  CVector X = random_vector(2 * m0.dim, 5);
  const auto s = propagate_cauchy(gen, X, grid(10.0, 1.0), PropagationMethod::expm);
  const double E0 = energy(s[0], m0);
  for (const auto& x : s)
    CHECK(std::abs(energy(x, m0) - E0) <= 1e-9 * E0);
}

TEST_CASE("energy is nonincreasing with damping") {
  const auto m = build_sphere_model(8, DampingSpec::zonal_caps(0.5, 4));
  const auto gen = assemble_generator(m);
  const auto s = propagate_cauchy(gen, random_vector(2 * m.dim, 11), grid(20.0, 0.25),
                                  PropagationMethod::expm);
  const double E0 = energy(s[0], m);
  for (std::size_t i = 1; i < s.size(); ++i)
    CHECK(energy(s[i], m) <= energy(s[i - 1], m) + 1e-10 * E0);
}

TEST_CASE("expm and stepper agree") {
  const auto m = build_torus_model(4, DampingSpec::trig({{0, 0, 0.1}, {1, 0, 0.05}, {-1, 0, 0.05}}));
  const auto gen = assemble_generator(m);
  const CVector f = random_vector(m.dim, 2024);
  const auto t = grid(20.0, 1.0);
  const auto a = propagate(gen, f, t, PropagationMethod::expm);
  const auto b = propagate(gen, f, t, PropagationMethod::stepper);
  for (std::size_t i = 1; i < t.size(); ++i)
    CHECK((a[i].u0 - b[i].u0).norm() <= 1e-7 * a[i].u0.norm());
}

TEST_CASE("zero mode formula") {
  const double c = 0.25;
  const auto m = build_torus_model(2, DampingSpec::constant(c));
  // f = 1
  const cplx z = zero_mode(m.constant_coeffs, m);
  CHECK(std::abs(z - kI / (2 * c)) < 1e-14);
  // zero mean
  CVector f = random_vector(m.dim, 9);
  const CVector cn = m.constant_coeffs.normalized();
  f -= cn * cn.dot(f);
  CHECK(std::abs(zero_mode(f, m)) < 1e-14);

  const auto m0 = build_torus_model(1, DampingSpec::zero());
  CHECK_THROWS_AS(zero_mode(m0.constant_coeffs, m0), ValidationError);
}

TEST_CASE("modal expansion with constant damping") {
  const double c = 0.3;
  const auto m = build_torus_model(3, DampingSpec::constant(c));
  const auto gen = assemble_generator(m);
  const auto spec = compute_eigenfrequencies(gen);
  CVector f = random_vector(m.dim, 17);
  const auto t = grid(20.0, 0.25);

  const auto r = modal_expansion(spec, gen, f, t, 0.5 * c);
  REQUIRE(r.included.size() == 1);
  CHECK(std::abs(spec.records[spec.groups[r.included[0]].front()].tau) < 1e-8);
  // partial sum is the constant i int f / int 2a
  const CVector expected = zero_mode(f, m) * m.constant_coeffs;
  CHECK((r.partial_sum.back() - expected).norm() < 1e-10 * f.norm());
  CHECK(std::abs(r.fitted_slope + c) <= 0.05);

  // every mode included reproduces the propagator
  const auto all = modal_expansion(spec, gen, f, {0.0, 1.0}, 2 * c + 1.0);
  CHECK(all.error.back() <= 1e-7 * f.norm());

  // cutoff on a mode
  CHECK_THROWS_AS(modal_expansion(spec, gen, f, t, c), ValidationError);
}

TEST_CASE("cluster expansion of single-degree data") {
  // constant damping does not couple different l
  const auto m = build_sphere_model(8, DampingSpec::constant(0.1));
  const auto gen = assemble_generator(m);
  auto spec = compute_eigenfrequencies(gen);
  const auto rep = cluster_partition(spec, GeometryKind::sphere, 2, 1, false);
  CVector f = CVector::Zero(m.dim);
  for (int i = 0; i < m.dim; ++i)
    if (std::abs(m.K(i, i).real() - 6.0) < 1e-12) // l = 2
      f(i) = 1.0 / (i + 1.0);
  ClusterOptions opts;
  opts.k_max = 4;
  const auto r = cluster_expansion(rep, spec, gen, m, f, {0.0, 1.0}, opts);
  REQUIRE(r.error_by_K.size() == 4);
  CHECK(r.error_by_K[0] > 0.5);       // k = 1 alone misses everything
  CHECK(r.error_by_K[1] <= 1e-8);     // k = 2 completes the sum
  CHECK(r.error_by_K[3] <= 1e-8);

  CHECK_THROWS_AS(cluster_expansion(rep, spec, gen, m, f, {1.0}, ClusterOptions{0.0}), ValidationError);
}

TEST_CASE("eigenmode energy decays at twice Im tau") {
  const auto m = build_torus_model(3, DampingSpec::trig({{0, 0, 0.2}, {0, 1, 0.08}, {0, -1, 0.08}}));
  const auto gen = assemble_generator(m);
  const auto spec = compute_eigenfrequencies(gen);
  const EigenRecord* pick = nullptr;
  for (const auto& r : spec.records)
    if (r.trusted && r.tau.real() > 1.0 && (!pick || r.tau.real() < pick->tau.real()))
      pick = &r;
  REQUIRE(pick);
  const auto t = grid(10.0, 0.5);
  const auto s = propagate_cauchy(gen, pick->right, t, PropagationMethod::expm);
  std::vector<double> y;
  for (const auto& x : s)
    y.push_back(std::log(energy(x, m)));
  const double slope = ols_slope(t, y).first;
  CHECK(std::abs(slope + 2 * pick->tau.imag()) <= 0.01 * 2 * pick->tau.imag());
}

TEST_CASE("decay fit with constant damping") {
  const double c = 0.1;
  const auto m = build_torus_model(3, DampingSpec::constant(c));
  const auto gen = assemble_generator(m);
  const auto spec = compute_eigenfrequencies(gen);
  const auto fit = fit_decay_rate(m, gen, spec, c, c);
  CHECK(fit.alpha_formula == doctest::Approx(2 * c));
  CHECK(fit.ratio >= 0.85);
  CHECK(fit.ratio <= 1.1);
  CHECK(fit.slopes.size() == 10);

  DecayOptions few;
  few.ensemble = 5;
  CHECK_THROWS_AS(fit_decay_rate(m, gen, spec, c, c, few), ValidationError);
}

TEST_CASE("helpers") {
  const auto [s, se] = ols_slope({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(s == doctest::Approx(2.0));
  CHECK(se == doctest::Approx(0.0).scale(1.0));
  CHECK((random_vector(6, 42) - random_vector(6, 42)).norm() == 0.0);
  CHECK((random_vector(6, 42) - random_vector(6, 43)).norm() > 0.0);
}
