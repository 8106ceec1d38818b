#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dampwave/linalg.hpp"
#include "dampwave/manifolds.hpp"

using namespace dampwave;

TEST_CASE("damping validation") {
  CHECK_THROWS_AS(DampingSpec::constant(-0.1).validate_for(GeometryKind::torus), ValidationError);
  CHECK_THROWS_AS(DampingSpec::constant(0.0).validate_for(GeometryKind::torus), ValidationError);
  CHECK_NOTHROW(DampingSpec::zero().validate_for(GeometryKind::torus));

  const auto r = DampingSpec::constant(0.3).validate_for(GeometryKind::sphere);
  CHECK(r.min == doctest::Approx(0.3));
  CHECK(r.max == doctest::Approx(0.3));

  // 0.1 - 0.2 cos x dips below zero
  const auto neg = DampingSpec::trig({{0, 0, 0.1}, {1, 0, -0.1}, {-1, 0, -0.1}});
  CHECK_THROWS_AS(neg.validate_for(GeometryKind::torus), ValidationError);

  CHECK_FALSE(DampingSpec::zonal_caps(0.5, 4).compatible_with(GeometryKind::torus));
  CHECK(DampingSpec::constant(0.1).compatible_with(GeometryKind::revolution));
}

TEST_CASE("disk damping is nonnegative and vanishes near the origin") {
  const auto a = DampingSpec::disk_complement(2.0, 1.0, 0.5, 8);
  const auto range = a.validate_for(GeometryKind::torus);
  CHECK(range.min >= 0.0);
  CHECK(a.at_torus(0.0, 0.0) < 0.1 * range.max);
  CHECK(a.at_torus(kPi, kPi) > 0.5 * range.max);
}

TEST_CASE("smooth plateau") {
  CHECK(smooth_plateau(0.3) == 1.0);
  CHECK(smooth_plateau(1.2) == 0.0);
  const double v = smooth_plateau(0.75);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
}

TEST_CASE("torus model: Fourier diagonal and constant damping") {
  const auto m = build_torus_model(3, DampingSpec::constant(0.25));
  CHECK(m.dim == 49);
  int zero = 0;
  for (int i = 0; i < m.dim; ++i) {
    int k1 = 0, k2 = 0;
    REQUIRE(std::sscanf(m.basis_labels[i].c_str(), "e(%d,%d)", &k1, &k2) == 2);
    CHECK(m.K(i, i).real() == doctest::Approx(k1 * k1 + k2 * k2));
    if (k1 == 0 && k2 == 0)
      ++zero;
  }
  CHECK(zero == 1);
  CHECK((m.A - 0.25 * CMatrix::Identity(m.dim, m.dim)).norm() < 1e-13);
  CHECK(m.lambda_max == doctest::Approx(18.0));
  CHECK(m.trust_radius == doctest::Approx(0.5 * std::sqrt(18.0)));
  // 1 = 2 pi * e^{i0x}/(2 pi)
  REQUIRE(m.has_constant());
  CHECK(m.constant_coeffs.norm() == doctest::Approx(2.0 * kPi));
  CHECK(m.volume == doctest::Approx(4.0 * kPi * kPi));
}

TEST_CASE("torus trig damping entries match Fourier convolution") {
  const double c = 0.2;
  const auto m = build_torus_model(2, DampingSpec::trig({{0, 0, c}, {1, 0, 0.5 * c}, {-1, 0, 0.5 * c}}));
  auto index = [&](int k1, int k2) {
    const std::string label = "e(" + std::to_string(k1) + "," + std::to_string(k2) + ")";
    return static_cast<int>(std::find(m.basis_labels.begin(), m.basis_labels.end(), label) -
                            m.basis_labels.begin());
  };
  // <a e_l, e_k> = a_{k - l}
  CHECK(std::abs(m.A(index(1, 1), index(0, 1)) - cplx(0.5 * c)) < 1e-14);
  CHECK(std::abs(m.A(index(0, 0), index(0, 0)) - cplx(c)) < 1e-14);
  CHECK(std::abs(m.A(index(2, 0), index(0, 0))) < 1e-14);
}

TEST_CASE("sphere model: Laplace eigenvalues and exact zonal quadrature") {
  // a = 0.2 + cos^2: mean over the sphere is 0.2 + 1/3
  const auto m = build_sphere_model(6, DampingSpec::zonal({0.2, 0.0, 1.0}));
  CHECK(m.dim == 49);
  const auto d = diagnose(m);
  CHECK(d.k_asymmetry < 1e-13);
  CHECK(d.a_asymmetry < 1e-13);
  CHECK(d.a_min_eigenvalue > 0.0);
  CHECK(d.constant_residual < 1e-12);
  for (int i = 0; i < m.dim; ++i) {
    int l = 0, mm = 0;
    REQUIRE(std::sscanf(m.basis_labels[i].c_str(), "Y(%d,%d)", &l, &mm) == 2);
    CHECK(m.K(i, i).real() == doctest::Approx(l * (l + 1)));
    if (l == 0)
      CHECK(m.A(i, i).real() == doctest::Approx(0.2 + 1.0 / 3.0).epsilon(1e-12));
  }
  CHECK(m.volume == doctest::Approx(4.0 * kPi));
}

TEST_CASE("revolution model converges to sphere eigenvalues") {
  const auto p = RevolutionProfile::round_sphere();
  for (int mode : {0, 2}) {
    const auto m = build_revolution_model(p, mode, DampingSpec::constant(0.1), 400);
    const auto ev = linalg::hermitian_eig(m.K, false).values;
    for (int j = 0; j < 4; ++j) {
      const int l = mode + j;
      const double lambda = l * (l + 1.0);
      CHECK(std::abs(ev(j) - lambda) <= 2e-3 * (1.0 + lambda));
    }
  }
}

TEST_CASE("revolution profiles") {
  const auto p = RevolutionProfile::sin_cubed(0.3);
  CHECK_NOTHROW(p.validate(200));
  CHECK(p.equator() == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(p.r(kPi / 2) == doctest::Approx(1.3));
  CHECK(p.d2r(kPi / 2) == doctest::Approx(-1.9));

  const auto sph = RevolutionProfile::spheroid(1.2, 1.0);
  CHECK_NOTHROW(sph.validate(200));
  CHECK(sph.r(sph.equator()) == doctest::Approx(1.2).epsilon(1e-8));

  // tabulated round sphere
  std::vector<double> samples;
  for (int i = 0; i < 201; ++i)
    samples.push_back(std::sin(kPi * i / 200));
  const auto tab = RevolutionProfile::tabulated(kPi, samples);
  CHECK(tab.r(1.0) == doctest::Approx(std::sin(1.0)).epsilon(1e-6));

  CHECK_THROWS_AS(RevolutionProfile::sin_cubed(-0.5), ValidationError);
}

TEST_CASE("model diagnostics: Hermitian K, nonnegative A") {
  for (const auto& m : {build_torus_model(8, DampingSpec::disk_complement(2.0, 1.0, 0.5, 8)),
                        build_revolution_model(RevolutionProfile::sin_cubed(0.3), 3,
                                               DampingSpec::caps_profile(0.5, 0.3, 0.3), 100)}) {
    const auto d = diagnose(m);
    CHECK(d.k_asymmetry < 1e-12);
    CHECK(d.a_asymmetry < 1e-12);
    CHECK(d.k_min_eigenvalue > -1e-10);
    CHECK(d.a_min_eigenvalue > -1e-10);
  }
}
