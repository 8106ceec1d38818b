#include "dampwave/damping.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dampwave {

std::string to_string(GeometryKind kind) {
  switch (kind) {
  case GeometryKind::torus:
    return "torus";
  case GeometryKind::sphere:
    return "sphere";
  case GeometryKind::revolution:
    return "revolution";
  }
  return "unknown";
}

GeometryKind geometry_from_string(const std::string& name) {
  if (name == "torus")
    return GeometryKind::torus;
  if (name == "sphere")
    return GeometryKind::sphere;
  if (name == "revolution")
    return GeometryKind::revolution;
  throw ValidationError("unknown geometry kind '" + name + "'");
}

double smooth_plateau(double u) {
  if (u <= 0.5)
    return 1.0;
  if (u >= 1.0)
    return 0.0;
  // x runs from 1 (u = 1/2) to 0 (u = 1)
  const double x = 2.0 * (1.0 - u);
  auto f = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double fx = f(x);
  return fx / (fx + f(1.0 - x));
}

DampingSpec::DampingSpec(Params params, int check_resolution)
    : params_(std::move(params)) {
  set_check_resolution(check_resolution);
}

void DampingSpec::set_check_resolution(int n) {
  if (n < 8)
    throw ValidationError("damping check resolution must be >= 8");
  check_resolution_ = n;
}

DampingSpec DampingSpec::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw ValidationError("constant damping must be finite and nonnegative");
  return DampingSpec(ConstantDamping{value});
}

DampingSpec DampingSpec::zero() {
  DampingSpec spec(ConstantDamping{0.0});
  spec.allow_zero_ = true;
  return spec;
}

DampingSpec DampingSpec::trig(std::vector<TrigTerm> terms) {
  // merge duplicates, then require conjugate symmetry so that a is real
  std::map<std::pair<int, int>, cplx> merged;
  for (const auto& t : terms)
    merged[{t.k1, t.k2}] += t.coeff;
  for (const auto& [k, c] : merged) {
    auto it = merged.find({-k.first, -k.second});
    const cplx partner = it == merged.end() ? cplx{} : it->second;
    if (std::abs(c - std::conj(partner)) > 1e-12 * (1.0 + std::abs(c)))
      throw ValidationError("trig damping is not real: coefficient of (" +
                            std::to_string(k.first) + "," + std::to_string(k.second) +
                            ") is not the conjugate of its mirror");
  }
  TrigDamping out;
  for (const auto& [k, c] : merged)
    if (c != cplx{})
      out.terms.push_back({k.first, k.second, c});
  return DampingSpec(std::move(out));
}

DampingSpec DampingSpec::zonal(std::vector<double> cos_powers) {
  while (!cos_powers.empty() && cos_powers.back() == 0.0)
    cos_powers.pop_back();
  return DampingSpec(ZonalDamping{std::move(cos_powers)});
}

DampingSpec DampingSpec::zonal_caps(double amplitude, int power) {
  if (power < 0)
    throw ValidationError("zonal caps power must be >= 0");
  std::vector<double> c(static_cast<std::size_t>(power) + 1, 0.0);
  c.back() = amplitude;
  return zonal(std::move(c));
}

DampingSpec DampingSpec::caps_profile(double amplitude, double north, double south) {
  if (!(north >= 0.0 && south >= 0.0 && north + south <= 1.0))
    throw ValidationError("caps profile widths must be nonnegative fractions with north + south <= 1");
  return DampingSpec(CapsProfileDamping{amplitude, north, south});
}

DampingSpec DampingSpec::disk_complement(double amplitude, double radius, double transition,
                                         int degree, int grid) {
  if (degree < 1 || grid < 4 * degree)
    throw ValidationError("disk complement needs degree >= 1 and grid >= 4*degree");
  if (!(radius > 0.0 && transition > 0.0 && radius + transition < kPi))
    throw ValidationError("disk complement needs 0 < radius, 0 < transition, radius+transition < pi");
  const int ng = grid;
  const int width = 2 * degree + 1;
  std::vector<double> nodes(ng);
  for (int j = 0; j < ng; ++j)
    nodes[j] = 2.0 * kPi * j / ng;
  auto wrapped = [](double x) { return x >= kPi ? x - 2.0 * kPi : x; };
  auto sample = [&](double x, double y) {
    const double rho = std::hypot(wrapped(x), wrapped(y));
    const double s = std::clamp((rho - radius) / transition, 0.0, 1.0);
    return amplitude * s * s * (3.0 - 2.0 * s);
  };
  // separable DFT restricted to |k| <= degree
  CMatrix partial(ng, width);
  for (int ix = 0; ix < ng; ++ix)
    for (int k2 = -degree; k2 <= degree; ++k2) {
      cplx acc{};
      for (int iy = 0; iy < ng; ++iy)
        acc += sample(nodes[ix], nodes[iy]) * std::exp(-kI * (double(k2) * nodes[iy]));
      partial(ix, k2 + degree) = acc;
    }
  std::vector<TrigTerm> terms;
  for (int k1 = -degree; k1 <= degree; ++k1)
    for (int k2 = -degree; k2 <= degree; ++k2) {
      cplx acc{};
      for (int ix = 0; ix < ng; ++ix)
        acc += partial(ix, k2 + degree) * std::exp(-kI * (double(k1) * nodes[ix]));
      acc /= double(ng) * double(ng);
      const double fejer = (1.0 - std::abs(k1) / double(degree + 1)) *
                           (1.0 - std::abs(k2) / double(degree + 1));
      terms.push_back({k1, k2, acc * fejer});
    }
  // exact conjugate symmetry
  std::map<std::pair<int, int>, cplx> coeffs;
  for (const auto& t : terms)
    coeffs[{t.k1, t.k2}] = t.coeff;
  for (auto& t : terms)
    t.coeff = 0.5 * (coeffs[{t.k1, t.k2}] + std::conj(coeffs[{-t.k1, -t.k2}]));
  return trig(std::move(terms));
}

std::string DampingSpec::kind_name() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantDamping>)
          return "constant";
        else if constexpr (std::is_same_v<T, TrigDamping>)
          return "trig";
        else if constexpr (std::is_same_v<T, ZonalDamping>)
          return "zonal";
        else
          return "caps_profile";
      },
      params_);
}

double DampingSpec::at_torus(double x, double y) const {
  if (const auto* c = std::get_if<ConstantDamping>(&params_))
    return c->value;
  const auto* t = std::get_if<TrigDamping>(&params_);
  if (!t)
    throw ValidationError(kind_name() + " damping cannot be evaluated on the torus");
  cplx acc{};
  for (const auto& term : t->terms)
    acc += term.coeff * std::exp(kI * (term.k1 * x + term.k2 * y));
  return acc.real();
}

double DampingSpec::at_sphere(double cos_theta) const {
  if (const auto* c = std::get_if<ConstantDamping>(&params_))
    return c->value;
  const auto* z = std::get_if<ZonalDamping>(&params_);
  if (!z)
    throw ValidationError(kind_name() + " damping cannot be evaluated on the sphere");
  double acc = 0.0;
  for (auto it = z->cos_powers.rbegin(); it != z->cos_powers.rend(); ++it)
    acc = acc * cos_theta + *it;
  return acc;
}

double DampingSpec::at_profile(double s, double length) const {
  if (const auto* c = std::get_if<ConstantDamping>(&params_))
    return c->value;
  const auto* p = std::get_if<CapsProfileDamping>(&params_);
  if (!p)
    throw ValidationError(kind_name() + " damping cannot be evaluated on a surface of revolution");
  double value = 0.0;
  if (p->north > 0.0)
    value += smooth_plateau(s / (p->north * length));
  if (p->south > 0.0)
    value += smooth_plateau((length - s) / (p->south * length));
  return p->amplitude * value;
}

int DampingSpec::trig_degree() const {
  int deg = 0;
  if (const auto* t = std::get_if<TrigDamping>(&params_))
    for (const auto& term : t->terms)
      deg = std::max({deg, std::abs(term.k1), std::abs(term.k2)});
  return deg;
}

int DampingSpec::zonal_degree() const {
  if (const auto* z = std::get_if<ZonalDamping>(&params_))
    return z->cos_powers.empty() ? 0 : int(z->cos_powers.size()) - 1;
  return 0;
}

bool DampingSpec::compatible_with(GeometryKind kind) const {
  if (is_constant())
    return true;
  switch (kind) {
  case GeometryKind::torus:
    return std::holds_alternative<TrigDamping>(params_);
  case GeometryKind::sphere:
    return std::holds_alternative<ZonalDamping>(params_);
  case GeometryKind::revolution:
    return std::holds_alternative<CapsProfileDamping>(params_);
  }
  return false;
}

DampingRange DampingSpec::validate_for(GeometryKind kind, double profile_length) const {
  if (!compatible_with(kind))
    throw ValidationError(kind_name() + " damping is not defined on the " + to_string(kind));
  const int n = check_resolution_;
  DampingRange range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto record = [&](double v) {
    range.min = std::min(range.min, v);
    range.max = std::max(range.max, v);
  };
  if (is_constant()) {
    record(std::get<ConstantDamping>(params_).value);
  } else if (kind == GeometryKind::torus) {
    // a(x,y) = sum_k1 e^{i k1 x} g_k1(y), evaluated separably
    const auto& terms = std::get<TrigDamping>(params_).terms;
    const int deg = trig_degree();
    const int width = 2 * deg + 1;
    std::vector<cplx> g(static_cast<std::size_t>(width));
    for (int iy = 0; iy < n; ++iy) {
      const double y = 2.0 * kPi * iy / n;
      std::fill(g.begin(), g.end(), cplx{});
      for (const auto& t : terms)
        g[t.k1 + deg] += t.coeff * std::exp(kI * (t.k2 * y));
      for (int ix = 0; ix < n; ++ix) {
        const double x = 2.0 * kPi * ix / n;
        cplx acc{};
        for (int k1 = -deg; k1 <= deg; ++k1)
          acc += g[k1 + deg] * std::exp(kI * (k1 * x));
        record(acc.real());
      }
    }
  } else if (kind == GeometryKind::sphere) {
    for (int i = 0; i < n; ++i)
      record(at_sphere(std::cos(kPi * i / (n - 1))));
  } else {
    if (!(profile_length > 0.0))
      throw ValidationError("profile damping check needs a positive profile length");
    for (int i = 0; i < n; ++i)
      record(at_profile(profile_length * i / (n - 1), profile_length));
  }
  if (range.min < 0.0)
    throw ValidationError("damping is negative somewhere on the check grid (min " +
                          std::to_string(range.min) + ")");
  if (range.max <= 0.0 && !allow_zero_)
    throw ValidationError("damping vanishes identically on the check grid");
  return range;
}

nlohmann::json DampingSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name();
  j["check_resolution"] = check_resolution_;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantDamping>) {
          j["value"] = p.value;
        } else if constexpr (std::is_same_v<T, TrigDamping>) {
          auto arr = nlohmann::json::array();
          for (const auto& t : p.terms)
            arr.push_back({t.k1, t.k2, t.coeff.real(), t.coeff.imag()});
          j["terms"] = arr;
        } else if constexpr (std::is_same_v<T, ZonalDamping>) {
          j["cos_powers"] = p.cos_powers;
        } else {
          j["amplitude"] = p.amplitude;
          j["north"] = p.north;
          j["south"] = p.south;
        }
      },
      params_);
  return j;
}

} // namespace dampwave
