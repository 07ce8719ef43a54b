#include "goafem/problem.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "goafem/quadrature.hpp"

namespace goafem {

using cplx = std::complex<double>;

namespace {

constexpr cplx I{0.0, 1.0};

// f[x, y] for f(t) = exp(i t).
cplx dd1(double x, double y) {
  const double d = y - x;
  const double h = 0.5 * d;
  const double sinc = std::abs(h) < 1e-8 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
  return std::exp(I * x) * I * std::exp(I * h) * sinc;
}

// Integral of exp(i (a s + b t)) over the reference triangle s, t >= 0, s + t <= 1.
cplx reference_wave_integral(double a, double b) {
  const double big = std::max(std::abs(a), std::abs(b));
  if (big <= 1.0) {
    // -sum_{n>=2} i^n / n! h_{n-2}(a, b), h_j complete homogeneous in (a, b).
    cplx sum = 0.0;
    cplx ipow = -1.0;  // i^2
    double fact = 2.0;
    double h = 1.0;    // h_0
    double bpow = 1.0;
    for (int n = 2; n < 30; ++n) {
      sum -= ipow / fact * h;
      ipow *= I;
      fact *= (n + 1);
      bpow *= b;
      h = a * h + bpow;
    }
    return sum;
  }
  // Divided difference with the widest pair as the outer nodes.
  double x0 = 0.0, x1 = a, x2 = b;
  const double s01 = std::abs(a), s02 = std::abs(b), s12 = std::abs(a - b);
  if (s01 >= s02 && s01 >= s12) {
    x0 = 0.0, x1 = b, x2 = a;
  } else if (s12 >= s01 && s12 >= s02) {
    x0 = a, x1 = 0.0, x2 = b;
  }
  const cplx d2 = (dd1(x1, x2) - dd1(x0, x1)) / (x2 - x0);
  return -d2;
}

}  // namespace

std::pair<double, double> integrate_plane_wave(const Triangle& t, Point k) {
  const double area2 = 2.0 * std::abs(signed_area(t));
  const double a = dot(k, t[1] - t[0]);
  const double b = dot(k, t[2] - t[0]);
  const cplx val = area2 * std::exp(I * dot(k, t[0])) * reference_wave_integral(a, b);
  return {val.real(), val.imag()};
}

ScalarField ScalarField::constant(double c) {
  ScalarField f;
  f.kind_ = Kind::constant;
  f.value_ = c;
  return f;
}

ScalarField ScalarField::cosine_product(double amplitude, double wx, double wy) {
  ScalarField f;
  f.kind_ = Kind::cosine_product;
  f.value_ = amplitude;
  f.wx_ = wx;
  f.wy_ = wy;
  return f;
}

ScalarField ScalarField::function(std::function<double(Point)> fn, int quad_order) {
  ScalarField f;
  f.kind_ = Kind::function;
  f.fn_ = std::move(fn);
  f.quad_order_ = quad_order;
  return f;
}

double ScalarField::operator()(Point p) const {
  switch (kind_) {
    case Kind::constant: return value_;
    case Kind::cosine_product: return value_ * std::cos(wx_ * p.x) * std::cos(wy_ * p.y);
    case Kind::function: return fn_(p);
  }
  return 0.0;
}

double ScalarField::integrate(const Triangle& t) const {
  switch (kind_) {
    case Kind::constant: return value_ * std::abs(signed_area(t));
    case Kind::cosine_product: {
      if (value_ == 0.0) return 0.0;
      const auto p = integrate_plane_wave(t, {wx_, wy_});
      const auto m = integrate_plane_wave(t, {wx_, -wy_});
      return 0.5 * value_ * (p.first + m.first);
    }
    case Kind::function: {
      double s = 0.0;
      for (const auto& q : triangle_rule(t, quad_order_)) s += q.weight * fn_(q.x);
      return s;
    }
  }
  return 0.0;
}

ModeIndices mode_indices(int m) {
  if (m < 1) throw std::domain_error("mode index m must be >= 1");
  int k = static_cast<int>(std::floor(-0.5 + std::sqrt(0.25 + 2.0 * m)));
  while (k * (k + 1) / 2 > m) --k;
  while ((k + 1) * (k + 2) / 2 <= m) ++k;
  const int beta1 = m - k * (k + 1) / 2;
  return {k, beta1, k - beta1};
}

CoefficientField::CoefficientField(double amplitude) : amplitude_(amplitude) {
  if (!(amplitude > 0.0 && amplitude * kZeta2 < 1.0)) {
    throw ConfigError("coefficient amplitude must satisfy 0 < A < 1/zeta(2)");
  }
}

double CoefficientField::eval_am(int m, Point x) const {
  return mode(m)(x);
}

ScalarField CoefficientField::mode(int m) const {
  const auto idx = mode_indices(m);
  const double two_pi = 2.0 * std::numbers::pi;
  return ScalarField::cosine_product(amplitude_ / (static_cast<double>(m) * m), two_pi * idx.beta1,
                                     two_pi * idx.beta2);
}

RhsSpec rhs_load_spec(int setup) {
  switch (setup) {
    case 1:
    case 2:
    case 4: return {RhsKind::constant_one, {}};
    case 3: return {RhsKind::directional_derivative, Triangle{Point{0.0, 0.0}, Point{0.5, 0.0}, Point{0.0, 0.5}}};
    default: throw ConfigError("unknown setup id " + std::to_string(setup));
  }
}

ProblemSpec problem_for_setup(int setup) {
  ProblemSpec p;
  p.rhs = rhs_load_spec(setup);
  switch (setup) {
    case 1:
    case 3:
      p.domain = {DomainKind::unit_square};
      p.initial_triangles = 512;
      break;
    case 2:
      p.domain = {DomainKind::l_shaped};
      p.initial_triangles = 384;
      break;
    case 4:
      p.domain = {DomainKind::slit, 0.005};
      p.initial_triangles = 512;
      break;
  }
  return p;
}

}  // namespace goafem
