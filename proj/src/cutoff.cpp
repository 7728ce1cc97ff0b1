#include "blowup/cutoff.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace blowup {

namespace {

// Truncated Taylor series c_k = f^{(k)}/k!.
using Series = std::array<double, 5>;

Series mul(const Series& a, const Series& b) {
  Series c{};
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j <= k; ++j) c[k] += a[j] * b[k - j];
  return c;
}

Series div(const Series& a, const Series& b) {
  Series c{};
  for (int k = 0; k < 5; ++k) {
    double s = a[k];
    for (int j = 1; j <= k; ++j) s -= b[j] * c[k - j];
    c[k] = s / b[0];
  }
  return c;
}

Series exp_series(const Series& a) {
  Series e{};
  e[0] = std::exp(a[0]);
  for (int k = 1; k < 5; ++k) {
    double s = 0;
    for (int j = 1; j <= k; ++j) s += j * a[j] * e[k - j];
    e[k] = s / k;
  }
  return e;
}

// e^{-1/(t0 + sign*u)} expanded in u.
Series psi_series(double t0, double sign) {
  Series inv{};
  double p = 1.0 / t0;
  for (int k = 0; k < 5; ++k) {
    inv[k] = -p;  // -(1/t): coefficients -(-sign)^k / t0^{k+1}
    p *= -sign / t0;
  }
  return exp_series(inv);
}

}  // namespace

Jet4 smooth_step(double t) {
  Jet4 d{};
  if (t <= 0) return d;
  if (t >= 1) {
    d[0] = 1;
    return d;
  }
  Series a = psi_series(t, 1.0);
  Series b = psi_series(1.0 - t, -1.0);
  Series den{};
  for (int k = 0; k < 5; ++k) den[k] = a[k] + b[k];
  Series s = div(a, den);
  double f = 1;
  for (int k = 0; k < 5; ++k) {
    d[k] = s[k] * f;
    f *= k + 1;
  }
  return d;
}

Cutoff::Cutoff(double delta) : delta_(delta), K_(1.0 / std::sqrt(delta)) {
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("cutoff: delta must lie in (0, 1)");
  auto sq = [](double x) {
    double v = smooth_step(2.0 - x)[0];
    return v * v;
  };
  C0_ = 2.0 * (1.0 + boost::math::quadrature::gauss_kronrod<double, 31>::integrate(sq, 1.0, 2.0, 10, 1e-14));
}

Jet4 Cutoff::theta0(double x) const {
  double ax = std::abs(x);
  Jet4 s = smooth_step(2.0 - ax);
  // d/dx S(2 - |x|) = -sign(x) S'
  double sgn = x < 0 ? -1.0 : 1.0;
  Jet4 d{};
  double f = 1;
  for (int k = 0; k < 5; ++k) {
    d[k] = s[k] * f;
    f *= -sgn;
  }
  return d;
}

Jet4 Cutoff::operator()(double x) const {
  Jet4 d = theta0(x / delta_);
  double f = 1;
  for (int k = 0; k < 5; ++k) {
    d[k] *= f;
    f /= delta_;
  }
  return d;
}

double Cutoff::value(double x) const { return smooth_step(2.0 - std::abs(x) / delta_)[0]; }

}  // namespace blowup
