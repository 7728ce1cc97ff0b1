#include "blowup/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace blowup {

RadialGrid RadialGrid::make(double h, double ymax) {
  if (!(h > 0) || !(ymax >= 15.0))
    throw std::invalid_argument("radial grid needs h > 0 and ymax >= 15");
  RadialGrid g;
  double n = std::round(ymax / h);
  if (std::abs(n * h - ymax) > 1e-9 * ymax)
    throw std::invalid_argument("ymax must be an integer multiple of h");
  g.h = h;
  g.ymax = n * h;
  g.count = static_cast<std::size_t>(n) + 1;
  return g;
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  std::size_t intervals = n - 1;
  double tail = 0.0;
  std::size_t last = n - 1;
  if (intervals % 2 == 1) {
    if (intervals < 3) return 0.5 * h * (f[0] + 2 * f[1] + f[2]);
    // 3/8 rule on the last three intervals
    last = n - 4;
    tail = 3.0 * h / 8.0 * (f[last] + 3 * f[last + 1] + 3 * f[last + 2] + f[last + 3]);
  }
  double s = f[0] + f[last];
  for (std::size_t i = 1; i < last; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0 + tail;
}

static double fold(const std::vector<double>& integrand, const RadialGrid& g) {
  double core = simpson(integrand, g.h);
  double tail = integrand.back();  // e^{-y} decay beyond ymax
  return 2.0 * (core + tail);
}

double integrate_line(const EvenField& f) {
  if (f.parity == Parity::odd) return 0.0;
  return fold(f.values, f.grid);
}

double integrate_line_product(const EvenField& f, const EvenField& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("grid mismatch in inner product");
  if (f.parity != g.parity) return 0.0;
  std::vector<double> p(f.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = f[i] * g[i];
  return fold(p, f.grid);
}

namespace {

void lagrange_weights(const double* nodes, int n, double x, double* w, double* dw) {
  for (int j = 0; j < n; ++j) {
    double num = 1, den = 1;
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      num *= x - nodes[m];
      den *= nodes[j] - nodes[m];
    }
    w[j] = num / den;
    if (dw) {
      double s = 0;
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        double p = 1;
        for (int m = 0; m < n; ++m) {
          if (m == j || m == k) continue;
          p *= x - nodes[m];
        }
        s += p;
      }
      dw[j] = s / den;
    }
  }
}

double sample_reflected(const EvenField& f, long i) {
  const long n = static_cast<long>(f.size());
  if (i < 0) {
    double v = f.values[static_cast<std::size_t>(-i)];
    return f.parity == Parity::even ? v : -v;
  }
  if (i >= n) return f.values[static_cast<std::size_t>(n - 1)];
  return f.values[static_cast<std::size_t>(i)];
}

double interp_impl(const EvenField& f, double y, int npts, bool deriv) {
  const double h = f.grid.h;
  const long n = static_cast<long>(f.size());
  double ay = std::abs(y);
  double sgn = (y < 0 && f.parity == Parity::odd) ? -1.0 : 1.0;
  if (deriv && y < 0) sgn = (f.parity == Parity::even) ? -1.0 : 1.0;
  long i0 = static_cast<long>(std::floor(ay / h)) - (npts / 2 - 1);
  if (i0 + npts > n) i0 = n - npts;
  double nodes[16], w[16], dw[16];
  for (int j = 0; j < npts; ++j) nodes[j] = static_cast<double>(i0 + j) * h;
  lagrange_weights(nodes, npts, ay, w, deriv ? dw : nullptr);
  double s = 0;
  for (int j = 0; j < npts; ++j) s += (deriv ? dw[j] : w[j]) * sample_reflected(f, i0 + j);
  return sgn * s;
}

}  // namespace

double interp_half(const EvenField& f, double y, int npts) { return interp_impl(f, y, npts, false); }

double interp_half_deriv(const EvenField& f, double y, int npts) { return interp_impl(f, y, npts, true); }

double interp_uniform(const double* v, std::size_t n, double x0, double h, double x, int npts) {
  const long nn = static_cast<long>(n);
  long i0 = static_cast<long>(std::floor((x - x0) / h)) - (npts / 2 - 1);
  i0 = std::clamp(i0, 0L, nn - npts);
  double nodes[16], w[16];
  for (int j = 0; j < npts; ++j) nodes[j] = x0 + static_cast<double>(i0 + j) * h;
  lagrange_weights(nodes, npts, x, w, nullptr);
  double s = 0;
  for (int j = 0; j < npts; ++j) s += w[j] * v[i0 + j];
  return s;
}

namespace {

// Sample with parity ghosts at 0 and geometric extrapolation past the end.
double ghost(const EvenField& f, long i) {
  const long n = static_cast<long>(f.size());
  if (i < 0) return sample_reflected(f, i);
  if (i < n) return f.values[static_cast<std::size_t>(i)];
  double a = f.values[static_cast<std::size_t>(n - 1)];
  double b = f.values[static_cast<std::size_t>(n - 2)];
  if (a == 0.0 || b == 0.0 || (a > 0) != (b > 0) || std::abs(a) > std::abs(b)) return a;
  return a * std::pow(a / b, static_cast<double>(i - n + 1));
}

}  // namespace

std::vector<double> second_derivative(const EvenField& f) {
  const long n = static_cast<long>(f.size());
  const double c = 1.0 / (12.0 * f.grid.h * f.grid.h);
  std::vector<double> d(f.size());
  for (long i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] =
        c * (-ghost(f, i - 2) + 16 * ghost(f, i - 1) - 30 * ghost(f, i) + 16 * ghost(f, i + 1) -
             ghost(f, i + 2));
  }
  return d;
}

std::vector<double> first_derivative(const EvenField& f, std::size_t stride) {
  const long n = static_cast<long>(f.size());
  const long s = static_cast<long>(stride);
  const double c = 1.0 / (12.0 * f.grid.h * static_cast<double>(stride));
  std::vector<double> d(f.size());
  for (long i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] = c * (ghost(f, i - 2 * s) - 8 * ghost(f, i - s) +
                                          8 * ghost(f, i + s) - ghost(f, i + 2 * s));
  }
  return d;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& f) {
  const double n = static_cast<double>(x.size());
  double mx = 0, mf = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    mf += f[i];
  }
  mx /= n;
  mf /= n;
  double sxx = 0, sxf = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxf += (x[i] - mx) * (f[i] - mf);
  }
  LineFit r;
  r.slope = sxf / sxx;
  r.intercept = mf - r.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i)
    r.max_residual = std::max(r.max_residual, std::abs(f[i] - r.slope * x[i] - r.intercept));
  return r;
}

}  // namespace blowup
