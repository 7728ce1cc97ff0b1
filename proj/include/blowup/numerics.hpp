#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blowup {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniform grid {0, h, 2h, ..., ymax} on the half line.
struct RadialGrid {
  double h = 1e-3;
  double ymax = 20.0;
  std::size_t count = 20001;

  static RadialGrid make(double h, double ymax);
  double y(std::size_t i) const { return static_cast<double>(i) * h; }
  bool operator==(const RadialGrid& o) const { return count == o.count && h == o.h; }
};

enum class Parity { even = 1, odd = -1 };

// Samples of an even (or odd) function on the half line; the negative half
// is implied by reflection.
struct EvenField {
  RadialGrid grid;
  std::vector<double> values;
  Parity parity = Parity::even;

  EvenField() = default;
  EvenField(const RadialGrid& g, Parity p = Parity::even)
      : grid(g), values(g.count, 0.0), parity(p) {}
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// Composite Simpson on uniform samples (3/8 rule closes an odd interval count).
double simpson(const std::vector<double>& f, double h);

// Integral over the real line of the product f*g using parity to fold onto
// [0, ymax]; adds an e^{-y} tail estimate beyond ymax.
double integrate_line(const EvenField& f);
double integrate_line_product(const EvenField& f, const EvenField& g);

// Local Lagrange interpolation on a half-line grid, reflecting through 0 by
// parity. npts points, centred on y. Callers handle y > ymax themselves.
double interp_half(const EvenField& f, double y, int npts = 6);
// Same but returns the derivative of the local interpolant.
double interp_half_deriv(const EvenField& f, double y, int npts = 6);

// Interpolation in a plain uniform array starting at x0 (no reflection).
double interp_uniform(const double* v, std::size_t n, double x0, double h, double x, int npts);

// Fourth-order centred second derivative with parity ghosts at 0 and
// geometric (decay) extrapolation past ymax.
std::vector<double> second_derivative(const EvenField& f);
// Fourth-order centred first derivative with the same boundary handling.
std::vector<double> first_derivative(const EvenField& f, std::size_t stride = 1);

// Least-squares line through (x_i, f_i).
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& f);

}  // namespace blowup
