#pragma once

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "blowup/ansatz.hpp"
#include "blowup/profiles.hpp"

namespace fixtures {

inline const blowup::ProfileSet& profiles() {
  static const blowup::ProfileSet P = blowup::ProfileSet::compute(blowup::RadialGrid::make(1e-3, 20.0));
  return P;
}

inline const blowup::ProfileSet& fine_profiles() {
  static const blowup::ProfileSet P = blowup::ProfileSet::compute(blowup::RadialGrid::make(5e-4, 25.0));
  return P;
}

inline const blowup::Ansatz& ansatz() {
  static const blowup::Ansatz A(profiles(), 0.3);
  return A;
}

// Independent adaptive quadrature of f over the real line (even integrand folded).
template <class F>
double line_integral_even(F f) {
  return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 40.0, 15, 1e-14);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixtures
