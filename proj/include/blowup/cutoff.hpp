#pragma once

#include <array>

namespace blowup {

// Value and derivatives 0..4 at a point.
using Jet4 = std::array<double, 5>;

// C^infinity step: 0 for t <= 0, 1 for t >= 1, e^{-1/t}/(e^{-1/t}+e^{-1/(1-t)}) between.
Jet4 smooth_step(double t);

// Even bump Theta_0 = 1 on |x| <= 1, 0 on |x| >= 2, and its rescaling
// Theta(x) = Theta_0(x / delta).
class Cutoff {
 public:
  explicit Cutoff(double delta = 0.3);

  double delta() const { return delta_; }
  double K() const { return K_; }
  double C0() const { return C0_; }  // ||Theta_0||_{L^2}^2

  Jet4 theta0(double x) const;
  Jet4 operator()(double x) const;  // Theta and its x-derivatives
  double value(double x) const;

 private:
  double delta_;
  double K_;
  double C0_;
};

}  // namespace blowup
