#pragma once

#include <complex>

#include <json.hpp>

#include "blowup/numerics.hpp"

namespace blowup {

// Q(x) = 3^{1/4} (cosh 2x)^{-1/2}, the positive even solution of -Q'' + Q = Q^5.
double eval_Q(double x);
double eval_Qprime(double x);
double eval_Q4(double x);

// Explicit minimal-mass solution |t|^{-1/2} Q(x/t) e^{i x^2/(4t)} e^{-i/t}, t < 0.
std::complex<double> eval_S(double t, double x);

EvenField sample(const RadialGrid& g, double (*fn)(double), Parity p = Parity::even);

// Lambda_k g = (1-k)/2 g + y g'.
EvenField lambda_k(const EvenField& g, const std::vector<double>& dg, int k);

// Even decaying solution of L_+ rho = y^2 Q / 4 (fourth-order differences,
// Robin condition rho' + rho = 0 at ymax).
EvenField solve_rho(const RadialGrid& grid);

struct GroundStateBundle {
  RadialGrid grid;
  EvenField Q;
  EvenField Qprime;  // odd
  EvenField rho;
  EvenField rho_prime;  // odd
  EvenField LambdaQ;
  EvenField y2Q;
  double quad_Q2 = 0;
  double quad_x2Q2 = 0;
  double quad_rhoQ = 0;
  double quad_Qp2 = 0;
  double quad_Q6 = 0;

  static GroundStateBundle build(const RadialGrid& grid);

  EvenField apply_Lplus(const EvenField& f) const;
  EvenField apply_Lminus(const EvenField& f) const;
  double inner(const EvenField& f, const EvenField& g) const;
  double h1_norm_sq(const EvenField& f) const;

  // rho and rho' at arbitrary y; beyond ymax the tail y^3 e^{-y} is used.
  double rho_at(double y) const;
  double rho_deriv_at(double y) const;

  nlohmann::json to_json() const;
  static GroundStateBundle from_json(const nlohmann::json& j);
};

enum class Which { plus, minus };

struct CoercivityProbe {
  double form = 0;        // <L g, g>
  double projection = 0;  // sum of squared projections
  double h1_sq = 0;       // ||g||_{H^1}^2
  // form + projection / zeta - zeta * h1_sq
  double value(double zeta) const { return form + projection / zeta - zeta * h1_sq; }
  // Largest zeta for which value(zeta) >= 0.
  double admissible_zeta() const;
};

// Quadratic form of L_+ (projections on Q, y^2 Q) or L_- (on rho, Lambda Q).
CoercivityProbe coercivity_probe(const GroundStateBundle& gs, const EvenField& g, Which which);

}  // namespace blowup
