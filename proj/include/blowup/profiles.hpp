#pragma once

#include <array>
#include <functional>

#include <json.hpp>

#include "blowup/groundstate.hpp"

namespace blowup {

// Measured exponential decay rates of asymptote-subtracted tails on
// [ymax-5, ymax]; a value at the floor means the tail fell below roundoff.
struct TailReport {
  double rate_phi = 0;
  double rate_psi = 0;
  double rate_sum = 0;  // phi + psi
};

// Pair of even profiles with phi ~ mu_k-type growth + c and psi ~ -(same) .
struct ProfilePair {
  EvenField phi, psi;
  EvenField dphi, dpsi;  // odd derivative samples
  int growth_order = 0;
  double c = 0;
  double kappa = 0;  // coefficient of y^2 (order 2 only)
  TailReport tail;

  // asymptote of phi without the constant: |y| (k=1), kappa y^2 (k=2), 0 (k=0)
  double asymptote(double y) const;
  double phi_at(double y) const;
  double psi_at(double y) const;
  double dphi_at(double y) const;
  double dpsi_at(double y) const;
};

struct TildeState {
  double f = 0, fp = 0, g = 0, gp = 0;
};

struct HomogeneousShot {
  ProfilePair tilde;  // (phi~_1, psi~_1) normalised so psi~_1 ~ y + c1
  double b1 = 0, b0 = 0;  // slope/intercept of the forward growth-free combination
  double a1 = 0, a2 = 0;  // e^{sqrt2 y} coefficients of the two forward shots
  double fit_residual = 0;
  double c1 = 0;
};

struct ShootOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double b1_threshold = 1e-6;
};

struct UniversalConstants {
  double c1 = 0, c2 = 0, kappa = 0, c0 = 0;
  double alpha1 = 0, alpha2 = 0, alpha3 = 0, alpha4 = 0, alpha5 = 0;
  double b1 = 0, b0 = 0;
  double quad_Q2 = 0, quad_x2Q2 = 0, quad_rhoQ = 0, quad_Qp2 = 0;
  double h = 0, ymax = 0;

  nlohmann::json to_json() const;
  static UniversalConstants from_json(const nlohmann::json& j);
};

class ProfileSolver {
 public:
  explicit ProfileSolver(const GroundStateBundle& gs, ShootOptions opt = {});

  HomogeneousShot shoot_homogeneous() const;
  ProfilePair first_profile(const HomogeneousShot& shot) const;
  ProfilePair solve_inhomogeneous(const EvenField& g, const EvenField& h) const;
  double alpha1(const ProfilePair& first) const;
  ProfilePair second_profile(const ProfilePair& first, double alpha1) const;
  // alpha2, alpha3, alpha4, alpha5
  std::array<double, 4> alphas_2345(const ProfilePair& first, const ProfilePair& second) const;
  ProfilePair zero_profile(const ProfilePair& first) const;

  // Right-hand sides of the second-profile system.
  std::pair<EvenField, EvenField> second_rhs(const ProfilePair& first, double alpha1) const;

  const GroundStateBundle& bundle() const { return gs_; }

 private:
  const GroundStateBundle& gs_;
  ShootOptions opt_;
};

// Everything the ansatz needs: the bundle, four profile pairs and constants.
struct ProfileSet {
  GroundStateBundle gs;
  HomogeneousShot shot;
  ProfilePair first, second, zero;
  UniversalConstants k;

  static ProfileSet compute(const RadialGrid& grid, ShootOptions opt = {});
};

// Max |psi + L+ phi - g| and |phi + L- psi - h| on [0, ymax - 2], with the
// second derivative taken from the stored first derivatives.
struct PairResidual {
  double eq1 = 0, eq2 = 0;
  double max() const { return std::max(eq1, eq2); }
};
PairResidual pair_residual(const GroundStateBundle& gs, const ProfilePair& p, const EvenField* g,
                           const EvenField* h);

// Residual of the tilde system for (phi~, psi~) with zero right-hand side.
PairResidual tilde_residual(const GroundStateBundle& gs, const ProfilePair& tilde);

// Quadratures entering alpha1 and alpha2 after substitution (should vanish).
double alpha_resubstitution(const GroundStateBundle& gs, const ProfilePair& p, int k, double alpha);

// Decay rate of |r| measured from envelopes on [ymax-5, ymax-4] and [ymax-1, ymax].
double envelope_rate(const RadialGrid& g, const std::function<double(std::size_t)>& r, double floor);

}  // namespace blowup
