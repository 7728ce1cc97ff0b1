#pragma once

#include <functional>

#include "blowup/ansatz.hpp"
#include "blowup/field.hpp"

namespace blowup {

struct Conserved {
  double mass = 0;
  double momentum = 0;
  double energy = 0;
};

struct SimConfig {
  int n = 10;
  double beta = 0.0;
  double delta = 0.3;
  double L = 2.0;
  std::size_t N = 8192;
  double c_dt = 1e-2;
  double t_end = -0.02;
  int decompose_every = 20;
  int snapshots = 0;
  double tail_limit = 1e-6;
  double s_min = 0.0;  // backward runs stop when s falls below this

  double T_n() const { return -1.0 / n; }
  void validate() const;
};

// Strang split-step integrator for i u_t + u_xx + |u|^4 u = 0 on [-L, L).
class Propagator {
 public:
  Propagator(double L, std::size_t N);

  const Spectral& spectral() const { return sp_; }
  // dt may be negative.
  void step(ComplexField& u, double dt, bool nonlinear = true);
  // Fixed steps of size |dt| toward t_target; the last step is shortened.
  int advance(ComplexField& u, double t_target, double dt, bool nonlinear = true);

  Conserved conserved(const ComplexField& u) const;
  double dx_norm(const ComplexField& u) const;  // ||u_x||_{L^2}
  double tail_fraction(const ComplexField& u) const { return sp_.tail_fraction(u.values); }

 private:
  void kinetic(CVec& v, double dt);
  Spectral sp_;
  CVec hat_;
};

ComplexField sample_field(double L, std::size_t N, double t, const std::function<cd(double)>& f);
ComplexField sample_S(double L, std::size_t N, double t);

// ||d_x S(t)||^2 = ||Q'||^2 / t^2 + (1/4) int y^2 Q^2.
double dx_norm_S_sq(double t, double quad_Qp2, double quad_x2Q2);

// v(tau, x) = |tau|^{-1/2} u(t0, x / tau) e^{i x^2 / (4 tau)}, tau = -1/t0, by
// band-limited interpolation of u (zero outside [-L, L)). Applying it twice
// returns u(t0, -x).
ComplexField pseudo_conformal(const ComplexField& u, const Spectral& sp);

// u_n^in(x) = lambda^{-1/2} e^{i gamma} V[Gamma_n^in](x / lambda) at t = T_n.
ComplexField initial_data(const Ansatz& an, const SimConfig& cfg);
ComplexField field_from_params(const Ansatz& an, const ModParams& g, double L, std::size_t N, double t);

struct EnergyDiag {
  double N_fun = 0, H_fun = 0, K_fun = 0, G_fun = 0;
  double eta_L2_sq = 0;
  double square_lhs = 0;  // lambda^2 int |eta_x|^2 + b K + (b^2 / 4 lambda^2) N
  double square_rhs = 0;  // lambda^2 int |d_x(eta e^{i b x^2 / 4 lambda^2})|^2
};

// eta = e^{-i gamma} u - lambda^{-1/2} V(x / lambda).
EnergyDiag energy_functionals(const ComplexField& u, const Ansatz& an, const ModParams& g, const Spectral& sp);
EnergyDiag energy_functionals_eta(const CVec& eta, const CVec& v, const ModParams& g, const Spectral& sp);

}  // namespace blowup
