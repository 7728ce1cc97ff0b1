#pragma once

#include <Eigen/Dense>

#include "blowup/ansatz.hpp"
#include "blowup/evolution.hpp"

namespace blowup {

struct DecomposeOptions {
  double tol_ortho = 1e-10;
  int max_iters = 25;
  double fd_step = 1e-7;
  double y_extent = 40.0;  // half-width of the y-grid (clipped to the x-domain)
  double y_step = 0.02;
  int interp_points = 10;
};

struct DecompositionState {
  ModParams gamma;
  YGrid grid;
  CVec epsilon;
  std::array<double, 4> ortho{};
  double eps_L2 = 0;
  int newton_iters = 0;
  bool converged = false;
};

struct DecompositionError : NumericalError {
  using NumericalError::NumericalError;
};

// Decomposition y-grid for a given lambda and field domain.
YGrid decomposition_grid(double lambda, double L, const DecomposeOptions& opt = {});

// eps(y) = e^{-i gamma} lambda^{1/2} u(lambda y) - V[Gamma](y) by local
// Lagrange interpolation of u.
CVec epsilon_of(const Ansatz& an, const ComplexField& u, const ModParams& g, const YGrid& grid,
                int interp_points = 10);

// (<eps, M_{-b} Q>, <eps, M_{-b} y^2 Q>, <eps, i M_{-b} Lambda Q>, <eps, i M_{-b} rho>)
std::array<double, 4> ortho_residuals(const Ansatz& an, const CVec& eps, const ModParams& g, const YGrid& grid);

// Newton on the four orthogonality conditions in (gamma, lambda, b, a); the
// j components of the guess are kept.
DecompositionState decompose(const Ansatz& an, const ComplexField& u, const ModParams& guess,
                             const DecomposeOptions& opt = {});

// Leading-order Jacobian of the orthogonality residuals in (gamma, lambda, b, a).
Eigen::Matrix4d leading_jacobian(const GroundStateBundle& gs, double lambda);

struct D0Matrix {
  Eigen::Matrix<double, 7, 7> D;
  double det4 = 0;
  double cond = 0;
};
D0Matrix d0_matrix(const GroundStateBundle& gs);

struct TrackRow {
  double t = 0, s = 0;
  DecompositionState state;
  MVector m;
  double m_norm = 0;
  double J = 0;
  double g = 0;
};

struct TrackOptions {
  int n = 10;              // s(T_n) = n
  double beta_gap = 0.5;   // max allowed |Delta s| between snapshots
  bool integrate_j = false;
  DecomposeOptions decompose;
};

// Decompose a time series of fields (ordered in t, either direction) with
// warm starts, accumulate s by the trapezoid rule on dt / lambda^2, and
// difference Gamma(s) for the m-vector.
std::vector<TrackRow> track(const Ansatz& an, const std::vector<ComplexField>& snaps, const ModParams& guess,
                            const TrackOptions& opt);

// Central differences of Gamma(s) (one-sided at the ends).
std::vector<ModParams> difference_params(const std::vector<double>& s, const std::vector<ModParams>& g);

double J_functional(const Ansatz& an, const CVec& eps, const ModParams& g, const YGrid& grid);

// s^{7/4} (b - 1/s + alpha1 s^{-5/2} cos gamma)
double g_beta(double s, double b, double gamma, double alpha1);

}  // namespace blowup
