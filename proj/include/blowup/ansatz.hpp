#pragma once

#include <array>
#include <vector>

#include "blowup/cutoff.hpp"
#include "blowup/field.hpp"
#include "blowup/profiles.hpp"

namespace blowup {

// Gamma = (gamma, lambda, b, a, j1, j2, j3). Also used for d/ds Gamma.
struct ModParams {
  double gamma = 0, lambda = 1, b = 0, a = 0;
  double j1 = 0, j2 = 0, j3 = 0;

  std::array<double, 7> to_array() const { return {gamma, lambda, b, a, j1, j2, j3}; }
  static ModParams from_array(const std::array<double, 7>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
  }
  ModParams axpy(double s, const ModParams& d) const;  // this + s * d
};

struct MVector {
  double m_gamma = 0, m_lambda = 0, m_b = 0, m_a = 0;
  double norm() const;
};

// Symmetric periodic grid y_k = -Y + k h, h = 2Y/N.
struct YGrid {
  double half_width = 40;
  std::size_t N = 8192;

  double h() const { return 2.0 * half_width / static_cast<double>(N); }
  double y(std::size_t k) const { return -half_width + static_cast<double>(k) * h(); }
  std::vector<double> points() const;
  // Smallest power-of-two grid on [-extent, extent) with h <= hmax.
  static YGrid covering(double extent, double hmax);
};

struct ResidualSample {
  YGrid grid;
  CVec E, S0, R;
  double norm_L2 = 0;
  double norm_H1 = 0;
  double norm_yR = 0;
  double proj_iQ = 0;  // |<M_b R, iQ>|
  double ds_error = 0;  // Richardson estimate of the d/ds V error in L2
};

// Gamma_n^in: (n, lambda, b, a, 0, 0, 0) with lambda = b = 1/n - alpha1 n^{-5/2} cos n + beta n^{-7/4}.
ModParams initial_params(const UniversalConstants& k, double n, double beta);

class Ansatz {
 public:
  Ansatz(const ProfileSet& P, double delta);

  const ProfileSet& profiles() const { return P_; }
  const UniversalConstants& constants() const { return P_.k; }
  const Cutoff& cutoff() const { return cut_; }

  double theta(const ModParams& g, double y) const;
  cd W(const ModParams& g, double y) const;
  cd Z(const ModParams& g, double y) const;
  cd V(const ModParams& g, double y) const { return W(g, y) + Z(g, y); }
  CVec build_W(const ModParams& g, const std::vector<double>& ys) const;
  CVec build_Z(const ModParams& g, const std::vector<double>& ys) const;
  CVec build_V(const ModParams& g, const std::vector<double>& ys) const;

  // Q_a = Q + a rho
  double Qa(double a, double y) const;

  // nu_1, nu_2 and their second derivatives in the original variable x.
  cd nu1(double x) const;
  cd nu2(double x) const;
  cd nu1_pp(double x) const;
  cd nu2_pp(double x) const;

  double omega(const ModParams& g) const;
  MVector m_vector(const ModParams& g, const ModParams& dot) const;
  // Theta(x) (|x| + i kappa x^2)
  cd r_star(double x) const;

  // E(V) split as S0 + R on the given grid; d/ds V by centred differences
  // along dot with step ds_rel * s_scale (s_scale ~ 1/lambda).
  ResidualSample residual(const ModParams& g, const ModParams& dot, const YGrid& grid,
                          double ds_rel = 1e-4) const;

  // d/ds Gamma for m = 0: gamma_s = 1, lambda_s = -b lambda, b_s = a - b^2,
  // a_s = Omega, j_k' = -lambda^{k+1}.
  ModParams m_zero_flow(const ModParams& g) const;

 private:
  cd Z_formula(const ModParams& g, double y) const;

  const ProfileSet& P_;
  Cutoff cut_;
};

// Samples of the m = 0 flow started from Gamma(s0) = g0, at the requested s
// values (integrated in either direction with tolerance 1e-12).
std::vector<ModParams> integrate_m_zero(const Ansatz& an, const ModParams& g0, double s0,
                                        const std::vector<double>& s_out);

}  // namespace blowup
