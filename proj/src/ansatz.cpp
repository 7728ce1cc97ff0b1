#include "blowup/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace blowup {

namespace odeint = boost::numeric::odeint;

ModParams ModParams::axpy(double s, const ModParams& d) const {
  auto x = to_array();
  auto y = d.to_array();
  for (int i = 0; i < 7; ++i) x[i] += s * y[i];
  return from_array(x);
}

double MVector::norm() const {
  return std::sqrt(m_gamma * m_gamma + m_lambda * m_lambda + m_b * m_b + m_a * m_a);
}

std::vector<double> YGrid::points() const {
  std::vector<double> p(N);
  for (std::size_t i = 0; i < N; ++i) p[i] = y(i);
  return p;
}

YGrid YGrid::covering(double extent, double hmax) {
  YGrid g;
  g.half_width = extent;
  g.N = 16;
  while (g.h() > hmax) g.N *= 2;
  return g;
}

ModParams initial_params(const UniversalConstants& k, double n, double beta) {
  ModParams g;
  g.gamma = n;
  g.lambda = 1.0 / n - k.alpha1 * std::pow(n, -2.5) * std::cos(n) + beta * std::pow(n, -1.75);
  g.b = g.lambda;
  g.a = k.alpha1 * std::pow(n, -2.5) * std::sin(n);
  if (!(g.lambda > 0)) throw std::invalid_argument("initial data: lambda_n^in <= 0 (n too small for beta)");
  return g;
}

Ansatz::Ansatz(const ProfileSet& P, double delta) : P_(P), cut_(delta) {}

double Ansatz::theta(const ModParams& g, double y) const { return cut_.value(g.lambda * y); }

double Ansatz::Qa(double a, double y) const { return eval_Q(y) + (a != 0 ? a * P_.gs.rho_at(y) : 0.0); }

cd Ansatz::W(const ModParams& g, double y) const {
  cd w = std::polar(Qa(g.a, y), -0.25 * g.b * y * y);
  double th = theta(g, y);
  if (th > 0) {
    double l32 = std::pow(g.lambda, 1.5), l52 = l32 * g.lambda;
    double c = std::cos(g.gamma), s = std::sin(g.gamma);
    double A = l32 * P_.first.phi_at(y) * c + l52 * P_.second.phi_at(y) * s;
    double B = l32 * P_.first.psi_at(y) * s - l52 * P_.second.psi_at(y) * c;
    w += th * cd(A, B);
  }
  return w;
}

namespace {
struct RJet {
  cd r, rp, rpp;
};
RJet r_jet(double x, double kappa) {
  double s = x < 0 ? -1.0 : (x > 0 ? 1.0 : 0.0);
  return {cd(std::abs(x), kappa * x * x), cd(s, 2.0 * kappa * x), cd(0, 2.0 * kappa)};
}
}  // namespace

cd Ansatz::nu1(double x) const {
  Jet4 T = cut_(x);
  RJet r = r_jet(x, P_.k.kappa);
  return T[2] * r.r + 2.0 * T[1] * r.rp;
}

cd Ansatz::nu1_pp(double x) const {
  Jet4 T = cut_(x);
  RJet r = r_jet(x, P_.k.kappa);
  return T[4] * r.r + 4.0 * T[3] * r.rp + 5.0 * T[2] * r.rpp;
}

cd Ansatz::nu2(double x) const {
  cd w = cut_.value(x) * r_jet(x, P_.k.kappa).r;
  double p = std::norm(w);
  return p * p * w;
}

cd Ansatz::nu2_pp(double x) const {
  Jet4 T = cut_(x);
  RJet r = r_jet(x, P_.k.kappa);
  cd w = T[0] * r.r;
  cd w1 = T[1] * r.r + T[0] * r.rp;
  cd w2 = T[2] * r.r + 2.0 * T[1] * r.rp + T[0] * r.rpp;
  double P = std::norm(w);
  double P1 = 2.0 * std::real(std::conj(w) * w1);
  double P2 = 2.0 * std::real(std::conj(w) * w2) + 2.0 * std::norm(w1);
  return 2.0 * P1 * P1 * w + 2.0 * P * P2 * w + 4.0 * P * P1 * w1 + P * P * w2;
}

cd Ansatz::Z(const ModParams& g, double y) const {
  if (g.j1 < 0 || g.j2 < 0 || g.j3 < 0) throw std::invalid_argument("Z: j_k must be nonnegative");
  return Z_formula(g, y);
}

// Z is a polynomial in (j1, j2, j3); the formula is used for any sign when
// differencing in s at j = 0.
cd Ansatz::Z_formula(const ModParams& g, double y) const {
  if (g.j1 == 0 && g.j2 == 0 && g.j3 == 0) return 0;
  double x = g.lambda * y;
  if (std::abs(x) >= 2.0 * cut_.delta()) return 0;
  Jet4 T = cut_(x);
  RJet r = r_jet(x, P_.k.kappa);
  cd n1 = T[2] * r.r + 2.0 * T[1] * r.rp;
  cd n1pp = T[4] * r.r + 4.0 * T[3] * r.rp + 5.0 * T[2] * r.rpp;
  cd w = T[0] * r.r;
  cd w1 = T[1] * r.r + T[0] * r.rp;
  cd w2 = T[2] * r.r + 2.0 * T[1] * r.rp + T[0] * r.rpp;
  double P = std::norm(w);
  double P1 = 2.0 * std::real(std::conj(w) * w1);
  double P2 = 2.0 * std::real(std::conj(w) * w2) + 2.0 * std::norm(w1);
  cd n2 = P * P * w;
  cd n2pp = 2.0 * P1 * P1 * w + 2.0 * P * P2 * w + 4.0 * P * P1 * w1 + P * P * w2;
  const cd I(0, 1);
  cd bracket = -I * g.j1 * (n1 + n2) - 0.5 * g.j1 * g.j1 * (n1pp + n2pp) - I * g.j2 * P_.k.c1 * T[2] +
               g.j3 * P_.k.c2 * T[2];
  return std::sqrt(g.lambda) * std::polar(1.0, -g.gamma) * bracket;
}

CVec Ansatz::build_W(const ModParams& g, const std::vector<double>& ys) const {
  CVec v(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) v[i] = W(g, ys[i]);
  return v;
}

CVec Ansatz::build_Z(const ModParams& g, const std::vector<double>& ys) const {
  CVec v(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) v[i] = Z(g, ys[i]);
  return v;
}

CVec Ansatz::build_V(const ModParams& g, const std::vector<double>& ys) const {
  CVec v(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) v[i] = W(g, ys[i]) + Z(g, ys[i]);
  return v;
}

double Ansatz::omega(const ModParams& g) const {
  const UniversalConstants& k = P_.k;
  double l = g.lambda, l32 = std::pow(l, 1.5), l52 = l32 * l;
  return k.alpha1 * g.b * l32 * std::cos(g.gamma) + k.alpha2 * g.b * l52 * std::sin(g.gamma) +
         k.alpha3 * l * l * l * std::sin(2.0 * g.gamma) + k.alpha4 * g.b * g.b * l32 * std::sin(g.gamma);
}

MVector Ansatz::m_vector(const ModParams& g, const ModParams& dot) const {
  if (!(g.lambda > 0)) throw std::invalid_argument("m_vector: lambda must be positive");
  MVector m;
  m.m_gamma = dot.gamma - 1.0;
  m.m_lambda = dot.lambda / g.lambda + g.b;
  m.m_b = dot.b + g.b * g.b - g.a;
  m.m_a = dot.a - omega(g);
  return m;
}

cd Ansatz::r_star(double x) const { return cut_.value(x) * r_jet(x, P_.k.kappa).r; }

ModParams Ansatz::m_zero_flow(const ModParams& g) const {
  ModParams d;
  d.gamma = 1.0;
  d.lambda = -g.b * g.lambda;
  d.b = g.a - g.b * g.b;
  d.a = omega(g);
  d.j1 = -g.lambda * g.lambda;
  d.j2 = d.j1 * g.lambda;
  d.j3 = d.j2 * g.lambda;
  return d;
}

ResidualSample Ansatz::residual(const ModParams& g, const ModParams& dot, const YGrid& grid,
                                double ds_rel) const {
  if (2.0 * cut_.delta() / g.lambda > grid.half_width)
    throw std::invalid_argument("residual: y-grid does not cover the cutoff support");
  if (grid.h() > 1e-2) throw std::invalid_argument("residual: y-grid step must be <= 1e-2");
  ResidualSample out;
  out.grid = grid;
  const std::size_t N = grid.N;
  const std::vector<double> ys = grid.points();
  Spectral sp(N, grid.half_width);

  auto build = [&](const ModParams& q) {
    CVec v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = W(q, ys[i]) + Z_formula(q, ys[i]);
    return v;
  };
  CVec V0 = build(g);
  double ds = ds_rel / g.lambda;
  auto central = [&](double h) {
    CVec p = build(g.axpy(h, dot)), m = build(g.axpy(-h, dot));
    CVec d(N);
    for (std::size_t i = 0; i < N; ++i) d[i] = (p[i] - m[i]) / (2.0 * h);
    return d;
  };
  CVec d1 = central(ds), d2 = central(0.5 * ds);
  CVec dV(N);
  double err = 0;
  for (std::size_t i = 0; i < N; ++i) {
    dV[i] = (4.0 * d2[i] - d1[i]) / 3.0;
    err += std::norm(dV[i] - d2[i]);
  }
  out.ds_error = std::sqrt(err * grid.h());

  CVec Vy = sp.derivative(V0, 1), Vyy = sp.derivative(V0, 2);
  const cd I(0, 1);
  double ls = dot.lambda / g.lambda;
  out.E.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    cd v = V0[i];
    double p = std::norm(v);
    cd LV = 0.5 * v + ys[i] * Vy[i];
    out.E[i] = I * dV[i] + Vyy[i] - v + p * p * v - I * ls * LV - (dot.gamma - 1.0) * v;
  }

  MVector m = m_vector(g, dot);
  out.S0.assign(N, 0);
  out.R.resize(N);
  const double b = g.b, a = g.a;
  for (std::size_t i = 0; i < N; ++i) {
    double y = ys[i];
    double qa = Qa(a, y);
    double qap = eval_Qprime(y) + (a != 0 ? a * P_.gs.rho_deriv_at(y) : 0.0);
    double lqa = 0.5 * qa + y * qap;
    cd M = std::polar(1.0, -0.25 * b * y * y);
    cd s = -m.m_gamma * qa + m.m_lambda * (-I * lqa - 0.5 * b * y * y * qa) + m.m_b * 0.25 * y * y * qa +
           m.m_a * I * P_.gs.rho_at(y);
    out.S0[i] = M * s;
    out.R[i] = out.E[i] - out.S0[i];
  }

  CVec Ry = sp.derivative(out.R, 1);
  double h = grid.h();
  double l2 = sum_abs2(out.R, h);
  out.norm_L2 = std::sqrt(l2);
  out.norm_H1 = std::sqrt(l2 + sum_abs2(Ry, h));
  double wy = 0;
  cd pr = 0;
  for (std::size_t i = 0; i < N; ++i) {
    double y = ys[i];
    wy += y * y * std::norm(out.R[i]);
    pr += std::polar(1.0, 0.25 * b * y * y) * out.R[i] * eval_Q(y);
  }
  out.norm_yR = std::sqrt(wy * h);
  out.proj_iQ = std::abs(std::imag(pr) * h);
  return out;
}

std::vector<ModParams> integrate_m_zero(const Ansatz& an, const ModParams& g0, double s0,
                                        const std::vector<double>& s_out) {
  using State = std::array<double, 7>;
  auto rhs = [&](const State& x, State& dx, double) {
    ModParams g = ModParams::from_array(x);
    if (!(g.lambda > 0)) throw NumericalError("m = 0 flow: lambda left (0, inf)");
    dx = an.m_zero_flow(g).to_array();
  };
  std::vector<ModParams> out;
  State x = g0.to_array();
  double s = s0;
  for (double target : s_out) {
    if (target != s) {
      auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_cash_karp54<State>());
      double dt = target > s ? 1e-2 : -1e-2;
      odeint::integrate_adaptive(stepper, rhs, x, s, target, dt);
      s = target;
    }
    out.push_back(ModParams::from_array(x));
  }
  return out;
}

}  // namespace blowup
