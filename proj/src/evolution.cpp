#include "blowup/evolution.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blowup {

void SimConfig::validate() const {
  if (n < 2) throw std::invalid_argument("config: n must be >= 2");
  if (!(beta > -1 && beta < 1)) throw std::invalid_argument("config: beta must lie in (-1, 1)");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("config: delta must lie in (0, 1)");
  if (!(L > 0)) throw std::invalid_argument("config: L must be positive");
  if (!is_power_of_two(N) || N < 64) throw std::invalid_argument("config: N must be a power of two >= 64");
  if (!(c_dt > 0)) throw std::invalid_argument("config: c_dt must be positive");
  if (!(t_end < 0)) throw std::invalid_argument("config: t_end must be negative");
  if (decompose_every < 1) throw std::invalid_argument("config: decompose_every must be >= 1");
  if (snapshots < 0) throw std::invalid_argument("config: snapshots must be >= 0");
}

Propagator::Propagator(double L, std::size_t N) : sp_(N, L) {}

void Propagator::kinetic(CVec& v, double dt) {
  sp_.forward(v, hat_);
  const auto& k = sp_.k();
  for (std::size_t m = 0; m < hat_.size(); ++m) hat_[m] *= std::polar(1.0, -k[m] * k[m] * dt);
  sp_.inverse(hat_, v);
}

void Propagator::step(ComplexField& u, double dt, bool nonlinear) {
  if (u.N != sp_.size()) throw std::invalid_argument("step: field size does not match propagator");
  kinetic(u.values, 0.5 * dt);
  if (nonlinear) {
    for (cd& v : u.values) {
      double p = std::norm(v);
      v *= std::polar(1.0, dt * p * p);
    }
  }
  kinetic(u.values, 0.5 * dt);
  u.t += dt;
}

int Propagator::advance(ComplexField& u, double t_target, double dt, bool nonlinear) {
  double dir = t_target >= u.t ? 1.0 : -1.0;
  double h = std::abs(dt);
  if (!(h > 0)) throw std::invalid_argument("advance: dt must be nonzero");
  int steps = 0;
  while (dir * (t_target - u.t) > 1e-15 * std::max(1.0, std::abs(t_target))) {
    double remaining = std::abs(t_target - u.t);
    double d = remaining < 1.000001 * h ? remaining : h;
    step(u, dir * d, nonlinear);
    ++steps;
    if (remaining < 1.000001 * h) u.t = t_target;
  }
  return steps;
}

Conserved Propagator::conserved(const ComplexField& u) const {
  Conserved c;
  CVec du = sp_.derivative(u.values, 1);
  double dx = u.dx();
  double kin = 0, pot = 0, mom = 0, mass = 0;
  for (std::size_t i = 0; i < u.N; ++i) {
    double p = std::norm(u.values[i]);
    mass += p;
    kin += std::norm(du[i]);
    pot += p * p * p;
    mom += std::imag(du[i] * std::conj(u.values[i]));
  }
  c.mass = mass * dx;
  c.momentum = mom * dx;
  c.energy = 0.5 * kin * dx - pot * dx / 6.0;
  return c;
}

double Propagator::dx_norm(const ComplexField& u) const {
  return std::sqrt(sum_abs2(sp_.derivative(u.values, 1), u.dx()));
}

ComplexField sample_field(double L, std::size_t N, double t, const std::function<cd(double)>& f) {
  ComplexField u = ComplexField::zeros(L, N, t);
  for (std::size_t i = 0; i < N; ++i) u.values[i] = f(u.x(i));
  return u;
}

ComplexField sample_S(double L, std::size_t N, double t) {
  return sample_field(L, N, t, [t](double x) { return eval_S(t, x); });
}

double dx_norm_S_sq(double t, double quad_Qp2, double quad_x2Q2) {
  return quad_Qp2 / (t * t) + 0.25 * quad_x2Q2;
}

ComplexField pseudo_conformal(const ComplexField& u, const Spectral& sp) {
  if (u.t == 0) throw std::invalid_argument("pseudo_conformal: t must be nonzero");
  if (u.N != sp.size()) throw std::invalid_argument("pseudo_conformal: grid mismatch");
  const std::size_t N = u.N;
  const double L = u.L;
  const double tau = -1.0 / u.t;
  CVec hat;
  sp.forward(u.values, hat);
  // split the Nyquist coefficient symmetrically between +-N/2
  const cd nyq = 0.5 * hat[N / 2];
  ComplexField v = ComplexField::zeros(L, N, tau);
  const double scale = 1.0 / (std::sqrt(std::abs(tau)) * static_cast<double>(N));
  for (std::size_t j = 0; j < N; ++j) {
    double x = v.x(j);
    double xi = x / tau;
    if (xi < -L || xi >= L) continue;
    double theta = std::numbers::pi * (xi + L) / L;
    cd w = std::polar(1.0, theta), wi = std::conj(w);
    cd pw = 1.0, pn = 1.0;
    cd sum = hat[0];
    for (std::size_t m = 1; m < N / 2; ++m) {
      pw *= w;
      pn *= wi;
      sum += hat[m] * pw + hat[N - m] * pn;
    }
    pw *= w;
    pn *= wi;
    sum += nyq * (pw + pn);
    v.values[j] = sum * scale * std::polar(1.0, x * x / (4.0 * tau));
  }
  return v;
}

ComplexField field_from_params(const Ansatz& an, const ModParams& g, double L, std::size_t N, double t) {
  double il = 1.0 / g.lambda;
  cd pre = std::polar(std::sqrt(il), g.gamma);
  return sample_field(L, N, t, [&](double x) { return pre * an.V(g, x * il); });
}

ComplexField initial_data(const Ansatz& an, const SimConfig& cfg) {
  cfg.validate();
  ModParams g = initial_params(an.constants(), cfg.n, cfg.beta);
  if (2.0 * cfg.delta >= cfg.L) throw std::invalid_argument("initial data: cutoff support 2 delta exceeds L");
  double dx = 2.0 * cfg.L / static_cast<double>(cfg.N);
  if (dx > 0.05 * g.lambda) throw std::invalid_argument("initial data: grid does not resolve lambda_n^in");
  return field_from_params(an, g, cfg.L, cfg.N, cfg.T_n());
}

EnergyDiag energy_functionals_eta(const CVec& eta, const CVec& v, const ModParams& g, const Spectral& sp) {
  const std::size_t N = eta.size();
  const double L = sp.half_width(), dx = sp.dx();
  const double lam = g.lambda, b = g.b;
  CVec de = sp.derivative(eta, 1);
  const double beta = b / (4.0 * lam * lam);
  CVec tw(N);
  for (std::size_t i = 0; i < N; ++i) {
    double x = -L + static_cast<double>(i) * dx;
    tw[i] = eta[i] * std::polar(1.0, beta * x * x);
  }
  CVec dtw = sp.derivative(tw, 1);
  EnergyDiag d;
  double grad = 0, mass = 0, nl = 0, kk = 0, nn = 0, sq = 0;
  for (std::size_t i = 0; i < N; ++i) {
    double x = -L + static_cast<double>(i) * dx;
    double e2 = std::norm(eta[i]);
    mass += e2;
    grad += std::norm(de[i]);
    nn += x * x * e2;
    kk += x * std::imag(de[i] * std::conj(eta[i]));
    double pv = std::norm(v[i]), pw = std::norm(v[i] + eta[i]);
    double Fw = pw * pw * pw / 6.0, Fv = pv * pv * pv / 6.0;
    double fre = std::real(pv * pv * v[i] * std::conj(eta[i]));
    nl += Fw - Fv - fre;
    sq += std::norm(dtw[i]);
  }
  d.eta_L2_sq = mass * dx;
  d.N_fun = nn * dx;
  d.K_fun = kk * dx;
  d.H_fun = (grad + mass / (lam * lam) - 2.0 * nl) * dx;
  d.G_fun = lam * lam * d.H_fun + b * d.K_fun + 0.25 * b * b / (lam * lam) * d.N_fun;
  d.square_lhs = lam * lam * grad * dx + b * d.K_fun + 0.25 * b * b / (lam * lam) * d.N_fun;
  d.square_rhs = lam * lam * sq * dx;
  return d;
}

EnergyDiag energy_functionals(const ComplexField& u, const Ansatz& an, const ModParams& g, const Spectral& sp) {
  if (u.N != sp.size()) throw std::invalid_argument("energy_functionals: grid mismatch");
  const std::size_t N = u.N;
  CVec eta(N), v(N);
  double il = 1.0 / g.lambda;
  double pre = std::sqrt(il);
  cd ph = std::polar(1.0, -g.gamma);
  for (std::size_t i = 0; i < N; ++i) {
    double x = u.x(i);
    v[i] = pre * an.V(g, x * il);
    eta[i] = ph * u.values[i] - v[i];
  }
  return energy_functionals_eta(eta, v, g, sp);
}

}  // namespace blowup
