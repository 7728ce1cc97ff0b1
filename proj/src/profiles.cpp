#include "blowup/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/numeric/odeint.hpp>

namespace blowup {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 4>;
using Track = std::vector<State>;

struct TildeSystem {
  const EvenField* G = nullptr;
  const EvenField* H = nullptr;
  void operator()(const State& x, State& dx, double y) const {
    double q4 = eval_Q4(y);
    double sg = G ? interp_half(*G, y) : 0.0;
    double sh = H ? interp_half(*H, y) : 0.0;
    dx[0] = x[1];
    dx[1] = 2.0 * x[0] - 3.0 * q4 * x[0] - 2.0 * q4 * x[2] - sg;
    dx[2] = x[3];
    dx[3] = -3.0 * q4 * x[2] - 2.0 * q4 * x[0] - sh;
  }
};

// Integrates between grid nodes [i_begin, i_end] (either direction); result
// indexed by grid node.
Track integrate(const RadialGrid& grid, std::size_t i_begin, std::size_t i_end, State x0,
                const TildeSystem& sys, const ShootOptions& opt) {
  Track out(grid.count);
  std::vector<double> times;
  if (i_begin > i_end) {
    for (std::size_t i = i_begin + 1; i-- > i_end;) times.push_back(grid.y(i));
  } else {
    for (std::size_t i = i_begin; i <= i_end; ++i) times.push_back(grid.y(i));
  }
  double dt = (i_begin > i_end ? -1.0 : 1.0) * grid.h;
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_cash_karp54<State>());
  std::size_t k = 0;
  auto obs = [&](const State& x, double) {
    std::size_t idx = i_begin > i_end ? i_begin - k : i_begin + k;
    out[idx] = x;
    ++k;
  };
  odeint::integrate_times(stepper, sys, x0, times.begin(), times.end(), dt, obs);
  if (k != times.size()) throw NumericalError("profile integration stopped early");
  for (std::size_t i = std::min(i_begin, i_end); i <= std::max(i_begin, i_end); ++i)
    for (double v : out[i])
      if (!std::isfinite(v)) throw NumericalError("profile integration produced non-finite values");
  return out;
}

Track combine(std::initializer_list<std::pair<double, const Track*>> terms, std::size_t n) {
  Track r(n, State{0, 0, 0, 0});
  for (auto& [c, t] : terms)
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 4; ++k) r[i][k] += c * (*t)[i][k];
  return r;
}

EvenField component(const RadialGrid& g, const Track& t, int k, Parity p) {
  EvenField f(g, p);
  for (std::size_t i = 0; i < g.count; ++i) f[i] = t[i][k];
  if (p == Parity::odd) f[0] = 0.0;
  return f;
}

std::size_t node_at(const RadialGrid& g, double y) {
  return static_cast<std::size_t>(std::llround(std::clamp(y, 0.0, g.ymax) / g.h));
}

const double kSqrt2 = std::numbers::sqrt2;

struct Seeds {
  Track A, B, C;
};

Seeds backward_seeds(const RadialGrid& g, const ShootOptions& opt) {
  const double Y = g.ymax;
  const double e = std::exp(-kSqrt2 * Y);
  TildeSystem sys;
  Seeds s;
  s.A = integrate(g, g.count - 1, 0, State{e, -kSqrt2 * e, 0, 0}, sys, opt);
  s.B = integrate(g, g.count - 1, 0, State{0, 0, 1, 0}, sys, opt);
  s.C = integrate(g, g.count - 1, 0, State{0, 0, Y, 1}, sys, opt);
  return s;
}

// Solve A*a + B*b = -rhs for derivative components at y = 0.
std::pair<double, double> match_at_origin(const Track& A, const Track& B, const State& rhs) {
  double m11 = A[0][1], m12 = B[0][1], m21 = A[0][3], m22 = B[0][3];
  double det = m11 * m22 - m12 * m21;
  if (!(std::abs(det) > 1e-300)) throw NumericalError("shooting: singular matching system at origin");
  double r1 = -rhs[1], r2 = -rhs[3];
  return {(r1 * m22 - m12 * r2) / det, (m11 * r2 - r1 * m21) / det};
}

void fill_tail(ProfilePair& p, const RadialGrid& g) {
  double scale = 1.0;
  for (std::size_t i = 0; i < g.count; ++i) scale = std::max(scale, std::abs(p.phi[i]));
  double floor = 1e-13 * scale;
  p.tail.rate_phi =
      envelope_rate(g, [&](std::size_t i) { return p.phi[i] - p.asymptote(g.y(i)) - p.c; }, floor);
  p.tail.rate_psi =
      envelope_rate(g, [&](std::size_t i) { return p.psi[i] + p.asymptote(g.y(i)) + p.c; }, floor);
  p.tail.rate_sum = envelope_rate(g, [&](std::size_t i) { return p.phi[i] + p.psi[i]; }, floor);
}

}  // namespace

double envelope_rate(const RadialGrid& g, const std::function<double(std::size_t)>& r, double floor) {
  auto env = [&](double a, double b) {
    double m = 0;
    for (std::size_t i = node_at(g, a); i <= node_at(g, b); ++i) m = std::max(m, std::abs(r(i)));
    return m;
  };
  double near = env(g.ymax - 5, g.ymax - 4);
  double far = std::max(env(g.ymax - 1, g.ymax), floor);
  if (near <= 100.0 * floor) return 50.0;  // already at roundoff on the whole window
  return std::min(50.0, std::log(near / far) / 4.0);
}

double ProfilePair::asymptote(double y) const {
  double ay = std::abs(y);
  switch (growth_order) {
    case 1: return ay;
    case 2: return kappa * ay * ay;
    default: return 0.0;
  }
}

// Past ymax the asymptote-subtracted remainder is continued as r(Y)(y/Y)^3 e^{-(y-Y)}.
namespace {
double tail_factor(double ay, double Y) {
  double r = ay / Y;
  return r * r * r * std::exp(-(ay - Y));
}
}  // namespace

double ProfilePair::phi_at(double y) const {
  double ay = std::abs(y), Y = phi.grid.ymax;
  if (ay <= Y) return interp_half(phi, ay);
  double rem = phi.values.back() - asymptote(Y) - c;
  return asymptote(ay) + c + rem * tail_factor(ay, Y);
}

double ProfilePair::psi_at(double y) const {
  double ay = std::abs(y), Y = psi.grid.ymax;
  if (ay <= Y) return interp_half(psi, ay);
  double rem = psi.values.back() + asymptote(Y) + c;
  return -asymptote(ay) - c + rem * tail_factor(ay, Y);
}

double ProfilePair::dphi_at(double y) const {
  double ay = std::abs(y), s = y < 0 ? -1.0 : 1.0, Y = dphi.grid.ymax;
  if (ay <= Y) return s * interp_half(dphi, ay);
  double rem = phi.values.back() - asymptote(Y) - c;
  double da = growth_order == 1 ? 1.0 : growth_order == 2 ? 2.0 * kappa * ay : 0.0;
  return s * (da + rem * tail_factor(ay, Y) * (3.0 / ay - 1.0));
}

double ProfilePair::dpsi_at(double y) const {
  double ay = std::abs(y), s = y < 0 ? -1.0 : 1.0, Y = dpsi.grid.ymax;
  if (ay <= Y) return s * interp_half(dpsi, ay);
  double rem = psi.values.back() + asymptote(Y) + c;
  double da = growth_order == 1 ? 1.0 : growth_order == 2 ? 2.0 * kappa * ay : 0.0;
  return s * (-da + rem * tail_factor(ay, Y) * (3.0 / ay - 1.0));
}

ProfileSolver::ProfileSolver(const GroundStateBundle& gs, ShootOptions opt) : gs_(gs), opt_(opt) {}

HomogeneousShot ProfileSolver::shoot_homogeneous() const {
  const RadialGrid& g = gs_.grid;
  const double Y = g.ymax;
  HomogeneousShot shot;

  // Forward shots from even data: growth coefficients and the growth-free
  // combination's linear asymptote.
  TildeSystem sys;
  std::size_t iend = node_at(g, Y - 1);
  Track F1 = integrate(g, 0, iend, State{1, 0, 0, 0}, sys, opt_);
  Track F2 = integrate(g, 0, iend, State{0, 0, 1, 0}, sys, opt_);
  auto growth = [&](const Track& t) {
    double num = 0, den = 0;
    for (std::size_t i = node_at(g, Y - 4); i <= iend; ++i) {
      double e = std::exp(kSqrt2 * g.y(i));
      num += t[i][0] * e;
      den += e * e;
    }
    return num / den;
  };
  shot.a1 = growth(F1);
  shot.a2 = growth(F2);
  std::vector<double> xs, gs;
  for (std::size_t i = node_at(g, Y - 5); i <= iend; ++i) {
    xs.push_back(g.y(i));
    gs.push_back(shot.a2 * F1[i][2] - shot.a1 * F2[i][2]);
  }
  LineFit lf = fit_line(xs, gs);
  shot.b1 = lf.slope;
  shot.b0 = lf.intercept;
  shot.fit_residual = lf.max_residual / std::max(1.0, std::abs(lf.slope) * Y);
  if (!(std::abs(shot.b1) > opt_.b1_threshold))
    throw NumericalError("shooting: slope b1 is degenerate (resonance-like); |b1| = " +
                         std::to_string(std::abs(shot.b1)));
  if (shot.fit_residual > 1e-4) throw NumericalError("shooting: asymptotic line fit failed (ymax too small?)");

  // The returned profiles come from the stable backward shot from ymax.
  Seeds s = backward_seeds(g, opt_);
  auto [A, B] = match_at_origin(s.A, s.B, s.C[0]);
  Track t = combine({{A, &s.A}, {B, &s.B}, {1.0, &s.C}}, g.count);
  shot.c1 = B;
  ProfilePair& p = shot.tilde;
  p.phi = component(g, t, 0, Parity::even);
  p.dphi = component(g, t, 1, Parity::odd);
  p.psi = component(g, t, 2, Parity::even);
  p.dpsi = component(g, t, 3, Parity::odd);
  p.growth_order = 1;
  p.c = B;
  return shot;
}

ProfilePair ProfileSolver::first_profile(const HomogeneousShot& shot) const {
  const RadialGrid& g = gs_.grid;
  const ProfilePair& t = shot.tilde;
  ProfilePair p;
  p.phi = EvenField(g);
  p.psi = EvenField(g);
  p.dphi = EvenField(g, Parity::odd);
  p.dpsi = EvenField(g, Parity::odd);
  for (std::size_t i = 0; i < g.count; ++i) {
    p.phi[i] = t.phi[i] + t.psi[i];
    p.psi[i] = t.phi[i] - t.psi[i];
    p.dphi[i] = t.dphi[i] + t.dpsi[i];
    p.dpsi[i] = t.dphi[i] - t.dpsi[i];
  }
  p.growth_order = 1;
  p.c = shot.c1;
  fill_tail(p, g);
  return p;
}

ProfilePair ProfileSolver::solve_inhomogeneous(const EvenField& gsrc, const EvenField& hsrc) const {
  const RadialGrid& g = gs_.grid;
  if (!(gsrc.grid == g) || !(hsrc.grid == g)) throw std::invalid_argument("solve_inhomogeneous: grid mismatch");
  auto peak = [](const EvenField& f) {
    double m = 0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  };
  double scale = std::max(peak(gsrc), peak(hsrc));
  if (std::abs(gsrc.values.back()) > 1e-4 * scale + 1e-12 ||
      std::abs(hsrc.values.back()) > 1e-4 * scale + 1e-12)
    throw NumericalError("solve_inhomogeneous: right-hand side does not decay");

  EvenField G(g), H(g);
  for (std::size_t i = 0; i < g.count; ++i) {
    G[i] = gsrc[i] + hsrc[i];
    H[i] = gsrc[i] - hsrc[i];
  }
  // Sources past ymax are modelled as s(Y) (y/Y)^3 e^{-(y-Y)}; the seed carries
  // their bounded particular response so truncation does not shift constants.
  const double Y = g.ymax, iy = 1.0 / Y;
  const double m1 = 1 + 3 * iy + 6 * iy * iy + 6 * iy * iy * iy;     // int (1+u/Y)^3 e^{-u}
  const double m2 = 1 + 6 * iy + 18 * iy * iy + 24 * iy * iy * iy;  // int u (1+u/Y)^3 e^{-u}
  const double GY = G.values.back(), HY = H.values.back();
  State seed{GY, -GY * (1 - 3 * iy), 0.0, HY * m1};
  TildeSystem sys{&G, &H};
  Track P = integrate(g, g.count - 1, 0, seed, sys, opt_);
  Seeds s = backward_seeds(g, opt_);
  auto [A, B] = match_at_origin(s.A, s.B, P[0]);
  Track t = combine({{1.0, &P}, {A, &s.A}, {B, &s.B}}, g.count);

  ProfilePair p;
  p.phi = EvenField(g);
  p.psi = EvenField(g);
  p.dphi = EvenField(g, Parity::odd);
  p.dpsi = EvenField(g, Parity::odd);
  for (std::size_t i = 0; i < g.count; ++i) {
    p.phi[i] = 0.5 * (t[i][0] + t[i][2]);
    p.psi[i] = 0.5 * (t[i][0] - t[i][2]);
    p.dphi[i] = 0.5 * (t[i][1] + t[i][3]);
    p.dpsi[i] = 0.5 * (t[i][1] - t[i][3]);
  }
  p.dphi[0] = p.dpsi[0] = 0.0;
  p.growth_order = 0;
  p.c = 0.5 * (t.back()[2] + HY * m2);
  fill_tail(p, g);
  return p;
}

double ProfileSolver::alpha1(const ProfilePair& first) const {
  if (!(gs_.quad_rhoQ > 0)) throw NumericalError("alpha1: <rho, Q> is not positive");
  return -alpha_resubstitution(gs_, first, 3, 0.0) / gs_.quad_rhoQ;
}

std::pair<EvenField, EvenField> ProfileSolver::second_rhs(const ProfilePair& first, double a1) const {
  const RadialGrid& g = gs_.grid;
  EvenField r1(g), r2(g);
  for (std::size_t i = 0; i < g.count; ++i) {
    double y = g.y(i), w = y * y * gs_.Q[i] * gs_.Q[i] * gs_.Q[i] * gs_.Q[i];
    r1[i] = first.psi[i] - y * first.dpsi[i] - w * first.psi[i];
    r2[i] = first.phi[i] - y * first.dphi[i] + w * first.phi[i] - a1 * gs_.rho[i];
  }
  return {r1, r2};
}

ProfilePair ProfileSolver::second_profile(const ProfilePair& first, double a1) const {
  const RadialGrid& g = gs_.grid;
  const double c1 = first.c;
  // The constant parts of the right-hand sides tend to -c1 and +c1, which the
  // shift phi2 = check_phi + kappa y^2, psi2 = check_psi - kappa y^2 absorbs
  // exactly when kappa = c1 / 2.
  const double kappa = 0.5 * c1;
  EvenField gc(g), hc(g);
  for (std::size_t i = 0; i < g.count; ++i) {
    double y = g.y(i), w = y * y * gs_.Q[i] * gs_.Q[i] * gs_.Q[i] * gs_.Q[i];
    gc[i] = (first.psi[i] - y * first.dpsi[i] + c1) - w * first.psi[i] + 5.0 * kappa * w;
    hc[i] = (first.phi[i] - y * first.dphi[i] - c1) + w * first.phi[i] - a1 * gs_.rho[i] - kappa * w;
  }
  ProfilePair p = solve_inhomogeneous(gc, hc);
  for (std::size_t i = 0; i < g.count; ++i) {
    double y = g.y(i);
    p.phi[i] += kappa * y * y;
    p.psi[i] -= kappa * y * y;
    p.dphi[i] += 2.0 * kappa * y;
    p.dpsi[i] -= 2.0 * kappa * y;
  }
  p.growth_order = 2;
  p.kappa = kappa;
  fill_tail(p, g);
  return p;
}

std::array<double, 4> ProfileSolver::alphas_2345(const ProfilePair& first, const ProfilePair& second) const {
  const RadialGrid& g = gs_.grid;
  const double rq = gs_.quad_rhoQ;
  if (!(rq > 0)) throw NumericalError("alphas: <rho, Q> is not positive");
  double a2 = -alpha_resubstitution(gs_, second, 5, 0.0) / rq;
  EvenField i3(g), i4(g);
  for (std::size_t i = 0; i < g.count; ++i) {
    double y = g.y(i), q = gs_.Q[i], q4 = q * q * q * q;
    i3[i] = q4 * first.phi[i] * first.psi[i];
    i4[i] = y * y * y * y * q4 * q * first.psi[i];
  }
  double a3 = -2.0 * integrate_line(i3) / rq;
  double a4 = -0.25 * integrate_line(i4) / rq;
  double a5 = 32.0 / gs_.quad_x2Q2;
  return {a2, a3, a4, a5};
}

ProfilePair ProfileSolver::zero_profile(const ProfilePair& first) const {
  const RadialGrid& g = gs_.grid;
  EvenField gsrc(g), hsrc(g);
  for (std::size_t i = 0; i < g.count; ++i) {
    double q = gs_.Q[i], q4 = q * q * q * q;
    gsrc[i] = -q4 * first.psi[i];
    hsrc[i] = q4 * first.phi[i];
  }
  return solve_inhomogeneous(gsrc, hsrc);
}

double alpha_resubstitution(const GroundStateBundle& gs, const ProfilePair& p, int k, double alpha) {
  const RadialGrid& g = gs.grid;
  EvenField f = lambda_k(p.phi, p.dphi.values, k);
  for (std::size_t i = 0; i < g.count; ++i) {
    double y = g.y(i), q = gs.Q[i];
    f[i] += -y * y * q * q * q * q * p.phi[i] + alpha * gs.rho[i];
  }
  return gs.inner(f, gs.Q);
}

PairResidual pair_residual(const GroundStateBundle& gs, const ProfilePair& p, const EvenField* g,
                           const EvenField* h) {
  auto d2phi = first_derivative(p.dphi);
  auto d2psi = first_derivative(p.dpsi);
  PairResidual r;
  std::size_t iend = node_at(gs.grid, gs.grid.ymax - 2);
  for (std::size_t i = 0; i <= iend; ++i) {
    double q4 = std::pow(gs.Q[i], 4);
    double e1 = p.psi[i] - d2phi[i] + p.phi[i] - 5.0 * q4 * p.phi[i] - (g ? (*g)[i] : 0.0);
    double e2 = p.phi[i] - d2psi[i] + p.psi[i] - q4 * p.psi[i] - (h ? (*h)[i] : 0.0);
    r.eq1 = std::max(r.eq1, std::abs(e1));
    r.eq2 = std::max(r.eq2, std::abs(e2));
  }
  return r;
}

PairResidual tilde_residual(const GroundStateBundle& gs, const ProfilePair& t) {
  auto d2f = first_derivative(t.dphi);
  auto d2g = first_derivative(t.dpsi);
  PairResidual r;
  std::size_t iend = node_at(gs.grid, gs.grid.ymax - 2);
  for (std::size_t i = 0; i <= iend; ++i) {
    double q4 = std::pow(gs.Q[i], 4);
    double e1 = -d2f[i] + 2.0 * t.phi[i] - 3.0 * q4 * t.phi[i] - 2.0 * q4 * t.psi[i];
    double e2 = -d2g[i] - 3.0 * q4 * t.psi[i] - 2.0 * q4 * t.phi[i];
    r.eq1 = std::max(r.eq1, std::abs(e1));
    r.eq2 = std::max(r.eq2, std::abs(e2));
  }
  return r;
}

ProfileSet ProfileSet::compute(const RadialGrid& grid, ShootOptions opt) {
  ProfileSet s;
  s.gs = GroundStateBundle::build(grid);
  ProfileSolver ps(s.gs, opt);
  s.shot = ps.shoot_homogeneous();
  s.first = ps.first_profile(s.shot);
  double a1 = ps.alpha1(s.first);
  s.second = ps.second_profile(s.first, a1);
  auto a = ps.alphas_2345(s.first, s.second);
  s.zero = ps.zero_profile(s.first);
  UniversalConstants& k = s.k;
  k.c1 = s.first.c;
  k.c2 = s.second.c;
  k.kappa = s.second.kappa;
  k.c0 = s.zero.c;
  k.alpha1 = a1;
  k.alpha2 = a[0];
  k.alpha3 = a[1];
  k.alpha4 = a[2];
  k.alpha5 = a[3];
  k.b1 = s.shot.b1;
  k.b0 = s.shot.b0;
  k.quad_Q2 = s.gs.quad_Q2;
  k.quad_x2Q2 = s.gs.quad_x2Q2;
  k.quad_rhoQ = s.gs.quad_rhoQ;
  k.quad_Qp2 = s.gs.quad_Qp2;
  k.h = grid.h;
  k.ymax = grid.ymax;
  return s;
}

nlohmann::json UniversalConstants::to_json() const {
  nlohmann::json j;
  j["c1"] = c1;
  j["c2"] = c2;
  j["kappa"] = kappa;
  j["c0"] = c0;
  j["alpha1"] = alpha1;
  j["alpha2"] = alpha2;
  j["alpha3"] = alpha3;
  j["alpha4"] = alpha4;
  j["alpha5"] = alpha5;
  j["b1"] = b1;
  j["b0"] = b0;
  j["quadratures"] = {{"int_Q2", quad_Q2}, {"int_y2Q2", quad_x2Q2}, {"rho_Q", quad_rhoQ}, {"Qprime_L2_sq", quad_Qp2}};
  j["provenance"] = {{"h", h}, {"ymax", ymax}};
  return j;
}

UniversalConstants UniversalConstants::from_json(const nlohmann::json& j) {
  UniversalConstants k;
  k.c1 = j.at("c1");
  k.c2 = j.at("c2");
  k.kappa = j.at("kappa");
  k.c0 = j.at("c0");
  k.alpha1 = j.at("alpha1");
  k.alpha2 = j.at("alpha2");
  k.alpha3 = j.at("alpha3");
  k.alpha4 = j.at("alpha4");
  k.alpha5 = j.at("alpha5");
  k.b1 = j.at("b1");
  k.b0 = j.at("b0");
  const auto& q = j.at("quadratures");
  k.quad_Q2 = q.at("int_Q2");
  k.quad_x2Q2 = q.at("int_y2Q2");
  k.quad_rhoQ = q.at("rho_Q");
  k.quad_Qp2 = q.at("Qprime_L2_sq");
  k.h = j.at("provenance").at("h");
  k.ymax = j.at("provenance").at("ymax");
  return k;
}

}  // namespace blowup
