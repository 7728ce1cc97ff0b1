// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <functional>
#include <string>

#include <fmt/format.h>

#include "blowup/config.hpp"
#include "blowup/experiments.hpp"

using namespace blowup;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double max_abs_upto(const EvenField& f, double ymax) {
  double m = 0;
  for (std::size_t i = 0; i < f.size() && f.grid.y(i) <= ymax; ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

// max |L_- Q|, |L_+ Lambda Q + 2Q|, |L_- y^2 Q + 4 Lambda Q| relative to the right-hand sides
std::array<double, 3> nullspace(const GroundStateBundle& gs) {
  EvenField r1 = gs.apply_Lminus(gs.Q), r2 = gs.apply_Lplus(gs.LambdaQ), r3 = gs.apply_Lminus(gs.y2Q);
  for (std::size_t i = 0; i < r2.size(); ++i) {
    r2[i] += 2.0 * gs.Q[i];
    r3[i] += 4.0 * gs.LambdaQ[i];
  }
  double ym = gs.grid.ymax - 2, q = max_abs_upto(gs.Q, ym), lq = max_abs_upto(gs.LambdaQ, ym);
  return {max_abs_upto(r1, ym) / q, max_abs_upto(r2, ym) / (2 * q), max_abs_upto(r3, ym) / (4 * lq)};
}

const ProfileSet& base() {
  static const ProfileSet P = ProfileSet::compute(RadialGrid::make(1e-3, 20.0));
  return P;
}
const ProfileSet& fine() {
  static const ProfileSet P = ProfileSet::compute(RadialGrid::make(5e-4, 25.0));
  return P;
}

Outcome quadrature_suite() {
  const auto& gs = base().gs;
  auto r = nullspace(gs);
  double rho = rel(gs.quad_rhoQ, gs.quad_x2Q2 / 8);
  double energy = std::abs(gs.quad_Qp2 - gs.quad_Q6 / 3) / gs.quad_Qp2;
  double lq = std::abs(gs.inner(gs.Q, gs.LambdaQ)) / gs.quad_Q2;
  auto coarse = nullspace(GroundStateBundle::build(RadialGrid::make(4e-2, 20.0)));
  auto half = nullspace(GroundStateBundle::build(RadialGrid::make(2e-2, 20.0)));
  double order = 1e9;
  for (int k = 0; k < 3; ++k) order = std::min(order, std::log2(coarse[k] / half[k]));
  bool ok = std::max({r[0], r[1], r[2], rho, energy, lq}) <= 1e-6 && order >= 2.0;
  return {ok, fmt::format("null-space rel {:.1e} {:.1e} {:.1e}; <rho,Q> vs int y^2Q^2/8 {:.1e}; E(Q) {:.1e}; "
                          "<Q,LambdaQ> {:.1e}; observed order {:.2f}",
                          r[0], r[1], r[2], rho, energy, lq, order)};
}

Outcome profile_suite() {
  const auto& P = base();
  ProfileSolver solver(P.gs);
  auto rhs = solver.second_rhs(P.first, P.k.alpha1);
  EvenField g(P.gs.grid), h(P.gs.grid);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double q4 = std::pow(P.gs.Q[i], 4);
    g[i] = -q4 * P.first.psi[i];
    h[i] = q4 * P.first.phi[i];
  }
  double r1 = pair_residual(P.gs, P.first, nullptr, nullptr).max();
  double r2 = pair_residual(P.gs, P.second, &rhs.first, &rhs.second).max();
  double r0 = pair_residual(P.gs, P.zero, &g, &h).max();
  double rate = 1e9;
  for (const auto* p : {&P.first, &P.second, &P.zero})
    rate = std::min({rate, p->tail.rate_phi, p->tail.rate_psi, p->tail.rate_sum});
  double dc1 = rel(P.k.c1, fine().k.c1), dk = rel(P.k.kappa, fine().k.kappa);
  double b1 = std::abs(P.k.b1);
  bool ok = std::max({r1, r2, r0}) <= 1e-6 && rate >= 0.5 && std::max(dc1, dk) <= 1e-5 && b1 > 1e-3;
  return {ok, fmt::format("residuals {:.1e} {:.1e} {:.1e}; min tail rate {:.3f}; c1 {:.10f} (refined {:.1e}); "
                          "kappa {:.10f} (refined {:.1e}); |b1| {:.4f}",
                          r1, r2, r0, rate, P.k.c1, dc1, P.k.kappa, dk, b1)};
}

Outcome constants_suite() {
  const auto& P = base();
  double s1 = std::abs(alpha_resubstitution(P.gs, P.first, 3, P.k.alpha1));
  double s2 = std::abs(alpha_resubstitution(P.gs, P.second, 5, P.k.alpha2));
  double a5 = P.k.alpha5 * P.gs.quad_x2Q2;
  double d3 = rel(P.k.alpha3, fine().k.alpha3), d4 = rel(P.k.alpha4, fine().k.alpha4);
  bool ok = std::max(s1, s2) <= 1e-8 && std::abs(a5 - 32.0) <= 1e-12 * 32 && std::max(d3, d4) <= 1e-5;
  return {ok, fmt::format("resubstitution {:.1e} {:.1e}; alpha5 int y^2Q^2 = {:.15f}; alpha3 {:.6f} (refined {:.1e}); "
                          "alpha4 {:.6f} (refined {:.1e})",
                          s1, s2, a5, P.k.alpha3, d3, P.k.alpha4, d4)};
}

Outcome residual_scaling() {
  Ansatz an(base(), 0.3);
  std::vector<ResidualScanRow> rows;
  for (double s : {20.0, 40.0, 80.0}) rows.push_back(residual_scan_point(an, s, 16));
  auto spread = [&](auto get) {
    double lo = 1e300, hi = 0;
    for (const auto& r : rows) {
      lo = std::min(lo, get(r));
      hi = std::max(hi, get(r));
    }
    return hi / lo;
  };
  double f1 = spread([](const ResidualScanRow& r) { return r.env_s3_H1; });
  double f2 = spread([](const ResidualScanRow& r) { return r.env_s2_yR; });
  double f3 = spread([](const ResidualScanRow& r) { return r.env_s4_proj; });
  std::string d;
  for (const auto& r : rows)
    d += fmt::format("s={:g}: {:.1f}/{:.2f}/{:.1f} (at s {:.1f}/{:.2f}/{:.1f}); ", r.s, r.env_s3_H1, r.env_s2_yR,
                     r.env_s4_proj, r.s3_H1, r.s2_yR, r.s4_proj);
  d += fmt::format("max/min {:.2f} {:.2f} {:.2f}", f1, f2, f3);
  return {std::max({f1, f2, f3}) < 3.0, d};
}

Outcome integrator_suite() {
  auto fine_run = propagate_S(32.0, 4096, -1.0, -0.5, 1e-3);
  auto a = propagate_S(32.0, 4096, -1.0, -0.5, 1e-2);
  auto b = propagate_S(32.0, 4096, -1.0, -0.5, 5e-3);
  double ratio = a.error / b.error;
  auto conf = conformal_check(32.0, 4096);
  bool ok = fine_run.error <= 1e-6 && fine_run.mass_drift <= 1e-10 && ratio >= 3.5 && ratio <= 4.5 &&
            conf.commutation <= 1e-5;
  return {ok, fmt::format("S error {:.2e} ({} steps); mass drift {:.1e}; dt-halving ratio {:.3f}; "
                          "conformal commutation {:.1e}, involution {:.1e}, e^(it)Q -> S {:.1e}",
                          fine_run.error, fine_run.steps, fine_run.mass_drift, ratio, conf.commutation, conf.involution,
                          conf.soliton_to_S)};
}

Outcome roundtrip_suite() {
  auto r = modulation_roundtrip(base(), 20, 20240611);
  bool ok = r.samples == 20 && r.max_param_error <= 1e-9 && r.max_ortho <= 1e-10;
  return {ok, fmt::format("{} samples; max parameter error {:.1e}; max orthogonality residual {:.1e}; max ||eps|| {:.1e}; "
                          "max Newton iterations {}",
                          r.samples, r.max_param_error, r.max_ortho, r.max_eps, r.max_iters)};
}

Outcome blowup_experiment() {
  Ansatz an(base(), 0.3);
  SimConfig cfg;
  cfg.n = 10;
  cfg.beta = 0.0;
  cfg.delta = 0.3;
  cfg.N = 8192;
  cfg.t_end = -0.02;
  RunOptions opt;
  opt.probe_times = {-0.08, -0.04, -0.02};
  RunReport rep = blowup_run(an, cfg, opt);
  SimConfig cfg2 = cfg;
  cfg2.N = 16384;
  RunReport rep2 = blowup_run(an, cfg2, opt);

  double lo = 1e300, hi = 0;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.rate_ratio);
    hi = std::max(hi, r.rate_ratio);
  }
  bool rate_ok = rep.completed && lo >= 0.9 && hi <= 1.1;

  std::string probes;
  double plo = 1e300, phi = 0;
  int reached = 0;
  for (double t : opt.probe_times) {
    const RunRow* r = rep.row_at(t);
    if (r && std::isfinite(r->rstar_ratio)) {
      ++reached;
      plo = std::min(plo, r->rstar_ratio);
      phi = std::max(phi, r->rstar_ratio);
      probes += fmt::format(" t={:g}:{:.3f}", t, r->rstar_ratio);
    } else {
      probes += fmt::format(" t={:g}:n/a", t);
    }
  }
  bool probe_ok = reached == 3 && phi / plo < 3.0;

  // N = 16384 cross-check on rows recorded at the same times
  double change = 0;
  int common = 0;
  for (const auto& r : rep.rows) {
    const RunRow* q = rep2.row_at(r.t, 1e-12);
    if (!q) continue;
    ++common;
    change = std::max(change, rel(q->dx_norm, r.dx_norm));
    if (std::isfinite(r.rstar_dev) && std::isfinite(q->rstar_dev)) change = std::max(change, rel(q->rstar_dev, r.rstar_dev));
  }
  bool cross_ok = common > 0 && change < 0.1;

  return {rate_ok && probe_ok && cross_ok,
          fmt::format("run {} ({}, last valid t {:.4f}); rate ratio range [{:.3f}, {:.3f}]; r* ratio{}; "
                      "N=16384 run {} ({}); max norm change over {} common rows {:.1e}",
                      rep.completed ? "completed" : "halted", rep.halt_reason, rep.last_valid_t, lo, hi, probes,
                      rep2.completed ? "completed" : "halted", rep2.halt_reason, common, change)};
}

Outcome coercivity() {
  Ansatz an(base(), 0.3);
  auto r = coercivity_suite(an, 100, 1e-3, 20240611);
  bool ok = r.samples >= 100 && r.zeta_hat > 0 && r.square_identity <= 1e-9;
  return {ok, fmt::format("{} samples; zeta L+ {:.4f}, L- {:.4f}, G {:.4f}; zeta_hat {:.4f}; completed square {:.1e}",
                          r.samples, r.zeta_Lplus, r.zeta_Lminus, r.zeta_G, r.zeta_hat, r.square_identity)};
}

Outcome beta_sweep_suite() {
  Ansatz an(base(), 0.3);
  LabConfig lab;
  SimConfig cfg = lab.sim;
  cfg.n = 20;
  cfg.t_end = lab.sweep_t_end;
  cfg.s_min = lab.sweep_s_min;
  auto rep = beta_sweep(an, cfg, {-0.95, -0.5, 0.0, 0.5, 0.95});
  std::string d;
  for (const auto& e : rep.entries) d += fmt::format("beta {:+.2f} -> {:+d} at s {:.2f}; ", e.beta, e.exit_sign, e.exit_s);
  d += fmt::format("{} bracket(s)", rep.brackets.size());
  bool ok = rep.entries.back().exit_sign == 1 && rep.entries.front().exit_sign == -1 && !rep.brackets.empty();
  return {ok, d};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"null-space and quadrature", 10, quadrature_suite},
      {"profile solver", 30, profile_suite},
      {"constants", 10, constants_suite},
      {"ansatz residual scaling", 120, residual_scaling},
      {"integrator", 120, integrator_suite},
      {"modulation round trip", 60, roundtrip_suite},
      {"blow-up experiment n=10", 900, blowup_experiment},
      {"coercivity", 60, coercivity},
      {"beta sweep n=20", 1200, beta_sweep_suite},
  };
  int failures = 0, k = 0;
  for (const auto& c : criteria) {
    ++k;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.budget_s;
    bool pass = o.pass && in_time;
    if (!pass) ++failures;
    fmt::print("{} [{}] {}: {} ({:.1f} s{})\n", pass ? "PASS" : "FAIL", k, c.name, o.detail, secs,
               in_time ? "" : fmt::format(", over the {:.0f} s budget", c.budget_s));
    std::fflush(stdout);
  }
  fmt::print("{}/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
