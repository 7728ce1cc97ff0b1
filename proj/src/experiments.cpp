#include "blowup/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace blowup {

ResidualScanRow residual_scan_point(const Ansatz& an, double s, int envelope_samples, double beta) {
  if (envelope_samples < 1) throw std::invalid_argument("residual scan: need at least one sample");
  const auto& k = an.constants();
  const double delta = an.cutoff().delta();
  ResidualScanRow row;
  row.s = s;
  for (int i = 0; i < envelope_samples; ++i) {
    double sp = s + std::numbers::pi * i / envelope_samples;
    ModParams g = initial_params(k, sp, beta);
    ModParams dot = an.m_zero_flow(g);
    YGrid grid = YGrid::covering(2.0 * delta / g.lambda + 30.0, 1e-2);
    ResidualSample r = an.residual(g, dot, grid);
    double h1 = sp * sp * sp * r.norm_H1;
    double yr = sp * sp * r.norm_yR;
    double pj = sp * sp * sp * sp * r.proj_iQ;
    if (i == 0) {
      row.s3_H1 = h1;
      row.s2_yR = yr;
      row.s4_proj = pj;
      row.grid_N = grid.N;
      row.L2 = r.norm_L2;
      row.H1 = r.norm_H1;
      row.yR = r.norm_yR;
      row.proj = r.proj_iQ;
    }
    row.env_s3_H1 = std::max(row.env_s3_H1, h1);
    row.env_s2_yR = std::max(row.env_s2_yR, yr);
    row.env_s4_proj = std::max(row.env_s4_proj, pj);
    row.ds_error = std::max(row.ds_error, r.ds_error);
  }
  return row;
}

namespace {

double l2_diff(const CVec& a, const CVec& b, double dx) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * dx);
}

void evolve_scaled(Propagator& pr, ComplexField& u, double t1, double c_dt, long* steps) {
  while (std::abs(t1 - u.t) > 1e-14) {
    double dt = c_dt * u.t * u.t;
    double dir = t1 > u.t ? 1.0 : -1.0;
    double target = std::abs(t1 - u.t) <= dt ? t1 : u.t + dir * dt;
    long n = pr.advance(u, target, dt);
    if (steps) *steps += n;
  }
}

}  // namespace

PropagationCheck propagate_S(double L, std::size_t N, double t0, double t1, double c_dt) {
  Propagator pr(L, N);
  ComplexField u = sample_S(L, N, t0);
  Conserved c0 = pr.conserved(u);
  PropagationCheck out;
  evolve_scaled(pr, u, t1, c_dt, &out.steps);
  Conserved c1 = pr.conserved(u);
  ComplexField S = sample_S(L, N, t1);
  out.error = l2_diff(u.values, S.values, u.dx());
  out.mass_drift = std::abs(c1.mass - c0.mass) / c0.mass;
  out.energy_drift = std::abs(c1.energy - c0.energy) / std::abs(c0.energy);
  return out;
}

ConformalReport conformal_check(double L, std::size_t N) {
  ConformalReport rep;
  Propagator pr(L, N);
  const Spectral& sp = pr.spectral();
  // e^{it}Q at t = 1 maps to S(-1)
  ComplexField sol = sample_field(L, N, 1.0, [](double x) { return std::polar(eval_Q(x), 1.0); });
  ComplexField img = pseudo_conformal(sol, sp);
  ComplexField S = sample_S(L, N, img.t);
  rep.soliton_to_S = l2_diff(img.values, S.values, img.dx());

  // smooth asymmetric test field at t0 = -1
  auto f = [](double x) {
    return cd(0.8 * std::exp(-x * x), 0.3 * x * std::exp(-(x - 0.5) * (x - 0.5))) * std::polar(1.0, 0.4 * x);
  };
  ComplexField u = sample_field(L, N, -1.0, f);
  ComplexField v = pseudo_conformal(u, sp);
  ComplexField w = pseudo_conformal(v, sp);
  double diff = 0;
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t j = (N - i) % N;  // x -> -x on [-L, L)
    diff += std::norm(w.values[i] - u.values[j]);
  }
  rep.involution = std::sqrt(diff * u.dx());
  double m0 = sum_abs2(u.values, u.dx()), m1 = sum_abs2(v.values, v.dx());
  rep.mass_change = std::abs(m1 - m0) / m0;

  // evolve then transform vs transform then evolve
  const double t1 = -0.8, dt = 1e-4;
  ComplexField a = u;
  pr.advance(a, t1, dt);
  ComplexField ta = pseudo_conformal(a, sp);
  ComplexField b = v;
  pr.advance(b, -1.0 / t1, dt);
  rep.commutation = l2_diff(ta.values, b.values, u.dx());
  return rep;
}

CoercivityReport coercivity_suite(const Ansatz& an, int samples, double amplitude, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("coercivity: samples must be positive");
  const GroundStateBundle& gs = an.profiles().gs;
  const RadialGrid& rg = gs.grid;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  CoercivityReport rep;
  rep.samples = samples;
  rep.zeta_Lplus = rep.zeta_Lminus = rep.zeta_G = std::numeric_limits<double>::infinity();

  // random even function: sum of symmetrised Gaussians
  struct Bump { double c, w, amp; };
  auto make_bumps = [&]() {
    std::vector<Bump> bs(4);
    for (auto& b : bs) b = {4.0 * U(rng), 0.4 + 1.6 * U(rng), 2.0 * U(rng) - 1.0};
    return bs;
  };
  auto eval_bumps = [](const std::vector<Bump>& bs, double y) {
    double v = 0;
    for (const auto& b : bs) {
      double p = (y - b.c) / b.w, m = (y + b.c) / b.w;
      v += b.amp * (std::exp(-p * p) + std::exp(-m * m));
    }
    return v;
  };
  // Gram-Schmidt projection against two windows on the radial grid
  auto project = [&](EvenField& g, const EvenField& w1, const EvenField& w2) {
    EvenField e1 = w1, e2 = w2;
    double n1 = gs.inner(e1, e1);
    double c12 = gs.inner(e2, e1) / n1;
    for (std::size_t i = 0; i < e2.size(); ++i) e2[i] -= c12 * e1[i];
    double n2 = gs.inner(e2, e2);
    double p1 = gs.inner(g, e1) / n1, p2 = gs.inner(g, e2) / n2;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= p1 * e1[i] + p2 * e2[i];
  };

  // energy functional setting: Gamma^in at s = 20, domain L = 2
  const ModParams G = initial_params(an.constants(), 20.0, 0.0);
  const double L = 2.0;
  const std::size_t N = 8192;
  Spectral sp(N, L);
  const double dx = sp.dx();
  CVec v(N);
  std::vector<double> wq(N), wy2q(N), wlq(N), wrho(N);
  const double il = 1.0 / G.lambda, sl = std::sqrt(il);
  for (std::size_t i = 0; i < N; ++i) {
    double x = -L + static_cast<double>(i) * dx, y = x * il;
    v[i] = sl * an.V(G, y);
    double q = eval_Q(y);
    wq[i] = q;
    wy2q[i] = y * y * q;
    wlq[i] = 0.5 * q + y * eval_Qprime(y);
    wrho[i] = gs.rho_at(y);
  }
  auto project_x = [&](std::vector<double>& f, const std::vector<double>& w1, const std::vector<double>& w2) {
    auto dot = [&](const std::vector<double>& p, const std::vector<double>& q) {
      double s = 0;
      for (std::size_t i = 0; i < N; ++i) s += p[i] * q[i];
      return s * dx;
    };
    std::vector<double> e2 = w2;
    double c12 = dot(w2, w1) / dot(w1, w1);
    for (std::size_t i = 0; i < N; ++i) e2[i] -= c12 * w1[i];
    double p1 = dot(f, w1) / dot(w1, w1), p2 = dot(f, e2) / dot(e2, e2);
    for (std::size_t i = 0; i < N; ++i) f[i] -= p1 * w1[i] + p2 * e2[i];
  };

  double sq = 0;
  for (int k = 0; k < samples; ++k) {
    auto b1 = make_bumps(), b2 = make_bumps();
    EvenField g1(rg), g2(rg);
    for (std::size_t i = 0; i < rg.count; ++i) {
      g1[i] = eval_bumps(b1, rg.y(i));
      g2[i] = eval_bumps(b2, rg.y(i));
    }
    project(g1, gs.Q, gs.y2Q);
    project(g2, gs.rho, gs.LambdaQ);
    auto p1 = coercivity_probe(gs, g1, Which::plus);
    auto p2 = coercivity_probe(gs, g2, Which::minus);
    rep.zeta_Lplus = std::min(rep.zeta_Lplus, p1.form / p1.h1_sq);
    rep.zeta_Lminus = std::min(rep.zeta_Lminus, p2.form / p2.h1_sq);

    // eps = e^{-i b y^2/4}(e1 + i e2) with e1 perp {Q, y^2 Q}, e2 perp {Lambda Q, rho}
    std::vector<double> e1(N), e2(N);
    for (std::size_t i = 0; i < N; ++i) {
      double y = (-L + static_cast<double>(i) * dx) * il;
      e1[i] = eval_bumps(b1, y);
      e2[i] = eval_bumps(b2, y);
    }
    project_x(e1, wq, wy2q);
    project_x(e2, wlq, wrho);
    double nrm = 0;
    for (std::size_t i = 0; i < N; ++i) nrm += e1[i] * e1[i] + e2[i] * e2[i];
    nrm = std::sqrt(nrm * dx * il);  // L^2 norm in y
    CVec eta(N);
    for (std::size_t i = 0; i < N; ++i) {
      double y = (-L + static_cast<double>(i) * dx) * il;
      eta[i] = (amplitude / nrm) * sl * std::polar(1.0, -0.25 * G.b * y * y) * cd(e1[i], e2[i]);
    }
    EnergyDiag d = energy_functionals_eta(eta, v, G, sp);
    rep.zeta_G = std::min(rep.zeta_G, d.G_fun / d.eta_L2_sq);
    sq = std::max(sq, std::abs(d.square_lhs - d.square_rhs) / std::abs(d.square_rhs));
  }
  rep.square_identity = sq;
  rep.zeta_hat = std::min({rep.zeta_Lplus, rep.zeta_Lminus, rep.zeta_G});
  return rep;
}

RoundTripReport modulation_roundtrip(const ProfileSet& P, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Ansatz an2(P, 0.2), an3(P, 0.3);
  RoundTripReport rep;
  rep.samples = samples;
  const double L = 1.0;
  const std::size_t N = 16384;
  for (int k = 0; k < samples; ++k) {
    const Ansatz& an = (k % 2 == 0) ? an3 : an2;
    double s = 20.0 + 180.0 * U(rng);
    ModParams g;
    g.gamma = s + 2.0 * std::numbers::pi * U(rng);
    g.lambda = (1.0 + 0.2 * (U(rng) - 0.5)) / s;
    g.b = (1.0 + 0.2 * (U(rng) - 0.5)) / s;
    g.a = 2.0 * (U(rng) - 0.5) * P.k.alpha1 * std::pow(s, -2.5);
    double jf = U(rng);
    g.j1 = jf / s;
    g.j2 = jf / (2 * s * s);
    g.j3 = jf / (3 * s * s * s);
    ComplexField u = field_from_params(an, g, L, N, -g.j1);
    ModParams guess = g;
    guess.gamma += 1e-3;
    guess.lambda *= 1.0 + 1e-3;
    guess.b *= 1.0 + 1e-3;
    guess.a += 1e-3 * std::max(std::abs(g.a), g.lambda * g.lambda);
    DecompositionState st = decompose(an, u, guess);
    double err = std::max({std::abs(st.gamma.gamma - g.gamma), std::abs(st.gamma.lambda - g.lambda),
                           std::abs(st.gamma.b - g.b), std::abs(st.gamma.a - g.a)});
    rep.max_param_error = std::max(rep.max_param_error, err);
    for (double o : st.ortho) rep.max_ortho = std::max(rep.max_ortho, std::abs(o));
    rep.max_eps = std::max(rep.max_eps, st.eps_L2);
    rep.max_iters = std::max(rep.max_iters, st.newton_iters);
  }
  return rep;
}

const RunRow* RunReport::row_at(double t, double tol) const {
  for (const auto& r : rows)
    if (std::abs(r.t - t) <= tol) return &r;
  return nullptr;
}

RunReport blowup_run(const Ansatz& an, const SimConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  RunReport rep;
  rep.cfg = cfg;
  const double Tn = cfg.T_n();
  const double dir = cfg.t_end > Tn ? 1.0 : -1.0;
  const auto& k = an.constants();
  const double qp = std::sqrt(k.quad_Qp2);
  const double delta = an.cutoff().delta();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Propagator pr(cfg.L, cfg.N);
  ComplexField u = initial_data(an, cfg);
  const Conserved c0 = pr.conserved(u);
  ModParams g = initial_params(k, cfg.n, cfg.beta);

  // event times strictly between T_n and t_end, plus t_end
  std::vector<double> events;
  for (int i = 1; i <= cfg.snapshots; ++i) events.push_back(Tn + (cfg.t_end - Tn) * i / cfg.snapshots);
  std::vector<double> snap_times = events;
  for (double t : opt.probe_times)
    if (dir * (t - Tn) > 0 && dir * (cfg.t_end - t) >= 0) events.push_back(t);
  events.push_back(cfg.t_end);
  std::sort(events.begin(), events.end(), [dir](double a, double b) { return dir * a < dir * b; });
  events.erase(std::unique(events.begin(), events.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               events.end());
  std::size_t next_event = 0;

  std::vector<cd> rstar_v(cfg.N);
  for (std::size_t i = 0; i < cfg.N; ++i) rstar_v[i] = an.r_star(u.x(i));

  double s = cfg.n;
  auto record = [&](const DecompositionState* st) {
    RunRow r;
    r.t = u.t;
    r.s = s;
    r.dx_norm = pr.dx_norm(u);
    r.rate_ratio = std::abs(u.t) * r.dx_norm / qp;
    double dev = 0;
    for (std::size_t i = 0; i < cfg.N; ++i) {
      double x = u.x(i);
      if (std::abs(x) >= delta) continue;
      dev += std::norm(u.values[i] - eval_S(u.t, x) - rstar_v[i]);
    }
    r.rstar_dev = std::sqrt(dev * u.dx());
    r.rstar_ratio = r.rstar_dev / std::pow(std::abs(u.t), 0.75);
    Conserved c = pr.conserved(u);
    r.mass_drift = std::abs(c.mass - c0.mass) / c0.mass;
    r.energy_drift = std::abs(c.energy - c0.energy) / std::max(std::abs(c0.energy), 1e-300);
    r.tail = pr.tail_fraction(u);
    if (st) {
      r.g = st->gamma;
      r.eps_L2 = st->eps_L2;
      r.J = J_functional(an, st->epsilon, st->gamma, st->grid);
      r.g_exit = g_beta(s, st->gamma.b, st->gamma.gamma, k.alpha1);
      EnergyDiag ed = energy_functionals(u, an, st->gamma, pr.spectral());
      r.N_fun = ed.N_fun;
      r.H_fun = ed.H_fun;
      r.K_fun = ed.K_fun;
      r.G_fun = ed.G_fun;
    } else {
      r.g = ModParams{nan, nan, nan, nan, nan, nan, nan};
      r.eps_L2 = r.J = r.g_exit = r.N_fun = r.H_fun = r.K_fun = r.G_fun = nan;
    }
    rep.rows.push_back(r);
  };

  DecompositionState st = decompose(an, u, g, opt.decompose);
  record(&st);
  g = st.gamma;
  bool have_g = true;  // g holds a converged decomposition
  double lam = g.lambda;
  rep.last_valid_t = u.t;
  double t_dec = u.t;
  int since = 0;
  bool halted = false;
  while (!halted && next_event < events.size()) {
    double dt = cfg.c_dt * lam * lam;
    double target = events[next_event];
    double remaining = std::abs(target - u.t);
    bool hit = remaining <= dt * 1.000001;
    pr.step(u, dir * (hit ? remaining : dt));
    if (hit) u.t = target;
    ++rep.steps;
    ++since;
    if (hit) ++next_event;
    if (!(since >= cfg.decompose_every || hit)) continue;
    since = 0;

    double tail = pr.tail_fraction(u);
    if (!(tail <= cfg.tail_limit)) {
      rep.halt_reason = fmt::format("spectral tail {:.3e} exceeds {:.1e} at t = {:.6f}", tail, cfg.tail_limit, u.t);
      break;
    }
    // scale from the gradient; used when no decomposition is available
    double lam_grad = qp / pr.dx_norm(u);
    double dtd = u.t - t_dec;
    ModParams guess = g;
    double lg = have_g ? g.lambda : lam_grad;
    guess.gamma += dtd / (lg * lg);
    guess.lambda = have_g ? lg - g.b * dtd / lg : lam_grad;
    if (!(guess.lambda > 0)) guess.lambda = lam_grad;
    if (opt.integrate_j) {
      double ds = dtd / (lg * lg);
      guess.j1 = Tn - u.t;
      guess.j2 = g.j2 - ds * std::pow(lg, 3);
      guess.j3 = g.j3 - ds * std::pow(lg, 4);
    }
    bool ok = true;
    try {
      st = decompose(an, u, guess, opt.decompose);
      if (opt.integrate_j) {
        double l0 = lg, l1 = st.gamma.lambda;
        double ds = 0.5 * dtd * (1.0 / (l0 * l0) + 1.0 / (l1 * l1));
        ModParams again = st.gamma;
        again.j2 = g.j2 - 0.5 * ds * (std::pow(l0, 3) + std::pow(l1, 3));
        again.j3 = g.j3 - 0.5 * ds * (std::pow(l0, 4) + std::pow(l1, 4));
        st = decompose(an, u, again, opt.decompose);
      }
    } catch (const std::exception& e) {
      ok = false;
      if (rep.decomposition_failures++ == 0)
        rep.first_failure = fmt::format("decomposition failed at t = {:.6f}: {}", u.t, e.what());
    }
    double l1 = ok ? st.gamma.lambda : lam_grad;
    s += 0.5 * dtd * (1.0 / (lam * lam) + 1.0 / (l1 * l1));
    lam = l1;
    if (ok) {
      g = st.gamma;
      have_g = true;
    } else {
      // keep gamma advancing with the clock so a later warm start is sensible
      g.gamma += dtd / (lg * lg);
      g.lambda = lam_grad;
      have_g = false;
    }
    t_dec = u.t;
    record(ok ? &st : nullptr);
    rep.last_valid_t = u.t;
    for (double ts : snap_times)
      if (hit && std::abs(ts - u.t) < 1e-14) rep.snapshots.push_back(u);
    if (opt.stop_on_exit && ok && std::abs(rep.rows.back().g_exit) >= 1.0) {
      rep.exit_sign = rep.rows.back().g_exit > 0 ? 1 : -1;
      rep.exit_s = s;
      rep.exit_t = u.t;
      rep.halt_reason = fmt::format("exit |g| = 1 at s = {:.4f}", s);
      halted = true;
    }
    if (opt.stop_on_exit && !ok) {
      rep.halt_reason = rep.first_failure;
      break;
    }
    if (dir * (cfg.t_end - u.t) <= 0) break;
    if (cfg.s_min > 0 && dir < 0 && s < cfg.s_min) {
      rep.halt_reason = fmt::format("reached s_min at s = {:.4f}", s);
      halted = true;
    }
  }
  rep.completed = rep.halt_reason.empty() || halted;
  if (rep.halt_reason.empty()) rep.halt_reason = "reached t_end";

  // m-vector by differencing over rows that carry a decomposition
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    if (std::isfinite(rep.rows[i].g.lambda)) idx.push_back(i);
  for (auto& r : rep.rows) r.m_norm = r.m_s3 = nan;
  if (idx.size() >= 3) {
    std::vector<double> ss;
    std::vector<ModParams> gg;
    std::vector<std::size_t> keep;
    for (std::size_t i : idx) {
      // rows at event times can sit very close in s to the previous one
      if (!ss.empty() && std::abs(rep.rows[i].s - ss.back()) < 1e-3) continue;
      ss.push_back(rep.rows[i].s);
      gg.push_back(rep.rows[i].g);
      keep.push_back(i);
    }
    if (keep.size() >= 3) {
      auto d = difference_params(ss, gg);
      for (std::size_t q = 0; q < keep.size(); ++q) {
        RunRow& r = rep.rows[keep[q]];
        MVector m = an.m_vector(r.g, d[q]);
        r.m_norm = m.norm();
        r.m_s3 = m.norm() * std::pow(r.s, 3);
      }
    }
  }
  return rep;
}

SweepReport beta_sweep(const Ansatz& an, const SimConfig& base, const std::vector<double>& betas) {
  if (!(base.t_end < base.T_n())) throw std::invalid_argument("beta sweep: t_end must precede T_n (backward run)");
  SweepReport rep;
  RunOptions opt;
  opt.stop_on_exit = true;
  opt.integrate_j = true;
  for (double beta : betas) {
    SimConfig cfg = base;
    cfg.beta = beta;
    SweepEntry e;
    e.beta = beta;
    RunReport r = blowup_run(an, cfg, opt);
    e.exit_sign = r.exit_sign;
    e.exit_s = r.exit_s;
    e.exit_t = r.exit_t;
    e.halt_reason = r.halt_reason;
    rep.entries.push_back(e);
  }
  for (std::size_t i = 1; i < rep.entries.size(); ++i) {
    const auto& a = rep.entries[i - 1];
    const auto& b = rep.entries[i];
    if (a.exit_sign != 0 && b.exit_sign != 0 && a.exit_sign != b.exit_sign) rep.brackets.emplace_back(a.beta, b.beta);
  }
  return rep;
}

}  // namespace blowup
