#include "blowup/modulation.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace blowup {

namespace {

const cd I(0.0, 1.0);

double lagrange_periodic(const CVec& v, double x0, double dx, double x, int npts, cd& out) {
  const long N = static_cast<long>(v.size());
  double pos = (x - x0) / dx;
  long base = static_cast<long>(std::floor(pos)) - (npts / 2 - 1);
  double r = pos - static_cast<double>(base);
  cd acc = 0;
  for (int i = 0; i < npts; ++i) {
    double w = 1.0;
    for (int j = 0; j < npts; ++j)
      if (j != i) w *= (r - j) / static_cast<double>(i - j);
    long idx = ((base + i) % N + N) % N;
    acc += w * v[static_cast<std::size_t>(idx)];
  }
  out = acc;
  return r;
}

struct Windows {
  std::vector<double> q, y2q, lq, rho;
};

Windows windows(const Ansatz& an, const YGrid& grid) {
  Windows w;
  const auto& gs = an.profiles().gs;
  std::size_t N = grid.N;
  w.q.resize(N);
  w.y2q.resize(N);
  w.lq.resize(N);
  w.rho.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    double y = grid.y(k);
    double q = eval_Q(y);
    w.q[k] = q;
    w.y2q[k] = y * y * q;
    w.lq[k] = 0.5 * q + y * eval_Qprime(y);
    w.rho[k] = gs.rho_at(y);
  }
  return w;
}

std::array<double, 4> ortho_with(const Windows& w, const CVec& eps, double b, const YGrid& grid) {
  std::array<double, 4> r{};
  double h = grid.h();
  for (std::size_t k = 0; k < grid.N; ++k) {
    double y = grid.y(k);
    // <eps, M_{-b} f> = Re int eps conj(e^{-i b y^2/4} f) = Re int eps e^{i b y^2/4} f
    cd e = eps[k] * std::polar(1.0, 0.25 * b * y * y);
    r[0] += e.real() * w.q[k];
    r[1] += e.real() * w.y2q[k];
    // <eps, i M_{-b} f> = Re(e conj(i) f) = Im(e) f
    r[2] += e.imag() * w.lq[k];
    r[3] += e.imag() * w.rho[k];
  }
  for (double& v : r) v *= h;
  return r;
}

double max_abs(const std::array<double, 4>& r) {
  double m = 0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

ModParams with_free(const ModParams& g, const Eigen::Vector4d& p) {
  ModParams o = g;
  o.gamma = p(0);
  o.lambda = p(1);
  o.b = p(2);
  o.a = p(3);
  return o;
}

}  // namespace

YGrid decomposition_grid(double lambda, double L, const DecomposeOptions& opt) {
  if (!(lambda > 0)) throw DecompositionError("decompose: lambda must be positive");
  // margin for Newton steps that grow lambda (beyond 25% is a basin failure)
  double extent = std::min(opt.y_extent, 0.95 * L / (1.3 * lambda));
  if (extent < 8.0)
    throw DecompositionError(fmt::format("decompose: x-domain covers only |y| < {:.3g} at lambda = {:.3g}", extent, lambda));
  YGrid g;
  g.half_width = extent;
  g.N = static_cast<std::size_t>(std::ceil(2.0 * extent / opt.y_step));
  return g;
}

CVec epsilon_of(const Ansatz& an, const ComplexField& u, const ModParams& g, const YGrid& grid, int interp_points) {
  if (interp_points < 4) throw std::invalid_argument("epsilon_of: interpolation order must be >= 4");
  if (!(g.lambda > 0)) throw DecompositionError("epsilon_of: lambda must be positive");
  if (g.lambda * grid.half_width > u.L)
    throw DecompositionError("epsilon_of: x-grid does not cover lambda * y-grid");
  CVec eps(grid.N);
  const double sl = std::sqrt(g.lambda);
  const cd ph = std::polar(sl, -g.gamma);
  for (std::size_t k = 0; k < grid.N; ++k) {
    double y = grid.y(k);
    cd uv;
    lagrange_periodic(u.values, -u.L, u.dx(), g.lambda * y, interp_points, uv);
    eps[k] = ph * uv - an.V(g, y);
  }
  return eps;
}

std::array<double, 4> ortho_residuals(const Ansatz& an, const CVec& eps, const ModParams& g, const YGrid& grid) {
  if (eps.size() != grid.N) throw std::invalid_argument("ortho_residuals: size mismatch");
  return ortho_with(windows(an, grid), eps, g.b, grid);
}

Eigen::Matrix4d leading_jacobian(const GroundStateBundle& gs, double lambda) {
  const double qr = gs.quad_rhoQ;
  const double ly2 = -gs.quad_x2Q2;  // <Lambda Q, y^2 Q>
  double y2rho = 0;
  EvenField y2(gs.grid);
  for (std::size_t i = 0; i < gs.grid.count; ++i) y2[i] = gs.y2Q[i];
  y2rho = gs.inner(y2, gs.rho);
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  // columns: gamma, lambda, b, a
  J(0, 3) = -qr;
  J(1, 1) = ly2 / lambda;
  J(1, 3) = -y2rho;
  J(2, 2) = 0.25 * ly2;
  J(3, 0) = -qr;
  J(3, 2) = 0.25 * y2rho;
  return J;
}

D0Matrix d0_matrix(const GroundStateBundle& gs) {
  const double qr = gs.quad_rhoQ;
  const double y2rho = gs.inner(gs.y2Q, gs.rho);
  const double lqy2 = -gs.quad_x2Q2;
  const double lqq = 0.0;  // <Lambda Q, Q> = 0 for the L^2-critical scaling
  D0Matrix d;
  d.D.setZero();
  d.D(0, 0) = qr;
  d.D(0, 2) = -0.25 * y2rho;
  d.D(1, 1) = -lqy2;
  d.D(1, 3) = y2rho;
  d.D(2, 0) = 4.0 * lqq;
  d.D(2, 2) = -lqy2;
  d.D(3, 1) = -lqq;
  d.D(3, 3) = qr;
  for (int i = 4; i < 7; ++i) d.D(i, i) = 1.0;
  d.det4 = d.D.topLeftCorner<4, 4>().determinant();
  Eigen::JacobiSVD<Eigen::Matrix<double, 7, 7>> svd(d.D);
  const auto& sv = svd.singularValues();
  d.cond = sv(0) / sv(6);
  return d;
}

DecompositionState decompose(const Ansatz& an, const ComplexField& u, const ModParams& guess,
                             const DecomposeOptions& opt) {
  DecompositionState st;
  st.grid = decomposition_grid(guess.lambda, u.L, opt);
  const Windows w = windows(an, st.grid);
  const double qnorm = std::sqrt(an.profiles().gs.quad_Q2);

  auto eval = [&](const ModParams& g, CVec* eps_out) {
    if (!(g.lambda > 0)) throw DecompositionError("decompose: Newton step produced lambda <= 0");
    CVec eps;
    try {
      eps = epsilon_of(an, u, g, st.grid, opt.interp_points);
    } catch (const std::invalid_argument& e) {
      throw DecompositionError(fmt::format("decompose: {}", e.what()));
    }
    auto r = ortho_with(w, eps, g.b, st.grid);
    if (eps_out) *eps_out = std::move(eps);
    return r;
  };

  ModParams g = guess;
  CVec eps;
  auto r = eval(g, &eps);
  double e0 = std::sqrt(sum_abs2(eps, st.grid.h()));
  if (!std::isfinite(e0) || e0 > 0.5 * qnorm)
    throw DecompositionError(fmt::format("decompose: guess outside Newton basin (||eps|| / ||Q|| = {:.3g})", e0 / qnorm));

  double res = max_abs(r);
  int increases = 0;
  int it = 0;
  while (res > opt.tol_ortho) {
    if (it >= opt.max_iters)
      throw DecompositionError(fmt::format("decompose: no convergence after {} iterations (residual {:.3e})", it, res));
    ++it;
    Eigen::Vector4d p(g.gamma, g.lambda, g.b, g.a);
    Eigen::Vector4d F(r[0], r[1], r[2], r[3]);
    Eigen::Matrix4d J;
    const double scale[4] = {1.0, g.lambda, std::max(std::abs(g.b), g.lambda), std::max(std::abs(g.a), g.lambda * g.lambda)};
    for (int c = 0; c < 4; ++c) {
      Eigen::Vector4d q = p;
      double hstep = opt.fd_step * scale[c];
      q(c) += hstep;
      auto rc = eval(with_free(g, q), nullptr);
      for (int k = 0; k < 4; ++k) J(k, c) = (rc[k] - r[k]) / hstep;
    }
    Eigen::FullPivLU<Eigen::Matrix4d> lu(J);
    Eigen::Vector4d dp;
    if (lu.rank() < 4 || !std::isfinite(lu.rcond()) || lu.rcond() < 1e-14) {
      Eigen::Matrix4d J0 = leading_jacobian(an.profiles().gs, g.lambda);
      Eigen::FullPivLU<Eigen::Matrix4d> lu0(J0);
      if (lu0.rank() < 4)
        throw DecompositionError(fmt::format("decompose: singular Jacobian (rcond {:.3e})", lu.rcond()));
      dp = lu0.solve(-F);
    } else {
      dp = lu.solve(-F);
    }
    g = with_free(g, p + dp);
    auto r_new = eval(g, &eps);
    double res_new = max_abs(r_new);
    if (!std::isfinite(res_new)) throw DecompositionError("decompose: residual not finite");
    if (res_new > res && ++increases >= 2)
      throw DecompositionError(fmt::format("decompose: residual increased twice (basin failure, {:.3e})", res_new));
    r = r_new;
    res = res_new;
  }
  if (std::abs(g.lambda / guess.lambda - 1.0) > 0.25)
    throw DecompositionError(fmt::format("decompose: lambda moved from {:.4g} to {:.4g} (basin failure)", guess.lambda, g.lambda));
  if (std::abs(g.b - guess.b) > 0.25 * std::max(std::abs(guess.b), guess.lambda))
    throw DecompositionError(fmt::format("decompose: b moved from {:.4g} to {:.4g} (basin failure)", guess.b, g.b));
  if (std::abs(g.a - guess.a) > 0.25)
    throw DecompositionError(fmt::format("decompose: a moved from {:.4g} to {:.4g} (basin failure)", guess.a, g.a));
  st.gamma = g;
  st.epsilon = std::move(eps);
  st.ortho = r;
  st.eps_L2 = std::sqrt(sum_abs2(st.epsilon, st.grid.h()));
  st.newton_iters = it;
  st.converged = true;
  return st;
}

std::vector<ModParams> difference_params(const std::vector<double>& s, const std::vector<ModParams>& g) {
  const std::size_t n = s.size();
  if (n < 2 || g.size() != n) throw std::invalid_argument("difference: need at least two samples");
  std::vector<ModParams> d(n);
  auto diff = [&](std::size_t i0, std::size_t i1, std::size_t i2) {
    // derivative at s[i1] of the quadratic through three points
    double s0 = s[i0], s1 = s[i1], s2 = s[i2];
    auto a0 = g[i0].to_array(), a1 = g[i1].to_array(), a2 = g[i2].to_array();
    std::array<double, 7> out{};
    double w0 = (s1 - s2) / ((s0 - s1) * (s0 - s2));
    double w1 = (2 * s1 - s0 - s2) / ((s1 - s0) * (s1 - s2));
    double w2 = (s1 - s0) / ((s2 - s0) * (s2 - s1));
    for (int k = 0; k < 7; ++k) out[k] = w0 * a0[k] + w1 * a1[k] + w2 * a2[k];
    return ModParams::from_array(out);
  };
  if (n == 2) {
    std::array<double, 7> out{};
    auto a0 = g[0].to_array(), a1 = g[1].to_array();
    for (int k = 0; k < 7; ++k) out[k] = (a1[k] - a0[k]) / (s[1] - s[0]);
    d[0] = d[1] = ModParams::from_array(out);
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = diff(i - 1, i, i + 1);
  // one-sided second order at the ends
  auto end_diff = [&](std::size_t at, std::size_t o1, std::size_t o2) {
    double s0 = s[at], s1 = s[o1], s2 = s[o2];
    auto a0 = g[at].to_array(), a1 = g[o1].to_array(), a2 = g[o2].to_array();
    std::array<double, 7> out{};
    double w0 = (2 * s0 - s1 - s2) / ((s0 - s1) * (s0 - s2));
    double w1 = (s0 - s2) / ((s1 - s0) * (s1 - s2));
    double w2 = (s0 - s1) / ((s2 - s0) * (s2 - s1));
    for (int k = 0; k < 7; ++k) out[k] = w0 * a0[k] + w1 * a1[k] + w2 * a2[k];
    return ModParams::from_array(out);
  };
  d[0] = end_diff(0, 1, 2);
  d[n - 1] = end_diff(n - 1, n - 2, n - 3);
  return d;
}

double J_functional(const Ansatz& an, const CVec& eps, const ModParams& g, const YGrid& grid) {
  if (eps.size() != grid.N) throw std::invalid_argument("J_functional: size mismatch");
  const auto& zero = an.profiles().zero;
  const double sl = std::sqrt(g.lambda);
  double c1 = 0, c2 = 0;
  for (std::size_t k = 0; k < grid.N; ++k) {
    double y = grid.y(k);
    double th = an.cutoff().theta0(y * sl)[0];
    if (th == 0.0) continue;
    c1 += eps[k].real() * zero.psi_at(y) * th;
    c2 += eps[k].imag() * zero.phi_at(y) * th;
  }
  return (std::cos(g.gamma) * c1 + std::sin(g.gamma) * c2) * grid.h();
}

double g_beta(double s, double b, double gamma, double alpha1) {
  if (!(s > 0)) throw std::invalid_argument("g_beta: s must be positive");
  return std::pow(s, 1.75) * (b - 1.0 / s + alpha1 * std::pow(s, -2.5) * std::cos(gamma));
}

std::vector<TrackRow> track(const Ansatz& an, const std::vector<ComplexField>& snaps, const ModParams& guess,
                            const TrackOptions& opt) {
  if (snaps.size() < 2) throw std::invalid_argument("track: at least two snapshots are required");
  std::vector<TrackRow> rows;
  rows.reserve(snaps.size());
  ModParams g = guess;
  double s = opt.n;
  const double t0 = snaps.front().t;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const ComplexField& u = snaps[i];
    TrackRow row;
    row.t = u.t;
    if (i > 0) {
      const TrackRow& prev = rows.back();
      double dt = u.t - prev.t;
      double lp = prev.state.gamma.lambda;
      double ds_pred = dt / (lp * lp);
      if (std::abs(ds_pred) > opt.beta_gap)
        throw std::invalid_argument(fmt::format("track: gap Delta s = {:.3g} between snapshots exceeds {:.3g}", ds_pred, opt.beta_gap));
      g = prev.state.gamma;
      g.gamma += ds_pred;
      g.lambda = lp - g.b * dt / lp;
      if (opt.integrate_j) {
        g.j1 = t0 - u.t + guess.j1;
        g.j2 = prev.state.gamma.j2 - ds_pred * std::pow(lp, 3);
        g.j3 = prev.state.gamma.j3 - ds_pred * std::pow(lp, 4);
      }
    }
    row.state = decompose(an, u, g, opt.decompose);
    if (i > 0) {
      const TrackRow& prev = rows.back();
      double l0 = prev.state.gamma.lambda, l1 = row.state.gamma.lambda;
      double ds = 0.5 * (u.t - prev.t) * (1.0 / (l0 * l0) + 1.0 / (l1 * l1));
      s = prev.s + ds;
      if (opt.integrate_j) {
        ModParams& cur = row.state.gamma;
        const ModParams& pg = prev.state.gamma;
        double nj2 = pg.j2 - 0.5 * ds * (std::pow(l0, 3) + std::pow(l1, 3));
        double nj3 = pg.j3 - 0.5 * ds * (std::pow(l0, 4) + std::pow(l1, 4));
        if (std::abs(nj2 - cur.j2) > 1e-14 || std::abs(nj3 - cur.j3) > 1e-14) {
          ModParams again = cur;
          again.j2 = nj2;
          again.j3 = nj3;
          row.state = decompose(an, u, again, opt.decompose);
        }
      }
    }
    row.s = s;
    row.J = J_functional(an, row.state.epsilon, row.state.gamma, row.state.grid);
    row.g = g_beta(s, row.state.gamma.b, row.state.gamma.gamma, an.constants().alpha1);
    rows.push_back(std::move(row));
  }
  std::vector<double> ss;
  std::vector<ModParams> gs;
  for (const auto& r : rows) {
    ss.push_back(r.s);
    gs.push_back(r.state.gamma);
  }
  auto d = difference_params(ss, gs);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].m = an.m_vector(rows[i].state.gamma, d[i]);
    rows[i].m_norm = rows[i].m.norm();
  }
  return rows;
}

}  // namespace blowup
