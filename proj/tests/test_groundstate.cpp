#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "blowup/groundstate.hpp"
#include "fixtures.hpp"

using namespace blowup;

namespace {

double max_abs_on(const EvenField& f, double ymax) {
  double m = 0;
  for (std::size_t i = 0; i < f.size() && f.grid.y(i) <= ymax; ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

// Residuals of the three null-space relations on [0, ymax - 2].
std::array<double, 3> nullspace_residuals(const GroundStateBundle& gs) {
  EvenField r1 = gs.apply_Lminus(gs.Q);
  EvenField r2 = gs.apply_Lplus(gs.LambdaQ);
  EvenField r3 = gs.apply_Lminus(gs.y2Q);
  for (std::size_t i = 0; i < r2.size(); ++i) {
    r2[i] += 2.0 * gs.Q[i];
    r3[i] += 4.0 * gs.LambdaQ[i];
  }
  double ym = gs.grid.ymax - 2;
  return {max_abs_on(r1, ym), max_abs_on(r2, ym), max_abs_on(r3, ym)};
}

}  // namespace

TEST_CASE("ground state closed form") {
  CHECK(eval_Q(0.0) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-15));
  CHECK(eval_Q(0.0) == doctest::Approx(1.3160740).epsilon(1e-7));
  CHECK(eval_Q(1.5) == eval_Q(-1.5));
  for (double x : {0.0, 0.3, 1.0, 4.0, 30.0})
    CHECK(eval_Q(x) == doctest::Approx(std::pow(3.0, 0.25) / std::sqrt(std::cosh(2 * x))).epsilon(1e-13));
  double h = 1e-5;
  CHECK(eval_Qprime(0.7) == doctest::Approx((eval_Q(0.7 + h) - eval_Q(0.7 - h)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("minimal-mass solution") {
  std::complex<double> s0 = eval_S(-1.0, 0.0);
  // phase e^{-i/t} = e^{+i} at t = -1
  CHECK(s0.real() == doctest::Approx(std::pow(3.0, 0.25) * std::cos(1.0)).epsilon(1e-14));
  CHECK(s0.imag() == doctest::Approx(std::pow(3.0, 0.25) * std::sin(1.0)).epsilon(1e-14));
  CHECK(std::abs(eval_S(-1.0, 0.8) - eval_S(-1.0, -0.8)) == 0.0);
  double mass = fixtures::line_integral_even([](double x) { return std::norm(eval_S(-0.5, x)); });
  CHECK(mass == doctest::Approx(std::sqrt(3.0) * std::numbers::pi / 2).epsilon(1e-10));
  CHECK_THROWS_AS(eval_S(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("quadratures agree with an independent adaptive rule") {
  const auto& gs = fixtures::profiles().gs;
  double q2 = fixtures::line_integral_even([](double x) { return std::sqrt(3.0) / std::cosh(2 * x); });
  CHECK(q2 == doctest::Approx(2.720699).epsilon(1e-6));
  CHECK(fixtures::rel(gs.quad_Q2, q2) < 1e-10);
  CHECK(fixtures::rel(gs.inner(gs.Q, gs.Q), q2) < 1e-10);
  double x2q2 = fixtures::line_integral_even([](double x) { return x * x * eval_Q(x) * eval_Q(x); });
  CHECK(fixtures::rel(gs.quad_x2Q2, x2q2) < 1e-10);
  // E(Q) = 0
  CHECK(std::abs(gs.quad_Qp2 - gs.quad_Q6 / 3.0) < 1e-6 * gs.quad_Qp2);
  CHECK(std::abs(gs.inner(gs.Q, gs.LambdaQ)) < 1e-8);
  EvenField zero(gs.grid);
  CHECK(gs.inner(zero, gs.Q) == 0.0);
}

TEST_CASE("null-space relations converge under refinement") {
  auto r2 = nullspace_residuals(GroundStateBundle::build(RadialGrid::make(2e-3, 20.0)));
  auto r1 = nullspace_residuals(fixtures::profiles().gs);
  for (int k = 0; k < 3; ++k) {
    CHECK(r1[k] < 1e-6);
    CHECK(r2[k] <= 1e-2 * 4e-6);
    CHECK(r1[k] <= 1e-2 * 1e-6);
  }
  // truncation-dominated grids: error ratio of at least h^2 under halving
  auto rc = nullspace_residuals(GroundStateBundle::build(RadialGrid::make(4e-2, 20.0)));
  auto rf = nullspace_residuals(GroundStateBundle::build(RadialGrid::make(2e-2, 20.0)));
  for (int k = 0; k < 3; ++k) {
    MESSAGE("order ", std::log2(rc[k] / rf[k]));
    CHECK(rc[k] / rf[k] >= 4.0);
  }
}

TEST_CASE("rho solves its equation and decays") {
  const auto& gs = fixtures::profiles().gs;
  CHECK(std::abs(gs.quad_rhoQ - gs.quad_x2Q2 / 8.0) < 1e-6 * gs.quad_rhoQ);
  EvenField r = gs.apply_Lplus(gs.rho);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= 0.25 * gs.y2Q[i];
  CHECK(max_abs_on(r, gs.grid.ymax - 2) < 1e-6);
  CHECK(std::abs(gs.rho.values.back()) * std::exp(gs.grid.ymax / 2) < 1.0);
  CHECK(gs.rho_at(gs.grid.ymax + 1) < gs.rho_at(gs.grid.ymax));
}

TEST_CASE("coercivity probes") {
  const auto& gs = fixtures::profiles().gs;
  auto pq = coercivity_probe(gs, gs.Q, Which::minus);
  CHECK(std::abs(pq.form) < 1e-8);
  EvenField zero(gs.grid);
  auto pz = coercivity_probe(gs, zero, Which::plus);
  CHECK(pz.form == 0.0);
  CHECK(pz.projection == 0.0);

  // random even fields projected off Q and y^2 Q: <L+ g, g> > 0
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  const double qq = gs.quad_Q2, yy = gs.inner(gs.y2Q, gs.y2Q), qy = gs.quad_x2Q2;
  int positive = 0;
  for (int n = 0; n < 100; ++n) {
    EvenField g(gs.grid);
    double c[4], w[4];
    for (int j = 0; j < 4; ++j) {
      c[j] = U(rng);
      w[j] = 0.5 + 2.0 * (U(rng) + 1);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      double y = gs.grid.y(i);
      for (int j = 0; j < 4; ++j) g[i] += c[j] * std::exp(-y * y / w[j]);
    }
    double a = gs.inner(g, gs.Q), b = gs.inner(g, gs.y2Q);
    double det = qq * yy - qy * qy;
    double x1 = (a * yy - b * qy) / det, x2 = (b * qq - a * qy) / det;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= x1 * gs.Q[i] + x2 * gs.y2Q[i];
    auto p = coercivity_probe(gs, g, Which::plus);
    CHECK(p.projection < 1e-20 * p.h1_sq + 1e-24);
    if (p.form > 0) ++positive;
  }
  CHECK(positive == 100);
}

TEST_CASE("bundle json round trip") {
  const auto& gs = fixtures::profiles().gs;
  auto back = GroundStateBundle::from_json(gs.to_json());
  CHECK(back.grid == gs.grid);
  CHECK(back.rho.values == gs.rho.values);
  CHECK(back.quad_rhoQ == gs.quad_rhoQ);
  CHECK_THROWS(RadialGrid::make(-1e-3, 20));
}
