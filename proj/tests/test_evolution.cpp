#include <doctest.h>

#include <numbers>

#include "blowup/evolution.hpp"
#include "blowup/experiments.hpp"
#include "fixtures.hpp"

using namespace blowup;

namespace {

double l2(const CVec& a, const CVec& b, double dx) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * dx);
}

}  // namespace

TEST_CASE("one step on the standing soliton is third order locally") {
  const double L = 24, t0 = 0.3;
  const std::size_t N = 2048;
  Propagator pr(L, N);
  double err[2];
  for (int i = 0; i < 2; ++i) {
    double dt = 2e-2 / (1 << i);
    ComplexField u = sample_field(L, N, t0, [&](double x) { return std::polar(eval_Q(x), t0); });
    pr.step(u, dt);
    ComplexField ref = sample_field(L, N, t0 + dt, [&](double x) { return std::polar(eval_Q(x), t0 + dt); });
    CHECK(u.t == doctest::Approx(t0 + dt));
    err[i] = l2(u.values, ref.values, u.dx());
  }
  CHECK(err[0] / err[1] == doctest::Approx(8.0).epsilon(0.1));
}

TEST_CASE("free propagation of a Gaussian is exact") {
  const double L = 40;
  const std::size_t N = 4096;
  Propagator pr(L, N);
  ComplexField u = sample_field(L, N, 0.0, [](double x) { return cd(std::exp(-x * x), 0); });
  pr.advance(u, 0.5, 0.5, false);
  const double t = 0.5;
  ComplexField ref = sample_field(L, N, t, [&](double x) {
    cd z(1.0, 4.0 * t);
    return std::exp(-x * x / z) / std::sqrt(z);
  });
  CHECK(l2(u.values, ref.values, u.dx()) < 1e-10);
}

TEST_CASE("conserved quantities") {
  const double L = 24;
  const std::size_t N = 2048;
  Propagator pr(L, N);
  ComplexField q = sample_field(L, N, 0, [](double x) { return cd(eval_Q(x), 0); });
  Conserved c = pr.conserved(q);
  CHECK(c.mass == doctest::Approx(std::sqrt(3.0) * std::numbers::pi / 2).epsilon(1e-10));
  CHECK(std::abs(c.energy) < 1e-10);
  CHECK(std::abs(c.momentum) < 1e-14);
  ComplexField s = sample_S(L, N, -0.5);
  CHECK(pr.conserved(s).mass == doctest::Approx(std::sqrt(3.0) * std::numbers::pi / 2).epsilon(1e-10));
  const auto& gs = fixtures::profiles().gs;
  double d2 = dx_norm_S_sq(-0.5, gs.quad_Qp2, gs.quad_x2Q2);
  CHECK(pr.dx_norm(s) * pr.dx_norm(s) == doctest::Approx(d2).epsilon(1e-8));
}

TEST_CASE("minimal-mass solution propagation converges at second order") {
  auto a = propagate_S(32.0, 4096, -1.0, -0.8, 1e-2);
  auto b = propagate_S(32.0, 4096, -1.0, -0.8, 5e-3);
  double ratio = a.error / b.error;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
  CHECK(a.mass_drift < 1e-12);
  CHECK(b.steps > a.steps);
}

TEST_CASE("pseudo-conformal transform") {
  const double L = 24;
  const std::size_t N = 2048;
  Spectral sp(N, L);
  ComplexField sol = sample_field(L, N, 1.0, [](double x) { return std::polar(eval_Q(x), 1.0); });
  ComplexField img = pseudo_conformal(sol, sp);
  CHECK(img.t == doctest::Approx(-1.0));
  ComplexField S = sample_S(L, N, -1.0);
  CHECK(l2(img.values, S.values, img.dx()) < 1e-10);

  ComplexField u = sample_field(L, N, -1.2, [](double x) { return cd(std::exp(-x * x), 0.2 * x * std::exp(-x * x)); });
  ComplexField v = pseudo_conformal(u, sp);
  ComplexField w = pseudo_conformal(v, sp);
  CHECK(w.t == doctest::Approx(u.t));
  double diff = 0;
  for (std::size_t i = 0; i < N; ++i) diff += std::norm(w.values[i] - u.values[(N - i) % N]);
  CHECK(std::sqrt(diff * u.dx()) < 1e-9);
  double m0 = sum_abs2(u.values, u.dx()), m1 = sum_abs2(v.values, v.dx());
  CHECK(std::abs(m1 - m0) / m0 < 1e-10);
  ComplexField at0 = ComplexField::zeros(L, N, 0.0);
  CHECK_THROWS(pseudo_conformal(at0, sp));
}

TEST_CASE("spectral helpers") {
  CHECK(is_power_of_two(4096));
  CHECK_FALSE(is_power_of_two(3000));
  CHECK_FALSE(is_power_of_two(0));
  const double L = std::numbers::pi;
  Spectral sp(64, L);
  CVec f(64);
  for (std::size_t i = 0; i < 64; ++i) f[i] = std::sin(3 * (-L + i * sp.dx()));
  CVec d = sp.derivative(f);
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(d[i] - 3 * std::cos(3 * (-L + i * sp.dx()))) < 1e-12);
  CHECK(sp.tail_fraction(f) < 1e-20);
}

TEST_CASE("simulation config validation and initial data") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.T_n() == doctest::Approx(-0.1));
  SimConfig bad = c;
  bad.beta = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.t_end = 0.01;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.N = 1000;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const Ansatz& an = fixtures::ansatz();
  ComplexField u = initial_data(an, c);
  CHECK(u.t == doctest::Approx(-0.1));
  CHECK(u.N == c.N);
  ModParams g = initial_params(an.constants(), c.n, c.beta);
  double x = 0.013;
  cd expect = std::polar(1.0, g.gamma) * an.V(g, x / g.lambda) / std::sqrt(g.lambda);
  std::size_t k = static_cast<std::size_t>(std::lround((x + c.L) / u.dx()));
  x = u.x(k);
  expect = std::polar(1.0, g.gamma) * an.V(g, x / g.lambda) / std::sqrt(g.lambda);
  CHECK(std::abs(u.values[k] - expect) < 1e-12);
}

TEST_CASE("energy functionals") {
  const Ansatz& an = fixtures::ansatz();
  ModParams g = initial_params(an.constants(), 20, 0.0);
  ComplexField u = field_from_params(an, g, 2.0, 8192, -0.05);
  Spectral sp(8192, 2.0);
  EnergyDiag e = energy_functionals(u, an, g, sp);
  CHECK(e.eta_L2_sq < 1e-20);
  CHECK(std::abs(e.N_fun) < 1e-18);
  CHECK(std::abs(e.square_lhs - e.square_rhs) <= 1e-9 * std::max(1.0, std::abs(e.square_rhs)));
}
