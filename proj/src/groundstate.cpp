#include "blowup/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace blowup {

namespace {
const double kQ0 = std::pow(3.0, 0.25);
}

double eval_Q(double x) {
  double ax = std::abs(x);
  double e = std::exp(-ax);
  // (cosh 2x)^{-1/2} = sqrt(2) e^{-|x|} / sqrt(1 + e^{-4|x|})
  return kQ0 * std::numbers::sqrt2 * e / std::sqrt(1.0 + e * e * e * e);
}

double eval_Qprime(double x) { return -std::tanh(2.0 * x) * eval_Q(x); }

double eval_Q4(double x) {
  double q = eval_Q(x);
  double q2 = q * q;
  return q2 * q2;
}

std::complex<double> eval_S(double t, double x) {
  if (!(t < 0)) throw std::invalid_argument("eval_S requires t < 0");
  double at = -t;
  double phase = x * x / (4.0 * t) - 1.0 / t;
  return std::polar(eval_Q(x / at) / std::sqrt(at), phase);
}

EvenField sample(const RadialGrid& g, double (*fn)(double), Parity p) {
  EvenField f(g, p);
  for (std::size_t i = 0; i < g.count; ++i) f[i] = fn(g.y(i));
  return f;
}

EvenField lambda_k(const EvenField& g, const std::vector<double>& dg, int k) {
  EvenField r(g.grid, g.parity);
  double c = 0.5 * (1.0 - k);
  for (std::size_t i = 0; i < g.size(); ++i) r[i] = c * g[i] + g.grid.y(i) * dg[i];
  return r;
}

EvenField solve_rho(const RadialGrid& grid) {
  const long n = static_cast<long>(grid.count);
  const double h = grid.h;
  const double c = 1.0 / (12.0 * h * h);
  const double eh = std::exp(-h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n));
  Eigen::VectorXd rhs(n);
  const double w[5] = {c, -16 * c, 30 * c, -16 * c, c};  // stencil of -f''
  for (long i = 0; i < n; ++i) {
    double y = grid.y(static_cast<std::size_t>(i));
    double q = eval_Q(y);
    rhs(i) = 0.25 * y * y * q;
    trip.emplace_back(i, i, 1.0 - 5.0 * eval_Q4(y));
    for (int k = -2; k <= 2; ++k) {
      long j = i + k;
      double wk = w[k + 2];
      if (j < 0) {
        trip.emplace_back(i, -j, wk);  // even reflection
      } else if (j >= n) {
        // ghost from rho' + rho = 0: rho(ymax + m h) = rho(ymax) e^{-m h}
        trip.emplace_back(i, n - 1, wk * std::pow(eh, static_cast<double>(j - n + 1)));
      } else {
        trip.emplace_back(i, j, wk);
      }
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw NumericalError("rho: factorisation failed");
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalError("rho: solve failed");
  EvenField rho(grid);
  for (long i = 0; i < n; ++i) rho[static_cast<std::size_t>(i)] = sol(i);
  // a surviving growing mode shows up as a large value at ymax
  double peak = 0;
  for (double v : rho.values) peak = std::max(peak, std::abs(v));
  if (!(std::abs(rho.values.back()) < 1e-3 * peak) || !std::isfinite(peak))
    throw NumericalError("rho: growing mode not suppressed (ymax too small or h too coarse)");
  return rho;
}

GroundStateBundle GroundStateBundle::build(const RadialGrid& grid) {
  GroundStateBundle b;
  b.grid = grid;
  b.Q = sample(grid, eval_Q);
  b.Qprime = sample(grid, eval_Qprime, Parity::odd);
  b.rho = solve_rho(grid);
  b.rho_prime = EvenField(grid, Parity::odd);
  b.rho_prime.values = first_derivative(b.rho);
  b.rho_prime[0] = 0.0;
  b.LambdaQ = lambda_k(b.Q, b.Qprime.values, 0);
  b.y2Q = EvenField(grid);
  EvenField q6(grid);
  for (std::size_t i = 0; i < grid.count; ++i) {
    double y = grid.y(i);
    b.y2Q[i] = y * y * b.Q[i];
    q6[i] = std::pow(b.Q[i], 6);
  }
  b.quad_Q2 = b.inner(b.Q, b.Q);
  b.quad_x2Q2 = b.inner(b.y2Q, b.Q);
  b.quad_rhoQ = b.inner(b.rho, b.Q);
  EvenField qp2(grid);
  for (std::size_t i = 0; i < grid.count; ++i) qp2[i] = b.Qprime[i] * b.Qprime[i];
  b.quad_Qp2 = integrate_line(qp2);
  b.quad_Q6 = integrate_line(q6);
  if (!(b.quad_rhoQ > 0)) throw NumericalError("rho: <rho, Q> is not positive");
  return b;
}

EvenField GroundStateBundle::apply_Lplus(const EvenField& f) const {
  if (!(f.grid == grid)) throw std::invalid_argument("apply_Lplus: grid mismatch");
  EvenField r(grid, f.parity);
  auto d2 = second_derivative(f);
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = -d2[i] + f[i] - 5.0 * std::pow(Q[i], 4) * f[i];
  return r;
}

EvenField GroundStateBundle::apply_Lminus(const EvenField& f) const {
  if (!(f.grid == grid)) throw std::invalid_argument("apply_Lminus: grid mismatch");
  EvenField r(grid, f.parity);
  auto d2 = second_derivative(f);
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = -d2[i] + f[i] - std::pow(Q[i], 4) * f[i];
  return r;
}

double GroundStateBundle::inner(const EvenField& f, const EvenField& g) const {
  return integrate_line_product(f, g);
}

double GroundStateBundle::h1_norm_sq(const EvenField& f) const {
  EvenField d(grid, f.parity == Parity::even ? Parity::odd : Parity::even);
  d.values = first_derivative(f);
  return inner(f, f) + inner(d, d);
}

double GroundStateBundle::rho_at(double y) const {
  double ay = std::abs(y);
  if (ay <= grid.ymax) return interp_half(rho, ay);
  double r = ay / grid.ymax;
  return rho.values.back() * r * r * r * std::exp(-(ay - grid.ymax));
}

double GroundStateBundle::rho_deriv_at(double y) const {
  double ay = std::abs(y);
  double s = y < 0 ? -1.0 : 1.0;
  if (ay <= grid.ymax) return s * interp_half_deriv(rho, ay);
  return s * rho_at(ay) * (3.0 / ay - 1.0);
}

nlohmann::json GroundStateBundle::to_json() const {
  nlohmann::json j;
  j["grid"] = {{"h", grid.h}, {"ymax", grid.ymax}};
  j["Q"] = Q.values;
  j["rho"] = rho.values;
  j["constants"] = {{"quad_Q2", quad_Q2},
                    {"quad_x2Q2", quad_x2Q2},
                    {"quad_rhoQ", quad_rhoQ},
                    {"quad_Qp2", quad_Qp2},
                    {"quad_Q6", quad_Q6}};
  return j;
}

GroundStateBundle GroundStateBundle::from_json(const nlohmann::json& j) {
  RadialGrid g = RadialGrid::make(j.at("grid").at("h").get<double>(),
                                  j.at("grid").at("ymax").get<double>());
  GroundStateBundle b;
  b.grid = g;
  b.Q = sample(g, eval_Q);
  b.Qprime = sample(g, eval_Qprime, Parity::odd);
  b.rho = EvenField(g);
  b.rho.values = j.at("rho").get<std::vector<double>>();
  if (b.rho.size() != g.count) throw std::invalid_argument("bundle: rho length does not match grid");
  b.rho_prime = EvenField(g, Parity::odd);
  b.rho_prime.values = first_derivative(b.rho);
  b.rho_prime[0] = 0.0;
  b.LambdaQ = lambda_k(b.Q, b.Qprime.values, 0);
  b.y2Q = EvenField(g);
  for (std::size_t i = 0; i < g.count; ++i) b.y2Q[i] = g.y(i) * g.y(i) * b.Q[i];
  const auto& c = j.at("constants");
  b.quad_Q2 = c.at("quad_Q2");
  b.quad_x2Q2 = c.at("quad_x2Q2");
  b.quad_rhoQ = c.at("quad_rhoQ");
  b.quad_Qp2 = c.at("quad_Qp2");
  b.quad_Q6 = c.at("quad_Q6");
  return b;
}

double CoercivityProbe::admissible_zeta() const {
  if (h1_sq <= 0) return std::numeric_limits<double>::infinity();
  double disc = form * form + 4.0 * h1_sq * projection;
  return (form + std::sqrt(std::max(disc, 0.0))) / (2.0 * h1_sq);
}

CoercivityProbe coercivity_probe(const GroundStateBundle& gs, const EvenField& g, Which which) {
  CoercivityProbe p;
  EvenField Lg = which == Which::plus ? gs.apply_Lplus(g) : gs.apply_Lminus(g);
  p.form = gs.inner(Lg, g);
  if (which == Which::plus) {
    double a = gs.inner(g, gs.Q), b = gs.inner(g, gs.y2Q);
    p.projection = a * a + b * b;
  } else {
    double a = gs.inner(g, gs.rho), b = gs.inner(g, gs.LambdaQ);
    p.projection = a * a + b * b;
  }
  p.h1_sq = gs.h1_norm_sq(g);
  return p;
}

}  // namespace blowup
