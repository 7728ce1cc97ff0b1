#include "blowup/field.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

namespace blowup {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Spectral::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
};

ComplexField ComplexField::zeros(double L, std::size_t N, double t) {
  ComplexField f;
  f.L = L;
  f.N = N;
  f.t = t;
  f.values.assign(N, cd(0, 0));
  return f;
}

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

Spectral::Spectral(std::size_t N, double L) : N_(N), L_(L), k_(N), plans_(std::make_unique<Plans>()) {
  if (N < 4 || !(L > 0)) throw std::invalid_argument("spectral grid: need N >= 4 and L > 0");
  for (std::size_t m = 0; m < N; ++m) {
    long mm = m < N / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(N);
    k_[m] = std::numbers::pi * static_cast<double>(mm) / L;
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->buf = fftw_alloc_complex(N);
  int n = static_cast<int>(N);
  plans_->fwd = fftw_plan_dft_1d(n, plans_->buf, plans_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->bwd = fftw_plan_dft_1d(n, plans_->buf, plans_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plans_->fwd);
  fftw_destroy_plan(plans_->bwd);
  fftw_free(plans_->buf);
}

void Spectral::forward(const CVec& in, CVec& out) const {
  if (in.size() != N_) throw std::invalid_argument("spectral: size mismatch");
  std::copy(in.begin(), in.end(), reinterpret_cast<cd*>(plans_->buf));
  fftw_execute(plans_->fwd);
  out.assign(reinterpret_cast<cd*>(plans_->buf), reinterpret_cast<cd*>(plans_->buf) + N_);
}

void Spectral::inverse(const CVec& in, CVec& out) const {
  if (in.size() != N_) throw std::invalid_argument("spectral: size mismatch");
  std::copy(in.begin(), in.end(), reinterpret_cast<cd*>(plans_->buf));
  fftw_execute(plans_->bwd);
  out.resize(N_);
  const cd* b = reinterpret_cast<cd*>(plans_->buf);
  double s = 1.0 / static_cast<double>(N_);
  for (std::size_t i = 0; i < N_; ++i) out[i] = b[i] * s;
}

CVec Spectral::derivative(const CVec& f, int order) const {
  CVec F;
  forward(f, F);
  cd ik(0, 1);
  for (std::size_t m = 0; m < N_; ++m) {
    if (order % 2 == 1 && m == N_ / 2) {
      F[m] = 0;
      continue;
    }
    F[m] *= std::pow(ik * k_[m], order);
  }
  CVec out;
  inverse(F, out);
  return out;
}

double Spectral::tail_fraction(const CVec& f) const {
  CVec F;
  forward(f, F);
  double kmax = std::numbers::pi * static_cast<double>(N_ / 2) / L_;
  double total = 0, tail = 0;
  for (std::size_t m = 0; m < N_; ++m) {
    double e = std::norm(F[m]);
    total += e;
    if (std::abs(k_[m]) >= 0.9 * kmax) tail += e;
  }
  return total > 0 ? tail / total : 0.0;
}

double sum_abs2(const CVec& f, double dx) {
  double s = 0;
  for (const cd& v : f) s += std::norm(v);
  return s * dx;
}

cd sum_product(const CVec& f, const CVec& g, double dx) {
  cd s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::conj(g[i]);
  return s * dx;
}

}  // namespace blowup
