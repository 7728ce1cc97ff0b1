#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace blowup {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

// Samples of u(t, .) on the periodic grid x_k = -L + k dx, dx = 2L/N.
struct ComplexField {
  double L = 2.0;
  std::size_t N = 1024;
  double t = 0.0;
  CVec values;

  static ComplexField zeros(double L, std::size_t N, double t = 0.0);
  double dx() const { return 2.0 * L / static_cast<double>(N); }
  double x(std::size_t k) const { return -L + static_cast<double>(k) * dx(); }
};

// FFT-based operations on a periodic grid of N points over [-L, L).
class Spectral {
 public:
  Spectral(std::size_t N, double L);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  std::size_t size() const { return N_; }
  double half_width() const { return L_; }
  double dx() const { return 2.0 * L_ / static_cast<double>(N_); }
  const std::vector<double>& k() const { return k_; }

  // Unnormalised forward transform; inverse divides by N.
  void forward(const CVec& in, CVec& out) const;
  void inverse(const CVec& in, CVec& out) const;

  CVec derivative(const CVec& f, int order = 1) const;
  // Energy fraction carried by the top 10% of |k|.
  double tail_fraction(const CVec& f) const;

 private:
  std::size_t N_;
  double L_;
  std::vector<double> k_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

bool is_power_of_two(std::size_t n);

// Riemann sums on a periodic grid (spectrally accurate for smooth fields).
double sum_abs2(const CVec& f, double dx);
cd sum_product(const CVec& f, const CVec& g, double dx);  // int f conj(g)

}  // namespace blowup
