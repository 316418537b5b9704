#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "optomech/model.hpp"
#include "optomech/reduced.hpp"
#include "optomech/types.hpp"

namespace testing_support {

using optomech::Complex;
using optomech::Mat2;
using optomech::ModelParams;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  Complex complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }
  Complex phase() { return std::polar(1.0, uniform(0.0, 2.0 * M_PI)); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Broad parameter draw: covers weak fields, Kerr bistability and the
  /// adiabatic and non-adiabatic mirror regimes.
  ModelParams params() {
    const double omega_c = log_uniform(0.2, 5.0);
    const double omega_m = log_uniform(0.5, 50.0);
    const double gamma1 = log_uniform(0.02, 1.0);
    const double gamma2 = log_uniform(0.5, 50.0);
    const double g = log_uniform(0.05, 3.0);
    const double G = 2.0 * g * g * omega_m / (gamma2 * gamma2 + omega_m * omega_m);
    // |E|^2 up to a few times the bistability scale omega_c^3 / G
    const double scale = std::sqrt(omega_c * omega_c * omega_c / G);
    const double e = scale * log_uniform(1e-3, 3.0);
    return ModelParams::make(omega_c, omega_m, g, gamma1, gamma2, e * phase());
  }

 private:
  std::mt19937_64 rng_;
};

/// Conjugation-symmetric drift matrix with trace 2 gamma1 and the requested
/// structure, plus a conjugation-symmetric diffusion matrix.
inline void random_conj_pair(Gen& gen, Mat2& A, Mat2& D) {
  const double gamma1 = gen.log_uniform(0.05, 2.0);
  const double b = gen.uniform(-3.0, 3.0);
  const Complex c = gen.complex(2.0);
  A << Complex(gamma1, b), c, std::conj(c), Complex(gamma1, -b);
  const Complex d11 = gen.complex(2.0);
  const double d12 = gen.uniform(0.0, 2.0);
  D << d11, d12, d12, std::conj(d11);
}

/// Relative Frobenius-like distance used throughout the tests.
inline double rel(Complex a, Complex b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Integrates d(delta)/dt = -A delta with classical RK4.
inline optomech::Vec2 rk4_linear(const Mat2& A, optomech::Vec2 x, double T, int steps) {
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) {
    const optomech::Vec2 k1 = -(A * x);
    const optomech::Vec2 k2 = -(A * (x + 0.5 * h * k1));
    const optomech::Vec2 k3 = -(A * (x + 0.5 * h * k2));
    const optomech::Vec2 k4 = -(A * (x + h * k3));
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// Number of sign changes of the steady-state cubic on a dense grid over
/// [0, n_max], n_max = |E|^2 / gamma1^2 (no root can lie beyond it). The
/// stationary points of the cubic are added to the grid so that two close
/// roots cannot hide between neighbouring samples.
inline int cubic_sign_changes(const ModelParams& p, int points = 200000) {
  const double G = 2.0 * p.g() * p.g() * p.omega_m() /
                   (p.gamma2() * p.gamma2() + p.omega_m() * p.omega_m());
  const double e2 = std::norm(p.drive());
  const double g1 = p.gamma1(), wc = p.omega_c();
  const double n_max = e2 / (g1 * g1) * 1.0001;
  auto f = [&](double n) {
    const double d = wc - G * n;
    return n * (g1 * g1 + d * d) - e2;
  };
  std::vector<double> grid;
  for (int i = 0; i <= points; ++i) grid.push_back(n_max * i / points);
  // f'(n) = 3 G^2 n^2 - 4 G wc n + gamma1^2 + wc^2
  const double disc = 16 * G * G * wc * wc - 12 * G * G * (g1 * g1 + wc * wc);
  if (G > 0 && disc > 0) {
    for (double sgn : {-1.0, 1.0}) {
      const double c = (4 * G * wc + sgn * std::sqrt(disc)) / (6 * G * G);
      if (c > 0 && c < n_max) grid.push_back(c);
    }
  }
  std::sort(grid.begin(), grid.end());
  int changes = 0;
  double prev = f(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = f(grid[i]);
    if ((prev < 0.0) != (cur < 0.0)) ++changes;
    prev = cur;
  }
  return changes;
}

}  // namespace testing_support
