#include "optomech/reduced.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace optomech {

double effective_coupling(const ModelParams& p) {
  const double g2 = p.g() * p.g();
  return 2.0 * g2 * p.omega_m() / (p.gamma2() * p.gamma2() + p.omega_m() * p.omega_m());
}

EffectiveModel effective_model(const ModelParams& p) {
  const double g2 = p.g() * p.g();
  const double mirror_den = p.gamma2() * p.gamma2() + p.omega_m() * p.omega_m();
  return EffectiveModel{
      .G = effective_coupling(p),
      .M = -2.0 * g2 / Complex(p.gamma2(), p.omega_m()),
      .N_per_n = 2.0 * p.gamma2() * g2 / mirror_den,
      .source = p,
  };
}

std::pair<Complex, Complex> mirror_steady_amplitudes(Complex alpha1,
                                                     Complex alpha1_plus,
                                                     const ModelParams& p) {
  const Complex intensity = alpha1 * alpha1_plus;
  const Complex a2 = kI * p.g() * intensity / Complex(p.gamma2(), p.omega_m());
  const Complex a2p = -kI * p.g() * intensity / Complex(p.gamma2(), -p.omega_m());
  return {a2, a2p};
}

Complex reduced_drift(Complex a, Complex ap, const ModelParams& p) {
  const double G = effective_coupling(p);
  return -kI * p.omega_c() * a + kI * G * ap * a * a - p.gamma1() * a + p.drive();
}

double steady_state_cubic(double n, const ModelParams& p) {
  const double detuning = p.omega_c() - effective_coupling(p) * n;
  return n * (p.gamma1() * p.gamma1() + detuning * detuning) - std::norm(p.drive());
}

namespace {

// Monic cubic in x = G n:
//   x^3 - 2 omega_c x^2 + (gamma1^2 + omega_c^2) x - G |E|^2 = 0
struct ScaledCubic {
  double a2, a1, a0;

  template <typename T>
  T value(T x) const { return ((x + a2) * x + a1) * x + a0; }
  template <typename T>
  T slope(T x) const { return (3.0 * x + 2.0 * a2) * x + a1; }
};

std::array<Complex, 3> cardano_roots(const ScaledCubic& c) {
  const double shift = c.a2 / 3.0;
  const double p = c.a1 - c.a2 * c.a2 / 3.0;
  const double q = 2.0 * c.a2 * c.a2 * c.a2 / 27.0 - c.a2 * c.a1 / 3.0 + c.a0;
  const Complex disc = std::sqrt(Complex(q * q / 4.0 + p * p * p / 27.0));
  // larger-magnitude branch avoids cancellation in u
  Complex w = -q / 2.0 + disc;
  if (std::abs(-q / 2.0 - disc) > std::abs(w)) w = -q / 2.0 - disc;
  const Complex u = std::pow(w, 1.0 / 3.0);
  const Complex unity(-0.5, std::sqrt(3.0) / 2.0);
  std::array<Complex, 3> roots;
  Complex uk = u;
  for (auto& r : roots) {
    const Complex vk = std::abs(uk) > 0.0 ? -p / (3.0 * uk) : Complex(0.0);
    r = uk + vk - shift;
    uk *= unity;
  }
  return roots;
}

template <typename T>
T newton_polish(const ScaledCubic& c, T x, int max_iter) {
  for (int i = 0; i < max_iter; ++i) {
    const T f = c.value(x);
    const T df = c.slope(x);
    if (std::abs(df) == 0.0) break;
    const T next = x - f / df;
    if (!(std::abs(c.value(next)) < std::abs(f))) break;
    x = next;
  }
  return x;
}

constexpr double kImagTolerance = 1e-9;
constexpr double kDriftTolerance = 1e-10;

SteadyState make_state(double n, const ModelParams& p, double G) {
  SteadyState s;
  s.alpha0 = p.drive() / Complex(p.gamma1(), p.omega_c() - G * n);
  s.n = std::norm(s.alpha0);
  std::tie(s.mirror_alpha2, s.mirror_alpha2_plus) =
      mirror_steady_amplitudes(s.alpha0, std::conj(s.alpha0), p);
  return s;
}

// Newton on the complex drift itself. The cubic fixes x = G n well, but near
// a sharp resonance |alpha0|^2 is very sensitive to x, so the field amplitude
// is refined directly: [d, d*] = A^{-1} [F, F*].
SteadyState polish_state(SteadyState s, const ModelParams& p) {
  double best = std::abs(reduced_drift(s.alpha0, s.alpha0_plus(), p));
  for (int i = 0; i < 4 && best > 0.0; ++i) {
    const Complex F = reduced_drift(s.alpha0, s.alpha0_plus(), p);
    const Mat2 A = drift_matrix(s, p);
    const Complex det = A.determinant();
    if (std::abs(det) == 0.0) break;
    const Complex step = (A(1, 1) * F - A(0, 1) * std::conj(F)) / det;
    SteadyState next = s;
    next.alpha0 = s.alpha0 + step;
    next.n = std::norm(next.alpha0);
    const double r = std::abs(reduced_drift(next.alpha0, next.alpha0_plus(), p));
    if (!(r < best)) break;
    best = r;
    s = next;
  }
  std::tie(s.mirror_alpha2, s.mirror_alpha2_plus) =
      mirror_steady_amplitudes(s.alpha0, std::conj(s.alpha0), p);
  return s;
}

}  // namespace

std::vector<SteadyState> cavity_steady_states(const ModelParams& p) {
  const double G = effective_coupling(p);
  const double e2 = std::norm(p.drive());
  std::vector<double> ns;
  if (e2 == 0.0) {
    ns.push_back(0.0);
  } else if (G == 0.0) {
    ns.push_back(e2 / (p.gamma1() * p.gamma1() + p.omega_c() * p.omega_c()));
  } else {
    const ScaledCubic cubic{-2.0 * p.omega_c(),
                            p.gamma1() * p.gamma1() + p.omega_c() * p.omega_c(),
                            -G * e2};
    for (Complex root : cardano_roots(cubic)) {
      root = newton_polish(cubic, root, 4);
      if (std::abs(root.imag()) > kImagTolerance * std::abs(root)) continue;
      const double x = newton_polish(cubic, root.real(), 8);
      if (x < 0.0) continue;
      const bool duplicate = std::any_of(ns.begin(), ns.end(), [&](double m) {
        return std::abs(m * G - x) <= kImagTolerance * std::max(x, 1e-300);
      });
      if (!duplicate) ns.push_back(x / G);
    }
  }
  std::sort(ns.begin(), ns.end());

  std::vector<SteadyState> out;
  out.reserve(ns.size());
  const double tol = kDriftTolerance * std::max(1.0, std::abs(p.drive()));
  for (double n : ns) {
    SteadyState s = polish_state(make_state(n, p, G), p);
    if (std::abs(reduced_drift(s.alpha0, s.alpha0_plus(), p)) > tol) {
      throw SingularError("steady state residual above tolerance at n = " +
                          std::to_string(n));
    }
    s.branch_id = static_cast<int>(out.size());
    out.push_back(s);
  }
  return out;
}

Mat2 drift_matrix(const SteadyState& s, const ModelParams& p) {
  const double G = effective_coupling(p);
  const double B = p.omega_c() - 2.0 * G * s.n;
  const Complex a = s.alpha0;
  const Complex ap = s.alpha0_plus();
  Mat2 A;
  A << Complex(p.gamma1(), B), -kI * G * a * a,
       kI * G * ap * ap, Complex(p.gamma1(), -B);
  return A;
}

Mat2 diffusion_matrix(const SteadyState& s, const ModelParams& p) {
  const EffectiveModel eff = effective_model(p);
  const Complex a = s.alpha0;
  const Complex ap = s.alpha0_plus();
  const Complex cross = eff.N_per_n * s.n;
  Mat2 D;
  D << eff.M * a * a, cross,
       cross, std::conj(eff.M) * ap * ap;
  return D;
}

LinearizedSystem linearize(const SteadyState& steady, const ModelParams& params) {
  return {drift_matrix(steady, params), diffusion_matrix(steady, params), steady};
}

}  // namespace optomech
