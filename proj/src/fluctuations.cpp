#include "optomech/fluctuations.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <random>
#include <stdexcept>

#include <Eigen/LU>

#include "optomech/stability.hpp"

namespace optomech {

Mat2 CovarianceMatrix::matrix() const {
  Mat2 C;
  C << c11, c12, c21, c22;
  return C;
}

CovarianceMatrix CovarianceMatrix::from_matrix(const Mat2& C) {
  return {C(0, 0), C(0, 1), C(1, 0), C(1, 1)};
}

double relative_deviation(Complex a, Complex b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

CovarianceMatrix covariance_closed_form(const Mat2& A, const Mat2& D) {
  const Complex tr = A.trace();
  const Complex det = A.determinant();
  const double scale = A.norm();
  if (std::abs(tr * det) <= 1e-12 * scale * scale * scale || scale == 0.0) {
    throw SingularError("closed-form covariance: tr(A) det(A) vanishes (marginal stability)");
  }
  const Mat2 shifted = A - tr * Mat2::Identity();
  const Mat2 C = (D * det + shifted * D * shifted.transpose()) / (2.0 * tr * det);
  return CovarianceMatrix::from_matrix(C);
}

namespace {

// A C + C A^T - D accumulated in long double, rounded once at the end.
Mat2 residual_extended(const Mat2& A, const Mat2& C, const Mat2& D) {
  using LC = std::complex<long double>;
  auto L = [](Complex z) { return LC(z.real(), z.imag()); };
  Mat2 R;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      LC acc = -L(D(i, j));
      for (int k = 0; k < 2; ++k) acc += L(A(i, k)) * L(C(k, j)) + L(C(i, k)) * L(A(j, k));
      R(i, j) = Complex(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
    }
  }
  return R;
}

}  // namespace

double lyapunov_residual(const Mat2& A, const Mat2& C, const Mat2& D) {
  return residual_extended(A, C, D).norm();
}

CovarianceMatrix lyapunov_solve(const Mat2& A, const Mat2& D) {
  const auto [l1, l2] = eigenvalues(A);
  const double scale = A.norm();
  const double gap = std::min({std::abs(2.0 * l1), std::abs(2.0 * l2), std::abs(l1 + l2)});
  if (scale == 0.0 || gap <= 1e-12 * scale) {
    throw SingularError("Lyapunov system singular: lambda_i + lambda_j ~ 0");
  }
  // unknowns ordered (c11, c12, c21, c22); row (i,j) of A C + C A^T
  Eigen::Matrix4cd K = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const int row = 2 * i + j;
      for (int k = 0; k < 2; ++k) {
        K(row, 2 * k + j) += A(i, k);
        K(row, 2 * i + k) += A(j, k);
      }
    }
  }
  const Eigen::Vector4cd rhs(D(0, 0), D(0, 1), D(1, 0), D(1, 1));
  const auto lu = K.fullPivLu();
  Eigen::Vector4cd x = lu.solve(rhs);
  // refinement with residuals in extended precision: C ends up within a few
  // ulps of the exact solution, which is what the residual floor allows
  for (int pass = 0; pass < 2; ++pass) {
    const Mat2 C = (Mat2() << x(0), x(1), x(2), x(3)).finished();
    const Mat2 R = residual_extended(A, C, D);
    x -= lu.solve(Eigen::Vector4cd(R(0, 0), R(0, 1), R(1, 0), R(1, 1)));
  }
  return {x(0), x(1), x(2), x(3)};
}

namespace {

void self_check_closed_form() {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto c = [&] { return Complex(u(rng), u(rng)); };
  int checked = 0;
  while (checked < 8) {
    Mat2 A;
    A << c(), c(), c(), c();
    A += 1.5 * Mat2::Identity();
    if (!spectrum(A).stable) continue;
    Mat2 D;
    D << c(), c(), c(), c();
    D(1, 0) = D(0, 1);
    const Mat2 fast = covariance_closed_form(A, D).matrix();
    const Mat2 ref = lyapunov_solve(A, D).matrix();
    for (int k = 0; k < 4; ++k) {
      if (relative_deviation(fast(k), ref(k)) > 1e-9) {
        throw std::logic_error("closed-form covariance disagrees with Lyapunov solve");
      }
    }
    ++checked;
  }
}

}  // namespace

CovarianceMatrix stationary_covariance(const LinearizedSystem& lin) {
  static std::once_flag checked;
  std::call_once(checked, self_check_closed_form);
  return covariance_closed_form(lin.A, lin.D);
}

PaperElements covariance_paper_elements(const ModelParams& p, const SteadyState& s) {
  const EffectiveModel eff = effective_model(p);
  const double G = eff.G;
  const double n = s.n;
  const double g1 = p.gamma1();
  const double B = p.omega_c() - 2.0 * G * n;
  const Complex M = eff.M;
  const Complex Mc = std::conj(M);
  const double N = eff.N_per_n * n;
  const double den = 4.0 * g1 * (g1 * g1 + B * B - G * G * n * n);
  if (std::abs(den) <= 1e-14 * 4.0 * g1 * (g1 * g1 + B * B + G * G * n * n)) {
    throw SingularError("element formulas: 4 gamma1 (gamma1^2 + B^2 - G^2 n^2) vanishes");
  }
  PaperElements out;
  out.c11 = s.alpha0 * s.alpha0 *
            (2.0 * M * g1 * g1 + 2.0 * N * G * Complex(B, g1) - 2.0 * kI * g1 * B * M -
             G * G * n * n * (M + Mc)) /
            den;
  out.c12 = (2.0 * N * (g1 * g1 + B * B) + kI * g1 * G * n * n * (Mc - M) -
             G * B * n * n * (M + Mc)) /
            den;
  const CovarianceMatrix ref = covariance_closed_form(drift_matrix(s, p), diffusion_matrix(s, p));
  out.dev_c11 = relative_deviation(out.c11, ref.c11);
  out.dev_c12 = relative_deviation(out.c12, ref.c12);
  out.max_rel_dev = std::max(out.dev_c11, out.dev_c12);
  return out;
}

}  // namespace optomech
