#include <doctest.h>

#include <limits>

#include "optomech/fluctuations.hpp"
#include "optomech/stability.hpp"
#include "support.hpp"

using namespace optomech;
using testing_support::Gen;
using testing_support::rel;

namespace {

double max_rel(const CovarianceMatrix& a, const CovarianceMatrix& b) {
  return std::max({rel(a.c11, b.c11), rel(a.c12, b.c12), rel(a.c21, b.c21), rel(a.c22, b.c22)});
}

// Relaxes dC/dt = D - A C - C A^T with RK4 until stationary.
Mat2 relax_covariance(const Mat2& A, const Mat2& D, double T, int steps) {
  auto f = [&](const Mat2& C) -> Mat2 { return D - A * C - C * A.transpose(); };
  Mat2 C = Mat2::Zero();
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) {
    const Mat2 k1 = f(C);
    const Mat2 k2 = f(C + 0.5 * h * k1);
    const Mat2 k3 = f(C + 0.5 * h * k2);
    const Mat2 k4 = f(C + h * k3);
    C += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return C;
}

}  // namespace

TEST_CASE("isotropic and noiseless cases") {
  const Mat2 A = 0.7 * Mat2::Identity();
  const Mat2 D = Complex(0.3, 0.2) * Mat2::Identity();
  for (const auto& C : {covariance_closed_form(A, D), lyapunov_solve(A, D)}) {
    CHECK(std::abs(C.c11 - D(0, 0) / 1.4) < 1e-15);
    CHECK(std::abs(C.c22 - D(1, 1) / 1.4) < 1e-15);
    CHECK(std::abs(C.c12) < 1e-15);
  }
  Mat2 B;
  B << Complex(1, 2), Complex(0.3, 0.1), Complex(0.3, -0.1), Complex(1, -2);
  CHECK(covariance_closed_form(B, Mat2::Zero()).matrix().norm() == 0.0);
  CHECK(lyapunov_solve(B, Mat2::Zero()).matrix().norm() == 0.0);
}

TEST_CASE("upper-triangular A: hand elimination oracle") {
  Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Complex a(gen.uniform(0.1, 3), gen.uniform(-3, 3));
    const Complex d(gen.uniform(0.1, 3), gen.uniform(-3, 3));
    const Complex b = gen.complex(2);
    Mat2 A;
    A << a, b, 0, d;
    Mat2 D;
    const Complex off = gen.complex(1);
    D << gen.complex(1), off, off, gen.complex(1);
    const Complex c22 = D(1, 1) / (2.0 * d);
    const Complex c12 = (D(0, 1) - b * c22) / (a + d);
    const Complex c21 = (D(1, 0) - b * c22) / (a + d);
    const Complex c11 = (D(0, 0) - b * (c12 + c21)) / (2.0 * a);
    const auto C = lyapunov_solve(A, D);
    CHECK(rel(C.c11, c11) < 1e-12);
    CHECK(rel(C.c12, c12) < 1e-12);
    CHECK(rel(C.c21, c21) < 1e-12);
    CHECK(rel(C.c22, c22) < 1e-12);
    CHECK(max_rel(covariance_closed_form(A, D), C) < 1e-9);
  }
}

TEST_CASE("closed form equals the Lyapunov solve and the relaxed ODE") {
  Gen gen(17);
  int checked = 0;
  while (checked < 1000) {
    Mat2 A, D;
    testing_support::random_conj_pair(gen, A, D);
    if (!spectrum(A).stable) continue;
    ++checked;
    const auto closed = covariance_closed_form(A, D);
    const auto lyap = lyapunov_solve(A, D);
    CHECK(max_rel(closed, lyap) < 1e-9);
    // 1e-12 ||D||, or the representation floor of a double-precision C when
    // A is close to marginal or strongly non-normal
    const double floor = 4 * std::numeric_limits<double>::epsilon() * A.norm() * lyap.matrix().norm();
    CHECK(lyapunov_residual(A, lyap.matrix(), D) <= std::max(1e-12 * D.norm(), floor));
    CHECK(std::abs(lyap.c12 - lyap.c21) <= 1e-12 * (1 + std::abs(lyap.c12)));
    CHECK(std::abs(lyap.c22 - std::conj(lyap.c11)) <= 1e-12 * (1 + std::abs(lyap.c11)));
    CHECK(std::abs(lyap.c12.imag()) <= 1e-12 * (1 + std::abs(lyap.c12)));
    if (checked <= 30) {
      const auto r = spectrum(A);
      const double T = 30.0 / r.margin;
      const int steps = static_cast<int>(T * (A.norm() + 1) * 20) + 1000;
      const Mat2 relaxed = relax_covariance(A, D, T, steps);
      CHECK((relaxed - lyap.matrix()).norm() <= 1e-7 * (1 + lyap.matrix().norm()));
    }
  }
}

TEST_CASE("linearity in D") {
  Gen gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    Mat2 A, D;
    testing_support::random_conj_pair(gen, A, D);
    if (!spectrum(A).stable) continue;
    const double s = gen.log_uniform(1e-3, 1e3);
    const auto C = covariance_closed_form(A, D).matrix();
    const auto Cs = covariance_closed_form(A, s * D).matrix();
    CHECK((Cs - s * C).norm() <= 1e-12 * s * (1 + C.norm()));
  }
}

TEST_CASE("marginal stability is singular") {
  Mat2 A;
  A << Complex(0, 1), 0, 0, Complex(0, -1);
  CHECK_THROWS_AS(covariance_closed_form(A, Mat2::Identity()), SingularError);
  CHECK_THROWS_AS(lyapunov_solve(A, Mat2::Identity()), SingularError);
}

TEST_CASE("stationary covariance on physical steady states") {
  Gen gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = gen.params();
    for (const auto& s : cavity_steady_states(p)) {
      if (!classify(s, p).stable || s.n == 0.0) continue;
      const auto lin = linearize(s, p);
      const auto C = stationary_covariance(lin);
      CHECK(lyapunov_residual(lin.A, C.matrix(), lin.D) <= 1e-10 * (1 + lin.D.norm()));
      CHECK(std::abs(C.c12.imag()) <= 1e-10 * (1 + std::abs(C.c12)));
    }
  }
}

TEST_CASE("element formulas: degenerate cases and benchmark audit") {
  const auto pg0 = ModelParams::make(1, 10, 0, 0.1, 10, {0.5, 0});
  const auto e0 = covariance_paper_elements(pg0, cavity_steady_states(pg0)[0]);
  CHECK(std::abs(e0.c11) == 0.0);
  CHECK(std::abs(e0.c12) == 0.0);

  const auto vac = ModelParams::make(1, 10, 0.3, 0.1, 10, {});
  const auto ev = covariance_paper_elements(vac, cavity_steady_states(vac)[0]);
  CHECK(std::abs(ev.c12) == 0.0);

  const auto bench = ModelParams::make(1, 10, 0.3, 0.1, 10, {0.71, 0});
  const auto s = cavity_steady_states(bench)[0];
  CHECK(s.n == doctest::Approx(0.5).epsilon(0.02));
  const auto e = covariance_paper_elements(bench, s);
  CHECK(std::isfinite(e.dev_c11));
  CHECK(std::isfinite(e.dev_c12));
  CHECK(e.max_rel_dev == std::max(e.dev_c11, e.dev_c12));
  MESSAGE("element-formula deviation on the benchmark: c11 " << e.dev_c11 << ", c12 "
                                                             << e.dev_c12);
}

TEST_CASE("relative deviation") {
  CHECK(relative_deviation(0, 0) == 0.0);
  CHECK(relative_deviation(1, 0) == 1.0);
  CHECK(relative_deviation(Complex(2, 0), Complex(1, 0)) == 0.5);
}
