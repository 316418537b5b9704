#pragma once

#include "optomech/model.hpp"
#include "optomech/reduced.hpp"
#include "optomech/types.hpp"

namespace optomech {

/// Stationary second moments of the linearized fluctuations.
struct CovarianceMatrix {
  Complex c11;  // <da da>
  Complex c12;  // <da da+>
  Complex c21;  // <da+ da>
  Complex c22;  // <da+ da+>

  Mat2 matrix() const;
  static CovarianceMatrix from_matrix(const Mat2& C);
};

/// C = [D det A + (A - I tr A) D (A - I tr A)^T] / (2 tr A det A).
/// Throws SingularError when |tr A det A| vanishes relative to ||A||^3.
CovarianceMatrix covariance_closed_form(const Mat2& A, const Mat2& D);

/// Solves A C + C A^T = D as a 4x4 linear system (plain transpose, no
/// conjugation). Throws SingularError when lambda_i + lambda_j ~ 0.
CovarianceMatrix lyapunov_solve(const Mat2& A, const Mat2& D);

/// ||A C + C A^T - D||, Frobenius.
double lyapunov_residual(const Mat2& A, const Mat2& C, const Mat2& D);

/// Closed form, after a one-time self-check of the closed form against
/// lyapunov_solve on fixed random stable matrices (throws std::logic_error
/// if they ever disagree).
CovarianceMatrix stationary_covariance(const LinearizedSystem& lin);

struct PaperElements {
  Complex c11;
  Complex c12;
  double dev_c11 = 0.0;  // relative deviation from the closed-form C
  double dev_c12 = 0.0;
  double max_rel_dev = 0.0;
};

/// Literal element formulas in terms of M, N, B = omega_c - 2 G n.
/// Throws SingularError when 4 gamma1 (gamma1^2 + B^2 - G^2 n^2) vanishes.
PaperElements covariance_paper_elements(const ModelParams& params,
                                        const SteadyState& steady);

/// |a - b| / max(|a|, |b|), zero when both vanish.
double relative_deviation(Complex a, Complex b);

}  // namespace optomech
