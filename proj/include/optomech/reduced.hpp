#pragma once

#include <utility>
#include <vector>

#include "optomech/model.hpp"
#include "optomech/types.hpp"

namespace optomech {

/// Coefficients of the cavity-only dynamics after the mirror is eliminated.
struct EffectiveModel {
  double G = 0.0;        // Kerr-like coupling 2 g^2 omega_m / (gamma2^2 + omega_m^2)
  Complex M;             // -2 g^2 / (gamma2 + i omega_m)
  double N_per_n = 0.0;  // 2 gamma2 g^2 / (gamma2^2 + omega_m^2); N = N_per_n * n
  ModelParams source;
};

double effective_coupling(const ModelParams& params);
EffectiveModel effective_model(const ModelParams& params);

/// Deterministic mirror amplitudes slaved to the cavity field.
std::pair<Complex, Complex> mirror_steady_amplitudes(Complex alpha1,
                                                     Complex alpha1_plus,
                                                     const ModelParams& params);

struct SteadyState {
  Complex alpha0;
  double n = 0.0;  // |alpha0|^2
  int branch_id = 0;
  Complex mirror_alpha2;
  Complex mirror_alpha2_plus;

  Complex alpha0_plus() const { return std::conj(alpha0); }
};

/// Deterministic part of the reduced cavity equation, drive included:
/// -i omega_c a + i G a+ a^2 - gamma1 a + E.
Complex reduced_drift(Complex alpha, Complex alpha_plus, const ModelParams& params);

/// The steady-state cubic n [gamma1^2 + (omega_c - G n)^2] - |E|^2.
double steady_state_cubic(double n, const ModelParams& params);

/// All physical fixed points, ordered by ascending n (branch_id = index).
/// Each is polished so |reduced_drift(alpha0)| <= 1e-10 max(1, |E|).
std::vector<SteadyState> cavity_steady_states(const ModelParams& params);

/// Drift matrix A of d(delta)/dt = -A delta + noise.
Mat2 drift_matrix(const SteadyState& steady, const ModelParams& params);

/// Diffusion matrix D of the linearized system (noise frozen at alpha0).
Mat2 diffusion_matrix(const SteadyState& steady, const ModelParams& params);

struct LinearizedSystem {
  Mat2 A;
  Mat2 D;
  SteadyState steady;
};

LinearizedSystem linearize(const SteadyState& steady, const ModelParams& params);

}  // namespace optomech
