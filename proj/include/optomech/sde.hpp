#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "optomech/model.hpp"
#include "optomech/reduced.hpp"
#include "optomech/types.hpp"

namespace optomech {

/// Positive-P phase-space point of cavity + mirror. The "plus" variables are
/// independent, not complex conjugates.
struct FullState {
  Complex alpha1;
  Complex alpha1_plus;
  Complex alpha2;
  Complex alpha2_plus;
};

struct ReducedState {
  Complex alpha;
  Complex alpha_plus;
};

using Mat4 = Eigen::Matrix4cd;

/// Deterministic part of the four cavity/mirror Ito equations.
std::array<Complex, 4> full_drift(const FullState& s, const ModelParams& params);

/// Noise factor B with B B^T = D4. D4 couples only (alpha1, alpha2) with
/// d = i g alpha1 and (alpha1+, alpha2+) with d = -i g alpha1+; each pair gets
/// the block sqrt(d/2) [[1, i], [1, -i]] on its own two noise columns.
Mat4 full_noise_factor(const FullState& s, const ModelParams& params);

/// The 4x4 diffusion matrix itself.
Mat4 full_diffusion(const FullState& s, const ModelParams& params);

/// Some B with B B^T = S for complex symmetric S. Closed-form principal
/// square root (S + s I) / sqrt(tr S + 2 s), s = sqrt(det S); falls back to a
/// pivoted symmetric LDL^T when tr S + 2 s is ill-conditioned (defective S).
Mat2 complex_symmetric_factor(const Mat2& S);

struct ReducedDriftNoise {
  std::array<Complex, 2> drift;
  Mat2 noise;      // B2 with B2 B2^T = diffusion
  Mat2 diffusion;  // [[M a^2, N a+ a], [N a+ a, conj(M) a+^2]]
};

/// Reduced cavity equations with the mirror eliminated. The noise factor is
/// diag(a, a+) * sqrt([[M, N], [N, conj(M)]]), which keeps the state-dependent
/// (multiplicative) form of the eliminated noise.
ReducedDriftNoise reduced_drift_and_noise(const ReducedState& s, const ModelParams& params);

enum class SystemKind { kFull, kReduced };
SystemKind parse_system_kind(std::string_view text);
const char* to_string(SystemKind kind);

enum class InitialCondition { kSteady, kVacuum };

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 10.0;
  std::int64_t n_traj = 1000;
  std::uint64_t seed = 1;
  double divergence_cutoff = 0.0;  // <= 0: 1e6 max(1, |E| / gamma1)
  double max_discard_fraction = 0.01;
  int batches = 20;
  InitialCondition initial = InitialCondition::kSteady;
  int branch = -1;          // steady branch to start from; -1: smallest-n stable
  bool noise = true;
  bool debug_checks = false;  // verify B B^T = D at every step
  unsigned threads = 0;

  // trace capture for the first trace_trajectories trajectories
  int trace_trajectories = 0;
  std::int64_t trace_stride = 1;

  void validate() const;
  double effective_cutoff(const ModelParams& params) const;
};

/// Time-averaged normal-ordered moments of one trajectory over [t_end/2, t_end].
struct TrajectoryMoments {
  Complex alpha;     // <a>
  Complex n;         // <a+ a>
  Complex n2;        // <a+^2 a^2>
  bool diverged = false;
  double divergence_time = 0.0;
};

struct BatchMoments {
  std::int64_t kept = 0;
  Complex alpha;
  Complex n;
  Complex n2;
};

struct Traces {
  std::int64_t var_count = 0;
  std::int64_t step_count = 0;  // recorded samples per trajectory
  double sample_interval = 0.0;
  std::vector<std::vector<Complex>> paths;  // per trajectory: step-major, var-minor
};

struct EnsembleStats {
  std::int64_t trajectory_count = 0;
  std::int64_t discarded_count = 0;
  std::optional<double> first_divergence_time;

  std::vector<BatchMoments> batches;

  Complex mean_alpha;
  Complex mean_n;
  Complex mean_n2;
  double se_alpha_re = 0.0;
  double se_alpha_im = 0.0;
  double se_n = 0.0;   // of Re <a+ a>
  double se_n2 = 0.0;  // of Re <a+^2 a^2>

  std::optional<double> g2_estimate;
  std::optional<double> g2_se;

  Traces traces;

  double discard_fraction() const {
    return trajectory_count == 0 ? 0.0
                                 : static_cast<double>(discarded_count) / trajectory_count;
  }
};

/// Groups per-trajectory moments into `batches` contiguous batches and forms
/// the ensemble means with batch-mean standard errors.
EnsembleStats aggregate(std::span<const TrajectoryMoments> trajectories, int batches);

struct G2Estimate {
  double g2 = 0.0;
  double se = 0.0;
  double imag_n = 0.0;   // Im <a+ a> / Re <a+ a>
  double imag_n2 = 0.0;  // Im <a+^2 a^2> / (Re <a+ a>)^2
};

/// g2 = Re<a+^2 a^2> / (Re<a+ a>)^2 with delta-method SE over batch means.
/// Throws SimulationError with fewer than 10 batches or when Re<a+ a> is
/// within one SE of zero.
G2Estimate estimate_g2(const EnsembleStats& stats);

/// Euler-Maruyama ensemble. Trajectory i draws its noise from the Philox
/// stream (seed, i), so results do not depend on threading. Throws
/// SimulationError when the discard fraction exceeds the configured limit.
EnsembleStats simulate(const ModelParams& params, const IntegratorConfig& config,
                       SystemKind system);

/// Steady state used as the initial condition for `config.branch`.
SteadyState initial_branch(const ModelParams& params, int branch);

}  // namespace optomech
