#pragma once

#include <json.hpp>

#include "optomech/model.hpp"
#include "optomech/sde.hpp"

namespace optomech {

inline constexpr int kSchemaVersion = 1;

/// Declared tolerances of the cross-validation report.
struct VerifyTolerances {
  double closed_form_vs_lyapunov = 1e-9;
  double lyapunov_residual = 1e-12;  // relative to ||D||
  double eq24_vs_lyapunov = 1e-6;
  double eq26_vs_eq21 = 1e-6;
  double mc_standard_errors = 3.0;
};

struct VerifyOptions {
  int branch = -1;
  bool run_mc = true;
  SystemKind mc_system = SystemKind::kReduced;
  IntegratorConfig mc;
  VerifyTolerances tolerances;
};

/// Integrator defaults for a parameter set: dt = 1e-3 / fastest rate,
/// t_end = 12 / (stability margin of the starting branch).
IntegratorConfig default_integrator(const ModelParams& params, int branch = -1);

nlohmann::json params_json(const ModelParams& params);

/// Three-way comparison of the analytic routes (closed form, Lyapunov oracle,
/// element formulas, closed-form g2) and optionally Monte Carlo, for one
/// steady branch.
nlohmann::json verify_report(const ModelParams& params, const VerifyOptions& options);

}  // namespace optomech
