#pragma once

#include <string_view>
#include <vector>

#include "optomech/axis.hpp"
#include "optomech/fluctuations.hpp"
#include "optomech/model.hpp"
#include "optomech/reduced.hpp"
#include "optomech/stability.hpp"

namespace optomech {

/// Coefficient of the mixed moment <da+ da>/n in the second-order expansion
/// of g2(0): 4 as published, 2 when the denominator <a+ a>^2 is expanded too.
enum class ExpansionMode { kPaper, kCorrected };

ExpansionMode parse_expansion_mode(std::string_view text);
const char* to_string(ExpansionMode mode);

/// g2(0) = 1 + Re[C11/a0^2 + C22/a0+^2 + k C21/n], k = 4 (paper) or 2.
/// Throws SingularError when n is not positive; throws std::logic_error when
/// the bracket is not real to 1e-9 (C not on the conjugation manifold).
double g2_from_covariance(const CovarianceMatrix& C, const SteadyState& steady,
                          ExpansionMode mode = ExpansionMode::kPaper);

/// Numerator and denominator of the closed-form excess term as functions of n.
struct ExcessParts {
  double numerator = 0.0;
  double denominator = 0.0;
};
ExcessParts closed_form_excess_parts(const ModelParams& params, double n);

struct ClosedFormG2 {
  double g2 = 1.0;
  double excess_term = 0.0;
  double deviation_from_covariance = 0.0;  // vs g2_from_covariance, paper mode
};

/// Closed-form g2(0) evaluated literally. Throws SingularError naming the
/// vanishing factor of the denominator.
ClosedFormG2 g2_closed_form(const ModelParams& params, const SteadyState& steady);

enum class BranchStatus { kOk, kUnstable, kVacuum };
const char* to_string(BranchStatus status);

struct G2Report {
  int branch_id = 0;
  double n = 0.0;
  bool stable = false;
  BranchStatus status = BranchStatus::kOk;
  ExpansionMode mode = ExpansionMode::kPaper;
  double g2_covariance = 0.0;  // in `mode`; NaN unless status == kOk
  double g2_cov_paper = 0.0;
  double g2_cov_corrected = 0.0;
  double g2_closed_form = 0.0;  // NaN if undefined or singular
  double excess_term = 0.0;
  bool antibunched = false;     // g2_covariance < 1
  SpectrumReport spectrum;
};

/// Every branch is reported; unstable and vacuum branches carry a status and
/// NaN correlation values.
std::vector<G2Report> classify_antibunching(const ModelParams& params,
                                            ExpansionMode mode = ExpansionMode::kPaper);

struct G2SweepRow {
  double axis_value = 0.0;
  G2Report report;
};

std::vector<G2SweepRow> g2_sweep(const ModelParams& base, const AxisSpec& axis,
                                 ExpansionMode mode = ExpansionMode::kPaper,
                                 unsigned threads = 0);

}  // namespace optomech
