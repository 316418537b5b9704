#include "optomech/correlation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "optomech/parallel.hpp"

namespace optomech {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

ExpansionMode parse_expansion_mode(std::string_view text) {
  if (text == "paper") return ExpansionMode::kPaper;
  if (text == "corrected") return ExpansionMode::kCorrected;
  throw ConfigError("expansion mode must be 'paper' or 'corrected', got '" +
                    std::string(text) + "'");
}

const char* to_string(ExpansionMode mode) {
  return mode == ExpansionMode::kPaper ? "paper" : "corrected";
}

const char* to_string(BranchStatus status) {
  switch (status) {
    case BranchStatus::kOk: return "ok";
    case BranchStatus::kUnstable: return "unstable";
    case BranchStatus::kVacuum: return "vacuum";
  }
  return "unknown";
}

double g2_from_covariance(const CovarianceMatrix& C, const SteadyState& s,
                          ExpansionMode mode) {
  if (!(s.n > 0.0) || std::abs(s.alpha0) == 0.0) {
    throw SingularError("g2 undefined for a branch with n = 0");
  }
  const double mixed = mode == ExpansionMode::kPaper ? 4.0 : 2.0;
  const Complex a2 = s.alpha0 * s.alpha0;
  const Complex bracket = C.c11 / a2 + C.c22 / std::conj(a2) + mixed * C.c21 / s.n;
  if (std::abs(bracket.imag()) > 1e-9 * (1.0 + std::abs(bracket))) {
    throw std::logic_error("g2 expansion is not real: covariance off the conjugation manifold");
  }
  return 1.0 + bracket.real();
}

ExcessParts closed_form_excess_parts(const ModelParams& p, double n) {
  const double G = effective_coupling(p);
  const double wc = p.omega_c();
  const double wm = p.omega_m();
  const double g1 = p.gamma1();
  const double g2 = p.gamma2();
  const double num =
      G * ((wc - 2.0 * n * G) * (2.0 * n * g2 * wc - n * n * g2 * G - g1 * wm) +
           n * (g1 * g1 * g2 + n * n * G * G * g2 - 2.0 * g1 * wm * G * n));
  const double den = n * g1 * wm * (g1 * g1 - (wc + 5.0 * n * G) * (wc - n * G));
  return {num, den};
}

ClosedFormG2 g2_closed_form(const ModelParams& p, const SteadyState& s) {
  const double n = s.n;
  if (!(n > 0.0)) {
    throw SingularError("closed-form g2: factor n vanishes");
  }
  const double G = effective_coupling(p);
  const double wc = p.omega_c();
  const double g1 = p.gamma1();
  const double bracket = g1 * g1 - (wc + 5.0 * n * G) * (wc - n * G);
  const double bracket_scale = g1 * g1 + std::abs((wc + 5.0 * n * G) * (wc - n * G));
  if (std::abs(bracket) <= 1e-14 * bracket_scale) {
    throw SingularError(
        "closed-form g2: factor gamma1^2 - (omega_c + 5 n G)(omega_c - n G) vanishes");
  }
  const ExcessParts parts = closed_form_excess_parts(p, n);
  ClosedFormG2 out;
  out.excess_term = parts.numerator / parts.denominator;
  out.g2 = 1.0 + out.excess_term;
  try {
    const CovarianceMatrix C = stationary_covariance(linearize(s, p));
    out.deviation_from_covariance =
        relative_deviation(out.g2, g2_from_covariance(C, s, ExpansionMode::kPaper));
  } catch (const SingularError&) {
    out.deviation_from_covariance = kNaN;
  }
  return out;
}

namespace {

G2Report report_for(const ModelParams& p, const SteadyState& s, ExpansionMode mode) {
  G2Report r;
  r.branch_id = s.branch_id;
  r.n = s.n;
  r.mode = mode;
  r.spectrum = classify(s, p);
  r.stable = r.spectrum.stable;
  r.g2_covariance = r.g2_cov_paper = r.g2_cov_corrected = kNaN;
  r.g2_closed_form = r.excess_term = kNaN;
  if (!(s.n > 0.0)) {
    r.status = BranchStatus::kVacuum;
    return r;
  }
  if (!r.stable) {
    r.status = BranchStatus::kUnstable;
    return r;
  }
  const CovarianceMatrix C = stationary_covariance(linearize(s, p));
  r.g2_cov_paper = g2_from_covariance(C, s, ExpansionMode::kPaper);
  r.g2_cov_corrected = g2_from_covariance(C, s, ExpansionMode::kCorrected);
  r.g2_covariance = mode == ExpansionMode::kPaper ? r.g2_cov_paper : r.g2_cov_corrected;
  r.antibunched = r.g2_covariance < 1.0;
  try {
    const ClosedFormG2 cf = g2_closed_form(p, s);
    r.g2_closed_form = cf.g2;
    r.excess_term = cf.excess_term;
  } catch (const SingularError&) {
    // reported as NaN; the covariance path is still defined
  }
  return r;
}

}  // namespace

std::vector<G2Report> classify_antibunching(const ModelParams& params, ExpansionMode mode) {
  std::vector<G2Report> out;
  for (const SteadyState& s : cavity_steady_states(params)) {
    out.push_back(report_for(params, s, mode));
  }
  return out;
}

std::vector<G2SweepRow> g2_sweep(const ModelParams& base, const AxisSpec& axis,
                                 ExpansionMode mode, unsigned threads) {
  const std::vector<double> values = axis.values();
  std::vector<std::vector<G2Report>> per_point(values.size());
  detail::parallel_for(values.size(), threads, [&](std::size_t i) {
    per_point[i] = classify_antibunching(base.with_field(axis.field, values[i]), mode);
  });
  std::vector<G2SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (auto& r : per_point[i]) rows.push_back({values[i], std::move(r)});
  }
  return rows;
}

}  // namespace optomech
