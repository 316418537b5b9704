#pragma once

#include <utility>
#include <vector>

#include "optomech/axis.hpp"
#include "optomech/model.hpp"
#include "optomech/reduced.hpp"
#include "optomech/types.hpp"

namespace optomech {

/// Roots of det(A - lambda I) = 0, ordered by descending real part.
std::pair<Complex, Complex> eigenvalues(const Mat2& A);

struct SpectrumReport {
  Complex lambda1;
  Complex lambda2;
  bool stable = false;  // Re lambda > 0 for both (perturbations ~ e^{-lambda t})
  double margin = 0.0;  // min Re lambda
};

SpectrumReport spectrum(const Mat2& A);
SpectrumReport classify(const SteadyState& steady, const ModelParams& params);

/// Discriminant under the radical of the closed-form eigenvalues
/// lambda = gamma1 +- sqrt(disc).
struct ClosedFormDiscriminant {
  double derived = 0.0;  // G^2 n^2 - (omega_c - 2 G n)^2 = (3Gn - omega_c)(omega_c - Gn)
  double printed = 0.0;  // (omega_c - 3Gn)(omega_c - Gn), the published radicand
};

ClosedFormDiscriminant closed_form_discriminant(const SteadyState& steady,
                                                const ModelParams& params);

/// Stability inferred from lambda = gamma1 +- sqrt(radicand).
bool closed_form_stable(double gamma1, double radicand);

struct MapPoint {
  double axis1 = 0.0;
  double axis2 = 0.0;
  SteadyState steady;
  SpectrumReport spectrum;
};

struct StabilityMap {
  AxisSpec axis1;
  AxisSpec axis2;
  std::vector<MapPoint> rows;         // row-major over (axis1, axis2), then branch
  std::vector<int> branch_count;      // per grid point, row-major
};

/// Classifies every branch at every grid point. Deterministic regardless of
/// the number of worker threads (0 = hardware concurrency).
StabilityMap stability_map(const ModelParams& base, const AxisSpec& axis1,
                           const AxisSpec& axis2, unsigned threads = 0);

}  // namespace optomech
