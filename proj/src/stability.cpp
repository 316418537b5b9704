#include "optomech/stability.hpp"

#include <cmath>

#include "optomech/parallel.hpp"

namespace optomech {

std::pair<Complex, Complex> eigenvalues(const Mat2& A) {
  const Complex half_trace = 0.5 * (A(0, 0) + A(1, 1));
  const Complex det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  const Complex root = std::sqrt(half_trace * half_trace - det);
  // add the root in the direction of the half trace, recover the partner
  // from the product so neither eigenvalue suffers cancellation
  const Complex big = (std::real(std::conj(half_trace) * root) >= 0.0)
                          ? half_trace + root
                          : half_trace - root;
  Complex l1 = big;
  Complex l2 = std::abs(big) > 0.0 ? det / big : Complex(0.0);
  if (l2.real() > l1.real() || (l2.real() == l1.real() && l2.imag() > l1.imag())) {
    std::swap(l1, l2);
  }
  return {l1, l2};
}

SpectrumReport spectrum(const Mat2& A) {
  SpectrumReport r;
  std::tie(r.lambda1, r.lambda2) = eigenvalues(A);
  r.margin = std::min(r.lambda1.real(), r.lambda2.real());
  r.stable = r.margin > 0.0;
  return r;
}

SpectrumReport classify(const SteadyState& steady, const ModelParams& params) {
  return spectrum(drift_matrix(steady, params));
}

ClosedFormDiscriminant closed_form_discriminant(const SteadyState& s,
                                                const ModelParams& p) {
  const double Gn = effective_coupling(p) * s.n;
  const double wc = p.omega_c();
  return {(3.0 * Gn - wc) * (wc - Gn), (wc - 3.0 * Gn) * (wc - Gn)};
}

bool closed_form_stable(double gamma1, double radicand) {
  if (radicand <= 0.0) return gamma1 > 0.0;
  return gamma1 - std::sqrt(radicand) > 0.0;
}

StabilityMap stability_map(const ModelParams& base, const AxisSpec& axis1,
                           const AxisSpec& axis2, unsigned threads) {
  if (axis1.field == axis2.field && (axis1.count > 1 || axis2.count > 1)) {
    throw DomainError("stability map axes must sweep different fields");
  }
  const std::vector<double> v1 = axis1.values();
  const std::vector<double> v2 = axis2.values();
  const std::size_t points = v1.size() * v2.size();

  std::vector<std::vector<MapPoint>> per_point(points);
  detail::parallel_for(points, threads, [&](std::size_t k) {
    const double x = v1[k / v2.size()];
    const double y = v2[k % v2.size()];
    const ModelParams p = base.with_field(axis1.field, x).with_field(axis2.field, y);
    for (const SteadyState& s : cavity_steady_states(p)) {
      per_point[k].push_back(MapPoint{x, y, s, classify(s, p)});
    }
  });

  StabilityMap map{axis1, axis2, {}, {}};
  map.branch_count.reserve(points);
  for (auto& branch_rows : per_point) {
    map.branch_count.push_back(static_cast<int>(branch_rows.size()));
    for (auto& row : branch_rows) map.rows.push_back(std::move(row));
  }
  return map;
}

}  // namespace optomech
