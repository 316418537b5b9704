#include "optomech/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "optomech/parallel.hpp"
#include "optomech/rng.hpp"
#include "optomech/stability.hpp"

namespace optomech {

std::array<Complex, 4> full_drift(const FullState& s, const ModelParams& p) {
  const double wc = p.omega_c();
  const double wm = p.omega_m();
  const double g = p.g();
  const Complex mirror = s.alpha2_plus + s.alpha2;
  const Complex intensity = s.alpha1_plus * s.alpha1;
  return {
      -kI * wc * s.alpha1 + kI * g * s.alpha1 * mirror - p.gamma1() * s.alpha1 + p.drive(),
      kI * wc * s.alpha1_plus - kI * g * s.alpha1_plus * mirror - p.gamma1() * s.alpha1_plus +
          std::conj(p.drive()),
      -kI * wm * s.alpha2 + kI * g * intensity - p.gamma2() * s.alpha2,
      kI * wm * s.alpha2_plus - kI * g * intensity - p.gamma2() * s.alpha2_plus,
  };
}

Mat4 full_diffusion(const FullState& s, const ModelParams& p) {
  Mat4 D = Mat4::Zero();
  D(0, 2) = D(2, 0) = kI * p.g() * s.alpha1;
  D(1, 3) = D(3, 1) = -kI * p.g() * s.alpha1_plus;
  return D;
}

Mat4 full_noise_factor(const FullState& s, const ModelParams& p) {
  Mat4 B = Mat4::Zero();
  const Complex s1 = std::sqrt(kI * p.g() * s.alpha1 / 2.0);
  const Complex s2 = std::sqrt(-kI * p.g() * s.alpha1_plus / 2.0);
  // pair (alpha1, alpha2) on columns 0,1; pair (alpha1+, alpha2+) on columns 2,3
  B(0, 0) = s1;
  B(0, 1) = kI * s1;
  B(2, 0) = s1;
  B(2, 1) = -kI * s1;
  B(1, 2) = s2;
  B(1, 3) = kI * s2;
  B(3, 2) = s2;
  B(3, 3) = -kI * s2;
  return B;
}

Mat2 complex_symmetric_factor(const Mat2& S) {
  const double scale = S.norm();
  if (scale == 0.0) return Mat2::Zero();
  const Complex tr = S.trace();
  Complex root_det = std::sqrt(S.determinant());
  if (std::abs(tr - 2.0 * root_det) > std::abs(tr + 2.0 * root_det)) root_det = -root_det;
  const Complex t = tr + 2.0 * root_det;
  if (std::abs(t) > 1e-8 * scale) {
    return (S + root_det * Mat2::Identity()) / std::sqrt(t);
  }
  // defective or nearly so: pivoted symmetric LDL^T, B B^T = S exactly
  Mat2 B = Mat2::Zero();
  const Complex s11 = S(0, 0), s12 = S(0, 1), s22 = S(1, 1);
  if (std::abs(s11) >= std::abs(s22) && std::abs(s11) > 0.0) {
    const Complex r = std::sqrt(s11);
    B(0, 0) = r;
    B(1, 0) = s12 / r;
    B(1, 1) = std::sqrt(s22 - s12 * s12 / s11);
  } else if (std::abs(s22) > 0.0) {
    const Complex r = std::sqrt(s22);
    B(1, 1) = r;
    B(0, 1) = s12 / r;
    B(0, 0) = std::sqrt(s11 - s12 * s12 / s22);
  } else {
    const Complex r = std::sqrt(s12 / 2.0);
    B << r, kI * r, r, -kI * r;
  }
  return B;
}

namespace {

Mat2 reduced_noise_core(const ModelParams& p) {
  const EffectiveModel eff = effective_model(p);
  Mat2 core;
  core << eff.M, eff.N_per_n, eff.N_per_n, std::conj(eff.M);
  return complex_symmetric_factor(core);
}

}  // namespace

ReducedDriftNoise reduced_drift_and_noise(const ReducedState& s, const ModelParams& p) {
  const EffectiveModel eff = effective_model(p);
  const Complex a = s.alpha;
  const Complex ap = s.alpha_plus;
  const Complex n = ap * a;
  ReducedDriftNoise out;
  out.drift = {
      -kI * p.omega_c() * a + kI * eff.G * ap * a * a - p.gamma1() * a + p.drive(),
      kI * p.omega_c() * ap - kI * eff.G * ap * ap * a - p.gamma1() * ap + std::conj(p.drive()),
  };
  out.diffusion << eff.M * a * a, eff.N_per_n * n, eff.N_per_n * n, std::conj(eff.M) * ap * ap;
  const Mat2 core = reduced_noise_core(p);
  out.noise.row(0) = a * core.row(0);
  out.noise.row(1) = ap * core.row(1);
  return out;
}

SystemKind parse_system_kind(std::string_view text) {
  if (text == "full") return SystemKind::kFull;
  if (text == "reduced") return SystemKind::kReduced;
  throw ConfigError("system must be 'full' or 'reduced', got '" + std::string(text) + "'");
}

const char* to_string(SystemKind kind) {
  return kind == SystemKind::kFull ? "full" : "reduced";
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(t_end >= dt) || !std::isfinite(t_end)) throw ConfigError("t_end must be >= dt");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (!(max_discard_fraction >= 0.0 && max_discard_fraction < 1.0)) {
    throw ConfigError("max_discard must lie in [0, 1)");
  }
  if (batches < 1) throw ConfigError("batches must be >= 1");
  if (trace_trajectories < 0 || trace_stride < 1) {
    throw ConfigError("trace settings must be non-negative with stride >= 1");
  }
}

double IntegratorConfig::effective_cutoff(const ModelParams& p) const {
  if (divergence_cutoff > 0.0) return divergence_cutoff;
  return 1e6 * std::max(1.0, std::abs(p.drive()) / p.gamma1());
}

SteadyState initial_branch(const ModelParams& params, int branch) {
  const auto states = cavity_steady_states(params);
  if (branch >= 0) {
    if (branch >= static_cast<int>(states.size())) {
      throw ConfigError("branch " + std::to_string(branch) + " does not exist (" +
                        std::to_string(states.size()) + " branches)");
    }
    return states[static_cast<std::size_t>(branch)];
  }
  for (const auto& s : states) {
    if (classify(s, params).stable) return s;
  }
  throw SimulationError("no stable steady-state branch to start from");
}

namespace {

struct Window {
  std::int64_t steps = 0;
  std::int64_t first_sample = 0;  // samples taken at step indices [first_sample, steps]
  double samples = 0.0;
};

Window make_window(const IntegratorConfig& c) {
  Window w;
  w.steps = std::max<std::int64_t>(1, std::llround(c.t_end / c.dt));
  w.first_sample = w.steps / 2;
  w.samples = static_cast<double>(w.steps - w.first_sample + 1);
  return w;
}

// Per-trajectory integration shared by both systems. State provides the
// step; this accumulates moments, divergence and traces.
class Accumulator {
 public:
  Accumulator(const Window& w, double cutoff, std::vector<Complex>* trace,
              std::int64_t trace_stride, int vars)
      : w_(w), cutoff2_(cutoff * cutoff), trace_(trace), stride_(trace_stride), vars_(vars) {}

  template <typename... Vars>
  bool observe(std::int64_t step, Complex a, Complex ap, Vars... extra) {
    if (!finite_below(a) || !finite_below(ap) || !(finite_below(extra) && ...)) {
      return false;
    }
    if (trace_ && step % stride_ == 0) {
      trace_->push_back(a);
      trace_->push_back(ap);
      (trace_->push_back(extra), ...);
    }
    if (step >= w_.first_sample) {
      const Complex n = ap * a;
      sum_alpha_ += a;
      sum_n_ += n;
      sum_n2_ += n * n;
    }
    return true;
  }

  TrajectoryMoments finish() const {
    TrajectoryMoments m;
    m.alpha = sum_alpha_ / w_.samples;
    m.n = sum_n_ / w_.samples;
    m.n2 = sum_n2_ / w_.samples;
    return m;
  }

  TrajectoryMoments diverged(std::int64_t step, double dt) const {
    TrajectoryMoments m;
    m.diverged = true;
    m.divergence_time = static_cast<double>(step) * dt;
    if (trace_) {
      const std::int64_t expected = (w_.steps / stride_ + 1) * vars_;
      trace_->resize(static_cast<std::size_t>(expected),
                     Complex(std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN()));
    }
    return m;
  }

 private:
  // NaN and inf both fail the comparison
  bool finite_below(Complex z) const { return std::norm(z) <= cutoff2_; }

  Window w_;
  double cutoff2_;
  std::vector<Complex>* trace_;
  std::int64_t stride_;
  int vars_;
  Complex sum_alpha_;
  Complex sum_n_;
  Complex sum_n2_;
};

void check_reconstruction(const Mat2& B, const Mat2& D) {
  if ((B * B.transpose() - D).norm() > 1e-12 * (1.0 + D.norm())) {
    throw std::logic_error("reduced noise factor does not reproduce the diffusion matrix");
  }
}

void check_reconstruction(const Mat4& B, const Mat4& D) {
  if ((B * B.transpose() - D).norm() > 1e-12 * (1.0 + D.norm())) {
    throw std::logic_error("full noise factor does not reproduce the diffusion matrix");
  }
}

TrajectoryMoments run_reduced(const ModelParams& p, const IntegratorConfig& c,
                              const Window& w, double cutoff, const SteadyState& start,
                              std::int64_t index, std::vector<Complex>* trace) {
  const double G = effective_coupling(p);
  const Mat2 core = reduced_noise_core(p);
  const Complex k00 = core(0, 0), k01 = core(0, 1), k10 = core(1, 0), k11 = core(1, 1);
  const Complex linear(-p.gamma1(), -p.omega_c());
  const Complex linear_plus(-p.gamma1(), p.omega_c());
  const Complex E = p.drive();
  const Complex Ec = std::conj(E);
  const double dt = c.dt;
  const double sqdt = c.noise ? std::sqrt(dt) : 0.0;

  Complex a = c.initial == InitialCondition::kSteady ? start.alpha0 : Complex();
  Complex ap = std::conj(a);
  NormalStream rng(c.seed, static_cast<std::uint64_t>(index));
  Accumulator acc(w, cutoff, trace, c.trace_stride, 2);
  if (!acc.observe(0, a, ap)) return acc.diverged(0, dt);

  for (std::int64_t step = 1; step <= w.steps; ++step) {
    if (c.debug_checks) {
      const auto dn = reduced_drift_and_noise({a, ap}, p);
      check_reconstruction(dn.noise, dn.diffusion);
    }
    const Complex kerr = kI * G * (ap * a);
    const Complex drift = (linear + kerr) * a + E;
    const Complex drift_plus = (linear_plus - kerr) * ap + Ec;
    const auto xi = rng.pair();
    const double x0 = xi[0] * sqdt;
    const double x1 = xi[1] * sqdt;
    const Complex next = a + drift * dt + a * (k00 * x0 + k01 * x1);
    ap = ap + drift_plus * dt + ap * (k10 * x0 + k11 * x1);
    a = next;
    if (!acc.observe(step, a, ap)) return acc.diverged(step, dt);
  }
  return acc.finish();
}

TrajectoryMoments run_full(const ModelParams& p, const IntegratorConfig& c, const Window& w,
                           double cutoff, const SteadyState& start, std::int64_t index,
                           std::vector<Complex>* trace) {
  const Complex lin1(-p.gamma1(), -p.omega_c());
  const Complex lin1p(-p.gamma1(), p.omega_c());
  const Complex lin2(-p.gamma2(), -p.omega_m());
  const Complex lin2p(-p.gamma2(), p.omega_m());
  const Complex ig = kI * p.g();
  const Complex E = p.drive();
  const Complex Ec = std::conj(E);
  const double dt = c.dt;
  const double sqdt = c.noise ? std::sqrt(dt) : 0.0;

  FullState s{};
  if (c.initial == InitialCondition::kSteady) {
    s = {start.alpha0, start.alpha0_plus(), start.mirror_alpha2, start.mirror_alpha2_plus};
  }
  NormalStream rng(c.seed, static_cast<std::uint64_t>(index));
  Accumulator acc(w, cutoff, trace, c.trace_stride, 4);
  if (!acc.observe(0, s.alpha1, s.alpha1_plus, s.alpha2, s.alpha2_plus)) {
    return acc.diverged(0, dt);
  }

  for (std::int64_t step = 1; step <= w.steps; ++step) {
    if (c.debug_checks) check_reconstruction(full_noise_factor(s, p), full_diffusion(s, p));
    const Complex mirror = ig * (s.alpha2 + s.alpha2_plus);
    const Complex push = ig * (s.alpha1_plus * s.alpha1);
    const Complex d1 = (lin1 + mirror) * s.alpha1 + E;
    const Complex d1p = (lin1p - mirror) * s.alpha1_plus + Ec;
    const Complex d2 = lin2 * s.alpha2 + push;
    const Complex d2p = lin2p * s.alpha2_plus - push;

    const auto xa = rng.pair();
    const auto xb = rng.pair();
    const Complex s1 = std::sqrt(0.5 * ig * s.alpha1) * sqdt;
    const Complex s2 = std::sqrt(-0.5 * ig * s.alpha1_plus) * sqdt;
    const Complex wa(xa[0], xa[1]);
    const Complex wb(xb[0], xb[1]);
    s.alpha1 += d1 * dt + s1 * wa;
    s.alpha2 += d2 * dt + s1 * std::conj(wa);
    s.alpha1_plus += d1p * dt + s2 * wb;
    s.alpha2_plus += d2p * dt + s2 * std::conj(wb);
    if (!acc.observe(step, s.alpha1, s.alpha1_plus, s.alpha2, s.alpha2_plus)) {
      return acc.diverged(step, dt);
    }
  }
  return acc.finish();
}

double batch_se(const std::vector<BatchMoments>& batches, double total_kept,
                auto&& deviation) {
  const std::size_t b = batches.size();
  if (b < 2 || total_kept <= 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& bm : batches) {
    const double w = static_cast<double>(bm.kept);
    const double d = deviation(bm);
    sum += w * w * d * d;
  }
  return std::sqrt(sum * static_cast<double>(b) / static_cast<double>(b - 1)) / total_kept;
}

}  // namespace

EnsembleStats aggregate(std::span<const TrajectoryMoments> trajectories, int batches) {
  EnsembleStats st;
  st.trajectory_count = static_cast<std::int64_t>(trajectories.size());
  const std::size_t count = trajectories.size();
  const std::size_t nb = std::min<std::size_t>(static_cast<std::size_t>(std::max(batches, 1)),
                                               std::max<std::size_t>(count, 1));
  st.batches.resize(count == 0 ? 0 : nb);
  double kept_total = 0.0;
  for (std::size_t b = 0; b < st.batches.size(); ++b) {
    const std::size_t lo = b * count / nb;
    const std::size_t hi = (b + 1) * count / nb;
    BatchMoments& bm = st.batches[b];
    for (std::size_t i = lo; i < hi; ++i) {
      const TrajectoryMoments& t = trajectories[i];
      if (t.diverged) {
        ++st.discarded_count;
        if (!st.first_divergence_time || t.divergence_time < *st.first_divergence_time) {
          st.first_divergence_time = t.divergence_time;
        }
        continue;
      }
      ++bm.kept;
      bm.alpha += t.alpha;
      bm.n += t.n;
      bm.n2 += t.n2;
    }
    st.mean_alpha += bm.alpha;
    st.mean_n += bm.n;
    st.mean_n2 += bm.n2;
    kept_total += static_cast<double>(bm.kept);
    if (bm.kept > 0) {
      const double k = static_cast<double>(bm.kept);
      bm.alpha /= k;
      bm.n /= k;
      bm.n2 /= k;
    }
  }
  if (kept_total > 0.0) {
    st.mean_alpha /= kept_total;
    st.mean_n /= kept_total;
    st.mean_n2 /= kept_total;
  }
  st.se_alpha_re = batch_se(st.batches, kept_total, [&](const BatchMoments& b) {
    return b.alpha.real() - st.mean_alpha.real();
  });
  st.se_alpha_im = batch_se(st.batches, kept_total, [&](const BatchMoments& b) {
    return b.alpha.imag() - st.mean_alpha.imag();
  });
  st.se_n = batch_se(st.batches, kept_total, [&](const BatchMoments& b) {
    return b.n.real() - st.mean_n.real();
  });
  st.se_n2 = batch_se(st.batches, kept_total, [&](const BatchMoments& b) {
    return b.n2.real() - st.mean_n2.real();
  });
  try {
    const G2Estimate est = estimate_g2(st);
    st.g2_estimate = est.g2;
    st.g2_se = est.se;
  } catch (const SimulationError&) {
  }
  return st;
}

G2Estimate estimate_g2(const EnsembleStats& st) {
  if (st.batches.size() < 10) {
    throw SimulationError("g2 estimate needs at least 10 batches, have " +
                          std::to_string(st.batches.size()));
  }
  const double I = st.mean_n.real();
  const double X = st.mean_n2.real();
  if (!(std::abs(I) > st.se_n)) {
    throw SimulationError("g2 undefined: <a+ a> is within one standard error of zero");
  }
  double kept = 0.0;
  for (const auto& b : st.batches) kept += static_cast<double>(b.kept);
  G2Estimate est;
  est.g2 = X / (I * I);
  est.se = batch_se(st.batches, kept, [&](const BatchMoments& b) {
    return (b.n2.real() - X) / (I * I) - 2.0 * X * (b.n.real() - I) / (I * I * I);
  });
  est.imag_n = st.mean_n.imag() / I;
  est.imag_n2 = st.mean_n2.imag() / (I * I);
  return est;
}

EnsembleStats simulate(const ModelParams& p, const IntegratorConfig& c, SystemKind system) {
  c.validate();
  const Window w = make_window(c);
  const double cutoff = c.effective_cutoff(p);
  const SteadyState start = c.initial == InitialCondition::kSteady
                                ? initial_branch(p, c.branch)
                                : SteadyState{};

  const std::int64_t n = c.n_traj;
  const std::size_t n_batches =
      static_cast<std::size_t>(std::min<std::int64_t>(std::max(c.batches, 1), n));
  const std::int64_t n_traces = std::min<std::int64_t>(c.trace_trajectories, n);
  std::vector<TrajectoryMoments> moments(static_cast<std::size_t>(n));
  std::vector<std::vector<Complex>> traces(static_cast<std::size_t>(n_traces));

  // one work item per batch: keeps the work partition independent of thread count
  detail::parallel_for(n_batches, c.threads, [&](std::size_t b) {
    const std::int64_t lo = static_cast<std::int64_t>(b) * n / static_cast<std::int64_t>(n_batches);
    const std::int64_t hi =
        static_cast<std::int64_t>(b + 1) * n / static_cast<std::int64_t>(n_batches);
    for (std::int64_t i = lo; i < hi; ++i) {
      std::vector<Complex>* trace = i < n_traces ? &traces[static_cast<std::size_t>(i)] : nullptr;
      moments[static_cast<std::size_t>(i)] =
          system == SystemKind::kFull ? run_full(p, c, w, cutoff, start, i, trace)
                                      : run_reduced(p, c, w, cutoff, start, i, trace);
    }
  });

  EnsembleStats st = aggregate(moments, static_cast<int>(n_batches));
  st.traces.var_count = system == SystemKind::kFull ? 4 : 2;
  st.traces.step_count = w.steps / c.trace_stride + 1;
  st.traces.sample_interval = c.dt * static_cast<double>(c.trace_stride);
  st.traces.paths = std::move(traces);

  if (st.discard_fraction() > c.max_discard_fraction) {
    throw SimulationError(
        "discarded " + std::to_string(st.discarded_count) + " of " +
        std::to_string(st.trajectory_count) + " trajectories (limit " +
        std::to_string(c.max_discard_fraction) + "), first divergence at t = " +
        std::to_string(st.first_divergence_time.value_or(0.0)));
  }
  return st;
}

}  // namespace optomech
