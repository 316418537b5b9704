#include <doctest.h>

#include "optomech/correlation.hpp"
#include "optomech/sde.hpp"
#include "support.hpp"

using namespace optomech;
using testing_support::Gen;

namespace {

IntegratorConfig quick(double dt, double t_end, std::int64_t n_traj, std::uint64_t seed = 3) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.n_traj = n_traj;
  c.seed = seed;
  return c;
}

TrajectoryMoments coherent(Complex a) {
  TrajectoryMoments m;
  m.alpha = a;
  m.n = std::norm(a);
  m.n2 = std::norm(a) * std::norm(a);
  return m;
}

}  // namespace

TEST_CASE("full drift") {
  const auto p0 = ModelParams::make(1, 2, 0.5, 0.1, 3, {});
  for (Complex d : full_drift({}, p0)) CHECK(d == Complex(0, 0));
  const auto p = ModelParams::make(1, 2, 0.5, 0.1, 3, {0.3, -0.4});
  const auto d = full_drift({}, p);
  CHECK(d[0] == Complex(0.3, -0.4));
  CHECK(d[1] == Complex(0.3, 0.4));
  CHECK(d[2] == Complex(0, 0));
  CHECK(d[3] == Complex(0, 0));

  // slaved mirror amplitudes zero the mirror equations exactly
  Gen gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = gen.params();
    for (const auto& s : cavity_steady_states(q)) {
      const FullState st{s.alpha0, s.alpha0_plus(), s.mirror_alpha2, s.mirror_alpha2_plus};
      const auto f = full_drift(st, q);
      const double scale = q.g() * s.n + 1e-300;
      CHECK(std::abs(f[2]) <= 1e-13 * scale);
      CHECK(std::abs(f[3]) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("full noise factor reproduces the diffusion matrix") {
  const auto p = ModelParams::make(1, 2, 1, 0.1, 3, {});
  CHECK(full_noise_factor({}, p).norm() == 0.0);
  const FullState one{1, 1, 0, 0};
  const Mat4 B = full_noise_factor(one, p);
  const Mat4 D = B * B.transpose();
  CHECK(std::abs(D(0, 2) - kI) < 1e-15);
  CHECK(std::abs(D(2, 0) - kI) < 1e-15);
  CHECK(std::abs(D(0, 0)) < 1e-15);
  CHECK(std::abs(D(2, 2)) < 1e-15);
  const Complex r = std::sqrt(kI / 2.0);
  CHECK(std::abs(B(0, 0) - r) < 1e-15);
  CHECK(std::abs(B(0, 1) - r * kI) < 1e-15);
  CHECK(std::abs(B(2, 1) + r * kI) < 1e-15);

  Gen gen(8);
  for (int trial = 0; trial < 500; ++trial) {
    const auto q = gen.params();
    const FullState s{gen.complex(10), gen.complex(10), gen.complex(10), gen.complex(10)};
    const Mat4 F = full_noise_factor(s, q);
    const Mat4 D4 = full_diffusion(s, q);
    CHECK((F * F.transpose() - D4).norm() <= 1e-12 * (1 + D4.norm()));
    int nonzero = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) nonzero += D4(i, j) != Complex(0, 0);
    CHECK(nonzero == 4);
  }
}

TEST_CASE("complex symmetric factor, including defective matrices") {
  Gen gen(12);
  for (int trial = 0; trial < 2000; ++trial) {
    Mat2 S;
    const Complex off = gen.complex(3);
    S << gen.complex(3), off, off, gen.complex(3);
    if (trial % 4 == 1) S(1, 1) = -S(0, 0) - 2.0 * std::sqrt(S.determinant());
    if (trial % 4 == 2) S << 0, off, off, 0;
    if (trial % 4 == 3) {
      // nilpotent: S = v v^T with v^T v = 0
      const Complex v0 = gen.complex(2);
      const Complex v1 = kI * v0;
      S << v0 * v0, v0 * v1, v0 * v1, v1 * v1;
    }
    const Mat2 B = complex_symmetric_factor(S);
    CHECK((B * B.transpose() - S).norm() <= 1e-12 * (1 + S.norm()));
  }
  CHECK(complex_symmetric_factor(Mat2::Zero()).norm() == 0.0);
}

TEST_CASE("reduced drift and noise") {
  const auto pg0 = ModelParams::make(1, 10, 0, 0.1, 10, {1, 0});
  const auto z = reduced_drift_and_noise({Complex(0.3, 0.1), Complex(0.3, -0.1)}, pg0);
  CHECK(z.noise.norm() == 0.0);
  CHECK(z.diffusion.norm() == 0.0);

  Gen gen(14);
  for (int trial = 0; trial < 500; ++trial) {
    const auto q = gen.params();
    const Complex a = gen.complex(5);
    const auto r = reduced_drift_and_noise({a, std::conj(a)}, q);
    CHECK(std::abs(r.diffusion(1, 1) - std::conj(r.diffusion(0, 0))) <=
          1e-14 * (1 + r.diffusion.norm()));
    CHECK(r.diffusion(0, 1).imag() == doctest::Approx(0).scale(1e-14 * (1 + r.diffusion.norm())));
    CHECK(r.diffusion(0, 1).real() >= 0);
    CHECK((r.noise * r.noise.transpose() - r.diffusion).norm() <= 1e-12 * (1 + r.diffusion.norm()));
    CHECK(std::abs(r.drift[0] - reduced_drift(a, std::conj(a), q)) < 1e-14 * (1 + std::abs(r.drift[0])));
    // independent plus variable
    const Complex ap = gen.complex(5);
    const auto u = reduced_drift_and_noise({a, ap}, q);
    CHECK((u.noise * u.noise.transpose() - u.diffusion).norm() <= 1e-12 * (1 + u.diffusion.norm()));
  }
}

TEST_CASE("integrator config validation") {
  const auto p = ModelParams::make(1, 10, 0.3, 0.1, 10, {1, 0});
  IntegratorConfig c;
  c.dt = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegratorConfig{};
  c.t_end = c.dt / 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegratorConfig{};
  c.n_traj = 0;
  CHECK_THROWS_AS(simulate(p, c, SystemKind::kReduced), ConfigError);
  c = IntegratorConfig{};
  c.max_discard_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(IntegratorConfig{}.effective_cutoff(p) == doctest::Approx(1e7));
  CHECK_THROWS_AS(initial_branch(p.with_field("drive_re", 3), 7), ConfigError);
  CHECK(initial_branch(p.with_field("drive_re", 3), -1).branch_id == 0);
  CHECK(initial_branch(p.with_field("drive_re", 3), 2).branch_id == 2);
  CHECK(parse_system_kind("full") == SystemKind::kFull);
  CHECK_THROWS_AS(parse_system_kind("half"), ConfigError);
}

TEST_CASE("estimator on synthetic ensembles") {
  std::vector<TrajectoryMoments> fixed(40, coherent(Complex(0.6, 0.8)));
  const auto st = aggregate(fixed, 20);
  const auto est = estimate_g2(st);
  CHECK(est.g2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(est.se == doctest::Approx(0.0).scale(1e-15));

  std::vector<TrajectoryMoments> mix;
  for (int i = 0; i < 40; ++i) mix.push_back(coherent(i % 2 ? Complex(1.3, 0) : Complex(0, 0)));
  CHECK(estimate_g2(aggregate(mix, 20)).g2 == doctest::Approx(2.0));

  std::vector<TrajectoryMoments> vac(40, coherent(0));
  CHECK_THROWS_AS(estimate_g2(aggregate(vac, 20)), SimulationError);
  CHECK_FALSE(aggregate(vac, 20).g2_estimate.has_value());
  CHECK_THROWS_AS(estimate_g2(aggregate(fixed, 5)), SimulationError);

  // discarded trajectories are counted, not averaged
  std::vector<TrajectoryMoments> some = fixed;
  some[3].diverged = true;
  some[3].divergence_time = 2.5;
  some[3].n = 1e9;
  const auto sd = aggregate(some, 20);
  CHECK(sd.discarded_count == 1);
  CHECK(*sd.first_divergence_time == 2.5);
  CHECK(sd.mean_n.real() == doctest::Approx(1.0));
}

TEST_CASE("linear cavity: coherent steady state and unit g2") {
  const Complex E(0.4, 0.3);
  const auto p = ModelParams::make(1.5, 10, 0, 0.5, 10, E);
  auto c = quick(1e-3, 80, 200);
  c.initial = InitialCondition::kVacuum;
  for (auto sys : {SystemKind::kReduced, SystemKind::kFull}) {
    const auto st = simulate(p, c, sys);
    const Complex expect = E / Complex(0.5, 1.5);
    CHECK(std::abs(st.mean_alpha - expect) <= 1e-6 * std::abs(expect));
    CHECK(std::abs(*st.g2_estimate - 1) <= 3 * *st.g2_se + 1e-6);
  }
}

TEST_CASE("vacuum stays vacuum") {
  const auto p = ModelParams::make(1, 10, 0.8, 0.1, 10, {});
  for (auto sys : {SystemKind::kReduced, SystemKind::kFull}) {
    const auto st = simulate(p, quick(1e-3, 5, 100), sys);
    CHECK(std::abs(st.mean_alpha) == 0.0);
    CHECK(std::abs(st.mean_n) == 0.0);
    CHECK(std::abs(st.mean_n2) == 0.0);
  }
}

TEST_CASE("seeded runs are reproducible and thread-count independent") {
  const auto p = ModelParams::make(1, 10, 0.3, 0.1, 10, {0.4, 0});
  auto c = quick(1e-3, 4, 300, 42);
  c.threads = 1;
  for (auto sys : {SystemKind::kReduced, SystemKind::kFull}) {
    const auto a = simulate(p, c, sys);
    auto c4 = c;
    c4.threads = 4;
    const auto b = simulate(p, c4, sys);
    CHECK(a.mean_n == b.mean_n);
    CHECK(a.mean_n2 == b.mean_n2);
    CHECK(a.se_n == b.se_n);
    REQUIRE(a.batches.size() == b.batches.size());
    for (std::size_t i = 0; i < a.batches.size(); ++i) CHECK(a.batches[i].n == b.batches[i].n);
    auto other = c;
    other.seed = 43;
    CHECK(simulate(p, other, sys).mean_n != a.mean_n);
  }
}

TEST_CASE("trajectory streams do not depend on the ensemble size") {
  const auto p = ModelParams::make(1, 10, 0.3, 0.1, 10, {0.4, 0});
  auto c = quick(1e-3, 2, 3, 9);
  c.batches = 1;
  c.trace_trajectories = 3;
  const auto small = simulate(p, c, SystemKind::kReduced);
  c.n_traj = 50;
  c.batches = 10;
  const auto large = simulate(p, c, SystemKind::kReduced);
  for (int i = 0; i < 3; ++i) CHECK(small.traces.paths[i] == large.traces.paths[i]);
}

TEST_CASE("debug reconstruction checks pass along trajectories") {
  const auto p = ModelParams::make(1, 10, 0.3, 0.1, 10, {0.8, 0.2});
  auto c = quick(1e-3, 1, 20);
  c.debug_checks = true;
  CHECK_NOTHROW(simulate(p, c, SystemKind::kReduced));
  CHECK_NOTHROW(simulate(p, c, SystemKind::kFull));
}

TEST_CASE("divergence policy") {
  const auto p = ModelParams::make(1, 10, 0.3, 0.1, 10, {0.8, 0});
  auto c = quick(1e-3, 2, 40);
  c.divergence_cutoff = 1e-3;  // every trajectory escapes at once
  CHECK_THROWS_AS(simulate(p, c, SystemKind::kReduced), SimulationError);
  c.max_discard_fraction = 0.99;
  c.divergence_cutoff = 0.3;
  c.initial = InitialCondition::kVacuum;
  c.trace_trajectories = 2;
  try {
    simulate(p, c, SystemKind::kReduced);
    FAIL("expected a discard breach");
  } catch (const SimulationError& e) {
    CHECK(std::string(e.what()).find("first divergence") != std::string::npos);
  }
}

TEST_CASE("noiseless full dynamics approach the reduced dynamics as the mirror gets faster") {
  // gamma1 = 1, omega_m = gamma2 and g chosen so G = 0.2 stays fixed
  std::vector<double> gaps;
  for (double ratio : {10.0, 100.0, 1000.0}) {
    const double gamma2 = ratio;
    const double g = std::sqrt(0.2 * gamma2);
    const auto p = ModelParams::make(1, gamma2, g, 1, gamma2, {1.5, 0});
    IntegratorConfig c;
    c.noise = false;
    c.initial = InitialCondition::kVacuum;
    c.dt = 1e-2 / gamma2;
    c.t_end = 5;
    c.n_traj = 1;
    c.batches = 1;
    c.trace_trajectories = 1;
    c.trace_stride = static_cast<std::int64_t>(std::llround(1e-2 / c.dt));
    const auto full = simulate(p, c, SystemKind::kFull);
    const auto red = simulate(p, c, SystemKind::kReduced);
    REQUIRE(full.traces.step_count == red.traces.step_count);
    double gap = 0;
    for (std::int64_t k = 0; k < full.traces.step_count; ++k) {
      gap = std::max(gap, std::abs(full.traces.paths[0][4 * k] - red.traces.paths[0][2 * k]));
    }
    gaps.push_back(gap);
  }
  MESSAGE("sup-norm gaps: " << gaps[0] << " " << gaps[1] << " " << gaps[2]);
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("halving dt leaves g2 unchanged within the statistical error") {
  const auto p = ModelParams::make(1, 100, 1.5, 1, 10, {0.316, 0});
  auto c = quick(4e-4, 5, 2000, 5);
  const auto a = simulate(p, c, SystemKind::kReduced);
  c.dt /= 2;
  const auto b = simulate(p, c, SystemKind::kReduced);
  const double se = std::hypot(*a.g2_se, *b.g2_se);
  MESSAGE("g2(dt) = " << *a.g2_estimate << ", g2(dt/2) = " << *b.g2_estimate << ", se " << se);
  CHECK(std::abs(*a.g2_estimate - *b.g2_estimate) <= 3 * se);
}
