#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mmrelax/linalg.hpp"
#include "mmrelax/meshdyn.hpp"

using namespace mmrelax;

namespace {

MonitorField constant_field(int n_nodes, double value) {
  SmoothingParams none;
  return MonitorField::build(std::vector<double>(n_nodes, value), none, 1e-10);
}

}  // namespace

TEST_CASE("defect vanishes for constant monitor on a uniform mesh") {
  const auto mesh = MeshState::uniform(4);
  const auto field = constant_field(5, 1.0);
  const auto d = defect(mesh, field);
  REQUIRE(d.values.size() == 3);
  for (double v : d.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("defect hand-evaluated values") {
  MeshState mesh;
  mesh.nodes = {0.0, 0.1, 0.5, 1.0};
  const auto field = constant_field(4, 1.0);
  const auto d = defect(mesh, field);
  REQUIRE(d.values.size() == 2);
  CHECK(d.values[0] == doctest::Approx(0.3));
  CHECK(d.values[1] == doctest::Approx(0.1));
}

TEST_CASE("defect vanishes on an equidistributing mesh") {
  // constant monitor 2 equidistributes exactly on the uniform mesh
  const auto mesh = MeshState::uniform(4);
  const auto field = constant_field(5, 2.0);
  const auto d = defect(mesh, field);
  for (double v : d.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("mmpde6 single-row closed form") {
  // N=2, x=[0, 0.25, 1], M=1, tau=0.5: residual = -2v + E/tau with E = 0.5,
  // so the root is v = 0.5
  std::vector<double> x = {0.0, 0.25, 1.0};
  const auto field = constant_field(3, 1.0);
  std::vector<double> out(1);
  for (double v : {0.0, 0.25, 0.5, 1.0}) {
    std::vector<double> xdot = {0.0, v, 0.0};
    mmpde6_rows(x, xdot, field, 0.5, out);
    CHECK(out[0] == doctest::Approx(-2.0 * v + 1.0));
  }
}

TEST_CASE("mmpde4 equals mmpde6 for constant unit monitor") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int n = 10;
  auto mesh = MeshState::uniform(n);
  for (int i = 1; i < n; ++i) mesh.nodes[i] += 0.02 * dist(rng);
  const auto field = constant_field(n + 1, 1.0);
  std::vector<double> xdot(n + 1);
  for (auto& v : xdot) v = dist(rng);
  std::vector<double> r4(n - 1), r6(n - 1);
  mmpde4_rows(mesh.nodes, xdot, field, 0.3, r4);
  mmpde6_rows(mesh.nodes, xdot, field, 0.3, r6);
  for (int i = 0; i < n - 1; ++i) {
    CHECK(r4[i] == doctest::Approx(r6[i]).epsilon(1e-14));
  }
}

TEST_CASE("mmpde4 single-row independent evaluation") {
  // same N=2 instance, M=2 everywhere: flux term 2(-2v), E = 2*0.75-2*0.25=1,
  // tau=0.5 -> residual = -4v + 2, root at v = 0.5
  std::vector<double> x = {0.0, 0.25, 1.0};
  const auto field = constant_field(3, 2.0);
  std::vector<double> out(1);
  std::vector<double> xdot = {0.0, 0.5, 0.0};
  mmpde4_rows(x, xdot, field, 0.5, out);
  CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-14));
  xdot[1] = 0.25;
  mmpde4_rows(x, xdot, field, 0.5, out);
  CHECK(out[0] == doctest::Approx(1.0));
}

TEST_CASE("fixed point: zero defect and zero velocity give zero residual") {
  const int n = 8;
  const auto mesh = MeshState::uniform(n);
  const auto field = constant_field(n + 1, 3.2);
  std::vector<double> xdot(n + 1, 0.0), out(n - 1);
  mmpde6_rows(mesh.nodes, xdot, field, 1e-3, out);
  for (double v : out) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  mmpde4_rows(mesh.nodes, xdot, field, 1e-3, out);
  for (double v : out) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("joint monitor/tau rescaling leaves mmpde6 residual unchanged") {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> dist(0.2, 2.0);
  const int n = 12;
  auto mesh = MeshState::uniform(n);
  for (int i = 1; i < n; ++i) mesh.nodes[i] += 0.01 * (dist(rng) - 1.1);
  std::vector<double> raw(n + 1), xdot(n + 1);
  for (auto& v : raw) v = dist(rng);
  for (auto& v : xdot) v = 0.3 * (dist(rng) - 1.1);
  SmoothingParams smoothing{2.0, 2};
  const double tau = 0.05, c = 7.5;

  auto field = MonitorField::build(raw, smoothing, 1e-10);
  std::vector<double> scaled = raw;
  for (auto& v : scaled) v *= c;
  auto field_scaled = MonitorField::build(scaled, smoothing, 1e-10);

  std::vector<double> r1(n - 1), r2(n - 1);
  mmpde6_rows(mesh.nodes, xdot, field, tau, r1);
  mmpde6_rows(mesh.nodes, xdot, field_scaled, c * tau, r2);
  for (int i = 0; i < n - 1; ++i) {
    CHECK(r2[i] == doctest::Approx(r1[i]).epsilon(1e-12));
  }
}

TEST_CASE("tau_eval clamping") {
  auto policy = TauPolicy::adaptive(1e-8, 1e-8, 1e-1);
  SmoothingParams none;
  auto with_max = [&](double m) {
    return MonitorField::build({1e-10, m, 1e-10}, none, 1e-10);
  };
  CHECK(tau_eval(policy, with_max(1e4)) == doctest::Approx(1e-4));
  CHECK(tau_eval(policy, with_max(1e10)) == doctest::Approx(1e-1));
  CHECK(tau_eval(policy, with_max(1.0)) == doctest::Approx(1e-8));

  auto fixed = TauPolicy::fixed_value(3e-4);
  CHECK(tau_eval(fixed, with_max(1e10)) == doctest::Approx(3e-4));
}

TEST_CASE("tau_eval always lands inside the clamp interval") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> expo(-12.0, 12.0);
  auto policy = TauPolicy::adaptive(1e-8, 1e-8, 1e-1);
  SmoothingParams none;
  for (int trial = 0; trial < 100; ++trial) {
    const double m = std::pow(10.0, expo(rng));
    auto field = MonitorField::build({m}, none, 1e-10);
    const double tau = tau_eval(policy, field);
    CHECK(tau >= policy.tau_min);
    CHECK(tau <= policy.tau_max);
  }
}

TEST_CASE("equidistribute_initial: constant monitor gives a uniform mesh") {
  ProblemSpec spec;
  spec.monitor_kind = MonitorKind::arclength;
  RunConfig config;
  config.n_intervals = 16;
  config.snapshot_decades = {};
  const auto mesh = equidistribute_initial([](double) { return 0.4; }, spec,
                                           config);
  REQUIRE(mesh.nodes.size() == 17);
  for (int i = 0; i <= 16; ++i) {
    CHECK(mesh.nodes[i] == doctest::Approx(i / 16.0).epsilon(1e-12));
  }
}

TEST_CASE("equidistribute_initial: symmetric data gives a symmetric mesh") {
  ProblemSpec spec;
  spec.nonlinearity = Nonlinearity::power;
  spec.p = 2.0;
  spec.monitor_kind = MonitorKind::power;
  RunConfig config;
  config.n_intervals = 20;
  config.snapshot_decades = {};
  const auto mesh = equidistribute_initial(
      [](double x) { return 20.0 * std::sin(std::numbers::pi * x); }, spec,
      config);
  REQUIRE(!validate_mesh(mesh));
  for (int i = 0; i <= 20; ++i) {
    CHECK(mesh.nodes[i] + mesh.nodes[20 - i] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("equidistribute_initial matches a dense bisection oracle") {
  // u0 = 20 sin(pi x) with M = |u| has the closed-form cumulative
  // (20/pi)(1 - cos(pi x)); the oracle inverts a 10^6-point table by
  // bisection.  For N=4 the exact nodes are {0, 1/3, 1/2, 2/3, 1}.
  ProblemSpec spec;
  spec.nonlinearity = Nonlinearity::power;
  spec.p = 2.0;
  spec.monitor_kind = MonitorKind::power;
  RunConfig config;
  config.n_intervals = 4;
  config.snapshot_decades = {};

  const int n = config.n_intervals;
  const int fine = 1000000;
  std::vector<double> cumulative(fine + 1, 0.0);
  const double h = 1.0 / fine;
  auto m_of = [](double x) {
    return std::abs(20.0 * std::sin(std::numbers::pi * x));
  };
  for (int i = 1; i <= fine; ++i) {
    cumulative[i] = cumulative[i - 1] +
                    0.5 * (m_of((i - 1) * h) + m_of(i * h)) * h;
  }
  std::vector<double> oracle(n + 1);
  oracle[0] = 0.0;
  oracle[n] = 1.0;
  for (int i = 1; i < n; ++i) {
    const double target = cumulative[fine] * i / n;
    // bisection on the table index
    int lo = 0, hi = fine;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (cumulative[mid] < target ? lo : hi) = mid;
    }
    const double frac =
        (target - cumulative[lo]) / (cumulative[hi] - cumulative[lo]);
    oracle[i] = (lo + frac) * h;
  }
  // the oracle itself reproduces the analytic inverse
  CHECK(oracle[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(oracle[2] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(oracle[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

  const auto mesh = equidistribute_initial(
      [](double x) { return 20.0 * std::sin(std::numbers::pi * x); }, spec,
      config);
  // the operation samples on 10N+1 points, so its trapezoid error bounds the
  // achievable agreement (about h_fine^2 in the cumulative)
  for (int i = 0; i <= n; ++i) {
    CHECK(mesh.nodes[i] == doctest::Approx(oracle[i]).epsilon(0).scale(1).margin(5e-4));
  }
}

TEST_CASE("equidistribute_initial: flat-at-floor monitor falls back to uniform") {
  ProblemSpec spec;
  spec.nonlinearity = Nonlinearity::power;
  spec.p = 2.0;
  spec.monitor_kind = MonitorKind::power;
  RunConfig config;
  config.n_intervals = 10;
  config.snapshot_decades = {};
  const auto mesh = equidistribute_initial([](double) { return 0.0; }, spec,
                                           config);
  for (int i = 0; i <= 10; ++i) {
    CHECK(mesh.nodes[i] == doctest::Approx(i / 10.0));
  }
}

TEST_CASE("mesh_timescale") {
  SmoothingParams none;
  auto field = MonitorField::build({1.0, 100.0, 1.0}, none, 1e-10);
  CHECK(mesh_timescale(MmpdeVariant::mmpde4, 1e-3, field) ==
        doctest::Approx(1e-3));
  CHECK(mesh_timescale(MmpdeVariant::mmpde6, 1e-3, field) ==
        doctest::Approx(1e-5));
}

TEST_CASE("mmpde6 timescale shrinks with the monitor maximum") {
  // with fixed tau, max M ~ 1/s makes the timescale ~ s
  SmoothingParams none;
  const double tau = 1e-3;
  for (double s : {1e-1, 1e-2, 1e-3}) {
    auto field = MonitorField::build({1.0, 1.0 / s, 1.0}, none, 1e-10);
    CHECK(mesh_timescale(MmpdeVariant::mmpde6, tau, field) ==
          doctest::Approx(tau * s).epsilon(1e-12));
  }
}

TEST_CASE("symmetric monitor and mesh force antisymmetric velocities") {
  // solve the interior mmpde6 rows for xdot on a small symmetric instance
  const int n = 6;
  MeshState mesh;
  mesh.nodes = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  std::vector<double> raw = {1.0, 2.0, 4.0, 5.0, 4.0, 2.0, 1.0};
  SmoothingParams none;
  auto field = MonitorField::build(raw, none, 1e-10);
  const double tau = 0.01;

  // linear system: tridiagonal Laplacian * xdot_interior = -E/tau with
  // xdot_0 = xdot_N = 0
  const auto d = defect(mesh, field);
  DenseLU lu;
  lu.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    lu.at(i, i) = -2.0;
    if (i > 0) lu.at(i, i - 1) = 1.0;
    if (i + 1 < n - 1) lu.at(i, i + 1) = 1.0;
  }
  REQUIRE(lu.factor());
  std::vector<double> xdot(n - 1);
  for (int i = 0; i < n - 1; ++i) xdot[i] = -d.values[i] / tau;
  lu.solve(xdot);
  for (int i = 0; i < n - 1; ++i) {
    CHECK(xdot[i] == doctest::Approx(-xdot[n - 2 - i]).epsilon(1e-10));
  }
}
