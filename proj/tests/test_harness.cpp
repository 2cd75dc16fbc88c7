#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "mmrelax/config.hpp"
#include "mmrelax/harness.hpp"
#include "mmrelax/meshdyn.hpp"
#include "mmrelax/monitor.hpp"
#include "mmrelax/systems.hpp"

using namespace mmrelax;

namespace {

constexpr double kPi = std::numbers::pi;

Snapshot synthetic_snapshot(int n, double u_max, double q) {
  // u_i = u_max * cos^(2/q)(pi (xi - 1/2)): exact self-similar shape
  Snapshot s;
  s.t = 0.0;
  s.decade = 0;
  s.u_max = u_max;
  s.u.resize(n + 1);
  s.x.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double xi = static_cast<double>(i) / n;
    const double c = std::cos(kPi * (xi - 0.5));
    s.u[i] = u_max * std::pow(c * c, 1.0 / q);
    s.x[i] = xi;
  }
  return s;
}

}  // namespace

TEST_CASE("self-similarity deviation of the exact profile is zero") {
  ProblemSpec spec;
  spec.nonlinearity = Nonlinearity::power;
  spec.p = 2.0;
  const auto snap = synthetic_snapshot(64, 1e6, spec.p - 1.0);
  CHECK(self_similarity_deviation(snap, spec) ==
        doctest::Approx(0.0).epsilon(1e-12));

  spec.p = 5.0;
  const auto snap5 = synthetic_snapshot(64, 1e6, spec.p - 1.0);
  CHECK(self_similarity_deviation(snap5, spec) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("self-similarity deviation of a flat profile is one") {
  ProblemSpec spec;
  spec.nonlinearity = Nonlinearity::power;
  spec.p = 2.0;
  Snapshot s;
  const int n = 32;
  s.u_max = 7.5;
  s.u.assign(n + 1, 7.5);
  s.x.resize(n + 1);
  for (int i = 0; i <= n; ++i) s.x[i] = static_cast<double>(i) / n;
  CHECK(self_similarity_deviation(s, spec) == doctest::Approx(1.0));
}

TEST_CASE("scenario catalog carries the reference defaults") {
  const auto p2 = make_scenario(ScenarioId::blowup_p2);
  CHECK(p2.config.smoothing.ip == 0);
  CHECK(p2.config.tau.kind == TauPolicy::Kind::adaptive);
  CHECK(p2.config.tau.tau_o == doctest::Approx(1e-8));
  CHECK(p2.config.tau.tau_min == doctest::Approx(1e-8));
  CHECK(p2.config.tau.tau_max == doctest::Approx(1e-1));
  CHECK(p2.problem.p == doctest::Approx(2.0));
  CHECK(p2.problem.initial_data(0.5) == doctest::Approx(20.0));

  const auto p5 = make_scenario(ScenarioId::blowup_p5);
  CHECK(p5.config.smoothing.ip == 4);
  CHECK(p5.config.smoothing.gamma == doctest::Approx(2.0));
  CHECK(p5.problem.p == doctest::Approx(5.0));

  const auto ex = make_scenario(ScenarioId::blowup_exp);
  CHECK(ex.problem.nonlinearity == Nonlinearity::exponential);
  CHECK(ex.problem.initial_data(0.5) == doctest::Approx(5.0));
  CHECK(ex.config.smoothing.ip == 4);

  const auto e1 = make_scenario(ScenarioId::example1);
  CHECK(e1.mesh_only);
  CHECK(e1.problem.monitor_kind == MonitorKind::arclength);
  CHECK(e1.config.n_intervals == 100);
}

TEST_CASE("example1 mesh run relaxes toward a uniform mesh") {
  // shortened horizon keeps the unit suite fast; the acceptance suite runs
  // the full-length version
  Scenario s = make_scenario(ScenarioId::example1);
  s.config.n_intervals = 50;
  s.config.t_end = 5.0;
  s.config.record_trajectory = false;
  RunResult r = run_experiment(s);
  CHECK(r.reason == StopReason::reached_t_end);
  const int n = s.config.n_intervals;
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    worst = std::max(worst,
                     std::abs(r.x_final[i] - static_cast<double>(i) / n));
  }
  CHECK(worst <= 2e-2);
}

TEST_CASE("large tau lags the transient; small tau tracks it") {
  // max |E_i| over the first 0.01 time units, tau = 1e-1 vs 1e-5
  auto defect_peak = [](double tau) {
    Scenario s = make_scenario(ScenarioId::example1);
    s.config.n_intervals = 50;
    s.config.t_end = 0.01;
    s.config.tau = TauPolicy::fixed_value(tau);
    s.config.record_trajectory = false;
    PrescribedSolution sol = PrescribedSolution::make(PrescribedId::example1);
    double peak = 0.0;
    MeshOnlySystem probe(sol, s.problem, s.config);
    // reuse the run; recompute the defect at each accepted state
    RunResult r = run_experiment(s);
    // final state only would hide the transient; walk the tau history times
    // via a fresh short integration with an observer instead
    (void)probe;
    // recompute defect along the recorded trajectory
    Scenario s2 = s;
    s2.config.record_trajectory = true;
    RunResult r2 = run_experiment(s2);
    for (const auto& [t, x] : r2.trajectory) {
      MeshState mesh;
      mesh.nodes = x;
      std::vector<double> u(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        u[i] = prescribed_value(sol, x[i], t);
      }
      std::vector<double> raw;
      REQUIRE(monitor_values(s.problem, u, mesh, raw));
      auto field = MonitorField::build(std::move(raw), s.config.smoothing,
                                       s.config.monitor_floor);
      peak = std::max(peak, defect(mesh, field).max_abs());
    }
    return peak;
  };
  const double lag_big = defect_peak(1e-1);
  const double lag_small = defect_peak(1e-5);
  CHECK(lag_big >= 10.0 * lag_small);
}

TEST_CASE("refinement study is deterministic across duplicate rows") {
  Scenario s = make_scenario(ScenarioId::example1);
  s.config.n_intervals = 40;
  s.config.t_end = 0.5;
  auto rows = refinement_study(s, {40, 40});
  REQUIRE(rows.size() == 2);
  CHECK(!rows[0].failed);
  CHECK(rows[0].t_star == rows[1].t_star);
  CHECK(rows[0].u_max_final == rows[1].u_max_final);
  CHECK(rows[0].n_accepted == rows[1].n_accepted);
}

TEST_CASE("export round-trips the config and row counts") {
  Scenario s = make_scenario(ScenarioId::example1);
  s.config.n_intervals = 40;
  s.config.t_end = 0.2;
  RunResult r = run_experiment(s);
  const std::string dir = "test_export_out";
  export_result(r, dir);

  // summary.json config echo re-parses to the identical config
  std::ifstream in(dir + "/summary.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  std::map<std::string, std::string> echoed;
  for (auto& [key, value] : j["config"].items()) {
    echoed[key] = value.get<std::string>();
  }
  RunConfig parsed = config_from_map(echoed);
  CHECK(config_to_map(parsed) == config_to_map(r.config));

  // trajectory rows = accepted steps + 1
  std::ifstream traj(dir + "/trajectories.csv");
  REQUIRE(traj.good());
  long lines = 0;
  std::string line;
  while (std::getline(traj, line)) ++lines;
  CHECK(lines == r.n_accepted + 2);  // header + initial row + steps

  std::filesystem::remove_all(dir);
}

TEST_CASE("config map round trip") {
  RunConfig c;
  c.n_intervals = 123;
  c.variant = MmpdeVariant::mmpde4;
  c.tau = TauPolicy::adaptive(3e-7, 1e-9, 0.5);
  c.smoothing = {1.5, 3};
  c.rtol = 2.5e-9;
  c.snapshot_decades = {1, 5, 9};
  c.min_step = 1e-300;
  const auto m = config_to_map(c);
  const RunConfig back = config_from_map(m);
  CHECK(config_to_map(back) == m);
}

TEST_CASE("tau grammar") {
  auto fixed = tau_from_string("fixed:1e-5");
  CHECK(fixed.kind == TauPolicy::Kind::fixed);
  CHECK(fixed.tau == doctest::Approx(1e-5));

  auto adaptive = tau_from_string("adaptive");
  CHECK(adaptive.kind == TauPolicy::Kind::adaptive);
  CHECK(adaptive.tau_o == doctest::Approx(1e-8));

  auto custom = tau_from_string("adaptive:1e-7,1e-9,0.2");
  CHECK(custom.tau_o == doctest::Approx(1e-7));
  CHECK(custom.tau_min == doctest::Approx(1e-9));
  CHECK(custom.tau_max == doctest::Approx(0.2));

  CHECK_THROWS_AS(tau_from_string("sometimes:1"), std::invalid_argument);
  CHECK_THROWS_AS(tau_from_string("adaptive:1,2"), std::invalid_argument);
}
