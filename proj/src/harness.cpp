#include "mmrelax/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "mmrelax/config.hpp"
#include "mmrelax/meshdyn.hpp"
#include "mmrelax/monitor.hpp"
#include "mmrelax/physics.hpp"
#include "mmrelax/systems.hpp"

namespace mmrelax {

namespace {

constexpr double kPi = std::numbers::pi;

const char* reason_string(StopReason reason) {
  switch (reason) {
    case StopReason::reached_t_end: return "reached_t_end";
    case StopReason::failure_cascade: return "failure_cascade";
    case StopReason::step_limit: return "step_limit";
    case StopReason::init_failure: return "init_failure";
  }
  return "unknown";
}

double compute_tau(const ProblemSpec& problem, const RunConfig& config,
                   std::span<const double> u, const MeshState& mesh) {
  std::vector<double> raw;
  if (!monitor_values(problem, u, mesh, raw)) return -1.0;
  MonitorField field =
      MonitorField::build(std::move(raw), config.smoothing,
                          config.monitor_floor);
  return tau_eval(config.tau, field);
}

}  // namespace

const char* to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::example1: return "example1";
    case ScenarioId::example2: return "example2";
    case ScenarioId::example3: return "example3";
    case ScenarioId::blowup_p2: return "blowup_p2";
    case ScenarioId::blowup_p5: return "blowup_p5";
    case ScenarioId::blowup_exp: return "blowup_exp";
  }
  return "unknown";
}

std::optional<ScenarioId> scenario_from_string(const std::string& name) {
  for (ScenarioId id :
       {ScenarioId::example1, ScenarioId::example2, ScenarioId::example3,
        ScenarioId::blowup_p2, ScenarioId::blowup_p5,
        ScenarioId::blowup_exp}) {
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

Scenario make_scenario(ScenarioId id) {
  Scenario s;
  s.id = id;
  RunConfig& c = s.config;
  ProblemSpec& p = s.problem;
  c.smoothing.gamma = 2.0;

  switch (id) {
    case ScenarioId::example1:
      s.mesh_only = true;
      p.nonlinearity = Nonlinearity::prescribed;
      p.prescribed = PrescribedId::example1;
      p.monitor_kind = MonitorKind::arclength;
      c.n_intervals = 100;
      c.smoothing.ip = 4;
      c.tau = TauPolicy::fixed_value(1e-3);
      c.t_end = 10.0;
      s.description = "decaying sine, mesh relaxes toward uniform";
      break;
    case ScenarioId::example2:
      s.mesh_only = true;
      p.nonlinearity = Nonlinearity::prescribed;
      p.prescribed = PrescribedId::example2;
      p.monitor_kind = MonitorKind::arclength;
      c.n_intervals = 100;
      c.smoothing.ip = 4;
      c.tau = TauPolicy::fixed_value(1e-5);
      c.t_end = 1.0;
      s.description = "two widely separated decay time scales";
      break;
    case ScenarioId::example3:
      s.mesh_only = true;
      p.nonlinearity = Nonlinearity::prescribed;
      p.prescribed = PrescribedId::example3;
      p.monitor_kind = MonitorKind::arclength;
      c.n_intervals = 100;
      c.smoothing.ip = 4;
      c.tau = TauPolicy::fixed_value(1e-3);
      c.t_end = 0.4 - 1e-5;
      s.description = "narrow Gaussian blowing up at t = 0.4";
      break;
    case ScenarioId::blowup_p2:
      p.nonlinearity = Nonlinearity::power;
      p.p = 2.0;
      p.monitor_kind = MonitorKind::power;
      p.initial_data = [](double x) { return 20.0 * std::sin(kPi * x); };
      c.n_intervals = 200;
      c.smoothing.ip = 0;  // no smoothing, keeps the profile self-similar
      c.tau = TauPolicy::adaptive();
      c.t_end = 1.0;
      for (int n = 1; n <= 18; ++n) c.snapshot_decades.push_back(n);
      c.min_step = 1e-300;  // run as deep into blow-up as arithmetic allows
      s.description = "u_t = u_xx + u^2, M = u";
      break;
    case ScenarioId::blowup_p5:
      p.nonlinearity = Nonlinearity::power;
      p.p = 5.0;
      p.monitor_kind = MonitorKind::power;
      p.initial_data = [](double x) { return 20.0 * std::sin(kPi * x); };
      c.n_intervals = 200;
      c.smoothing.ip = 4;
      c.tau = TauPolicy::adaptive();
      c.t_end = 1.0;
      for (int n = 1; n <= 18; ++n) c.snapshot_decades.push_back(n);
      c.min_step = 1e-300;
      s.description = "u_t = u_xx + u^5, M = |u|^4, smoothed mesh";
      break;
    case ScenarioId::blowup_exp:
      p.nonlinearity = Nonlinearity::exponential;
      p.monitor_kind = MonitorKind::exponential;
      p.initial_data = [](double x) { return 5.0 * std::sin(kPi * x); };
      c.n_intervals = 200;
      c.smoothing.ip = 4;
      c.tau = TauPolicy::adaptive();
      c.t_end = 1.0;
      for (int n = 1; n <= 3; ++n) c.snapshot_decades.push_back(n);
      c.min_step = 1e-300;
      s.description = "u_t = u_xx + e^u, M = e^u, smoothed mesh";
      break;
  }

  if (s.mesh_only) {
    PrescribedSolution sol = PrescribedSolution::make(p.prescribed);
    p.initial_data = [sol](double x) { return prescribed_value(sol, x, 0.0); };
  }
  return s;
}

std::vector<Scenario> scenario_catalog() {
  std::vector<Scenario> all;
  for (ScenarioId id :
       {ScenarioId::example1, ScenarioId::example2, ScenarioId::example3,
        ScenarioId::blowup_p2, ScenarioId::blowup_p5,
        ScenarioId::blowup_exp}) {
    all.push_back(make_scenario(id));
  }
  return all;
}

RunResult run_experiment(const Scenario& scenario) {
  validate_config(scenario.config);
  const RunConfig& config = scenario.config;
  const ProblemSpec& problem = scenario.problem;
  const int n = config.n_intervals;

  MeshState mesh0 =
      equidistribute_initial(problem.initial_data, problem, config);

  RunResult result;
  result.scenario = scenario.id;
  result.config = config;
  result.nonlinearity = problem.nonlinearity;
  result.p = problem.p;
  result.mesh_only = scenario.mesh_only;

  IntegratorConfig icfg;
  icfg.rtol = config.rtol;
  icfg.atol = config.atol;
  icfg.max_order = config.max_order;
  icfg.initial_step = config.initial_step;
  icfg.min_step = config.min_step;
  icfg.max_failures = config.max_failures;
  icfg.max_newton_iters = config.max_newton;

  std::unique_ptr<ImplicitSystem> system;
  std::vector<double> y0;
  PrescribedSolution sol = PrescribedSolution::make(problem.prescribed);
  if (scenario.mesh_only) {
    system = std::make_unique<MeshOnlySystem>(sol, problem, config);
    y0 = mesh0.nodes;
  } else {
    std::vector<double> u0(n + 1);
    for (int i = 0; i <= n; ++i) u0[i] = problem.initial_data(mesh0.nodes[i]);
    u0[0] = 0.0;
    u0[n] = 0.0;  // homogeneous boundary values, exactly
    system = std::make_unique<CoupledSystem>(problem, config);
    y0 = pack_state(u0, mesh0);
  }

  // snapshot decades, ascending, first-crossing detection
  std::vector<int> decades = config.snapshot_decades;
  std::sort(decades.begin(), decades.end());
  std::size_t next_decade = 0;
  double u_max_seen = 0.0;

  MeshState mesh_scratch;
  mesh_scratch.nodes.resize(n + 1);

  auto observer = [&](double t, std::span<const double> y,
                      const StepRecord&) {
    std::span<const double> u, x;
    std::vector<double> sampled;
    if (scenario.mesh_only) {
      x = y;
      sampled = static_cast<MeshOnlySystem*>(system.get())->sample(y, t);
      u = sampled;
    } else {
      u = y.subspan(0, n + 1);
      x = y.subspan(n + 1, n + 1);
    }
    const double u_max = *std::max_element(u.begin(), u.end());
    u_max_seen = std::max(u_max_seen, u_max);

    std::copy(x.begin(), x.end(), mesh_scratch.nodes.begin());
    const double tau = compute_tau(problem, config, u, mesh_scratch);
    result.tau_history.emplace_back(t, tau);

    while (next_decade < decades.size() &&
           u_max >= std::pow(10.0, decades[next_decade])) {
      Snapshot snap;
      snap.t = t;
      snap.decade = decades[next_decade];
      snap.u_max = u_max;
      snap.u.assign(u.begin(), u.end());
      snap.x.assign(x.begin(), x.end());
      result.snapshots.push_back(std::move(snap));
      ++next_decade;
    }
    if (config.record_trajectory) {
      result.trajectory.emplace_back(t, std::vector<double>(x.begin(), x.end()));
    }
  };

  if (config.record_trajectory) {
    result.trajectory.emplace_back(0.0, mesh0.nodes);
  }

  const auto wall_start = std::chrono::steady_clock::now();
  IntegrationResult ir =
      integrate(*system, 0.0, y0, config.t_end, icfg, observer);
  const auto wall_end = std::chrono::steady_clock::now();
  result.wall_clock_seconds =
      std::chrono::duration<double>(wall_end - wall_start).count();

  if (ir.reason == StopReason::init_failure) {
    throw std::runtime_error("integrator initialization failed: " +
                             ir.message);
  }

  result.t_end = ir.t_final;
  result.reason = ir.reason;
  result.message = ir.message;
  result.step_history = std::move(ir.steps);
  result.n_residual = ir.n_residual;
  result.n_jacobian = ir.n_jacobian;
  result.n_accepted = ir.n_accepted;
  result.n_failed = ir.n_failed;

  if (scenario.mesh_only) {
    result.x_final = ir.y_final;
    result.u_final =
        static_cast<MeshOnlySystem*>(system.get())->sample(ir.y_final,
                                                           ir.t_final);
    u_max_seen = std::max(
        u_max_seen,
        *std::max_element(result.u_final.begin(), result.u_final.end()));
  } else {
    auto [u, mesh] = unpack_state(ir.y_final);
    result.u_final = std::move(u);
    result.x_final = std::move(mesh.nodes);
  }
  result.u_max_final = u_max_seen;
  return result;
}

double self_similarity_deviation(const Snapshot& snapshot,
                                 const ProblemSpec& spec) {
  const int n = static_cast<int>(snapshot.u.size()) - 1;
  const double u_max = snapshot.u_max;
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double xi = static_cast<double>(i) / n;
    const double c = std::cos(kPi * (xi - 0.5));
    const double reference = c * c;
    double profile;
    if (spec.nonlinearity == Nonlinearity::exponential) {
      profile = std::exp(snapshot.u[i] - u_max);
    } else {
      const double ratio = snapshot.u[i] / u_max;
      const double q = spec.p - 1.0;
      profile = (q == 1.0) ? ratio : std::pow(std::abs(ratio), q);
    }
    worst = std::max(worst, std::abs(profile - reference));
  }
  return worst;
}

std::vector<RefinementRow> refinement_study(const Scenario& base,
                                            const std::vector<int>& n_values) {
  std::vector<RefinementRow> rows;
  for (int n : n_values) {
    Scenario s = base;
    s.config.n_intervals = n;
    s.config.record_trajectory = false;
    RefinementRow row;
    row.n_intervals = n;
    try {
      RunResult r = run_experiment(s);
      row.t_star = r.t_end;
      row.u_max_final = r.u_max_final;
      row.wall_clock_seconds = r.wall_clock_seconds;
      row.n_accepted = r.n_accepted;
      row.failed = false;
    } catch (const std::exception& e) {
      row.t_star = 0.0;
      row.u_max_final = 0.0;
      row.wall_clock_seconds = 0.0;
      row.n_accepted = 0;
      row.failed = true;
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CompareRow> compare_study(const Scenario& base,
                                      const std::vector<int>& n_values,
                                      double fixed_tau) {
  std::vector<CompareRow> rows;
  for (int n : n_values) {
    Scenario fixed = base;
    fixed.config.n_intervals = n;
    fixed.config.tau = TauPolicy::fixed_value(fixed_tau);
    Scenario adaptive = base;
    adaptive.config.n_intervals = n;
    if (adaptive.config.tau.kind != TauPolicy::Kind::adaptive) {
      adaptive.config.tau = TauPolicy::adaptive();
    }
    // sequential on purpose: the wall-clock ratio is only meaningful when
    // both runs share the host uncontended
    auto fixed_rows = refinement_study(fixed, {n});
    auto adaptive_rows = refinement_study(adaptive, {n});
    CompareRow row;
    row.n_intervals = n;
    row.fixed = fixed_rows.front();
    row.adaptive = adaptive_rows.front();
    row.wall_clock_ratio =
        (row.adaptive.wall_clock_seconds > 0.0)
            ? row.fixed.wall_clock_seconds / row.adaptive.wall_clock_seconds
            : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ============================================================================
// Export
// ============================================================================

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) {
      throw std::runtime_error("cannot open for writing: " + path.string());
    }
  }
  void field(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
  }
  void field(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    field(std::string(buf));
  }
  void field(long v) { field(std::to_string(v)); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  void close() {
    out_.close();
    if (!out_) {
      throw std::runtime_error("write failed: " + path_.string());
    }
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace

void export_result(const RunResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + out_dir +
                             ": " + ec.message());
  }
  const fs::path dir(out_dir);
  const double t_star = result.t_end;
  const int n = static_cast<int>(result.x_final.size()) - 1;

  {
    CsvWriter csv(dir / "trajectories.csv");
    csv.field("t");
    csv.field("t_star_minus_t");
    for (int i = 0; i <= n; ++i) csv.field("x_" + std::to_string(i));
    csv.end_row();
    for (const auto& [t, x] : result.trajectory) {
      csv.field(t);
      csv.field(t_star - t);
      for (double xi : x) csv.field(xi);
      csv.end_row();
    }
    csv.close();
  }

  {
    CsvWriter csv(dir / "snapshots.csv");
    csv.field("decade");
    csv.field("t");
    csv.field("u_max");
    csv.field("xi");
    csv.field("x");
    csv.field("u");
    csv.field("profile");
    csv.end_row();
    // profile is the self-similar transform: (u/u_max)^(p-1), or
    // e^(u - u_max) for the exponential nonlinearity
    const bool exponential = result.nonlinearity == Nonlinearity::exponential;
    const double q = result.p - 1.0;
    for (const auto& snap : result.snapshots) {
      const int m = static_cast<int>(snap.u.size()) - 1;
      for (int i = 0; i <= m; ++i) {
        csv.field(static_cast<long>(snap.decade));
        csv.field(snap.t);
        csv.field(snap.u_max);
        csv.field(static_cast<double>(i) / m);
        csv.field(snap.x[i]);
        csv.field(snap.u[i]);
        double profile;
        if (exponential) {
          profile = std::exp(snap.u[i] - snap.u_max);
        } else {
          const double ratio = snap.u[i] / snap.u_max;
          profile = (q == 1.0) ? ratio : std::pow(std::abs(ratio), q);
        }
        csv.field(profile);
        csv.end_row();
      }
    }
    csv.close();
  }

  {
    CsvWriter csv(dir / "tau.csv");
    csv.field("t");
    csv.field("tau");
    csv.end_row();
    for (const auto& [t, tau] : result.tau_history) {
      csv.field(t);
      csv.field(tau);
      csv.end_row();
    }
    csv.close();
  }

  {
    CsvWriter csv(dir / "steps.csv");
    csv.field("t");
    csv.field("dt");
    csv.field("order");
    csv.field("newton_iters");
    csv.field("failed");
    csv.field("error_est");
    csv.end_row();
    for (const auto& rec : result.step_history) {
      csv.field(rec.t);
      csv.field(rec.dt);
      csv.field(static_cast<long>(rec.order));
      csv.field(static_cast<long>(rec.newton_iters));
      csv.field(static_cast<long>(rec.failed ? 1 : 0));
      csv.field(rec.error_est);
      csv.end_row();
    }
    csv.close();
  }

  {
    nlohmann::json j;
    j["scenario"] = to_string(result.scenario);
    j["t_star"] = result.t_end;
    j["u_max_final"] = result.u_max_final;
    j["termination_reason"] = reason_string(result.reason);
    j["termination_message"] = result.message;
    j["wall_clock_seconds"] = result.wall_clock_seconds;
    j["steps_accepted"] = result.n_accepted;
    j["steps_failed"] = result.n_failed;
    j["residual_evaluations"] = result.n_residual;
    j["jacobian_factorizations"] = result.n_jacobian;
    nlohmann::json cfg;
    for (const auto& [key, value] : config_to_map(result.config)) {
      cfg[key] = value;
    }
    j["config"] = cfg;
    std::ofstream out(dir / "summary.json");
    if (!out) {
      throw std::runtime_error("cannot open for writing: " +
                               (dir / "summary.json").string());
    }
    out << j.dump(2) << '\n';
    if (!out) {
      throw std::runtime_error("write failed: " +
                               (dir / "summary.json").string());
    }
  }
}

}  // namespace mmrelax
