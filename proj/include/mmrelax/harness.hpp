/// @file harness.hpp
/// @brief Experiment orchestration: scenario catalog, runs, blow-up
///        diagnostics, refinement and comparison studies, data export.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmrelax/core.hpp"
#include "mmrelax/integrator.hpp"

namespace mmrelax {

enum class ScenarioId {
  example1,
  example2,
  example3,
  blowup_p2,
  blowup_p5,
  blowup_exp,
};

const char* to_string(ScenarioId id);
std::optional<ScenarioId> scenario_from_string(const std::string& name);

/// A scenario bundles the physical problem with its default run
/// configuration (initial data, monitor, smoothing, relaxation policy).
struct Scenario {
  ScenarioId id;
  ProblemSpec problem;
  RunConfig config;
  bool mesh_only = false;
  std::string description;
};

Scenario make_scenario(ScenarioId id);
std::vector<Scenario> scenario_catalog();

struct Snapshot {
  double t;
  int decade;  // u_max first crossed 10^decade at this accepted step
  double u_max;
  std::vector<double> u;
  std::vector<double> x;
};

struct RunResult {
  ScenarioId scenario;
  RunConfig config;
  Nonlinearity nonlinearity = Nonlinearity::power;
  double p = 2.0;
  bool mesh_only = false;
  double t_end = 0.0;        // termination time (blow-up estimate)
  double u_max_final = 0.0;
  StopReason reason = StopReason::reached_t_end;
  std::string message;
  std::vector<Snapshot> snapshots;
  std::vector<std::pair<double, double>> tau_history;  // (t, tau)
  std::vector<StepRecord> step_history;
  std::vector<std::pair<double, std::vector<double>>> trajectory;  // (t, x)
  std::vector<double> u_final, x_final;
  double wall_clock_seconds = 0.0;
  long n_residual = 0, n_jacobian = 0, n_accepted = 0, n_failed = 0;
};

/// Equidistributes the initial mesh, assembles the coupled (or mesh-only)
/// system and integrates to termination, recording snapshots at the first
/// crossing of each configured u_max decade.  Throws std::runtime_error on
/// integrator initialization failure.
RunResult run_experiment(const Scenario& scenario);

/// Sup-norm deviation of a snapshot from the asymptotic blow-up profile:
/// |(u/u_max)^(p-1) - cos^2(pi(xi - 1/2))| for power nonlinearities and
/// |e^(u - u_max) - cos^2(pi(xi - 1/2))| for the exponential one.
double self_similarity_deviation(const Snapshot& snapshot,
                                 const ProblemSpec& spec);

struct RefinementRow {
  int n_intervals;
  double t_star;
  double u_max_final;
  double wall_clock_seconds;
  long n_accepted;
  bool failed;  // run could not be completed
  std::string message;
};

/// Runs the scenario once per N and tabulates blow-up time, final u_max and
/// wall time.  Individual failures are recorded and the study continues.
std::vector<RefinementRow> refinement_study(const Scenario& base,
                                            const std::vector<int>& n_values);

struct CompareRow {
  int n_intervals;
  RefinementRow fixed;
  RefinementRow adaptive;
  double wall_clock_ratio;  // fixed / adaptive
};

/// Matched fixed-tau vs adaptive-tau runs, executed sequentially so the
/// wall-clock ratio is meaningful on one host.
std::vector<CompareRow> compare_study(const Scenario& base,
                                      const std::vector<int>& n_values,
                                      double fixed_tau);

/// Writes trajectories.csv, snapshots.csv, tau.csv, steps.csv and
/// summary.json into the directory (created if needed).  Throws
/// std::runtime_error with path context on I/O failure.
void export_result(const RunResult& result, const std::string& out_dir);

}  // namespace mmrelax
