/// @file systems.hpp
/// @brief Concrete DAE systems: the coupled physical/mesh blow-up system and
///        the mesh-only system driven by a prescribed solution.
#pragma once

#include <span>
#include <vector>

#include "mmrelax/core.hpp"
#include "mmrelax/integrator.hpp"
#include "mmrelax/meshdyn.hpp"
#include "mmrelax/monitor.hpp"
#include "mmrelax/physics.hpp"

namespace mmrelax {

/// Coupled system with unknowns [u_0..u_N, x_0..x_N].  Residual ordering is
/// physical rows 0..N (boundary rows u_0, u_N in place) followed by mesh
/// rows N+1..2N+1 (boundary rows xdot = 0 in place).  The relaxation time is
/// re-evaluated from the current monitor at every residual assembly.
class CoupledSystem : public ImplicitSystem {
 public:
  CoupledSystem(ProblemSpec spec, RunConfig config);

  int size() const override { return 2 * (n_ + 1); }
  bool residual(double t, std::span<const double> y,
                std::span<const double> ydot, std::span<double> f) override;
  RowKind row_kind(int i) const override;
  JacobianLayout jacobian_layout() const override;
  bool state_ok(double t, std::span<const double> y) override;
  std::string diagnostic_context() const override;

  /// Monitor and relaxation time of the most recent successful residual
  /// evaluation (diagnostics; also used by the harness for histories).
  double last_tau() const { return last_tau_; }

  int n_intervals() const { return n_; }
  const ProblemSpec& problem() const { return spec_; }
  const RunConfig& config() const { return config_; }

 private:
  ProblemSpec spec_;
  RunConfig config_;
  int n_;
  std::vector<double> raw_, scratch_mesh_rows_;
  MeshState mesh_view_;
  double last_tau_ = 0.0;
};

/// Mesh-only system with unknowns [x_0..x_N]; the monitor is sampled from
/// the prescribed solution at the current node positions every assembly.
class MeshOnlySystem : public ImplicitSystem {
 public:
  MeshOnlySystem(PrescribedSolution solution, ProblemSpec spec,
                 RunConfig config);

  int size() const override { return n_ + 1; }
  bool residual(double t, std::span<const double> y,
                std::span<const double> ydot, std::span<double> f) override;
  JacobianLayout jacobian_layout() const override;
  bool state_ok(double t, std::span<const double> y) override;
  std::string diagnostic_context() const override;

  double last_tau() const { return last_tau_; }
  const PrescribedSolution& solution() const { return solution_; }

  /// Samples the prescribed solution at the given nodes.
  std::vector<double> sample(std::span<const double> x, double t) const;

 private:
  PrescribedSolution solution_;
  ProblemSpec spec_;
  RunConfig config_;
  int n_;
  std::vector<double> u_, raw_, interior_;
  MeshState mesh_view_;
  double last_tau_ = 0.0;
};

}  // namespace mmrelax
