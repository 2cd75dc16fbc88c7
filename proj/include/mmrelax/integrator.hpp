/// @file integrator.hpp
/// @brief Variable-step, variable-order BDF integrator for fully implicit
///        systems F(t, y, ydot) = 0, with banded finite-difference Jacobians
///        and modified Newton iteration.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmrelax/linalg.hpp"

namespace mmrelax {

enum class RowKind { differential, algebraic };

/// How the iteration matrix is stored.  When banded, `perm` maps a state
/// index to its band coordinate (empty means identity); bandwidths are given
/// in band coordinates.
struct JacobianLayout {
  bool banded = false;
  int kl = 0;
  int ku = 0;
  std::vector<int> perm;
};

/// A fully implicit DAE system F(t, y, ydot) = 0.
class ImplicitSystem {
 public:
  virtual ~ImplicitSystem() = default;

  virtual int size() const = 0;

  /// Fills f with the residual.  Returning false marks the state as not
  /// evaluable (tangled mesh, overflow); the integrator rejects the step.
  virtual bool residual(double t, std::span<const double> y,
                        std::span<const double> ydot,
                        std::span<double> f) = 0;

  virtual RowKind row_kind(int /*i*/) const { return RowKind::differential; }

  virtual JacobianLayout jacobian_layout() const { return {}; }

  /// Cheap sanity check of a converged state (mesh validity).  A false
  /// return rejects the step.
  virtual bool state_ok(double /*t*/, std::span<const double> /*y*/) {
    return true;
  }

  /// Extra context for initialization failure messages.
  virtual std::string diagnostic_context() const { return {}; }
};

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-8;
  int max_order = 5;          // in [1, 5]
  double initial_step = 0.0;  // 0 = automatic
  double min_step = 1e-16;    // absolute floor; crossing it ends the run
  int max_failures = 7;       // consecutive rejected attempts
  int max_newton_iters = 4;
  double fixed_step = 0.0;    // > 0: constant step, error test disabled
  long max_steps = 2000000;
};

struct StepRecord {
  double t;           // end time of the attempt
  double dt;
  int order;
  int newton_iters;
  bool failed;
  double error_est;   // WRMS local error estimate; -1 when unavailable
};

enum class StopReason {
  reached_t_end,
  failure_cascade,  // step underflow or the consecutive-failure limit
  step_limit,
  init_failure,
};

struct IntegrationResult {
  StopReason reason = StopReason::reached_t_end;
  double t_final = 0.0;
  std::vector<double> y_final;
  std::vector<double> ydot_final;
  std::vector<StepRecord> steps;
  long n_residual = 0;
  long n_jacobian = 0;
  long n_accepted = 0;
  long n_failed = 0;
  std::string message;
};

using StepObserver =
    std::function<void(double t, std::span<const double> y,
                       const StepRecord& record)>;

/// Advances the system from (t0, y0) toward t_end.  Consistent initial
/// derivatives are computed internally.  Termination is either reaching
/// t_end or the failure cascade; the cascade's last accepted time is the
/// blow-up estimate for singular problems.
IntegrationResult integrate(ImplicitSystem& sys, double t0,
                            std::span<const double> y0, double t_end,
                            const IntegratorConfig& config,
                            const StepObserver& on_accept = {});

/// Solves the linear system F(t0, y0, ydot) = 0 for ydot (F is linear in
/// ydot).  Rows flagged algebraic receive the differentiated constraint
/// ydot = 0.  Returns nullopt on a singular coefficient matrix.
std::optional<std::vector<double>> consistent_initial_derivatives(
    ImplicitSystem& sys, double t0, std::span<const double> y0,
    std::string* error = nullptr);

/// Iteration matrix dF/dy + c dF/dydot assembled by one-sided differences
/// with increment sqrt(eps) * max(|y_j|, atol); banded storage (with column
/// batching) when the system's layout allows, dense otherwise.
class IterationMatrix {
 public:
  void configure(const JacobianLayout& layout, int n);

  bool assemble(ImplicitSystem& sys, double t, std::span<const double> y,
                std::span<const double> ydot, double c, double atol,
                long* residual_count = nullptr);
  bool factor();
  void solve(std::span<double> b);

  bool banded() const { return layout_.banded; }
  /// Logical (unpermuted) entry; zero outside the band.  Test accessor.
  double entry(int i, int j) const;

 private:
  JacobianLayout layout_;
  int n_ = 0;
  std::vector<int> perm_;   // identity when layout_.perm empty
  std::vector<int> pinv_;
  DenseLU dense_;
  BandLU band_;
  std::vector<double> f_base_, f_pert_, y_pert_, ydot_pert_, rhs_;
};

/// Dense finite-difference Jacobian dF/dy + c dF/dydot (reference path for
/// tests and small systems).  Row-major, size n*n.
bool fd_jacobian_dense(ImplicitSystem& sys, double t,
                       std::span<const double> y,
                       std::span<const double> ydot, double c, double atol,
                       std::vector<double>& out);

/// Weighted RMS norm with weights atol + rtol*|y_i|.
double wrms_norm(std::span<const double> v, std::span<const double> weights);

}  // namespace mmrelax
