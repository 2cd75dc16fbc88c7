#include "mmrelax/systems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mmrelax {

namespace {

bool mesh_strictly_increasing(std::span<const double> x) {
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i] < x[i + 1])) return false;
  }
  return std::isfinite(x.front()) && std::isfinite(x.back());
}

std::string tau_floor_context(const RunConfig& config, double tau) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "tau=%.3g, monitor_floor=%.3g", tau,
                config.monitor_floor);
  return buf;
}

}  // namespace

// ============================================================================
// CoupledSystem
// ============================================================================

CoupledSystem::CoupledSystem(ProblemSpec spec, RunConfig config)
    : spec_(std::move(spec)), config_(std::move(config)),
      n_(config_.n_intervals) {
  raw_.resize(n_ + 1);
  scratch_mesh_rows_.resize(std::max(0, n_ - 1));
  mesh_view_.nodes.resize(n_ + 1);
}

bool CoupledSystem::residual(double t, std::span<const double> y,
                             std::span<const double> ydot,
                             std::span<double> f) {
  (void)t;  // the coupled problem is autonomous
  const int n = n_;
  const auto u = y.subspan(0, n + 1);
  const auto x = y.subspan(n + 1, n + 1);
  const auto udot = ydot.subspan(0, n + 1);
  const auto xdot = ydot.subspan(n + 1, n + 1);

  if (!mesh_strictly_increasing(x)) return false;
  for (int i = 0; i <= n; ++i) {
    if (!std::isfinite(u[i])) return false;
  }

  std::copy(x.begin(), x.end(), mesh_view_.nodes.begin());
  if (!monitor_values(spec_, u, mesh_view_, raw_)) return false;
  MonitorField field =
      MonitorField::build(raw_, config_.smoothing, config_.monitor_floor);
  const double tau = tau_eval(config_.tau, field);
  last_tau_ = tau;

  if (!physical_rows(u, udot, x, xdot, spec_, f.subspan(0, n + 1))) {
    return false;
  }

  auto mesh_rows = f.subspan(n + 1, n + 1);
  mesh_rows[0] = xdot[0];
  mesh_rows[n] = xdot[n];
  auto interior = std::span<double>(scratch_mesh_rows_);
  if (config_.variant == MmpdeVariant::mmpde6) {
    mmpde6_rows(x, xdot, field, tau, interior);
  } else {
    mmpde4_rows(x, xdot, field, tau, interior);
  }
  for (int i = 1; i < n; ++i) {
    mesh_rows[i] = interior[i - 1];
    if (!std::isfinite(mesh_rows[i])) return false;
  }
  return true;
}

RowKind CoupledSystem::row_kind(int i) const {
  // physical boundary rows enforce u = 0 algebraically
  if (i == 0 || i == n_) return RowKind::algebraic;
  return RowKind::differential;
}

JacobianLayout CoupledSystem::jacobian_layout() const {
  // Interleave (u_i, x_i) pairs so the four tridiagonal-with-smoothing
  // blocks collapse into a single band.
  JacobianLayout layout;
  layout.banded = true;
  const int hw = 2 * (config_.smoothing.ip + 2) + 2;
  layout.kl = hw;
  layout.ku = hw;
  layout.perm.resize(2 * (n_ + 1));
  for (int i = 0; i <= n_; ++i) {
    layout.perm[i] = 2 * i;           // u_i
    layout.perm[n_ + 1 + i] = 2 * i + 1;  // x_i
  }
  // For very small systems the dense path is simpler and no slower.
  if (2 * (n_ + 1) <= 40 || 2 * hw + 1 >= 2 * (n_ + 1)) {
    return {};
  }
  return layout;
}

bool CoupledSystem::state_ok(double /*t*/, std::span<const double> y) {
  return mesh_strictly_increasing(y.subspan(n_ + 1, n_ + 1));
}

std::string CoupledSystem::diagnostic_context() const {
  return tau_floor_context(config_, last_tau_);
}

// ============================================================================
// MeshOnlySystem
// ============================================================================

MeshOnlySystem::MeshOnlySystem(PrescribedSolution solution, ProblemSpec spec,
                               RunConfig config)
    : solution_(solution), spec_(std::move(spec)),
      config_(std::move(config)), n_(config_.n_intervals) {
  u_.resize(n_ + 1);
  raw_.resize(n_ + 1);
  interior_.resize(std::max(0, n_ - 1));
  mesh_view_.nodes.resize(n_ + 1);
}

std::vector<double> MeshOnlySystem::sample(std::span<const double> x,
                                           double t) const {
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = prescribed_value(solution_, x[i], t);
  }
  return u;
}

bool MeshOnlySystem::residual(double t, std::span<const double> y,
                              std::span<const double> ydot,
                              std::span<double> f) {
  const int n = n_;
  if (solution_.id == PrescribedId::example3 && t >= solution_.t_star) {
    return false;
  }
  if (!mesh_strictly_increasing(y)) return false;

  std::copy(y.begin(), y.end(), mesh_view_.nodes.begin());
  for (int i = 0; i <= n; ++i) {
    u_[i] = prescribed_value(solution_, y[i], t);
    if (!std::isfinite(u_[i])) return false;
  }
  if (!monitor_values(spec_, u_, mesh_view_, raw_)) return false;
  MonitorField field =
      MonitorField::build(raw_, config_.smoothing, config_.monitor_floor);
  const double tau = tau_eval(config_.tau, field);
  last_tau_ = tau;

  f[0] = ydot[0];
  f[n] = ydot[n];
  auto interior = std::span<double>(interior_);
  if (config_.variant == MmpdeVariant::mmpde6) {
    mmpde6_rows(y, ydot, field, tau, interior);
  } else {
    mmpde4_rows(y, ydot, field, tau, interior);
  }
  for (int i = 1; i < n; ++i) {
    f[i] = interior[i - 1];
    if (!std::isfinite(f[i])) return false;
  }
  return true;
}

JacobianLayout MeshOnlySystem::jacobian_layout() const {
  JacobianLayout layout;
  layout.banded = true;
  const int hw = config_.smoothing.ip + 2;
  layout.kl = hw;
  layout.ku = hw;
  if (n_ + 1 <= 24 || 2 * hw + 1 >= n_ + 1) return {};
  return layout;
}

bool MeshOnlySystem::state_ok(double /*t*/, std::span<const double> y) {
  return mesh_strictly_increasing(y);
}

std::string MeshOnlySystem::diagnostic_context() const {
  return tau_floor_context(config_, last_tau_);
}

}  // namespace mmrelax
