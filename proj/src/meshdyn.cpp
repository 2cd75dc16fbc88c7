#include "mmrelax/meshdyn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmrelax {

double EquidistributionDefect::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

EquidistributionDefect defect(const MeshState& mesh, const MonitorField& m) {
  const auto& x = mesh.nodes;
  const int n = mesh.n_intervals();
  EquidistributionDefect d;
  d.values.resize(n - 1);
  for (int i = 1; i < n; ++i) {
    d.values[i - 1] =
        m.half[i] * (x[i + 1] - x[i]) - m.half[i - 1] * (x[i] - x[i - 1]);
  }
  return d;
}

void mmpde6_rows(std::span<const double> x, std::span<const double> xdot,
                 const MonitorField& m, double tau, std::span<double> out) {
  const int n = static_cast<int>(x.size()) - 1;
  const double inv_tau = 1.0 / tau;
  for (int i = 1; i < n; ++i) {
    const double e =
        m.half[i] * (x[i + 1] - x[i]) - m.half[i - 1] * (x[i] - x[i - 1]);
    out[i - 1] = (xdot[i + 1] - 2.0 * xdot[i] + xdot[i - 1]) + e * inv_tau;
  }
}

void mmpde4_rows(std::span<const double> x, std::span<const double> xdot,
                 const MonitorField& m, double tau, std::span<double> out) {
  const int n = static_cast<int>(x.size()) - 1;
  const double inv_tau = 1.0 / tau;
  for (int i = 1; i < n; ++i) {
    const double e =
        m.half[i] * (x[i + 1] - x[i]) - m.half[i - 1] * (x[i] - x[i - 1]);
    const double flux = m.half[i] * (xdot[i + 1] - xdot[i]) -
                        m.half[i - 1] * (xdot[i] - xdot[i - 1]);
    out[i - 1] = flux + e * inv_tau;
  }
}

double tau_eval(const TauPolicy& policy, const MonitorField& m) {
  if (policy.kind == TauPolicy::Kind::fixed) {
    return policy.tau;
  }
  const double candidate = policy.tau_o * m.max_raw();
  return std::clamp(candidate, policy.tau_min, policy.tau_max);
}

MeshState equidistribute_initial(const std::function<double(double)>& u0,
                                 const ProblemSpec& spec,
                                 const RunConfig& config) {
  const int n = config.n_intervals;
  const int fine = 10 * n;  // fine grid of 10N+1 points
  MeshState fine_mesh = MeshState::uniform(fine);
  std::vector<double> u(fine + 1);
  for (int i = 0; i <= fine; ++i) u[i] = u0(fine_mesh.nodes[i]);

  std::vector<double> raw;
  if (!monitor_values(spec, u, fine_mesh, raw)) {
    throw std::invalid_argument(
        "equidistribute_initial: monitor not finite on initial data");
  }
  MonitorField field =
      MonitorField::build(std::move(raw), config.smoothing, config.monitor_floor);

  // Degenerate case: monitor flat at the floor -> uniform mesh.
  if (field.max_smoothed() <= config.monitor_floor * (1.0 + 1e-12)) {
    return MeshState::uniform(n);
  }

  // Cumulative trapezoid integral of the smoothed monitor on the fine grid.
  std::vector<double> cumulative(fine + 1);
  cumulative[0] = 0.0;
  const double h = 1.0 / fine;
  for (int i = 1; i <= fine; ++i) {
    cumulative[i] =
        cumulative[i - 1] +
        0.5 * (field.smoothed[i - 1] + field.smoothed[i]) * h;
  }
  const double theta = cumulative[fine];

  MeshState mesh;
  mesh.nodes.resize(n + 1);
  mesh.nodes[0] = 0.0;
  mesh.nodes[n] = 1.0;
  int cell = 0;
  for (int i = 1; i < n; ++i) {
    const double target = theta * static_cast<double>(i) / n;
    while (cell + 1 < fine && cumulative[cell + 1] < target) ++cell;
    // invert the piecewise-linear cumulative within [cell, cell+1]
    const double c0 = cumulative[cell];
    const double c1 = cumulative[cell + 1];
    const double frac = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.5;
    mesh.nodes[i] = (cell + frac) * h;
  }
  // The cumulative is strictly increasing (floored monitor), so the inverse
  // is monotone; guard against roundoff ties all the same.
  for (int i = 1; i <= n; ++i) {
    if (mesh.nodes[i] <= mesh.nodes[i - 1]) {
      mesh.nodes[i] = std::nextafter(mesh.nodes[i - 1], 2.0);
    }
  }
  mesh.nodes[n] = 1.0;
  return mesh;
}

double mesh_timescale(MmpdeVariant variant, double tau,
                      const MonitorField& m) {
  if (variant == MmpdeVariant::mmpde4) return tau;
  return tau / m.max_smoothed();
}

}  // namespace mmrelax
