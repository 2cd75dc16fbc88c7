/// @file meshdyn.hpp
/// @brief Discrete moving-mesh equations, equidistribution defect, initial
///        mesh placement and the relaxation-time policy.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mmrelax/core.hpp"
#include "mmrelax/monitor.hpp"

namespace mmrelax {

/// Interior equidistribution defects
/// E_i = M_{i+1/2} (x_{i+1} - x_i) - M_{i-1/2} (x_i - x_{i-1}),  i = 1..N-1.
struct EquidistributionDefect {
  std::vector<double> values;  // size N-1

  double max_abs() const;
};

EquidistributionDefect defect(const MeshState& mesh, const MonitorField& m);

/// Residuals of the interior mesh rows for MMPDE6:
///   r_i = (xdot_{i+1} - 2 xdot_i + xdot_{i-1}) + E_i / tau,  i = 1..N-1.
/// Boundary rows (handled by the caller) are xdot_0 = 0 and xdot_N = 0.
void mmpde6_rows(std::span<const double> x, std::span<const double> xdot,
                 const MonitorField& m, double tau, std::span<double> out);

/// Residuals of the interior mesh rows for MMPDE4:
///   r_i = [M_{i+1/2}(xdot_{i+1}-xdot_i) - M_{i-1/2}(xdot_i-xdot_{i-1})]
///         + E_i / tau.
void mmpde4_rows(std::span<const double> x, std::span<const double> xdot,
                 const MonitorField& m, double tau, std::span<double> out);

/// Evaluates the relaxation time for the given policy.  The adaptive rule
/// uses the raw (floored, pre-smoothing) monitor values.
double tau_eval(const TauPolicy& policy, const MonitorField& m);

/// Places the initial mesh by equidistributing the smoothed, floored monitor
/// of u0 sampled on a uniform grid of 10*N+1 points: node i sits where the
/// cumulative trapezoid integral reaches (i/N) of its total.
MeshState equidistribute_initial(const std::function<double(double)>& u0,
                                 const ProblemSpec& spec,
                                 const RunConfig& config);

/// Natural mesh response time: tau for MMPDE4, tau / max(smoothed M) for
/// MMPDE6.  Diagnostic only.
double mesh_timescale(MmpdeVariant variant, double tau, const MonitorField& m);

}  // namespace mmrelax
