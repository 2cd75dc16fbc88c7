/// @file physics.hpp
/// @brief Physical residual rows in moving coordinates, source terms and the
///        prescribed-solution catalog.
#pragma once

#include <span>
#include <vector>

#include "mmrelax/core.hpp"

namespace mmrelax {

/// Closed-form solutions used for the mesh-only experiments.
struct PrescribedSolution {
  PrescribedId id = PrescribedId::example1;
  // parameters of the blowing-up Gaussian (example3)
  double beta = 100.0;
  double x_star = 0.5;
  double t_star = 0.4;

  static PrescribedSolution make(PrescribedId id);
};

/// Exact value of the prescribed solution.  Throws std::domain_error when
/// example3 is evaluated at t >= t_star.
double prescribed_value(const PrescribedSolution& sol, double x, double t);

/// Nonlinear source term: u^p or e^u.  Returns false when the result
/// overflows (treated upstream as a recoverable step failure).
bool source(double u, const ProblemSpec& spec, double& out);

/// Interior physical residual rows on the moving mesh,
///   r_i = udot_i - (u_{i+1}-u_{i-1})/(x_{i+1}-x_{i-1}) * xdot_i
///         - 2/(x_{i+1}-x_{i-1}) * [(u_{i+1}-u_i)/(x_{i+1}-x_i)
///                                  - (u_i-u_{i-1})/(x_i-x_{i-1})]
///         - source(u_i),  i = 1..N-1,
/// with boundary rows r_0 = u_0 and r_N = u_N written in place.  Returns
/// false on degenerate spacing or overflow.
bool physical_rows(std::span<const double> u, std::span<const double> udot,
                   std::span<const double> x, std::span<const double> xdot,
                   const ProblemSpec& spec, std::span<double> out);

}  // namespace mmrelax
