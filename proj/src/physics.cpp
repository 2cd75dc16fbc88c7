#include "mmrelax/physics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmrelax {

namespace {
constexpr double kPi = std::numbers::pi;
}

PrescribedSolution PrescribedSolution::make(PrescribedId id) {
  PrescribedSolution s;
  s.id = id;
  return s;
}

double prescribed_value(const PrescribedSolution& sol, double x, double t) {
  switch (sol.id) {
    case PrescribedId::example1:
      return std::exp(-10.0 * kPi * kPi * t) * std::sin(kPi * x);
    case PrescribedId::example2:
      return std::exp(-kPi * kPi * t) * std::sin(kPi * x) +
             std::exp(-100.0 * kPi * kPi * t) * std::sin(2.0 * kPi * x);
    case PrescribedId::example3: {
      if (t >= sol.t_star) {
        throw std::domain_error(
            "prescribed_value: example3 requires t < t_star");
      }
      const double dt = sol.t_star - t;
      const double dx = x - sol.x_star;
      return std::exp(-sol.beta * dx * dx / (4.0 * dt)) /
             std::sqrt(4.0 * kPi * dt);
    }
  }
  return 0.0;
}

bool source(double u, const ProblemSpec& spec, double& out) {
  switch (spec.nonlinearity) {
    case Nonlinearity::power:
      out = (spec.p == 2.0) ? u * u
            : (spec.p == 5.0)
                ? (u * u) * (u * u) * u
                : std::pow(u, spec.p);
      break;
    case Nonlinearity::exponential:
      out = std::exp(u);
      break;
    case Nonlinearity::prescribed:
      out = 0.0;
      break;
  }
  return std::isfinite(out);
}

bool physical_rows(std::span<const double> u, std::span<const double> udot,
                   std::span<const double> x, std::span<const double> xdot,
                   const ProblemSpec& spec, std::span<double> out) {
  const int n = static_cast<int>(u.size()) - 1;
  out[0] = u[0];
  out[n] = u[n];
  for (int i = 1; i < n; ++i) {
    const double dxl = x[i] - x[i - 1];
    const double dxr = x[i + 1] - x[i];
    if (!(dxl > 0.0) || !(dxr > 0.0)) return false;
    const double wide = x[i + 1] - x[i - 1];
    double s;
    if (!source(u[i], spec, s)) return false;
    const double advect = (u[i + 1] - u[i - 1]) / wide * xdot[i];
    const double diffuse =
        2.0 / wide * ((u[i + 1] - u[i]) / dxr - (u[i] - u[i - 1]) / dxl);
    out[i] = udot[i] - advect - diffuse - s;
    if (!std::isfinite(out[i])) return false;
  }
  return true;
}

}  // namespace mmrelax
