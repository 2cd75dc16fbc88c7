/// @file monitor.hpp
/// @brief Monitor function evaluation at mesh nodes and spatial smoothing.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mmrelax/core.hpp"

namespace mmrelax {

/// Raw + smoothed monitor values with the midpoint averages used by the
/// discrete mesh equations.  All stored entries are clamped below at the
/// monitor floor.
struct MonitorField {
  std::vector<double> raw;       // floored node values M_i
  std::vector<double> smoothed;  // floored smoothed values
  std::vector<double> half;      // (smoothed[i] + smoothed[i+1]) / 2

  double max_raw() const;
  double max_smoothed() const;

  /// Floors raw values, applies the weighted-RMS smoothing, floors again and
  /// forms midpoint averages.
  static MonitorField build(std::vector<double> raw_values,
                            const SmoothingParams& smoothing,
                            double floor);
};

/// Evaluates the raw (unfloored) monitor at the nodes.  For the arclength
/// monitor u_x uses the centered nonuniform difference at interior nodes and
/// one-sided differences at the boundaries.  Returns false and sets
/// *bad_index when a value is not finite.
bool monitor_values(const ProblemSpec& spec, std::span<const double> u,
                    const MeshState& mesh, std::vector<double>& out,
                    int* bad_index = nullptr);

/// Weighted-RMS smoothing over the window [i-ip, i+ip] with weights
/// (gamma/(1+gamma))^{|j-i|}; indices outside [0,N] are omitted from both
/// the numerator and the normalization.
std::vector<double> smooth(std::span<const double> raw, double gamma, int ip);

/// Composite trapezoid approximation of the monitor integral over [0,1]
/// on the (nonuniform) mesh.  Diagnostic only.
double total_monitor(std::span<const double> values, const MeshState& mesh);

}  // namespace mmrelax
