#include "mmrelax/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmrelax {

double MonitorField::max_raw() const {
  return *std::max_element(raw.begin(), raw.end());
}

double MonitorField::max_smoothed() const {
  return *std::max_element(smoothed.begin(), smoothed.end());
}

MonitorField MonitorField::build(std::vector<double> raw_values,
                                 const SmoothingParams& smoothing,
                                 double floor) {
  MonitorField field;
  for (double& v : raw_values) v = std::max(v, floor);
  field.raw = std::move(raw_values);
  if (smoothing.ip > 0) {
    field.smoothed = smooth(field.raw, smoothing.gamma, smoothing.ip);
    for (double& v : field.smoothed) v = std::max(v, floor);
  } else {
    field.smoothed = field.raw;
  }
  const std::size_t n = field.smoothed.size();
  field.half.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    field.half[i] = 0.5 * (field.smoothed[i] + field.smoothed[i + 1]);
  }
  return field;
}

bool monitor_values(const ProblemSpec& spec, std::span<const double> u,
                    const MeshState& mesh, std::vector<double>& out,
                    int* bad_index) {
  const std::size_t n = u.size();
  if (n != mesh.nodes.size() || n < 2) {
    throw std::invalid_argument("monitor_values: size mismatch");
  }
  out.resize(n);
  const auto& x = mesh.nodes;

  auto fail = [&](std::size_t i) {
    if (bad_index) *bad_index = static_cast<int>(i);
    return false;
  };

  switch (spec.monitor_kind) {
    case MonitorKind::arclength: {
      for (std::size_t i = 0; i < n; ++i) {
        double ux;
        if (i == 0) {
          ux = (u[1] - u[0]) / (x[1] - x[0]);
        } else if (i == n - 1) {
          ux = (u[n - 1] - u[n - 2]) / (x[n - 1] - x[n - 2]);
        } else {
          ux = (u[i + 1] - u[i - 1]) / (x[i + 1] - x[i - 1]);
        }
        out[i] = std::sqrt(1.0 + ux * ux);
        if (!std::isfinite(out[i])) return fail(i);
      }
      break;
    }
    case MonitorKind::power: {
      const double q = spec.p - 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = (q == 1.0) ? std::abs(u[i]) : std::pow(std::abs(u[i]), q);
        if (!std::isfinite(out[i])) return fail(i);
      }
      break;
    }
    case MonitorKind::exponential: {
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(u[i]);
        if (!std::isfinite(out[i])) return fail(i);
      }
      break;
    }
  }
  return true;
}

std::vector<double> smooth(std::span<const double> raw, double gamma, int ip) {
  const int n = static_cast<int>(raw.size());
  std::vector<double> out(raw.size());
  if (ip <= 0) {
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
  }
  const double w = gamma / (1.0 + gamma);
  // w^|j-i| by offset, precomputed once
  std::vector<double> weight(ip + 1);
  weight[0] = 1.0;
  for (int d = 1; d <= ip; ++d) weight[d] = weight[d - 1] * w;

  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - ip);
    const int hi = std::min(n - 1, i + ip);
    double num = 0.0, den = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double wj = weight[std::abs(j - i)];
      num += raw[j] * raw[j] * wj;
      den += wj;
    }
    out[i] = std::sqrt(num / den);
  }
  return out;
}

double total_monitor(std::span<const double> values, const MeshState& mesh) {
  const auto& x = mesh.nodes;
  if (values.size() != x.size()) {
    throw std::invalid_argument("total_monitor: size mismatch");
  }
  double theta = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    theta += 0.5 * (values[i] + values[i + 1]) * (x[i + 1] - x[i]);
  }
  return theta;
}

}  // namespace mmrelax
