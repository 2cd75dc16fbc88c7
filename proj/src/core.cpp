#include "mmrelax/core.hpp"

#include <cmath>
#include <stdexcept>

namespace mmrelax {

MeshState MeshState::uniform(int n_intervals) {
  MeshState mesh;
  mesh.nodes.resize(n_intervals + 1);
  for (int i = 0; i <= n_intervals; ++i) {
    mesh.nodes[i] = static_cast<double>(i) / n_intervals;
  }
  mesh.nodes.front() = 0.0;
  mesh.nodes.back() = 1.0;
  return mesh;
}

std::string MeshViolation::describe() const {
  switch (kind) {
    case Kind::boundary:
      return "boundary pinning violated at node " + std::to_string(index);
    case Kind::ordering:
      return "mesh not strictly increasing at node " + std::to_string(index);
  }
  return "unknown mesh violation";
}

std::optional<MeshViolation> validate_mesh(const MeshState& mesh) {
  const auto& x = mesh.nodes;
  if (x.size() < 2) {
    return MeshViolation{MeshViolation::Kind::boundary, 0};
  }
  if (x.front() != 0.0) {
    return MeshViolation{MeshViolation::Kind::boundary, 0};
  }
  if (x.back() != 1.0) {
    return MeshViolation{MeshViolation::Kind::boundary,
                         static_cast<int>(x.size()) - 1};
  }
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i] < x[i + 1])) {
      return MeshViolation{MeshViolation::Kind::ordering,
                           static_cast<int>(i)};
    }
  }
  return std::nullopt;
}

void validate_config(const RunConfig& config) {
  if (config.n_intervals < 10) {
    throw std::invalid_argument("N: must be at least 10");
  }
  if (config.smoothing.ip < 0) {
    throw std::invalid_argument("ip: must be nonnegative");
  }
  if (2 * config.smoothing.ip >= config.n_intervals) {
    throw std::invalid_argument("ip: smoothing window must satisfy ip < N/2");
  }
  if (!(config.smoothing.gamma > 0.0)) {
    throw std::invalid_argument("gamma: must be positive");
  }
  if (!(config.rtol > 0.0)) {
    throw std::invalid_argument("rtol: must be positive");
  }
  if (!(config.atol > 0.0)) {
    throw std::invalid_argument("atol: must be positive");
  }
  if (!(config.monitor_floor > 0.0)) {
    throw std::invalid_argument("monitor_floor: must be positive");
  }
  if (config.max_order < 1 || config.max_order > 5) {
    throw std::invalid_argument("max_order: must lie in [1,5]");
  }
  if (config.tau.kind == TauPolicy::Kind::fixed) {
    if (!(config.tau.tau > 0.0)) {
      throw std::invalid_argument("tau: fixed value must be positive");
    }
  } else {
    if (!(config.tau.tau_o > 0.0)) {
      throw std::invalid_argument("tau_o: must be positive");
    }
    if (!(config.tau.tau_min > 0.0)) {
      throw std::invalid_argument("tau_min: must be positive");
    }
    if (!(config.tau.tau_max >= config.tau.tau_min)) {
      throw std::invalid_argument("tau_max: must be >= tau_min");
    }
  }
  if (!(config.min_step >= 0.0)) {
    throw std::invalid_argument("min_step: must be nonnegative");
  }
  if (config.initial_step != 0.0 && !(config.initial_step > config.min_step)) {
    throw std::invalid_argument("initial_step: must exceed min_step");
  }
  if (config.max_failures < 1) {
    throw std::invalid_argument("max_failures: must be at least 1");
  }
  if (config.max_newton < 1) {
    throw std::invalid_argument("max_newton: must be at least 1");
  }
  if (!(config.t_end > 0.0)) {
    throw std::invalid_argument("t_end: must be positive");
  }
}

std::vector<double> pack_state(const std::vector<double>& u,
                               const MeshState& mesh) {
  if (u.size() != mesh.nodes.size()) {
    throw std::invalid_argument(
        "pack_state: node value and mesh sizes differ");
  }
  std::vector<double> packed;
  packed.reserve(2 * u.size());
  packed.insert(packed.end(), u.begin(), u.end());
  packed.insert(packed.end(), mesh.nodes.begin(), mesh.nodes.end());
  return packed;
}

std::pair<std::vector<double>, MeshState> unpack_state(
    const std::vector<double>& packed) {
  if (packed.size() % 2 != 0 || packed.empty()) {
    throw std::invalid_argument("unpack_state: packed length must be even");
  }
  const std::size_t n = packed.size() / 2;
  std::vector<double> u(packed.begin(), packed.begin() + n);
  MeshState mesh;
  mesh.nodes.assign(packed.begin() + n, packed.end());
  return {std::move(u), std::move(mesh)};
}

}  // namespace mmrelax
