/// @file core.hpp
/// @brief Shared domain types: moving mesh state, packed DAE state vector,
///        problem definition and run configuration.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmrelax {

// ============================================================================
// Mesh
// ============================================================================

/// Node positions of the moving grid on [0,1].  Endpoints are pinned at 0 and
/// 1 exactly and interior nodes are strictly increasing.
struct MeshState {
  std::vector<double> nodes;

  int n_intervals() const { return static_cast<int>(nodes.size()) - 1; }

  static MeshState uniform(int n_intervals);
};

struct MeshViolation {
  enum class Kind { boundary, ordering };
  Kind kind;
  int index;  // first offending node
  std::string describe() const;
};

/// Checks boundary pinning and strict monotonicity; reports the first
/// violating index, or nullopt when the mesh is valid.
std::optional<MeshViolation> validate_mesh(const MeshState& mesh);

// ============================================================================
// Problem definition
// ============================================================================

enum class Nonlinearity { power, exponential, prescribed };
enum class MonitorKind { arclength, power, exponential };
enum class PrescribedId { example1, example2, example3 };
enum class MmpdeVariant { mmpde4, mmpde6 };

/// Mesh relaxation time policy: a fixed constant or the solution-adaptive
/// rule tau = clamp(tau_o * max_i M_i, [tau_min, tau_max]).
struct TauPolicy {
  enum class Kind { fixed, adaptive };
  Kind kind = Kind::fixed;
  double tau = 1e-5;     // fixed value
  double tau_o = 1e-8;   // adaptive gain
  double tau_min = 1e-8;
  double tau_max = 1e-1;

  static TauPolicy fixed_value(double tau) {
    TauPolicy p;
    p.kind = Kind::fixed;
    p.tau = tau;
    return p;
  }
  static TauPolicy adaptive(double tau_o = 1e-8, double tau_min = 1e-8,
                            double tau_max = 1e-1) {
    TauPolicy p;
    p.kind = Kind::adaptive;
    p.tau_o = tau_o;
    p.tau_min = tau_min;
    p.tau_max = tau_max;
    return p;
  }
};

/// Physical problem: nonlinearity of the source term (or a prescribed
/// solution), initial data, and the monitor used to drive the mesh.
struct ProblemSpec {
  Nonlinearity nonlinearity = Nonlinearity::power;
  double p = 2.0;  // power exponent, must be > 1
  PrescribedId prescribed = PrescribedId::example1;
  std::function<double(double)> initial_data;
  MonitorKind monitor_kind = MonitorKind::power;

  double beta() const { return 1.0 / (p - 1.0); }
};

struct SmoothingParams {
  double gamma = 2.0;
  int ip = 0;  // half-width of the smoothing window in nodes
};

/// Per-run configuration shared by the harness, integrator and CLI.
struct RunConfig {
  int n_intervals = 200;  // N
  MmpdeVariant variant = MmpdeVariant::mmpde6;
  TauPolicy tau = TauPolicy::adaptive();
  SmoothingParams smoothing;
  double rtol = 1e-8;
  double atol = 1e-8;
  double monitor_floor = 1e-10;
  double t_end = 1.0;
  std::vector<int> snapshot_decades;

  // integrator knobs
  int max_order = 5;
  double initial_step = 0.0;  // 0 = choose automatically
  double min_step = 1e-16;    // absolute; crossing it triggers termination
  int max_failures = 7;       // consecutive rejected attempts before giving up
  int max_newton = 4;
  bool record_trajectory = true;
};

/// Throws std::invalid_argument naming the offending field.
void validate_config(const RunConfig& config);

// ============================================================================
// Packed DAE state
// ============================================================================

/// Packed unknown vector [u_0..u_N, x_0..x_N] with its time derivative.
struct SystemState {
  double time = 0.0;
  std::vector<double> y;
  std::vector<double> ydot;
};

/// Packs node values and mesh positions as [u_0..u_N, x_0..x_N].
/// Throws std::invalid_argument on length mismatch.
std::vector<double> pack_state(const std::vector<double>& u,
                               const MeshState& mesh);

/// Inverse of pack_state.  Throws std::invalid_argument on odd length.
std::pair<std::vector<double>, MeshState> unpack_state(
    const std::vector<double>& packed);

}  // namespace mmrelax
