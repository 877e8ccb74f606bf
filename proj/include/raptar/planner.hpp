#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raptar/scene.hpp"
#include "raptar/se3.hpp"

namespace raptar {

/// Time-parameterized joint-space path.
struct Trajectory {
  std::vector<JointConfig> waypoints;
  std::vector<double> timestamps_s;   // strictly increasing, starts at 0
  double cartesian_length_m = 0.0;    // flange path length via FK
  double planning_time_s = 0.0;

  double duration_s() const {
    return timestamps_s.empty() ? 0.0 : timestamps_s.back();
  }
};

enum class PlanStatus { kSuccess, kRecoveredSuccess, kFailure };

struct PlanOutcome {
  PlanStatus status = PlanStatus::kFailure;
  std::optional<Trajectory> trajectory;
  int recovery_count = 0;
  std::string failure_reason;

  bool ok() const { return status != PlanStatus::kFailure; }
};

struct PlanParams {
  double rrt_step_rad = 0.2;
  int rrt_max_iters = 20000;
  double edge_resolution_rad = 0.01;
  int shortcut_attempts = 100;
  double nu_max = 0.05;           // velocity scaling fraction
  int max_recoveries = 2;
  double ik_tol_pos_m = 2e-3;
  double ik_tol_rot_rad = 0.5 * kDegToRad;
  int ik_max_restarts = 6;
};

// Bidirectional RRT with the connect heuristic. The returned path is
// validated edge by edge and shortcut-smoothed; identical seeds give
// identical paths. Throws ValidationError subclasses on colliding endpoints
// (StartInCollision / GoalInCollision semantics carried in the message) and
// UnreachableError when the iteration budget runs out.
struct StartInCollisionError : ValidationError {
  using ValidationError::ValidationError;
};
struct GoalInCollisionError : ValidationError {
  using ValidationError::ValidationError;
};
struct IterationBudgetError : Error {
  using Error::Error;
};

std::vector<JointConfig> rrt_connect(const Scene& scene,
                                     const ArmDescription& arm,
                                     const JointConfig& q_start,
                                     const JointConfig& q_goal,
                                     std::uint64_t seed, double step_rad,
                                     int max_iters,
                                     double edge_resolution_rad = 0.01,
                                     int shortcut_attempts = 100);

// Per-segment duration is the slowest joint at nu_max of its velocity limit;
// timestamps are cumulative. Throws ValidationError on an empty path or
// nu_max outside (0, 1].
Trajectory time_parameterize(const std::vector<JointConfig>& path,
                             const ArmDescription& arm, double nu_max);

// Plan to an end-effector pose with recovery: IK seeded from the current
// configuration, then RRT-Connect; on any failure, retreat to home and retry
// with a home-seeded IK, at most max_recoveries times. Never throws for plan
// failures; the outcome carries the reason. The returned trajectory is the
// full executed motion including recovery retreats.
PlanOutcome plan_pose(const Scene& scene, const ArmDescription& arm,
                      const JointConfig& current_q,
                      const RigidTransform& target, std::uint64_t seed,
                      const PlanParams& params = {});

/// Sequential-scan benchmark over a grid (each pose starts from the previous
/// end configuration, as in a real scan).
struct PoseBenchmark {
  std::size_t index = 0;
  PlanStatus status = PlanStatus::kFailure;
  int recovery_count = 0;
  double cartesian_length_m = 0.0;
  double joint_length_rad = 0.0;
  double planning_time_s = 0.0;  // wall clock; excluded from determinism
};

struct BenchmarkRun {
  std::uint64_t seed = 0;
  std::vector<PoseBenchmark> poses;
  double total_cartesian_length_m = 0.0;
  int successes = 0;
  int recoveries = 0;
};

struct BenchmarkReport {
  std::string planner_name;
  std::vector<BenchmarkRun> runs;
  double success_rate_pct = 0.0;
  double mean_planning_time_s = 0.0;    // wall clock, reported not gated
  double median_planning_time_s = 0.0;  // wall clock, reported not gated
  double mean_total_cartesian_length_m = 0.0;
  // Mean absolute per-pose Cartesian length difference across seed pairs.
  std::optional<double> repeatability_cartesian_m;

  // Everything except wall-clock timing; used for determinism checks.
  std::string deterministic_digest() const;
};

/// Planner interface for the benchmark harness; additional algorithms can be
/// plugged in alongside the default bidirectional planner.
class MotionPlanner {
 public:
  virtual ~MotionPlanner() = default;
  virtual std::string name() const = 0;
  virtual PlanOutcome plan(const Scene& scene, const ArmDescription& arm,
                           const JointConfig& current_q,
                           const RigidTransform& target, std::uint64_t seed,
                           const PlanParams& params) const = 0;
};

class RrtConnectPlanner final : public MotionPlanner {
 public:
  std::string name() const override { return "RRT-Connect"; }
  PlanOutcome plan(const Scene& scene, const ArmDescription& arm,
                   const JointConfig& current_q, const RigidTransform& target,
                   std::uint64_t seed,
                   const PlanParams& params) const override {
    return plan_pose(scene, arm, current_q, target, seed, params);
  }
};

/// Anchor geometry for a scan: the session base pose and bracket offset that
/// turn a grid coordinate into a flange target.
struct ScanFrame {
  RigidTransform base;
  BracketOffset offset;

  RigidTransform target_for(const SphericalCoord& c) const {
    return final_pose(base, c, offset);
  }
};

BenchmarkReport benchmark_scan(const Scene& scene, const ArmDescription& arm,
                               const ScanGrid& grid, const ScanFrame& frame,
                               const std::vector<std::uint64_t>& seeds,
                               const PlanParams& params = {},
                               const MotionPlanner& planner =
                                   RrtConnectPlanner{});

// Tabular text rendering of the benchmark report.
std::string format_benchmark_report(const BenchmarkReport& report);

}  // namespace raptar
