#include "raptar/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace raptar {

namespace {

double joint_distance(const JointConfig& a, const JointConfig& b) {
  return (a.q - b.q).norm();
}

JointConfig interpolate(const JointConfig& a, const JointConfig& b, double t) {
  return JointConfig(a.q + t * (b.q - a.q));
}

struct Tree {
  std::vector<JointConfig> nodes;
  std::vector<int> parents;

  int nearest(const JointConfig& q) const {
    int best = 0;
    double best_d = joint_distance(nodes[0], q);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const double d = joint_distance(nodes[i], q);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  int add(const JointConfig& q, int parent) {
    nodes.push_back(q);
    parents.push_back(parent);
    return static_cast<int>(nodes.size()) - 1;
  }

  std::vector<JointConfig> path_from_root(int leaf) const {
    std::vector<JointConfig> out;
    for (int i = leaf; i >= 0; i = parents[i]) {
      out.push_back(nodes[i]);
    }
    std::reverse(out.begin(), out.end());
    return out;
  }
};

enum class ExtendResult { kTrapped, kAdvanced, kReached };

ExtendResult extend(Tree& tree, const JointConfig& target, double step,
                    const Scene& scene, const ArmDescription& arm,
                    double resolution, int* new_index) {
  const int near = tree.nearest(target);
  const JointConfig& q_near = tree.nodes[near];
  const double dist = joint_distance(q_near, target);
  if (dist < 1e-12) {
    *new_index = near;
    return ExtendResult::kReached;
  }
  const bool reaches = dist <= step;
  const JointConfig q_new =
      reaches ? target : interpolate(q_near, target, step / dist);
  if (segment_in_collision(scene, arm, q_near, q_new, resolution)) {
    return ExtendResult::kTrapped;
  }
  *new_index = tree.add(q_new, near);
  return reaches ? ExtendResult::kReached : ExtendResult::kAdvanced;
}

std::vector<JointConfig> shortcut(std::vector<JointConfig> path,
                                  const Scene& scene,
                                  const ArmDescription& arm, double resolution,
                                  int attempts, std::mt19937_64& rng) {
  for (int k = 0; k < attempts && path.size() > 2; ++k) {
    std::uniform_int_distribution<std::size_t> dist(0, path.size() - 1);
    std::size_t i = dist(rng);
    std::size_t j = dist(rng);
    if (i > j) std::swap(i, j);
    if (j - i < 2) continue;
    if (!segment_in_collision(scene, arm, path[i], path[j], resolution)) {
      path.erase(path.begin() + i + 1, path.begin() + j);
    }
  }
  return path;
}

}  // namespace

std::vector<JointConfig> rrt_connect(const Scene& scene,
                                     const ArmDescription& arm,
                                     const JointConfig& q_start,
                                     const JointConfig& q_goal,
                                     std::uint64_t seed, double step_rad,
                                     int max_iters, double edge_resolution_rad,
                                     int shortcut_attempts) {
  if (!(step_rad > 0.0)) {
    throw ValidationError("rrt step size must be positive");
  }
  arm.require_within_limits(q_start);
  arm.require_within_limits(q_goal);
  if (auto r = in_collision(scene, arm, q_start)) {
    throw StartInCollisionError("start configuration collides: " + r.first_a +
                                " vs " + r.first_b);
  }
  if (auto r = in_collision(scene, arm, q_goal)) {
    throw GoalInCollisionError("goal configuration collides: " + r.first_a +
                               " vs " + r.first_b);
  }

  if (joint_distance(q_start, q_goal) < 1e-12) {
    return {q_start};
  }
  // Straight shot first; dense scans mostly connect directly.
  std::mt19937_64 rng(seed);
  if (!segment_in_collision(scene, arm, q_start, q_goal,
                            edge_resolution_rad)) {
    return {q_start, q_goal};
  }

  Tree start_tree, goal_tree;
  start_tree.add(q_start, -1);
  goal_tree.add(q_goal, -1);
  Tree* a = &start_tree;
  Tree* b = &goal_tree;
  bool a_is_start = true;

  for (int iter = 0; iter < max_iters; ++iter) {
    JointConfig q_rand;
    for (int i = 0; i < kNumJoints; ++i) {
      std::uniform_real_distribution<double> dist(arm.joints()[i].q_min_rad,
                                                  arm.joints()[i].q_max_rad);
      q_rand[i] = dist(rng);
    }
    int a_new = -1;
    if (extend(*a, q_rand, step_rad, scene, arm, edge_resolution_rad,
               &a_new) != ExtendResult::kTrapped) {
      const JointConfig& connect_target = a->nodes[a_new];
      int b_new = -1;
      ExtendResult res;
      do {
        res = extend(*b, connect_target, step_rad, scene, arm,
                     edge_resolution_rad, &b_new);
      } while (res == ExtendResult::kAdvanced);
      if (res == ExtendResult::kReached) {
        std::vector<JointConfig> from_start =
            (a_is_start ? *a : *b).path_from_root(a_is_start ? a_new : b_new);
        std::vector<JointConfig> from_goal =
            (a_is_start ? *b : *a).path_from_root(a_is_start ? b_new : a_new);
        std::reverse(from_goal.begin(), from_goal.end());
        // Junction configuration appears in both halves.
        from_start.insert(from_start.end(), from_goal.begin() + 1,
                          from_goal.end());
        return shortcut(std::move(from_start), scene, arm,
                        edge_resolution_rad, shortcut_attempts, rng);
      }
    }
    std::swap(a, b);
    a_is_start = !a_is_start;
  }
  throw IterationBudgetError("rrt_connect exhausted " +
                             std::to_string(max_iters) + " iterations");
}

Trajectory time_parameterize(const std::vector<JointConfig>& path,
                             const ArmDescription& arm, double nu_max) {
  if (path.empty()) {
    throw ValidationError("cannot time-parameterize an empty path");
  }
  if (!(nu_max > 0.0) || nu_max > 1.0) {
    throw ValidationError("velocity scaling must lie in (0, 1]");
  }
  Trajectory traj;
  traj.waypoints.push_back(path.front());
  traj.timestamps_s.push_back(0.0);
  Vector3d prev_pos =
      forward_kinematics_unchecked(arm, path.front()).translation;
  double t = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const JointVector dq = (path[k].q - path[k - 1].q).cwiseAbs();
    if (dq.maxCoeff() < 1e-15) continue;  // merge duplicate waypoints
    double duration = 0.0;
    for (int i = 0; i < kNumJoints; ++i) {
      duration =
          std::max(duration, dq[i] / (nu_max * arm.joints()[i].v_max_rad_s));
    }
    t += duration;
    traj.waypoints.push_back(path[k]);
    traj.timestamps_s.push_back(t);
    const Vector3d pos = forward_kinematics_unchecked(arm, path[k]).translation;
    traj.cartesian_length_m += (pos - prev_pos).norm();
    prev_pos = pos;
  }
  return traj;
}

PlanOutcome plan_pose(const Scene& scene, const ArmDescription& arm,
                      const JointConfig& current_q,
                      const RigidTransform& target, std::uint64_t seed,
                      const PlanParams& params) {
  PlanOutcome outcome;
  if (auto r = in_collision(scene, arm, current_q)) {
    outcome.failure_reason =
        "current configuration collides: " + r.first_a + " vs " + r.first_b;
    return outcome;
  }

  const auto wall_start = std::chrono::steady_clock::now();
  std::vector<JointConfig> executed;  // concatenated executed waypoints
  JointConfig q_now = current_q;
  std::string last_error;

  for (int attempt = 0; attempt <= params.max_recoveries; ++attempt) {
    const bool recovering = attempt > 0;
    if (recovering) {
      // Retreat to home first ("new configuration space region").
      try {
        auto retreat = rrt_connect(scene, arm, q_now, arm.home(),
                                   seed + 7919 * attempt, params.rrt_step_rad,
                                   params.rrt_max_iters,
                                   params.edge_resolution_rad,
                                   params.shortcut_attempts);
        if (executed.empty()) {
          executed = retreat;
        } else {
          executed.insert(executed.end(), retreat.begin() + 1, retreat.end());
        }
        q_now = arm.home();
      } catch (const Error& e) {
        last_error = std::string("recovery retreat failed: ") + e.what();
        break;
      }
    }

    const JointConfig ik_seed = recovering ? arm.home() : current_q;
    JointConfig q_goal;
    try {
      const IkSolution sol = inverse_kinematics(
          arm, target, ik_seed, params.ik_tol_pos_m, params.ik_tol_rot_rad,
          params.ik_max_restarts, seed + 104729 * attempt);
      q_goal = sol.q;
    } catch (const Error& e) {
      last_error = std::string("ik: ") + e.what();
      outcome.recovery_count = attempt;
      continue;
    }

    try {
      auto path = rrt_connect(scene, arm, q_now, q_goal,
                              seed + 15485863 * (attempt + 1),
                              params.rrt_step_rad, params.rrt_max_iters,
                              params.edge_resolution_rad,
                              params.shortcut_attempts);
      if (executed.empty()) {
        executed = path;
      } else {
        executed.insert(executed.end(), path.begin() + 1, path.end());
      }
      outcome.status = recovering ? PlanStatus::kRecoveredSuccess
                                  : PlanStatus::kSuccess;
      outcome.recovery_count = attempt;
      outcome.trajectory = time_parameterize(executed, arm, params.nu_max);
      outcome.trajectory->planning_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        wall_start)
              .count();
      return outcome;
    } catch (const Error& e) {
      last_error = std::string("plan: ") + e.what();
      outcome.recovery_count = attempt;
    }
  }

  outcome.status = PlanStatus::kFailure;
  outcome.failure_reason = last_error.empty() ? "plan attempts exhausted"
                                              : last_error;
  return outcome;
}

BenchmarkReport benchmark_scan(const Scene& scene, const ArmDescription& arm,
                               const ScanGrid& grid, const ScanFrame& frame,
                               const std::vector<std::uint64_t>& seeds,
                               const PlanParams& params,
                               const MotionPlanner& planner) {
  BenchmarkReport report;
  report.planner_name = planner.name();
  if (seeds.empty()) {
    throw ValidationError("benchmark needs at least one seed");
  }

  for (std::uint64_t seed : seeds) {
    BenchmarkRun run;
    run.seed = seed;
    JointConfig q_now = arm.home();
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const RigidTransform target = frame.target_for(grid.points[i]);
      const PlanOutcome outcome =
          planner.plan(scene, arm, q_now, target, seed + i, params);
      PoseBenchmark pb;
      pb.index = i;
      pb.status = outcome.status;
      pb.recovery_count = outcome.recovery_count;
      if (outcome.ok()) {
        const Trajectory& traj = *outcome.trajectory;
        pb.cartesian_length_m = traj.cartesian_length_m;
        pb.planning_time_s = traj.planning_time_s;
        for (std::size_t k = 1; k < traj.waypoints.size(); ++k) {
          pb.joint_length_rad +=
              joint_distance(traj.waypoints[k - 1], traj.waypoints[k]);
        }
        run.total_cartesian_length_m += pb.cartesian_length_m;
        run.successes += 1;
        run.recoveries += outcome.recovery_count;
        q_now = traj.waypoints.back();
      }
      run.poses.push_back(pb);
    }
    report.runs.push_back(std::move(run));
  }

  std::size_t total_poses = 0, total_success = 0;
  std::vector<double> times;
  double length_sum = 0.0;
  for (const auto& run : report.runs) {
    total_poses += run.poses.size();
    total_success += run.successes;
    length_sum += run.total_cartesian_length_m;
    for (const auto& pb : run.poses) {
      if (pb.status != PlanStatus::kFailure) times.push_back(pb.planning_time_s);
    }
  }
  report.success_rate_pct =
      total_poses == 0 ? 0.0
                       : 100.0 * static_cast<double>(total_success) /
                             static_cast<double>(total_poses);
  if (!times.empty()) {
    double sum = 0.0;
    for (double t : times) sum += t;
    report.mean_planning_time_s = sum / static_cast<double>(times.size());
    std::sort(times.begin(), times.end());
    report.median_planning_time_s = times[times.size() / 2];
  }
  report.mean_total_cartesian_length_m =
      report.runs.empty() ? 0.0
                          : length_sum / static_cast<double>(report.runs.size());

  if (report.runs.size() >= 2) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < report.runs.size(); ++a) {
      for (std::size_t b = a + 1; b < report.runs.size(); ++b) {
        const auto& ra = report.runs[a].poses;
        const auto& rb = report.runs[b].poses;
        for (std::size_t i = 0; i < std::min(ra.size(), rb.size()); ++i) {
          acc += std::abs(ra[i].cartesian_length_m - rb[i].cartesian_length_m);
          ++count;
        }
      }
    }
    if (count > 0) report.repeatability_cartesian_m = acc / count;
  }
  return report;
}

std::string BenchmarkReport::deterministic_digest() const {
  std::ostringstream os;
  os.precision(17);
  os << planner_name << "|" << success_rate_pct << "|"
     << mean_total_cartesian_length_m << "|";
  for (const auto& run : runs) {
    os << run.seed << ":" << run.successes << ":" << run.recoveries << ":"
       << run.total_cartesian_length_m << ";";
    for (const auto& pb : run.poses) {
      os << static_cast<int>(pb.status) << "," << pb.recovery_count << ","
         << pb.cartesian_length_m << "," << pb.joint_length_rad << " ";
    }
  }
  return os.str();
}

std::string format_benchmark_report(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "Algorithm      Category         Planning Time (s)  Success Rate (%)"
        "  Traj. Length (m)  Repeatability (m)\n";
  char line[256];
  std::snprintf(line, sizeof(line),
                "%-14s %-16s %8.4f (median %.4f)  %7.1f  %12.3f  %s\n",
                report.planner_name.c_str(), "Sampling-based",
                report.mean_planning_time_s, report.median_planning_time_s,
                report.success_rate_pct,
                report.mean_total_cartesian_length_m,
                report.repeatability_cartesian_m
                    ? std::to_string(*report.repeatability_cartesian_m).c_str()
                    : "n/a");
  os << line;
  os << "poses per run: "
     << (report.runs.empty() ? 0 : report.runs.front().poses.size())
     << ", runs: " << report.runs.size() << "\n";
  return os.str();
}

}  // namespace raptar
