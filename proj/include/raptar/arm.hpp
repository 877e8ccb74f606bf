#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "raptar/se3.hpp"

namespace raptar {

constexpr int kNumJoints = 7;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using Jacobian = Eigen::Matrix<double, 6, kNumJoints>;

/// Joint-space state of the arm, radians.
struct JointConfig {
  JointVector q = JointVector::Zero();

  JointConfig() = default;
  explicit JointConfig(const JointVector& v) : q(v) {}

  double operator[](int i) const { return q[i]; }
  double& operator[](int i) { return q[i]; }
  bool operator==(const JointConfig& o) const { return q == o.q; }
};

/// Modified Denavit-Hartenberg row plus limits for one revolute joint.
struct JointParams {
  double a_m = 0.0;       // link length a_{i-1}
  double d_m = 0.0;       // link offset d_i
  double alpha_rad = 0.0; // link twist alpha_{i-1}
  double q_min_rad = -3.14159265358979;
  double q_max_rad = 3.14159265358979;
  double v_max_rad_s = 2.0;
};

/// Kinematic description of a 7-DoF serial arm. Immutable once loaded;
/// shareable across threads.
class ArmDescription {
 public:
  ArmDescription() = default;
  ArmDescription(const std::array<JointParams, kNumJoints>& joints,
                 const JointConfig& home);

  const std::array<JointParams, kNumJoints>& joints() const { return joints_; }
  const JointConfig& home() const { return home_; }

  bool within_limits(const JointConfig& q, double slack = 1e-9) const;
  void require_within_limits(const JointConfig& q) const;  // JointLimitError
  JointConfig clamp(const JointConfig& q) const;

  // Throws ValidationError on structural problems (limits inverted, home
  // outside limits).
  void validate() const;

  RigidTransform cached_base_pose() const { return base_pose_; }

 private:
  std::array<JointParams, kNumJoints> joints_{};
  JointConfig home_;
  RigidTransform base_pose_;  // FK at home, fixed for the session
};

/// Outcome of an inverse-kinematics solve; errors are true FK residuals.
struct IkSolution {
  JointConfig q;
  double position_error_m = 0.0;
  double orientation_error_rad = 0.0;
  int iterations = 0;
  int restarts = 0;
};

/// Tuning knobs for the damped-least-squares solver.
struct IkParams {
  double damping = 0.05;
  int max_iterations_per_attempt = 300;
  double stagnation_step_norm = 1e-12;
  int stagnation_window = 10;
  double step_norm_cap = 0.5;
};

// Flange pose as the ordered product of the seven per-joint link transforms.
// Checked variant throws JointLimitError when q is outside limits.
RigidTransform forward_kinematics(const ArmDescription& arm,
                                  const JointConfig& q);
RigidTransform forward_kinematics_unchecked(const ArmDescription& arm,
                                            const JointConfig& q);

// Cumulative frames along the chain: index 0 is the base frame, index i the
// frame after joint i. frames[7] is the flange.
std::array<RigidTransform, kNumJoints + 1> chain_frames(
    const ArmDescription& arm, const JointConfig& q);

// Geometric Jacobian of the flange (linear on top, angular below).
Jacobian flange_jacobian(const ArmDescription& arm, const JointConfig& q);

// Flange pose at the stow/home configuration; constant per session.
RigidTransform base_transform(const ArmDescription& arm);

// Damped-least-squares IK from `q_seed`, with uniformly-random in-limit
// restarts on stagnation. Succeeds iff both residuals meet the tolerances;
// the result always respects joint limits. Throws UnreachableError when all
// restarts are exhausted.
IkSolution inverse_kinematics(const ArmDescription& arm,
                              const RigidTransform& target,
                              const JointConfig& q_seed, double tol_pos_m,
                              double tol_rot_rad, int max_restarts,
                              std::uint64_t rng_seed = 0,
                              const IkParams& params = {});

// Geodesic angle of R_target * R_currentᵀ.
double orientation_distance(const Matrix3d& r_target,
                            const Matrix3d& r_current);

// Built-in Franka Panda parameters (modified DH, vendor limits; joint 7's
// offset includes the flange plate). The home configuration parks the flange
// above the default scene's device under test with +z up.
ArmDescription default_panda();

// Plain-text arm description: one [jointN] section per joint with keys
// a, d, alpha, q_min, q_max, v_max, plus top-level `home = [7 angles]`.
ArmDescription load_arm_file(const std::string& path);
void save_arm_file(const ArmDescription& arm, const std::string& path);

}  // namespace raptar
