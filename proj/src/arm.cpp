#include "raptar/arm.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "raptar/confparse.hpp"

namespace raptar {

namespace {

// Rot_x(alpha) · Trans_x(a) · Rot_z(q) · Trans_z(d), the modified-DH link
// transform.
RigidTransform mdh_transform(const JointParams& jp, double q) {
  const double ca = std::cos(jp.alpha_rad), sa = std::sin(jp.alpha_rad);
  const double cq = std::cos(q), sq = std::sin(q);
  RigidTransform t;
  t.rotation << cq, -sq, 0.0,
      sq * ca, cq * ca, -sa,
      sq * sa, cq * sa, ca;
  t.translation = Vector3d(jp.a_m, -jp.d_m * sa, jp.d_m * ca);
  return t;
}

}  // namespace

ArmDescription::ArmDescription(
    const std::array<JointParams, kNumJoints>& joints, const JointConfig& home)
    : joints_(joints), home_(home) {
  validate();
  base_pose_ = forward_kinematics_unchecked(*this, home_);
}

bool ArmDescription::within_limits(const JointConfig& q, double slack) const {
  for (int i = 0; i < kNumJoints; ++i) {
    if (q[i] < joints_[i].q_min_rad - slack ||
        q[i] > joints_[i].q_max_rad + slack) {
      return false;
    }
  }
  return true;
}

void ArmDescription::require_within_limits(const JointConfig& q) const {
  for (int i = 0; i < kNumJoints; ++i) {
    if (q[i] < joints_[i].q_min_rad - 1e-9 ||
        q[i] > joints_[i].q_max_rad + 1e-9) {
      std::ostringstream os;
      os << "joint " << (i + 1) << " angle " << q[i]
         << " rad outside limits [" << joints_[i].q_min_rad << ", "
         << joints_[i].q_max_rad << "]";
      throw JointLimitError(os.str());
    }
  }
}

JointConfig ArmDescription::clamp(const JointConfig& q) const {
  JointConfig out = q;
  for (int i = 0; i < kNumJoints; ++i) {
    out[i] = std::min(std::max(out[i], joints_[i].q_min_rad),
                      joints_[i].q_max_rad);
  }
  return out;
}

void ArmDescription::validate() const {
  for (int i = 0; i < kNumJoints; ++i) {
    if (joints_[i].q_min_rad >= joints_[i].q_max_rad) {
      throw ValidationError("joint " + std::to_string(i + 1) +
                            " limits inverted");
    }
    if (!(joints_[i].v_max_rad_s > 0.0)) {
      throw ValidationError("joint " + std::to_string(i + 1) +
                            " velocity limit must be positive");
    }
  }
  if (!within_limits(home_)) {
    throw ValidationError("home configuration violates joint limits");
  }
}

RigidTransform forward_kinematics_unchecked(const ArmDescription& arm,
                                            const JointConfig& q) {
  RigidTransform t;
  for (int i = 0; i < kNumJoints; ++i) {
    t = t * mdh_transform(arm.joints()[i], q[i]);
  }
  return t;
}

RigidTransform forward_kinematics(const ArmDescription& arm,
                                  const JointConfig& q) {
  arm.require_within_limits(q);
  return forward_kinematics_unchecked(arm, q);
}

std::array<RigidTransform, kNumJoints + 1> chain_frames(
    const ArmDescription& arm, const JointConfig& q) {
  std::array<RigidTransform, kNumJoints + 1> frames;
  frames[0] = RigidTransform::identity();
  for (int i = 0; i < kNumJoints; ++i) {
    frames[i + 1] = frames[i] * mdh_transform(arm.joints()[i], q[i]);
  }
  return frames;
}

Jacobian flange_jacobian(const ArmDescription& arm, const JointConfig& q) {
  const auto frames = chain_frames(arm, q);
  const Vector3d p_end = frames[kNumJoints].translation;
  Jacobian jac;
  for (int i = 0; i < kNumJoints; ++i) {
    // Joint i+1 rotates about the z axis of frames[i+1]; the frame origin
    // lies on that axis.
    const Vector3d axis = frames[i + 1].rotation.col(2);
    const Vector3d origin = frames[i + 1].translation;
    jac.block<3, 1>(0, i) = axis.cross(p_end - origin);
    jac.block<3, 1>(3, i) = axis;
  }
  return jac;
}

RigidTransform base_transform(const ArmDescription& arm) {
  return arm.cached_base_pose();
}

double orientation_distance(const Matrix3d& r_target,
                            const Matrix3d& r_current) {
  const Matrix3d err = r_target * r_current.transpose();
  const double c = std::min(1.0, std::max(-1.0, (err.trace() - 1.0) / 2.0));
  return std::acos(c);
}

IkSolution inverse_kinematics(const ArmDescription& arm,
                              const RigidTransform& target,
                              const JointConfig& q_seed, double tol_pos_m,
                              double tol_rot_rad, int max_restarts,
                              std::uint64_t rng_seed, const IkParams& params) {
  if (!(tol_pos_m > 0.0) || !(tol_rot_rad > 0.0)) {
    throw ValidationError("IK tolerances must be positive");
  }
  std::mt19937_64 rng(rng_seed);
  JointConfig q = arm.clamp(q_seed);

  IkSolution best;
  best.position_error_m = std::numeric_limits<double>::infinity();
  best.orientation_error_rad = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt <= max_restarts; ++attempt) {
    if (attempt > 0) {
      for (int i = 0; i < kNumJoints; ++i) {
        std::uniform_real_distribution<double> dist(
            arm.joints()[i].q_min_rad, arm.joints()[i].q_max_rad);
        q[i] = dist(rng);
      }
    }
    int stagnant = 0;
    for (int iter = 0; iter < params.max_iterations_per_attempt; ++iter) {
      const RigidTransform pose = forward_kinematics_unchecked(arm, q);
      const Vector3d pos_err = target.translation - pose.translation;
      const Matrix3d rot_err_mat = target.rotation * pose.rotation.transpose();
      const Eigen::AngleAxisd aa(rot_err_mat);
      const double pos_norm = pos_err.norm();
      const double rot_norm = std::abs(aa.angle());

      if (pos_norm <= tol_pos_m && rot_norm <= tol_rot_rad) {
        IkSolution sol;
        sol.q = q;
        sol.position_error_m = pos_norm;
        sol.orientation_error_rad = rot_norm;
        sol.iterations = iter;
        sol.restarts = attempt;
        return sol;
      }
      if (pos_norm + rot_norm <
          best.position_error_m + best.orientation_error_rad) {
        best.q = q;
        best.position_error_m = pos_norm;
        best.orientation_error_rad = rot_norm;
        best.iterations = iter;
        best.restarts = attempt;
      }

      Eigen::Matrix<double, 6, 1> err;
      err.head<3>() = pos_err;
      err.tail<3>() = aa.angle() * aa.axis();

      const Jacobian jac = flange_jacobian(arm, q);
      const Eigen::Matrix<double, 6, 6> gram =
          jac * jac.transpose() +
          params.damping * params.damping *
              Eigen::Matrix<double, 6, 6>::Identity();
      JointVector dq = jac.transpose() * gram.ldlt().solve(err);
      const double norm = dq.norm();
      if (norm > params.step_norm_cap) {
        dq *= params.step_norm_cap / norm;
      }
      q = arm.clamp(JointConfig(q.q + dq));

      if (norm < params.stagnation_step_norm) {
        if (++stagnant >= params.stagnation_window) break;
      } else {
        stagnant = 0;
      }
    }
  }

  std::ostringstream os;
  os << "IK exhausted " << max_restarts << " restarts; best residual "
     << best.position_error_m * 1e3 << " mm / "
     << best.orientation_error_rad * kRadToDeg << " deg";
  throw UnreachableError(os.str());
}

ArmDescription default_panda() {
  constexpr double kPi = 3.14159265358979323846;
  std::array<JointParams, kNumJoints> joints{};
  // a_{i-1} [m], d_i [m], alpha_{i-1} [rad]; joint 7's d includes the
  // 0.107 m flange plate.
  joints[0] = {0.0, 0.333, 0.0, -2.8973, 2.8973, 2.175};
  joints[1] = {0.0, 0.0, -kPi / 2, -1.7628, 1.7628, 2.175};
  joints[2] = {0.0, 0.316, kPi / 2, -2.8973, 2.8973, 2.175};
  joints[3] = {0.0825, 0.0, kPi / 2, -3.0718, -0.0698, 2.175};
  joints[4] = {-0.0825, 0.384, -kPi / 2, -2.8973, 2.8973, 2.610};
  joints[5] = {0.0, 0.0, kPi / 2, -0.0175, 3.7525, 2.610};
  joints[6] = {0.088, 0.107, kPi / 2, -2.8973, 2.8973, 2.610};

  JointConfig home;
  // Flange parked above the scan volume, +z up. Tuned against the default
  // scene; regenerate with tools if the scene geometry changes.
  home.q << 0.0, 0.30303428, 0.0, -2.15753992, 0.0, 2.46057420, 0.78539816;
  return ArmDescription(joints, home);
}

namespace {

JointConfig parse_home(const ConfigFile& cfg) {
  const std::vector<double> values = cfg.get_double_list("", "home");
  if (values.size() != kNumJoints) {
    throw ValidationError(cfg.origin() + ": home must list exactly 7 angles");
  }
  JointConfig home;
  for (int i = 0; i < kNumJoints; ++i) home[i] = values[i];
  return home;
}

}  // namespace

ArmDescription load_arm_file(const std::string& path) {
  const ConfigFile cfg = ConfigFile::parse_file(path);
  std::array<JointParams, kNumJoints> joints{};
  for (int i = 0; i < kNumJoints; ++i) {
    const std::string sec = "joint" + std::to_string(i + 1);
    JointParams jp;
    jp.a_m = cfg.get_double(sec, "a");
    jp.d_m = cfg.get_double(sec, "d");
    jp.alpha_rad = cfg.get_double(sec, "alpha");
    jp.q_min_rad = cfg.get_double(sec, "q_min");
    jp.q_max_rad = cfg.get_double(sec, "q_max");
    jp.v_max_rad_s = cfg.get_double(sec, "v_max");
    joints[i] = jp;
  }
  return ArmDescription(joints, parse_home(cfg));
}

void save_arm_file(const ArmDescription& arm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write arm file " + path);
  out.precision(17);
  out << "# 7-DoF arm description: modified DH rows, joint limits, home.\n";
  out << "home = [";
  for (int i = 0; i < kNumJoints; ++i) {
    if (i) out << ", ";
    out << arm.home()[i];
  }
  out << "]\n";
  for (int i = 0; i < kNumJoints; ++i) {
    const JointParams& jp = arm.joints()[i];
    out << "\n[joint" << (i + 1) << "]\n";
    out << "a = " << jp.a_m << "\n";
    out << "d = " << jp.d_m << "\n";
    out << "alpha = " << jp.alpha_rad << "\n";
    out << "q_min = " << jp.q_min_rad << "\n";
    out << "q_max = " << jp.q_max_rad << "\n";
    out << "v_max = " << jp.v_max_rad_s << "\n";
  }
  if (!out) throw IoError("failed writing arm file " + path);
}

}  // namespace raptar
