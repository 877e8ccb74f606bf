#pragma once

#include <optional>
#include <string>
#include <vector>

#include "raptar/arm.hpp"
#include "raptar/se3.hpp"

namespace raptar {

/// Capsule: segment between two endpoints swept by a radius.
struct Capsule {
  Vector3d a = Vector3d::Zero();
  Vector3d b = Vector3d::Zero();
  double radius = 0.0;
};

/// Static obstacle. Boxes are axis-aligned in their own frame and placed by
/// `pose`; capsule endpoints are given in the object frame.
struct SceneObject {
  enum class Shape { kBox, kCapsule };
  std::string name;
  Shape shape = Shape::kBox;
  RigidTransform pose;
  Vector3d dims = Vector3d::Zero();  // box L x W x H
  Capsule capsule;                   // when shape == kCapsule
};

/// Capsule decomposition of the arm: eight link capsules along the chain
/// origins plus one bracket capsule fixed to the flange frame.
struct ArmCollisionModel {
  // Radii for the eight link capsules, before padding.
  std::array<double, 8> link_radii{0.09, 0.09, 0.075, 0.07,
                                   0.07, 0.06, 0.055, 0.05};
  // The base column capsule starts this far up the pedestal (the pedestal
  // itself is bolted to the table and cannot move).
  double base_lift_m = 0.12;
  // Flange-frame stub covering the wrist collar (capsule 7).
  Vector3d collar_a{0.0, 0.0, -0.04};
  Vector3d collar_b{0.0, 0.0, 0.0};
  // Probe bracket in the flange frame: horn plus harmonic mixer body.
  Capsule bracket{Vector3d(0.0, 0.0, 0.0), Vector3d(-0.003, 0.1315, -0.01),
                  0.02};
  // Multiplier applied to link radii at query time.
  double padding = 1.10;
};

struct CollisionReport {
  bool colliding = false;
  std::string first_a;
  std::string first_b;
  explicit operator bool() const { return colliding; }
};

/// Environment model. Value semantics: add_box returns a new scene; queries
/// are pure and safe for concurrent use.
class Scene {
 public:
  Scene() = default;

  Scene add_box(const std::string& name, const RigidTransform& pose,
                const Vector3d& dims) const;
  Scene add_capsule(const std::string& name, const RigidTransform& pose,
                    const Capsule& capsule) const;
  Scene without(const std::string& name) const;

  const std::vector<SceneObject>& objects() const { return objects_; }
  const ArmCollisionModel& arm_model() const { return arm_model_; }
  void set_arm_model(const ArmCollisionModel& m) { arm_model_ = m; }
  double riser_height() const { return riser_height_; }
  void set_riser_height(double h);

 private:
  void require_unused(const std::string& name) const;

  std::vector<SceneObject> objects_;
  ArmCollisionModel arm_model_;
  double riser_height_ = 0.0;
};

// World-frame capsules for the arm at configuration q: eight link capsules
// plus the bracket (last element, named "bracket" in reports).
std::vector<Capsule> arm_capsules(const Scene& scene, const ArmDescription& arm,
                                  const JointConfig& q);

// Exact distance between a segment and an oriented box (0 when intersecting).
double segment_box_distance(const Vector3d& a, const Vector3d& b,
                            const RigidTransform& box_pose,
                            const Vector3d& dims);

// Closest distance between two segments.
double segment_segment_distance(const Vector3d& p1, const Vector3d& q1,
                                const Vector3d& p2, const Vector3d& q2);

// True iff any link/bracket capsule hits a scene object or a non-exempt link
// pair self-collides; the report names the first offending pair. Requires q
// within limits.
CollisionReport in_collision(const Scene& scene, const ArmDescription& arm,
                             const JointConfig& q);

// Checks linearly interpolated configurations between q_a and q_b at
// joint-space spacing <= resolution, endpoints inclusive.
bool segment_in_collision(const Scene& scene, const ArmDescription& arm,
                          const JointConfig& q_a, const JointConfig& q_b,
                          double resolution_rad);

// Default bench: table top at z=0 (arm base bolted to it), DUT cube on a
// riser in front of the arm. riser_height may be zero (DUT flush on the
// table).
Scene default_scene(double riser_height = 0.1);

// Scan anchor height used by the default geometry: the DUT top plus probe
// standoff, tracking the riser.
double default_scan_center_z(double riser_height);

// Plain-text scene file: top-level riser_height and [arm_collision] section,
// one [object:<name>] section per obstacle.
Scene load_scene_file(const std::string& path);
void save_scene_file(const Scene& scene, const std::string& path);

}  // namespace raptar
