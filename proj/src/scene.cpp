#include "raptar/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "raptar/confparse.hpp"

namespace raptar {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double point_box_distance(const Vector3d& p, const Vector3d& half) {
  const Vector3d d = (p.cwiseAbs() - half).cwiseMax(0.0);
  return d.norm();
}

}  // namespace

Scene Scene::add_box(const std::string& name, const RigidTransform& pose,
                     const Vector3d& dims) const {
  if ((dims.array() <= 0.0).any()) {
    throw ValidationError("box '" + name + "' must have positive dimensions");
  }
  require_unused(name);
  Scene out = *this;
  SceneObject obj;
  obj.name = name;
  obj.shape = SceneObject::Shape::kBox;
  obj.pose = pose;
  obj.dims = dims;
  out.objects_.push_back(std::move(obj));
  return out;
}

Scene Scene::add_capsule(const std::string& name, const RigidTransform& pose,
                         const Capsule& capsule) const {
  if (!(capsule.radius > 0.0)) {
    throw ValidationError("capsule '" + name + "' must have positive radius");
  }
  require_unused(name);
  Scene out = *this;
  SceneObject obj;
  obj.name = name;
  obj.shape = SceneObject::Shape::kCapsule;
  obj.pose = pose;
  obj.capsule = capsule;
  out.objects_.push_back(std::move(obj));
  return out;
}

Scene Scene::without(const std::string& name) const {
  Scene out = *this;
  out.objects_.erase(
      std::remove_if(out.objects_.begin(), out.objects_.end(),
                     [&](const SceneObject& o) { return o.name == name; }),
      out.objects_.end());
  return out;
}

void Scene::set_riser_height(double h) {
  if (h < 0.0) throw ValidationError("riser height must be >= 0");
  riser_height_ = h;
}

void Scene::require_unused(const std::string& name) const {
  for (const auto& o : objects_) {
    if (o.name == name) {
      throw DuplicateNameError("scene object '" + name + "' already exists");
    }
  }
}

std::vector<Capsule> arm_capsules(const Scene& scene, const ArmDescription& arm,
                                  const JointConfig& q) {
  const ArmCollisionModel& model = scene.arm_model();
  const auto frames = chain_frames(arm, q);
  const RigidTransform& flange = frames[kNumJoints];

  std::vector<Capsule> caps;
  caps.reserve(9);
  // Base column starts above the bolted pedestal.
  caps.push_back(Capsule{Vector3d(0.0, 0.0, model.base_lift_m),
                         frames[1].translation,
                         model.link_radii[0] * model.padding});
  for (int i = 1; i <= 6; ++i) {
    caps.push_back(Capsule{frames[i].translation, frames[i + 1].translation,
                           model.link_radii[i] * model.padding});
  }
  caps.push_back(Capsule{flange * model.collar_a, flange * model.collar_b,
                         model.link_radii[7] * model.padding});
  caps.push_back(Capsule{flange * model.bracket.a, flange * model.bracket.b,
                         model.bracket.radius});
  return caps;
}

double segment_segment_distance(const Vector3d& p1, const Vector3d& q1,
                                const Vector3d& p2, const Vector3d& q2) {
  // Closest points of two segments (Ericson 5.1.9).
  const Vector3d d1 = q1 - p1;
  const Vector3d d2 = q2 - p2;
  const Vector3d r = p1 - p2;
  const double a = d1.dot(d1);
  const double e = d2.dot(d2);
  const double f = d2.dot(r);
  constexpr double kEps = 1e-12;

  double s = 0.0, t = 0.0;
  if (a <= kEps && e <= kEps) {
    return r.norm();
  }
  if (a <= kEps) {
    t = clamp01(f / e);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = clamp01(-c / a);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps ? clamp01((b * f - c * e) / denom) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = clamp01(-c / a);
      } else if (t > 1.0) {
        t = 1.0;
        s = clamp01((b - c) / a);
      }
    }
  }
  return (p1 + d1 * s - (p2 + d2 * t)).norm();
}

double segment_box_distance(const Vector3d& a, const Vector3d& b,
                            const RigidTransform& box_pose,
                            const Vector3d& dims) {
  const RigidTransform inv = box_pose.inverse();
  const Vector3d pa = inv * a;
  const Vector3d pb = inv * b;
  const Vector3d half = dims * 0.5;

  const auto eval = [&](double t) {
    return point_box_distance(pa + t * (pb - pa), half);
  };
  // Distance to a convex body along an affine path is convex in t.
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (eval(m1) <= eval(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::min({eval((lo + hi) / 2.0), eval(0.0), eval(1.0)});
}

namespace {

double capsule_object_distance(const Capsule& cap, const SceneObject& obj) {
  if (obj.shape == SceneObject::Shape::kBox) {
    return segment_box_distance(cap.a, cap.b, obj.pose, obj.dims) - cap.radius;
  }
  const Vector3d oa = obj.pose * obj.capsule.a;
  const Vector3d ob = obj.pose * obj.capsule.b;
  return segment_segment_distance(cap.a, cap.b, oa, ob) - cap.radius -
         obj.capsule.radius;
}

// Self-collision screening: pairs whose effective chain distance (index gap
// minus zero-length links between them) is <= 2 are exempt, as is the
// bracket against the wrist assembly. Mirrors an allowed-collision matrix
// for this capsule decomposition.
bool self_pair_checked(int i, int j, const std::vector<Capsule>& caps) {
  int degenerate_between = 0;
  for (int k = i + 1; k < j; ++k) {
    if ((caps[k].b - caps[k].a).norm() < 1e-9) ++degenerate_between;
  }
  return (j - i - degenerate_between) > 2;
}

}  // namespace

CollisionReport in_collision(const Scene& scene, const ArmDescription& arm,
                             const JointConfig& q) {
  arm.require_within_limits(q);
  const std::vector<Capsule> caps = arm_capsules(scene, arm, q);
  static const char* kCapNames[] = {"link0", "link1", "link2", "link3",
                                    "link4", "link5", "link6", "link7",
                                    "bracket"};

  CollisionReport report;
  for (std::size_t c = 0; c < caps.size(); ++c) {
    for (const SceneObject& obj : scene.objects()) {
      if (capsule_object_distance(caps[c], obj) <= 0.0) {
        report.colliding = true;
        report.first_a = kCapNames[c];
        report.first_b = obj.name;
        return report;
      }
    }
  }

  const int bracket_idx = 8;
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      if (!self_pair_checked(i, j, caps)) continue;
      const double d =
          segment_segment_distance(caps[i].a, caps[i].b, caps[j].a,
                                   caps[j].b) -
          caps[i].radius - caps[j].radius;
      if (d <= 0.0) {
        report.colliding = true;
        report.first_a = kCapNames[i];
        report.first_b = kCapNames[j];
        return report;
      }
    }
  }
  // Bracket against the lower chain (the wrist assembly carries it).
  for (int i = 0; i <= 3; ++i) {
    const double d = segment_segment_distance(caps[i].a, caps[i].b,
                                              caps[bracket_idx].a,
                                              caps[bracket_idx].b) -
                     caps[i].radius - caps[bracket_idx].radius;
    if (d <= 0.0) {
      report.colliding = true;
      report.first_a = kCapNames[i];
      report.first_b = kCapNames[bracket_idx];
      return report;
    }
  }
  return report;
}

bool segment_in_collision(const Scene& scene, const ArmDescription& arm,
                          const JointConfig& q_a, const JointConfig& q_b,
                          double resolution_rad) {
  if (!(resolution_rad > 0.0)) {
    throw ValidationError("edge-check resolution must be positive");
  }
  const double span = (q_b.q - q_a.q).cwiseAbs().maxCoeff();
  const int steps = std::max(1, static_cast<int>(std::ceil(span / resolution_rad)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const JointConfig qi(q_a.q + t * (q_b.q - q_a.q));
    if (in_collision(scene, arm, qi)) return true;
  }
  return false;
}

double default_scan_center_z(double riser_height) {
  // DUT top plus probe standoff.
  return riser_height + 0.05 + 0.05;
}

Scene default_scene(double riser_height) {
  Scene scene;
  scene.set_riser_height(riser_height);
  RigidTransform table_pose;
  table_pose.translation = Vector3d(0.35, 0.0, -0.375);
  scene = scene.add_box("table", table_pose, Vector3d(1.2, 0.8, 0.75));
  if (riser_height > 0.0) {
    RigidTransform riser_pose;
    riser_pose.translation = Vector3d(0.45, 0.0, riser_height / 2.0);
    scene = scene.add_box("riser", riser_pose,
                          Vector3d(0.08, 0.08, riser_height));
  }
  RigidTransform dut_pose;
  dut_pose.translation = Vector3d(0.45, 0.0, riser_height + 0.025);
  scene = scene.add_box("dut", dut_pose, Vector3d(0.05, 0.05, 0.05));
  return scene;
}

Scene load_scene_file(const std::string& path) {
  const ConfigFile cfg = ConfigFile::parse_file(path);
  Scene scene;
  scene.set_riser_height(cfg.get_double_or("", "riser_height", 0.0));

  ArmCollisionModel model;
  if (cfg.has("arm_collision", "link_radii")) {
    const auto radii = cfg.get_double_list("arm_collision", "link_radii");
    if (radii.size() != model.link_radii.size()) {
      throw ValidationError(path + ": link_radii must list 8 values");
    }
    std::copy(radii.begin(), radii.end(), model.link_radii.begin());
  }
  model.base_lift_m =
      cfg.get_double_or("arm_collision", "base_lift", model.base_lift_m);
  model.padding = cfg.get_double_or("arm_collision", "padding", model.padding);
  if (cfg.has("arm_collision", "bracket_a")) {
    const auto a = cfg.get_double_list("arm_collision", "bracket_a");
    const auto b = cfg.get_double_list("arm_collision", "bracket_b");
    if (a.size() != 3 || b.size() != 3) {
      throw ValidationError(path + ": bracket endpoints must be 3-vectors");
    }
    model.bracket.a = Vector3d(a[0], a[1], a[2]);
    model.bracket.b = Vector3d(b[0], b[1], b[2]);
    model.bracket.radius = cfg.get_double_or("arm_collision", "bracket_radius",
                                             model.bracket.radius);
  }
  scene.set_arm_model(model);

  for (const auto& sec : cfg.sections()) {
    if (sec.name.rfind("object:", 0) != 0) continue;
    const std::string name = sec.name.substr(7);
    const auto xyz = cfg.get_double_list(sec.name, "xyz");
    const auto rpy = cfg.get_double_list(sec.name, "rpy");
    if (xyz.size() != 3 || rpy.size() != 3) {
      throw ValidationError(path + ": object '" + name +
                            "' needs xyz and rpy 3-vectors");
    }
    RigidTransform pose;
    pose.rotation = rotation_from_euler(rpy[2], rpy[1], rpy[0]);
    pose.translation = Vector3d(xyz[0], xyz[1], xyz[2]);
    const std::string shape = cfg.get_string_or(sec.name, "shape", "box");
    if (shape == "box") {
      const auto dims = cfg.get_double_list(sec.name, "dims");
      if (dims.size() != 3) {
        throw ValidationError(path + ": box '" + name + "' needs 3 dims");
      }
      scene = scene.add_box(name, pose, Vector3d(dims[0], dims[1], dims[2]));
    } else if (shape == "capsule") {
      const auto a = cfg.get_double_list(sec.name, "endpoint_a");
      const auto b = cfg.get_double_list(sec.name, "endpoint_b");
      if (a.size() != 3 || b.size() != 3) {
        throw ValidationError(path + ": capsule '" + name +
                              "' needs endpoint_a/endpoint_b");
      }
      Capsule c{Vector3d(a[0], a[1], a[2]), Vector3d(b[0], b[1], b[2]),
                cfg.get_double(sec.name, "radius")};
      scene = scene.add_capsule(name, pose, c);
    } else {
      throw ValidationError(path + ": unknown shape '" + shape + "'");
    }
  }
  return scene;
}

void save_scene_file(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene file " + path);
  out.precision(17);
  out << "riser_height = " << scene.riser_height() << "\n";
  const ArmCollisionModel& m = scene.arm_model();
  out << "\n[arm_collision]\n";
  out << "link_radii = " << format_double_list({m.link_radii.begin(),
                                                m.link_radii.end()})
      << "\n";
  out << "base_lift = " << m.base_lift_m << "\n";
  out << "padding = " << m.padding << "\n";
  out << "bracket_a = "
      << format_double_list({m.bracket.a.x(), m.bracket.a.y(), m.bracket.a.z()})
      << "\n";
  out << "bracket_b = "
      << format_double_list({m.bracket.b.x(), m.bracket.b.y(), m.bracket.b.z()})
      << "\n";
  out << "bracket_radius = " << m.bracket.radius << "\n";
  for (const SceneObject& obj : scene.objects()) {
    out << "\n[object:" << obj.name << "]\n";
    out << "xyz = "
        << format_double_list({obj.pose.translation.x(),
                               obj.pose.translation.y(),
                               obj.pose.translation.z()})
        << "\n";
    // Store orientation as roll/pitch/yaw (x, y, z) in degrees.
    const Matrix3d& r = obj.pose.rotation;
    const double pitch = std::asin(-std::min(1.0, std::max(-1.0, r(2, 0))));
    double roll = 0.0, yaw = 0.0;
    if (std::abs(std::cos(pitch)) > 1e-9) {
      roll = std::atan2(r(2, 1), r(2, 2));
      yaw = std::atan2(r(1, 0), r(0, 0));
    }
    out << "rpy = "
        << format_double_list(
               {roll * kRadToDeg, pitch * kRadToDeg, yaw * kRadToDeg})
        << "\n";
    if (obj.shape == SceneObject::Shape::kBox) {
      out << "shape = box\n";
      out << "dims = "
          << format_double_list({obj.dims.x(), obj.dims.y(), obj.dims.z()})
          << "\n";
    } else {
      out << "shape = capsule\n";
      out << "endpoint_a = "
          << format_double_list({obj.capsule.a.x(), obj.capsule.a.y(),
                                 obj.capsule.a.z()})
          << "\n";
      out << "endpoint_b = "
          << format_double_list({obj.capsule.b.x(), obj.capsule.b.y(),
                                 obj.capsule.b.z()})
          << "\n";
      out << "radius = " << obj.capsule.radius << "\n";
    }
  }
  if (!out) throw IoError("failed writing scene file " + path);
}

}  // namespace raptar
