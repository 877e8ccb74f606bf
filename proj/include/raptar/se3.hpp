#pragma once

#include <Eigen/Dense>
#include <vector>

#include "raptar/errors.hpp"

namespace raptar {

using Eigen::Matrix3d;
using Eigen::Matrix4d;
using Eigen::Vector3d;

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kRadToDeg = 57.29577951308232;

// Hard polar limit for scan grids (bracket geometry cannot point past this).
constexpr double kMaxPolarDeg = 70.0;

// Rounds to the canonical 1e-6 grid used for every serialized coordinate
// (wire protocol, CSV logs, metric keys), so values survive text round trips
// bit-for-bit.
double round6(double v);

/// Element of SE(3): orthonormal rotation plus translation in meters.
struct RigidTransform {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d translation = Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  // Composition this ∘ rhs. Re-orthonormalizes lazily if numeric drift in the
  // product exceeds 1e-9 (only reachable after very long chains).
  RigidTransform operator*(const RigidTransform& rhs) const;

  // Applies the transform to a point.
  Vector3d operator*(const Vector3d& p) const {
    return rotation * p + translation;
  }

  RigidTransform inverse() const;

  Matrix4d matrix() const;

  // max(‖RᵀR − I‖∞, |det R − 1|)
  double orthonormality_error() const;

  // Nearest rotation by polar decomposition (SVD).
  void renormalize();

  bool approx_equal(const RigidTransform& other, double tol = 1e-9) const;
};

/// Probe bracket mounted on the flange: intrinsic Z-Y-X Euler angles in
/// degrees plus a translation in meters.
struct BracketOffset {
  double yaw_deg = -100.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  double x_m = 0.0;
  double y_m = 0.0;
  double z_m = 0.0;

  // Throws ValidationError if an angle falls outside [-180, 180].
  void validate() const;
};

/// One spherical grid coordinate: azimuth φ, polar θ (degrees), radius (m).
struct SphericalCoord {
  double phi_deg = 0.0;
  double theta_deg = 0.0;
  double radius_m = 0.0;

  // Canonical integer key (micro-degree / micro-meter lattice).
  struct Key {
    long long phi_u, theta_u, r_u;
    bool operator==(const Key&) const = default;
    bool operator<(const Key& o) const {
      if (r_u != o.r_u) return r_u < o.r_u;
      if (phi_u != o.phi_u) return phi_u < o.phi_u;
      return theta_u < o.theta_u;
    }
  };
  Key key() const;
};

/// Ordered hemispherical scan lattice: radius-major, then azimuth, then polar.
struct ScanGrid {
  std::vector<SphericalCoord> points;
  double phi_step_deg = 0.0;
  double theta_min_deg = 0.0;
  double theta_max_deg = 0.0;
  double theta_step_deg = 0.0;
  std::vector<double> radii_m;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Intrinsic Z-Y-X Euler composition R_z(yaw)·R_y(pitch)·R_x(roll),
// angles in degrees. Total function; result is orthonormal.
Matrix3d rotation_from_euler(double yaw_deg, double pitch_deg,
                             double roll_deg);

// Pose of the probe on the measurement sphere. Orientation is azimuth yaw
// followed by the polar tilt, chosen so the frame's local -z axis looks back
// at the sphere center for every (φ, θ); translation is the spherical point
// in Cartesian form.
RigidTransform sphere_transform(const SphericalCoord& c);

// Homogeneous bracket offset: rotation_from_euler(yaw, pitch, roll) plus the
// translational offset.
RigidTransform offset_transform(const BracketOffset& b);

// Full target chain: base ∘ sphere ∘ offset, in exactly that order.
RigidTransform final_pose(const RigidTransform& base, const SphericalCoord& c,
                          const BracketOffset& b);

// Azimuth set {0, Δφ, ...} < 360; polar set {θmin .. θmax} inclusive by step;
// full Cartesian product, radius-major ordering. θ=0 rows are kept per φ.
// Throws EmptyGridError when an axis has no values, ValidationError on bad
// steps, radii, or a polar bound past kMaxPolarDeg.
ScanGrid generate_grid(double phi_step_deg, double theta_min_deg,
                       double theta_max_deg, double theta_step_deg,
                       const std::vector<double>& radii_m);

}  // namespace raptar
