#include "raptar/se3.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace raptar {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  if (out.orthonormality_error() > 1e-9) {
    out.renormalize();
  }
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Matrix4d RigidTransform::matrix() const {
  Matrix4d m = Matrix4d::Identity();
  m.block<3, 3>(0, 0) = rotation;
  m.block<3, 1>(0, 3) = translation;
  return m;
}

double RigidTransform::orthonormality_error() const {
  const Matrix3d gram = rotation.transpose() * rotation;
  const double ortho = (gram - Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = std::abs(rotation.determinant() - 1.0);
  return std::max(ortho, det);
}

void RigidTransform::renormalize() {
  Eigen::JacobiSVD<Matrix3d> svd(rotation,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Matrix3d flip = Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  rotation = r;
}

bool RigidTransform::approx_equal(const RigidTransform& other,
                                  double tol) const {
  return (rotation - other.rotation).cwiseAbs().maxCoeff() <= tol &&
         (translation - other.translation).cwiseAbs().maxCoeff() <= tol;
}

void BracketOffset::validate() const {
  for (double a : {yaw_deg, pitch_deg, roll_deg}) {
    if (!(a >= -180.0 && a <= 180.0)) {
      std::ostringstream os;
      os << "bracket Euler angle " << a << " deg outside [-180, 180]";
      throw ValidationError(os.str());
    }
  }
}

SphericalCoord::Key SphericalCoord::key() const {
  return Key{std::llround(phi_deg * 1e6), std::llround(theta_deg * 1e6),
             std::llround(radius_m * 1e6)};
}

Matrix3d rotation_from_euler(double yaw_deg, double pitch_deg,
                             double roll_deg) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(yaw_deg * kDegToRad, Vector3d::UnitZ()) *
          AngleAxisd(pitch_deg * kDegToRad, Vector3d::UnitY()) *
          AngleAxisd(roll_deg * kDegToRad, Vector3d::UnitX()))
      .toRotationMatrix();
}

RigidTransform sphere_transform(const SphericalCoord& c) {
  using Eigen::AngleAxisd;
  const double phi = c.phi_deg * kDegToRad;
  const double theta = c.theta_deg * kDegToRad;
  RigidTransform t;
  // Yaw about z then tilt about the rotated y. The composed frame's +z axis
  // is the outward radial direction, so -z looks at the sphere center from
  // every grid point.
  t.rotation = (AngleAxisd(phi, Vector3d::UnitZ()) *
                AngleAxisd(theta, Vector3d::UnitY()))
                   .toRotationMatrix();
  t.translation = c.radius_m * Vector3d(std::sin(theta) * std::cos(phi),
                                        std::sin(theta) * std::sin(phi),
                                        std::cos(theta));
  return t;
}

RigidTransform offset_transform(const BracketOffset& b) {
  RigidTransform t;
  t.rotation = rotation_from_euler(b.yaw_deg, b.pitch_deg, b.roll_deg);
  t.translation = Vector3d(b.x_m, b.y_m, b.z_m);
  return t;
}

RigidTransform final_pose(const RigidTransform& base, const SphericalCoord& c,
                          const BracketOffset& b) {
  return base * sphere_transform(c) * offset_transform(b);
}

ScanGrid generate_grid(double phi_step_deg, double theta_min_deg,
                       double theta_max_deg, double theta_step_deg,
                       const std::vector<double>& radii_m) {
  if (!(phi_step_deg > 0.0) || !(theta_step_deg > 0.0)) {
    throw ValidationError("grid step sizes must be positive");
  }
  if (theta_min_deg < 0.0) {
    throw ValidationError("theta_min must be >= 0 deg");
  }
  if (theta_max_deg > kMaxPolarDeg + 1e-9) {
    std::ostringstream os;
    os << "theta_max " << theta_max_deg << " deg exceeds the " << kMaxPolarDeg
       << " deg polar limit";
    throw ValidationError(os.str());
  }
  for (double r : radii_m) {
    if (!(r > 0.0)) {
      throw ValidationError("grid radius must be positive");
    }
  }
  std::set<long long> radius_keys;
  for (double r : radii_m) {
    if (!radius_keys.insert(std::llround(r * 1e6)).second) {
      throw ValidationError("duplicate radius in grid radii list");
    }
  }

  std::vector<double> phis;
  for (int k = 0;; ++k) {
    const double phi = k * phi_step_deg;
    if (phi >= 360.0 - 1e-9) break;
    phis.push_back(round6(phi));
  }
  std::vector<double> thetas;
  for (int k = 0;; ++k) {
    const double theta = theta_min_deg + k * theta_step_deg;
    if (theta > theta_max_deg + 1e-9) break;
    thetas.push_back(round6(theta));
  }

  if (phis.empty() || thetas.empty() || radii_m.empty()) {
    throw EmptyGridError("scan grid axis yields no values");
  }

  ScanGrid grid;
  grid.phi_step_deg = phi_step_deg;
  grid.theta_min_deg = theta_min_deg;
  grid.theta_max_deg = theta_max_deg;
  grid.theta_step_deg = theta_step_deg;
  grid.radii_m = radii_m;
  grid.points.reserve(phis.size() * thetas.size() * radii_m.size());
  for (double r : radii_m) {
    const double rc = round6(r);
    for (double phi : phis) {
      for (double theta : thetas) {
        grid.points.push_back(SphericalCoord{phi, theta, rc});
      }
    }
  }
  return grid;
}

}  // namespace raptar
