#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mpiv/errors.h"

namespace mpiv {

/// Pinhole intrinsics in pixel units. Pixel convention: (u,v) = (column,row),
/// origin at the center of the top-left pixel, integer coordinates are pixel
/// centers.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Eigen::Matrix3d matrix() const;
  Eigen::Matrix3d inverse_matrix() const;
  void validate() const;

  /// Rescales to a new resolution, keeping the field of view.
  Intrinsics scaled(int new_width, int new_height) const;

  bool operator==(const Intrinsics&) const = default;
};

/// Rigid transform x_out = R * x_in + t. Whether it maps camera-to-world or
/// world-to-camera is stated wherever a Pose is used.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  Pose inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation * x + translation; }

  /// True when R is orthonormal with det +1 within tol.
  bool is_rigid(double tol = 1e-9) const;

  bool operator==(const Pose& o) const {
    return rotation == o.rotation && translation == o.translation;
  }
};

/// a after b: x -> a(b(x)).
Pose compose(const Pose& a, const Pose& b);

struct Camera {
  Intrinsics intrinsics;
  Pose world_from_camera;

  Eigen::Vector3d position() const { return world_from_camera.translation; }

  /// Projects a world point; returns (u, v, depth_in_camera).
  Eigen::Vector3d project(const Eigen::Vector3d& world_point) const;

  /// World point on the ray through pixel (u,v) at the given camera depth.
  Eigen::Vector3d unproject(double u, double v, double depth) const;

  bool operator==(const Camera&) const = default;
};

/// Plane depths in meters ordered back-to-front (far to near), equally spaced
/// in disparity (inverse depth).
struct DepthPlanes {
  std::vector<double> depths;
  double near = 0.0;
  double far = 0.0;

  int count() const { return static_cast<int>(depths.size()); }

  bool operator==(const DepthPlanes&) const = default;
};

/// depths[k] = 1 / (1/far + (k/(count-1)) * (1/near - 1/far)), endpoints exact.
DepthPlanes make_depth_planes(double near, double far, int count);

/// Transform taking source-camera coordinates to target-camera coordinates.
Pose relative_pose(const Camera& src, const Camera& tgt);

/// Maps target pixels to source pixels through the plane fronto-parallel to
/// the source camera at plane_depth: [u_s,v_s,1]^T ~ H [u_t,v_t,1]^T.
/// Normalized so H(2,2) = 1. Throws NumericError when the target camera
/// center lies on the plane.
Eigen::Matrix3d inverse_homography(const Camera& src_cam, const Camera& tgt_cam,
                                   double plane_depth);

}  // namespace mpiv
