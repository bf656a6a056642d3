#include "mpiv/geometry.h"

#include <cmath>

namespace mpiv {

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

Eigen::Matrix3d Intrinsics::inverse_matrix() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0, -cx / fx, 0, 1.0 / fy, -cy / fy, 0, 0, 1;
  return k;
}

void Intrinsics::validate() const {
  detail::require(fx > 0 && fy > 0, "intrinsics: focal lengths must be positive");
  detail::require(width >= 1 && height >= 1, "intrinsics: image size must be at least 1x1");
  detail::require(cx >= 0 && cx <= width && cy >= 0 && cy <= height,
                  "intrinsics: principal point outside the image");
}

Intrinsics Intrinsics::scaled(int new_width, int new_height) const {
  const double sx = double(new_width) / double(width);
  const double sy = double(new_height) / double(height);
  return {fx * sx, fy * sy, cx * sx, cy * sy, new_width, new_height};
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation.transpose() * translation);
  return inv;
}

bool Pose::is_rigid(double tol) const {
  const Eigen::Matrix3d should_be_identity = rotation * rotation.transpose();
  if ((should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Eigen::Vector3d Camera::project(const Eigen::Vector3d& world_point) const {
  const Eigen::Vector3d cam = world_from_camera.inverse().apply(world_point);
  return {intrinsics.fx * cam.x() / cam.z() + intrinsics.cx,
          intrinsics.fy * cam.y() / cam.z() + intrinsics.cy, cam.z()};
}

Eigen::Vector3d Camera::unproject(double u, double v, double depth) const {
  const Eigen::Vector3d cam((u - intrinsics.cx) / intrinsics.fx * depth,
                            (v - intrinsics.cy) / intrinsics.fy * depth, depth);
  return world_from_camera.apply(cam);
}

DepthPlanes make_depth_planes(double near, double far, int count) {
  if (!(near > 0) || !(far > near)) throw std::invalid_argument("make_depth_planes: need far > near > 0");
  if (count < 2) throw std::invalid_argument("make_depth_planes: need at least 2 planes");

  const double disp_near = 1.0 / near;
  const double disp_far = 1.0 / far;
  DepthPlanes planes;
  planes.near = near;
  planes.far = far;
  planes.depths.resize(count);
  planes.depths.front() = far;
  planes.depths.back() = near;
  for (int k = 1; k + 1 < count; ++k) {
    const double disparity = disp_far + (double(k) / double(count - 1)) * (disp_near - disp_far);
    planes.depths[k] = 1.0 / disparity;
  }
  return planes;
}

Pose relative_pose(const Camera& src, const Camera& tgt) {
  Pose rel;
  rel.rotation = tgt.world_from_camera.rotation.transpose() * src.world_from_camera.rotation;
  rel.translation = tgt.world_from_camera.rotation.transpose() *
                    (src.world_from_camera.translation - tgt.world_from_camera.translation);
  return rel;
}

Eigen::Matrix3d inverse_homography(const Camera& src_cam, const Camera& tgt_cam,
                                   double plane_depth) {
  detail::require(plane_depth > 0, "inverse_homography: plane depth must be positive");

  // Plane n.x + a = 0 fronto-parallel to the source camera.
  const Eigen::RowVector3d n(0, 0, 1);
  const double a = -plane_depth;

  const Pose rel = relative_pose(src_cam, tgt_cam);  // target-from-source
  const Eigen::Matrix3d r_inv = rel.rotation.transpose();
  const Eigen::Vector3d r_inv_t = r_inv * rel.translation;

  const double denom = a - n * r_inv_t;
  if (std::abs(denom) < 1e-12)
    throw NumericError("inverse_homography: target camera center lies on the plane");

  const Eigen::Matrix3d m = r_inv + (r_inv_t * (n * r_inv)) / denom;
  Eigen::Matrix3d h = src_cam.intrinsics.matrix() * m * tgt_cam.intrinsics.inverse_matrix();
  if (std::isfinite(h(2, 2)) && std::abs(h(2, 2)) > 1e-12) h /= h(2, 2);
  return h;
}

}  // namespace mpiv
