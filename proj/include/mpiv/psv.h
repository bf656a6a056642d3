#pragma once

#include <vector>

#include "mpiv/geometry.h"
#include "mpiv/image.h"
#include "mpiv/parallel.h"
#include "mpiv/render.h"

namespace mpiv {

/// The second input reprojected onto each reference-frame depth plane.
/// Agreement between a slice and the reference image peaks at the true depth.
template <typename T>
struct PlaneSweepVolume {
  std::vector<Image3<T>> slices;
  std::vector<MaskXb> valid;
  DepthPlanes depth_planes;
  Camera ref_camera;

  int slice_count() const { return static_cast<int>(slices.size()); }
};

/// Cost assigned to pixels no slice could observe; above any achievable L1
/// color difference.
template <typename T>
constexpr T kInvalidAgreementCost = T(2);

/// Reprojects image2 into the reference camera at every plane depth. Slice d
/// lives in the reference pixel grid; its pixel map goes through the plane
/// fronto-parallel to the reference camera at depths[d].
template <typename T>
PlaneSweepVolume<T> build_psv(const Image3<T>& image2, const Camera& cam2,
                              const Camera& ref_cam, const DepthPlanes& depth_planes) {
  detail::require(image2.height() == cam2.intrinsics.height &&
                      image2.width() == cam2.intrinsics.width,
                  "build_psv: image does not match camera resolution");
  const int d_count = depth_planes.count();
  const Eigen::Index out_h = ref_cam.intrinsics.height;
  const Eigen::Index out_w = ref_cam.intrinsics.width;
  const bool same_camera = cam2 == ref_cam;

  // Reference pixel -> image2 pixel, for the plane at depths[d] in the
  // reference frame. This is the inverse of the map used when rendering a
  // reference-frame plane into cam2.
  std::vector<Eigen::Matrix3d> maps(d_count);
  for (int d = 0; d < d_count; ++d) {
    if (same_camera) {
      maps[d] = Eigen::Matrix3d::Identity();
    } else {
      Eigen::Matrix3d h = inverse_homography(ref_cam, cam2, depth_planes.depths[d]).inverse();
      if (std::isfinite(h(2, 2)) && std::abs(h(2, 2)) > 1e-12) h /= h(2, 2);
      maps[d] = h;
    }
  }

  PlaneSweepVolume<T> psv;
  psv.depth_planes = depth_planes;
  psv.ref_camera = ref_cam;
  psv.slices.resize(d_count);
  psv.valid.resize(d_count);
  const Channel<T> opaque = Channel<T>::Ones(image2.height(), image2.width());
  parallel_for(d_count, [&](int d) {
    WarpedPlane<T> warped = warp_plane(image2, opaque, maps[d], out_h, out_w);
    psv.slices[d] = std::move(warped.color);
    psv.valid[d] = std::move(warped.valid);
  });
  return psv;
}

/// Per-pixel, per-plane mean absolute color difference between the reference
/// image and each slice. Pixels a slice never observed get the invalid cost.
template <typename T>
std::vector<Channel<T>> psv_agreement_map(const Image3<T>& image1,
                                          const PlaneSweepVolume<T>& psv) {
  detail::require(psv.slice_count() > 0, "psv_agreement_map: empty volume");
  detail::require(image1.height() == psv.slices[0].height() &&
                      image1.width() == psv.slices[0].width(),
                  "psv_agreement_map: shape mismatch");
  std::vector<Channel<T>> cost(psv.slice_count());
  for (int d = 0; d < psv.slice_count(); ++d) {
    Channel<T> c = ((image1.ch[0] - psv.slices[d].ch[0]).abs() +
                    (image1.ch[1] - psv.slices[d].ch[1]).abs() +
                    (image1.ch[2] - psv.slices[d].ch[2]).abs()) /
                   T(3);
    cost[d] = psv.valid[d].select(c, Channel<T>::Constant(c.rows(), c.cols(),
                                                          kInvalidAgreementCost<T>));
  }
  return cost;
}

/// Softmax over negative agreement costs, turned into alpha logits. A cheap
/// depth-guided starting point for the optimizer; pixels whose costs barely
/// vary stay near uniform.
template <typename T>
std::vector<Channel<T>> alpha_logits_from_agreement(const std::vector<Channel<T>>& cost,
                                                    T temperature = T(0.1),
                                                    T logit_clamp = T(4)) {
  detail::require(!cost.empty(), "alpha_logits_from_agreement: empty cost volume");
  const Eigen::Index h = cost[0].rows(), w = cost[0].cols();
  const int d_count = static_cast<int>(cost.size());

  Channel<T> max_score = Channel<T>::Constant(h, w, std::numeric_limits<T>::lowest());
  for (const auto& c : cost) max_score = max_score.max(-c / temperature);
  Channel<T> denom = Channel<T>::Zero(h, w);
  for (const auto& c : cost) denom += (-c / temperature - max_score).exp();

  std::vector<Channel<T>> logits(d_count);
  for (int d = 0; d < d_count; ++d) {
    Channel<T> p = (-cost[d] / temperature - max_score).exp() / denom;
    p = p.min(T(1) - T(1e-6)).max(T(1e-6));
    logits[d] = (p / (T(1) - p)).log().min(logit_clamp).max(-logit_clamp);
  }
  return logits;
}

}  // namespace mpiv
