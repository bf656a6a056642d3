#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpiv/geometry.h"
#include "mpiv/image.h"
#include "mpiv/mpi.h"

namespace mpiv {

enum class TextureKind { kSolid, kGradient, kChecker, kNoise };

const char* to_string(TextureKind kind);
TextureKind parse_texture_kind(const std::string& s);

/// A textured fronto-parallel rectangle at z = depth in the scene frame (the
/// reference camera frame). Texture coordinates are normalized against the
/// extent, so the pattern scales with the rectangle.
struct SceneLayer {
  double depth = 1.0;
  double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;
  TextureKind texture = TextureKind::kSolid;
  std::uint64_t seed = 0;
  double alpha = 1.0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Layered test scene: finite rectangles over an infinite background plane.
/// All procedural textures are smooth (sums of sinusoids / affine ramps), so
/// resampling comparisons are meaningful away from the rectangle silhouettes.
struct SyntheticScene {
  std::vector<SceneLayer> layers;
  SceneLayer background;  // extent sets the texture scale; coverage is infinite
};

/// Continuous texture lookup at normalized extent coordinates; smooth in
/// (s, t) and bounded to (0, 1).
Eigen::Vector3d sample_texture(const SceneLayer& layer, double s, double t);

Eigen::Vector3d texture_at_point(const SceneLayer& layer, double x, double y);

/// Brute-force renderer: per-pixel ray/plane intersection front-to-back with
/// 2x2 supersampling and a box filter. Where edge_mask is supplied it marks
/// pixels whose subsamples straddle a layer silhouette, dilated by 2 px.
Image3d oracle_render(const SyntheticScene& scene, const Camera& cam,
                      MaskXb* edge_mask = nullptr);

void validate_scene(const SyntheticScene& scene, const DepthPlanes& depth_planes);

/// Scene description file: `background <depth> <texture> <seed>` and
/// `layer <depth> <x0> <y0> <x1> <y1> <texture> <seed> <alpha>` lines.
SyntheticScene parse_scene(const std::string& text);
std::string serialize_scene(const SyntheticScene& scene);
SyntheticScene load_scene(const std::string& path);

namespace detail {

int matching_plane_index(double depth, const DepthPlanes& planes);

}  // namespace detail

/// Rasterizes each layer into the depth plane it sits on; every other plane
/// stays fully transparent. Layer depths must coincide with plane depths.
template <typename T>
MultiplaneImage<T> scene_to_mpi(const SyntheticScene& scene, const DepthPlanes& depth_planes,
                                const Camera& ref_cam) {
  const Eigen::Index h = ref_cam.intrinsics.height;
  const Eigen::Index w = ref_cam.intrinsics.width;
  MultiplaneImage<T> mpi;
  mpi.depth_planes = depth_planes;
  mpi.ref_camera = ref_cam;
  mpi.planes.resize(depth_planes.count());
  for (auto& plane : mpi.planes) {
    plane.color.setZero(h, w);
    plane.alpha = Channel<T>::Zero(h, w);
  }

  // Background first so same-plane layers composite over it.
  std::vector<const SceneLayer*> order{&scene.background};
  for (const SceneLayer& layer : scene.layers) order.push_back(&layer);

  for (const SceneLayer* layer : order) {
    const int plane_index = detail::matching_plane_index(layer->depth, depth_planes);
    if (plane_index < 0)
      throw std::invalid_argument("scene_to_mpi: layer depth matches no plane depth");
    MpiPlane<T>& plane = mpi.planes[plane_index];
    const bool is_background = layer == &scene.background;
    const double layer_alpha = is_background ? 1.0 : layer->alpha;
    for (Eigen::Index v = 0; v < h; ++v) {
      for (Eigen::Index u = 0; u < w; ++u) {
        const Eigen::Vector3d point =
            ref_cam.unproject(double(u), double(v), layer->depth);
        if (!is_background && !layer->contains(point.x(), point.y())) continue;
        const Eigen::Vector3d color = texture_at_point(*layer, point.x(), point.y());
        // Straight-alpha source-over onto whatever the plane already holds.
        const T a_top = T(layer_alpha);
        const T a_under = plane.alpha(v, u);
        const T a_out = a_top + a_under * (T(1) - a_top);
        if (a_out > 0)
          for (int k = 0; k < 3; ++k)
            plane.color.ch[k](v, u) =
                (a_top * T(color[k]) +
                 a_under * (T(1) - a_top) * plane.color.ch[k](v, u)) /
                a_out;
        plane.alpha(v, u) = a_out;
      }
    }
  }
  return mpi;
}

}  // namespace mpiv
