#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mpiv/geometry.h"
#include "mpiv/image.h"
#include "mpiv/mpi.h"
#include "mpiv/parallel.h"

namespace mpiv {

/// A source plane resampled into a target view. alpha is 0 wherever valid is
/// false, so compositing needs no special casing for out-of-bounds samples.
template <typename T>
struct WarpedPlane {
  Image3<T> color;
  Channel<T> alpha;
  MaskXb valid;
};

/// Bilinear footprint of each target pixel in the source image, kept so the
/// backward pass can scatter gradients to the same four corners.
template <typename T>
struct WarpCache {
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x0, y0;
  Channel<T> fx, fy;  // fractional offsets in [0,1]
  MaskXb valid;
  Eigen::Index src_height = 0, src_width = 0;
};

/// Gradients of a scalar loss with respect to source-plane colors and alphas,
/// indexed back-to-front like the MPI itself.
template <typename T>
struct RenderGradients {
  std::vector<Image3<T>> d_color;
  std::vector<Channel<T>> d_alpha;
};

/// Forward-pass output plus everything the backward pass reuses.
template <typename T>
struct RenderResult {
  Image3<T> image;
  Channel<T> accum_alpha;  // composited opacity; 0 where every plane was transparent
  std::vector<WarpedPlane<T>> warped;
  std::vector<WarpCache<T>> caches;
  Camera target_camera;
};

/// Resamples one RGBA plane through the pixel map h (target pixel -> source
/// pixel). Samples whose source position leaves [0,W-1]x[0,H-1] are invalid
/// and come back fully transparent.
template <typename T>
WarpedPlane<T> warp_plane(const Image3<T>& color, const Channel<T>& alpha,
                          const Eigen::Matrix3d& h, Eigen::Index out_h, Eigen::Index out_w,
                          WarpCache<T>* cache = nullptr) {
  detail::require(h.allFinite(), "warp_plane: homography must be finite");
  detail::require(out_h >= 1 && out_w >= 1, "warp_plane: empty output");
  detail::require(color.height() == alpha.rows() && color.width() == alpha.cols(),
                  "warp_plane: color/alpha shape mismatch");
  const Eigen::Index src_h = alpha.rows(), src_w = alpha.cols();

  WarpedPlane<T> out;
  out.color.setZero(out_h, out_w);
  out.alpha = Channel<T>::Zero(out_h, out_w);
  out.valid = MaskXb::Constant(out_h, out_w, false);
  if (cache) {
    cache->x0.setZero(out_h, out_w);
    cache->y0.setZero(out_h, out_w);
    cache->fx = Channel<T>::Zero(out_h, out_w);
    cache->fy = Channel<T>::Zero(out_h, out_w);
    cache->valid = MaskXb::Constant(out_h, out_w, false);
    cache->src_height = src_h;
    cache->src_width = src_w;
  }

  for (Eigen::Index v = 0; v < out_h; ++v) {
    // Row-start homogeneous coordinates; each column advances by h(.,0).
    double sx = h(0, 1) * double(v) + h(0, 2);
    double sy = h(1, 1) * double(v) + h(1, 2);
    double sw = h(2, 1) * double(v) + h(2, 2);
    for (Eigen::Index u = 0; u < out_w; ++u, sx += h(0, 0), sy += h(1, 0), sw += h(2, 0)) {
      if (!(sw > 1e-12)) continue;
      const double x = sx / sw;
      const double y = sy / sw;
      if (!(x >= 0.0 && x <= double(src_w - 1) && y >= 0.0 && y <= double(src_h - 1))) continue;

      Eigen::Index x0 = Eigen::Index(x);
      Eigen::Index y0 = Eigen::Index(y);
      if (src_w >= 2 && x0 > src_w - 2) x0 = src_w - 2;
      if (src_h >= 2 && y0 > src_h - 2) y0 = src_h - 2;
      const Eigen::Index x1 = src_w >= 2 ? x0 + 1 : x0;
      const Eigen::Index y1 = src_h >= 2 ? y0 + 1 : y0;
      const T fx = T(x - double(x0));
      const T fy = T(y - double(y0));
      const T w00 = (T(1) - fy) * (T(1) - fx);
      const T w01 = (T(1) - fy) * fx;
      const T w10 = fy * (T(1) - fx);
      const T w11 = fy * fx;

      for (int k = 0; k < 3; ++k) {
        const auto& c = color.ch[k];
        out.color.ch[k](v, u) =
            w00 * c(y0, x0) + w01 * c(y0, x1) + w10 * c(y1, x0) + w11 * c(y1, x1);
      }
      out.alpha(v, u) =
          w00 * alpha(y0, x0) + w01 * alpha(y0, x1) + w10 * alpha(y1, x0) + w11 * alpha(y1, x1);
      out.valid(v, u) = true;
      if (cache) {
        cache->x0(v, u) = int(x0);
        cache->y0(v, u) = int(y0);
        cache->fx(v, u) = fx;
        cache->fy(v, u) = fy;
        cache->valid(v, u) = true;
      }
    }
  }
  return out;
}

/// Back-to-front over compositing: C <- C_d * a_d + C * (1 - a_d).
/// accum_alpha, when requested, receives the composited opacity.
template <typename T>
Image3<T> composite(const std::vector<WarpedPlane<T>>& planes, Channel<T>* accum_alpha = nullptr) {
  detail::require(!planes.empty(), "composite: empty plane list");
  const Eigen::Index h = planes[0].alpha.rows(), w = planes[0].alpha.cols();
  for (const auto& p : planes)
    detail::require(p.alpha.rows() == h && p.alpha.cols() == w,
                    "composite: inconsistent plane sizes");

  Image3<T> out(h, w);
  Channel<T> acc = Channel<T>::Zero(h, w);
  for (const auto& p : planes) {
    for (int k = 0; k < 3; ++k)
      out.ch[k] = p.color.ch[k] * p.alpha + out.ch[k] * (T(1) - p.alpha);
    acc = p.alpha + acc * (T(1) - p.alpha);
  }
  if (accum_alpha) *accum_alpha = acc;
  return out;
}

/// Warps every plane to the target view and composites. Rendering at the
/// reference camera uses exact identity homographies, so it reproduces plane
/// pixels with no resampling error.
template <typename T>
RenderResult<T> render_view(const MultiplaneImage<T>& mpi, const Camera& tgt_cam) {
  detail::require(!mpi.planes.empty(), "render_view: empty MPI");
  detail::require(mpi.plane_count() == mpi.depth_planes.count(),
                  "render_view: plane/depth count mismatch");
  const int d_count = mpi.plane_count();
  const Eigen::Index out_h = tgt_cam.intrinsics.height;
  const Eigen::Index out_w = tgt_cam.intrinsics.width;
  const bool same_camera = tgt_cam == mpi.ref_camera;

  std::vector<Eigen::Matrix3d> maps(d_count);
  for (int d = 0; d < d_count; ++d)
    maps[d] = same_camera
                  ? Eigen::Matrix3d::Identity()
                  : inverse_homography(mpi.ref_camera, tgt_cam, mpi.depth_planes.depths[d]);

  RenderResult<T> result;
  result.warped.resize(d_count);
  result.caches.resize(d_count);
  result.target_camera = tgt_cam;
  parallel_for(d_count, [&](int d) {
    result.warped[d] = warp_plane(mpi.planes[d].color, mpi.planes[d].alpha, maps[d], out_h,
                                  out_w, &result.caches[d]);
  });
  result.image = composite(result.warped, &result.accum_alpha);
  return result;
}

/// Exact adjoint of render_view for the cached forward pass: composite
/// gradients walked front-to-back, then bilinear scatter into each source
/// plane. No gradients with respect to cameras or plane depths.
template <typename T>
RenderGradients<T> render_backward(const MultiplaneImage<T>& mpi, const RenderResult<T>& fwd,
                                   const Image3<T>& d_output) {
  const int d_count = mpi.plane_count();
  detail::require(static_cast<int>(fwd.warped.size()) == d_count &&
                      static_cast<int>(fwd.caches.size()) == d_count,
                  "render_backward: cache does not match this MPI");
  const Eigen::Index out_h = d_output.height(), out_w = d_output.width();
  detail::require(!fwd.warped.empty() && fwd.warped[0].alpha.rows() == out_h &&
                      fwd.warped[0].alpha.cols() == out_w,
                  "render_backward: gradient shape does not match the forward pass");
  for (int d = 0; d < d_count; ++d)
    detail::require(fwd.caches[d].src_height == mpi.planes[d].alpha.rows() &&
                        fwd.caches[d].src_width == mpi.planes[d].alpha.cols(),
                    "render_backward: cache does not match this MPI");

  // Composites of planes strictly behind d, i.e. the canvas each plane was
  // blended over.
  std::vector<Image3<T>> below(d_count);
  Image3<T> canvas(out_h, out_w);
  for (int d = 0; d < d_count; ++d) {
    below[d] = canvas;
    const WarpedPlane<T>& p = fwd.warped[d];
    for (int k = 0; k < 3; ++k)
      canvas.ch[k] = p.color.ch[k] * p.alpha + canvas.ch[k] * (T(1) - p.alpha);
  }

  std::vector<Image3<T>> d_warped_color(d_count);
  std::vector<Channel<T>> d_warped_alpha(d_count);
  Image3<T> g = d_output;
  for (int d = d_count - 1; d >= 0; --d) {
    const WarpedPlane<T>& p = fwd.warped[d];
    d_warped_color[d] = Image3<T>(out_h, out_w);
    Channel<T> da = Channel<T>::Zero(out_h, out_w);
    for (int k = 0; k < 3; ++k) {
      d_warped_color[d].ch[k] = g.ch[k] * p.alpha;
      da += g.ch[k] * (p.color.ch[k] - below[d].ch[k]);
      g.ch[k] *= (T(1) - p.alpha);
    }
    d_warped_alpha[d] = std::move(da);
  }

  RenderGradients<T> grads;
  grads.d_color.resize(d_count);
  grads.d_alpha.resize(d_count);
  parallel_for(d_count, [&](int d) {
    const WarpCache<T>& cache = fwd.caches[d];
    Image3<T> dc(cache.src_height, cache.src_width);
    Channel<T> da = Channel<T>::Zero(cache.src_height, cache.src_width);
    for (Eigen::Index v = 0; v < out_h; ++v) {
      for (Eigen::Index u = 0; u < out_w; ++u) {
        if (!cache.valid(v, u)) continue;
        const Eigen::Index x0 = cache.x0(v, u), y0 = cache.y0(v, u);
        const Eigen::Index x1 = cache.src_width >= 2 ? x0 + 1 : x0;
        const Eigen::Index y1 = cache.src_height >= 2 ? y0 + 1 : y0;
        const T fx = cache.fx(v, u), fy = cache.fy(v, u);
        const T w00 = (T(1) - fy) * (T(1) - fx);
        const T w01 = (T(1) - fy) * fx;
        const T w10 = fy * (T(1) - fx);
        const T w11 = fy * fx;
        const T ga = d_warped_alpha[d](v, u);
        da(y0, x0) += w00 * ga;
        da(y0, x1) += w01 * ga;
        da(y1, x0) += w10 * ga;
        da(y1, x1) += w11 * ga;
        for (int k = 0; k < 3; ++k) {
          const T gc = d_warped_color[d].ch[k](v, u);
          dc.ch[k](y0, x0) += w00 * gc;
          dc.ch[k](y0, x1) += w01 * gc;
          dc.ch[k](y1, x0) += w10 * gc;
          dc.ch[k](y1, x1) += w11 * gc;
        }
      }
    }
    grads.d_color[d] = std::move(dc);
    grads.d_alpha[d] = std::move(da);
  });
  return grads;
}

}  // namespace mpiv
