#pragma once

#include <string>
#include <vector>

#include "mpiv/geometry.h"
#include "mpiv/image.h"

namespace mpiv {

/// How plane colors are produced from the optimization variables.
enum class ColorVariant {
  kNone,        // reference image at every plane
  kSingleImage, // one predicted image shared by all planes
  kBgBlend,     // reference blended with a predicted background, per-plane weights
  kFgBgBlend,   // predicted foreground blended with predicted background
  kAllImages,   // a predicted image per plane
};

inline const char* to_string(ColorVariant v) {
  switch (v) {
    case ColorVariant::kNone: return "none";
    case ColorVariant::kSingleImage: return "single";
    case ColorVariant::kBgBlend: return "bg-blend";
    case ColorVariant::kFgBgBlend: return "fg-bg-blend";
    case ColorVariant::kAllImages: return "all-images";
  }
  return "?";
}

inline ColorVariant parse_color_variant(const std::string& s) {
  if (s == "none") return ColorVariant::kNone;
  if (s == "single") return ColorVariant::kSingleImage;
  if (s == "bg-blend") return ColorVariant::kBgBlend;
  if (s == "fg-bg-blend") return ColorVariant::kFgBgBlend;
  if (s == "all-images") return ColorVariant::kAllImages;
  throw std::invalid_argument("unknown color variant: " + s);
}

inline const std::vector<ColorVariant>& all_color_variants() {
  static const std::vector<ColorVariant> v{
      ColorVariant::kNone, ColorVariant::kSingleImage, ColorVariant::kBgBlend,
      ColorVariant::kFgBgBlend, ColorVariant::kAllImages};
  return v;
}

/// Number of scalar degrees of freedom for a D-plane stack at H x W.
inline long parameter_count(ColorVariant variant, int depth_count, int height, int width) {
  detail::require(depth_count >= 1 && height >= 1 && width >= 1,
                  "parameter_count: dimensions must be positive");
  const long wh = long(width) * long(height);
  const long d = depth_count;
  switch (variant) {
    case ColorVariant::kNone: return wh * d;
    case ColorVariant::kSingleImage: return wh * (d + 3);
    case ColorVariant::kBgBlend: return wh * (2 * d + 3);
    case ColorVariant::kFgBgBlend: return wh * (2 * d + 6);
    case ColorVariant::kAllImages: return wh * 4 * d;
  }
  throw std::invalid_argument("parameter_count: bad variant");
}

template <typename T>
struct MpiPlane {
  Image3<T> color;
  Channel<T> alpha;
};

/// Fronto-parallel RGBA planes at fixed depths in the reference camera frame,
/// ordered back-to-front. Rendered by warping each plane into a target view
/// and over-compositing.
template <typename T>
struct MultiplaneImage {
  std::vector<MpiPlane<T>> planes;
  DepthPlanes depth_planes;
  Camera ref_camera;

  int plane_count() const { return static_cast<int>(planes.size()); }
  Eigen::Index height() const { return planes.empty() ? 0 : planes[0].alpha.rows(); }
  Eigen::Index width() const { return planes.empty() ? 0 : planes[0].alpha.cols(); }
};

/// Unconstrained optimization variables; sigmoid squashing happens in
/// realize(), so every finite assignment is a valid MPI.
template <typename T>
struct MpiParams {
  ColorVariant variant = ColorVariant::kBgBlend;
  std::vector<Channel<T>> alpha_logits;  // D maps
  std::vector<Channel<T>> blend_logits;  // D maps for the blend variants, else empty
  std::vector<Image3<T>> color_logits;   // AllImages: D images; SingleImage: 1
  Image3<T> background_logits;           // BgBlend / FgBgBlend
  Image3<T> foreground_logits;           // FgBgBlend

  int plane_count() const { return static_cast<int>(alpha_logits.size()); }
  Eigen::Index height() const { return alpha_logits.empty() ? 0 : alpha_logits[0].rows(); }
  Eigen::Index width() const { return alpha_logits.empty() ? 0 : alpha_logits[0].cols(); }

  /// Visits every logit block in a fixed order (used by the optimizer).
  template <typename Fn>
  void for_each_block(Fn&& fn) {
    for (auto& a : alpha_logits) fn(a);
    for (auto& b : blend_logits) fn(b);
    for (auto& img : color_logits)
      for (auto& c : img.ch) fn(c);
    if (variant == ColorVariant::kBgBlend || variant == ColorVariant::kFgBgBlend)
      for (auto& c : background_logits.ch) fn(c);
    if (variant == ColorVariant::kFgBgBlend)
      for (auto& c : foreground_logits.ch) fn(c);
  }
};

namespace detail {

template <typename T>
Channel<T> sigmoid(const Channel<T>& x) {
  return T(1) / (T(1) + (-x).exp());
}

template <typename T>
Image3<T> sigmoid(const Image3<T>& x) {
  Image3<T> out;
  for (int k = 0; k < 3; ++k) out.ch[k] = sigmoid(x.ch[k]);
  return out;
}

// logit of the image clamped away from {0,1} so the inverse stays finite.
template <typename T>
Image3<T> clamped_logit(const Image3<T>& img, T lo = T(0.05), T hi = T(0.95)) {
  Image3<T> out;
  for (int k = 0; k < 3; ++k) {
    Channel<T> p = img.ch[k].min(hi).max(lo);
    out.ch[k] = (p / (T(1) - p)).log();
  }
  return out;
}

}  // namespace detail

/// Fresh parameters for a D-plane fit: alpha logits at -2 (mostly transparent),
/// blend logits at +2 (start near the reference), color-bearing logits at the
/// logit of the reference image.
template <typename T>
MpiParams<T> make_mpi_params(ColorVariant variant, int depth_count,
                             const Image3<T>& reference_image) {
  detail::require(depth_count >= 1, "make_mpi_params: need at least one plane");
  const Eigen::Index h = reference_image.height(), w = reference_image.width();
  MpiParams<T> params;
  params.variant = variant;
  params.alpha_logits.assign(depth_count, Channel<T>::Constant(h, w, T(-2)));
  const Image3<T> ref_logit = detail::clamped_logit(reference_image);
  switch (variant) {
    case ColorVariant::kNone:
      break;
    case ColorVariant::kSingleImage:
      params.color_logits.assign(1, ref_logit);
      break;
    case ColorVariant::kBgBlend:
      params.blend_logits.assign(depth_count, Channel<T>::Constant(h, w, T(2)));
      params.background_logits = ref_logit;
      break;
    case ColorVariant::kFgBgBlend:
      params.blend_logits.assign(depth_count, Channel<T>::Constant(h, w, T(2)));
      params.background_logits = ref_logit;
      params.foreground_logits = ref_logit;
      break;
    case ColorVariant::kAllImages:
      params.color_logits.assign(depth_count, ref_logit);
      break;
  }
  return params;
}

/// Same block layout as params, zero-filled; used for gradients and moments.
template <typename T>
MpiParams<T> zeros_like(const MpiParams<T>& params) {
  MpiParams<T> z;
  z.variant = params.variant;
  const Eigen::Index h = params.height(), w = params.width();
  z.alpha_logits.assign(params.alpha_logits.size(), Channel<T>::Zero(h, w));
  z.blend_logits.assign(params.blend_logits.size(), Channel<T>::Zero(h, w));
  z.color_logits.assign(params.color_logits.size(), Image3<T>(h, w));
  if (params.variant == ColorVariant::kBgBlend || params.variant == ColorVariant::kFgBgBlend)
    z.background_logits = Image3<T>(h, w);
  if (params.variant == ColorVariant::kFgBgBlend) z.foreground_logits = Image3<T>(h, w);
  return z;
}

template <typename T>
void check_params_shape(const MpiParams<T>& params, const Image3<T>& reference_image,
                        const DepthPlanes& depth_planes) {
  detail::require(params.plane_count() == depth_planes.count(),
                  "mpi params: plane count does not match depth planes");
  const Eigen::Index h = reference_image.height(), w = reference_image.width();
  for (const auto& a : params.alpha_logits)
    detail::require(a.rows() == h && a.cols() == w, "mpi params: alpha logit shape mismatch");
  for (const auto& b : params.blend_logits)
    detail::require(b.rows() == h && b.cols() == w, "mpi params: blend logit shape mismatch");
  for (const auto& img : params.color_logits)
    detail::require(img.height() == h && img.width() == w,
                    "mpi params: color logit shape mismatch");
}

/// Materializes the RGBA plane stack. alpha_d = sigmoid(alpha_logits_d);
/// colors per variant, with blend variants using
/// C_d = w_d * foreground + (1 - w_d) * background.
template <typename T>
MultiplaneImage<T> realize(const MpiParams<T>& params, const Image3<T>& reference_image,
                           const DepthPlanes& depth_planes, const Camera& ref_camera) {
  check_params_shape(params, reference_image, depth_planes);
  const int d_count = params.plane_count();

  MultiplaneImage<T> mpi;
  mpi.depth_planes = depth_planes;
  mpi.ref_camera = ref_camera;
  mpi.planes.resize(d_count);

  Image3<T> background, foreground, single;
  if (params.variant == ColorVariant::kBgBlend || params.variant == ColorVariant::kFgBgBlend)
    background = detail::sigmoid(params.background_logits);
  if (params.variant == ColorVariant::kFgBgBlend)
    foreground = detail::sigmoid(params.foreground_logits);
  if (params.variant == ColorVariant::kSingleImage)
    single = detail::sigmoid(params.color_logits[0]);

  for (int d = 0; d < d_count; ++d) {
    MpiPlane<T>& plane = mpi.planes[d];
    plane.alpha = detail::sigmoid(params.alpha_logits[d]);
    switch (params.variant) {
      case ColorVariant::kNone:
        plane.color = reference_image;
        break;
      case ColorVariant::kSingleImage:
        plane.color = single;
        break;
      case ColorVariant::kBgBlend:
      case ColorVariant::kFgBgBlend: {
        const Image3<T>& fg =
            params.variant == ColorVariant::kBgBlend ? reference_image : foreground;
        const Channel<T> w = detail::sigmoid(params.blend_logits[d]);
        for (int k = 0; k < 3; ++k)
          plane.color.ch[k] = w * fg.ch[k] + (T(1) - w) * background.ch[k];
        break;
      }
      case ColorVariant::kAllImages:
        plane.color = detail::sigmoid(params.color_logits[d]);
        break;
    }
  }
  return mpi;
}

/// Pulls gradients with respect to realized plane colors/alphas back to the
/// logits. d_color and d_alpha are indexed per plane, back-to-front.
template <typename T>
MpiParams<T> realize_backward(const MpiParams<T>& params, const Image3<T>& reference_image,
                              const std::vector<Image3<T>>& d_color,
                              const std::vector<Channel<T>>& d_alpha) {
  const int d_count = params.plane_count();
  detail::require(static_cast<int>(d_color.size()) == d_count &&
                      static_cast<int>(d_alpha.size()) == d_count,
                  "realize_backward: gradient plane count mismatch");
  MpiParams<T> grads = zeros_like(params);

  for (int d = 0; d < d_count; ++d) {
    const Channel<T> alpha = detail::sigmoid(params.alpha_logits[d]);
    grads.alpha_logits[d] = d_alpha[d] * alpha * (T(1) - alpha);
  }

  switch (params.variant) {
    case ColorVariant::kNone:
      break;
    case ColorVariant::kSingleImage: {
      const Image3<T> single = detail::sigmoid(params.color_logits[0]);
      for (int k = 0; k < 3; ++k) {
        Channel<T> acc = Channel<T>::Zero(params.height(), params.width());
        for (int d = 0; d < d_count; ++d) acc += d_color[d].ch[k];
        grads.color_logits[0].ch[k] = acc * single.ch[k] * (T(1) - single.ch[k]);
      }
      break;
    }
    case ColorVariant::kBgBlend:
    case ColorVariant::kFgBgBlend: {
      const Image3<T> background = detail::sigmoid(params.background_logits);
      const bool predicted_fg = params.variant == ColorVariant::kFgBgBlend;
      const Image3<T> foreground =
          predicted_fg ? detail::sigmoid(params.foreground_logits) : reference_image;
      Image3<T> d_bg(params.height(), params.width());
      Image3<T> d_fg(params.height(), params.width());
      for (int d = 0; d < d_count; ++d) {
        const Channel<T> w = detail::sigmoid(params.blend_logits[d]);
        Channel<T> d_w = Channel<T>::Zero(params.height(), params.width());
        for (int k = 0; k < 3; ++k) {
          d_w += d_color[d].ch[k] * (foreground.ch[k] - background.ch[k]);
          d_bg.ch[k] += d_color[d].ch[k] * (T(1) - w);
          if (predicted_fg) d_fg.ch[k] += d_color[d].ch[k] * w;
        }
        grads.blend_logits[d] = d_w * w * (T(1) - w);
      }
      for (int k = 0; k < 3; ++k)
        grads.background_logits.ch[k] =
            d_bg.ch[k] * background.ch[k] * (T(1) - background.ch[k]);
      if (predicted_fg)
        for (int k = 0; k < 3; ++k)
          grads.foreground_logits.ch[k] =
              d_fg.ch[k] * foreground.ch[k] * (T(1) - foreground.ch[k]);
      break;
    }
    case ColorVariant::kAllImages:
      for (int d = 0; d < d_count; ++d) {
        const Image3<T> color = detail::sigmoid(params.color_logits[d]);
        for (int k = 0; k < 3; ++k)
          grads.color_logits[d].ch[k] =
              d_color[d].ch[k] * color.ch[k] * (T(1) - color.ch[k]);
      }
      break;
  }
  return grads;
}

}  // namespace mpiv
