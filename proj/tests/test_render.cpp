#include "mpiv/render.h"

#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.h"

using namespace mpiv;
using namespace mpiv::testing;

namespace {

template <typename T>
Image3<T> smooth_texture(int h, int w, double wavelength, double phase) {
  Image3<T> img(h, w);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img.ch[k](y, x) = T(0.5 + 0.42 * std::sin(2 * std::numbers::pi * x / wavelength +
                                                  phase + 1.1 * k) *
                                      std::cos(2 * std::numbers::pi * y / (wavelength * 1.3)));
  return img;
}

Eigen::Matrix3d translation_h(double dx, double dy) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 2) = dx;
  h(1, 2) = dy;
  return h;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("warp: identity reproduces the input exactly") {
  const Image3f color = smooth_texture<float>(12, 17, 6.0, 0.3);
  ChannelF alpha = ChannelF::Constant(12, 17, 0.7f);
  const WarpedPlane<float> out =
      warp_plane(color, alpha, Eigen::Matrix3d::Identity(), 12, 17);
  CHECK(max_abs_diff(out.color, color) == 0.0f);
  CHECK((out.alpha - alpha).abs().maxCoeff() == 0.0f);
  CHECK(out.valid.all());
}

TEST_CASE("warp: half-pixel shift averages horizontal neighbors") {
  const int h = 5, w = 9;
  Image3f ramp(h, w);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) ramp.ch[k](y, x) = float(x) / float(w - 1);
  const ChannelF alpha = ChannelF::Ones(h, w);

  const WarpedPlane<float> out = warp_plane(ramp, alpha, translation_h(0.5, 0.0), h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      CHECK(out.valid(y, x));
      for (int k = 0; k < 3; ++k)
        CHECK(out.color.ch[k](y, x) ==
              doctest::Approx(0.5f * (ramp.ch[k](y, x) + ramp.ch[k](y, x + 1))).epsilon(1e-6));
    }
    CHECK_FALSE(out.valid(y, w - 1));  // samples past the last column
    CHECK(out.alpha(y, w - 1) == 0.0f);
  }
}

TEST_CASE("warp: fully out of bounds is transparent and invalid") {
  const Image3f color = smooth_texture<float>(8, 8, 5.0, 0.0);
  const ChannelF alpha = ChannelF::Ones(8, 8);
  const WarpedPlane<float> out = warp_plane(color, alpha, translation_h(100.0, 0.0), 8, 8);
  CHECK_FALSE(out.valid.any());
  CHECK(out.alpha.maxCoeff() == 0.0f);
  CHECK(out.color.ch[0].maxCoeff() == 0.0f);
}

TEST_CASE("composite: single opaque plane passes through") {
  WarpedPlane<float> plane;
  plane.color = smooth_texture<float>(6, 7, 4.0, 0.1);
  plane.alpha = ChannelF::Ones(6, 7);
  plane.valid = MaskXb::Constant(6, 7, true);
  const Image3f out = composite(std::vector<WarpedPlane<float>>{plane});
  CHECK(max_abs_diff(out, plane.color) == 0.0f);
}

TEST_CASE("composite: transparent near plane exposes the far plane") {
  WarpedPlane<float> far_plane, near_plane;
  far_plane.color = smooth_texture<float>(6, 7, 4.0, 0.4);
  far_plane.alpha = ChannelF::Ones(6, 7);
  near_plane.color = Image3f::constant(6, 7, 0.9f, 0.1f, 0.4f);
  near_plane.alpha = ChannelF::Zero(6, 7);
  const Image3f out =
      composite(std::vector<WarpedPlane<float>>{far_plane, near_plane});
  CHECK(max_abs_diff(out, far_plane.color) == 0.0f);
}

TEST_CASE("composite: quarter-opaque black over white gives 0.75") {
  WarpedPlane<float> far_plane, near_plane;
  far_plane.color = Image3f::constant(4, 4, 1.0f, 1.0f, 1.0f);
  far_plane.alpha = ChannelF::Ones(4, 4);
  near_plane.color = Image3f(4, 4);  // black
  near_plane.alpha = ChannelF::Constant(4, 4, 0.25f);
  const Image3f out =
      composite(std::vector<WarpedPlane<float>>{far_plane, near_plane});
  for (int k = 0; k < 3; ++k) CHECK(out.ch[k](1, 2) == doctest::Approx(0.75f));
}

TEST_CASE("composite: empty list is an error") {
  CHECK_THROWS_AS(composite(std::vector<WarpedPlane<float>>{}), std::invalid_argument);
}

TEST_CASE("composite stays in [0,1] and folding matches one-at-a-time") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int h = 6, w = 6, d_count = 5;
  std::vector<WarpedPlane<float>> planes(d_count);
  for (auto& p : planes) {
    p.color = Image3f(h, w);
    p.alpha = ChannelF::Zero(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        p.alpha(y, x) = float(unit(rng));
        for (int k = 0; k < 3; ++k) p.color.ch[k](y, x) = float(unit(rng));
      }
  }
  const Image3f folded = composite(planes);
  CHECK(folded.ch[0].minCoeff() >= 0.0f);
  CHECK(folded.ch[0].maxCoeff() <= 1.0f);

  // One plane at a time onto a running canvas.
  Image3f canvas(h, w);
  for (const auto& p : planes)
    for (int k = 0; k < 3; ++k)
      canvas.ch[k] = p.color.ch[k] * p.alpha + canvas.ch[k] * (1.0f - p.alpha);
  CHECK(max_abs_diff(folded, canvas) < 1e-6f);
}

TEST_CASE("composite: a zero-alpha plane is the same as no plane") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int h = 5, w = 5;
  std::vector<WarpedPlane<float>> planes(3);
  for (auto& p : planes) {
    p.color = Image3f(h, w);
    p.alpha = ChannelF::Zero(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        p.alpha(y, x) = float(unit(rng));
        for (int k = 0; k < 3; ++k) p.color.ch[k](y, x) = float(unit(rng));
      }
  }
  planes[1].alpha.setZero();
  const Image3f with_plane = composite(planes);
  const Image3f without_plane =
      composite(std::vector<WarpedPlane<float>>{planes[0], planes[2]});
  CHECK(max_abs_diff(with_plane, without_plane) < 1e-7f);
}

TEST_CASE("render_view: identity render is bit-exact") {
  const int h = 10, w = 14;
  const Camera cam = simple_camera(w, h);
  MultiplaneImage<float> mpi;
  mpi.ref_camera = cam;
  mpi.depth_planes = make_depth_planes(1.0, 100.0, 2);
  mpi.planes.resize(2);
  mpi.planes[0].color = smooth_texture<float>(h, w, 5.0, 0.2);
  mpi.planes[0].alpha = ChannelF::Ones(h, w);
  mpi.planes[1].color = Image3f(h, w);
  mpi.planes[1].alpha = ChannelF::Zero(h, w);

  const RenderResult<float> result = render_view(mpi, cam);
  CHECK(max_abs_diff(result.image, mpi.planes[0].color) == 0.0f);
  CHECK(result.accum_alpha.minCoeff() == 1.0f);
}

TEST_CASE("render_view: single plane shifts by fx*b/d under target translation") {
  const int h = 24, w = 64;
  const Camera ref = simple_camera(w, h);
  const double depth = 4.0;
  // Baseline chosen so fx*b/d is exactly 3 pixels.
  const double baseline = 3.0 * depth / ref.intrinsics.fx;
  Camera tgt = ref;
  tgt.world_from_camera.translation = Eigen::Vector3d(baseline, 0, 0);

  MultiplaneImage<float> mpi;
  mpi.ref_camera = ref;
  mpi.depth_planes = make_depth_planes(1.0, 100.0, 2);
  mpi.depth_planes.depths[0] = depth;  // single meaningful plane
  mpi.depth_planes.depths[1] = 1.0;
  mpi.planes.resize(2);
  mpi.planes[0].color = smooth_texture<float>(h, w, 11.0, 0.7);
  mpi.planes[0].alpha = ChannelF::Ones(h, w);
  mpi.planes[1].color = Image3f(h, w);
  mpi.planes[1].alpha = ChannelF::Zero(h, w);

  const RenderResult<float> result = render_view(mpi, tgt);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 3 < w; ++x) {
      CHECK(result.accum_alpha(y, x) == doctest::Approx(1.0f));
      for (int k = 0; k < 3; ++k)
        CHECK(result.image.ch[k](y, x) ==
              doctest::Approx(mpi.planes[0].color.ch[k](y, x + 3)).epsilon(1e-5));
    }
}

TEST_CASE("render_view: two-plane scene matches the point-splat oracle") {
  const int h = 96, w = 160;
  const Camera ref = simple_camera(w, h);

  MultiplaneImage<float> mpi;
  mpi.ref_camera = ref;
  mpi.depth_planes = make_depth_planes(1.0, 100.0, 2);
  mpi.depth_planes.depths[0] = 20.0;
  mpi.depth_planes.depths[1] = 3.0;
  mpi.planes.resize(2);
  mpi.planes[0].color = smooth_texture<float>(h, w, 48.0, 0.2);
  mpi.planes[0].alpha = ChannelF::Ones(h, w);
  mpi.planes[1].color = smooth_texture<float>(h, w, 52.0, 2.1);
  mpi.planes[1].alpha = ChannelF::Zero(h, w);
  // Opaque rectangle in the near plane, well inside the frame.
  mpi.planes[1].alpha.block(24, 40, 40, 70).setConstant(1.0f);

  Camera tgt = ref;
  tgt.world_from_camera.translation = Eigen::Vector3d(0.06, -0.03, 0.0);

  const Image3f rendered = render_view(mpi, tgt).image;
  const Image3f splatted = splat_render(mpi, tgt);

  // Compare away from the image border and the rectangle silhouette.
  const double shift = ref.intrinsics.fx * 0.08 / 3.0;  // worst-case parallax, ~6 px
  MaskXb keep = MaskXb::Constant(h, w, true);
  keep.topRows(4).setConstant(false);
  keep.bottomRows(4).setConstant(false);
  keep.leftCols(4).setConstant(false);
  keep.rightCols(4).setConstant(false);
  const int band = int(shift) + 3;
  for (int y = 24 - band; y < 64 + band; ++y)
    for (int x = 40 - band; x < 110 + band; ++x) {
      const bool interior = y >= 24 + band && y < 64 - band && x >= 40 + band && x < 110 - band;
      if (!interior) keep(y, x) = false;
    }

  CHECK(mean_abs_diff(rendered, splatted, keep) < 2e-3f);
}

TEST_CASE("render_backward: opaque identity plane has unit color gradients") {
  const int h = 6, w = 8;
  const Camera cam = simple_camera(w, h);
  MultiplaneImage<float> mpi;
  mpi.ref_camera = cam;
  mpi.depth_planes = make_depth_planes(1.0, 100.0, 2);
  mpi.planes.resize(2);
  mpi.planes[0].color = smooth_texture<float>(h, w, 4.0, 0.0);
  mpi.planes[0].alpha = ChannelF::Zero(h, w);
  mpi.planes[1].color = smooth_texture<float>(h, w, 5.0, 1.0);
  mpi.planes[1].alpha = ChannelF::Ones(h, w);

  const RenderResult<float> fwd = render_view(mpi, cam);
  Image3f ones(h, w);
  for (int k = 0; k < 3; ++k) ones.ch[k].setOnes();
  const RenderGradients<float> grads = render_backward(mpi, fwd, ones);

  // Opaque near plane: d_color = 1 exactly; its alpha gradient is the summed
  // difference to the canvas behind it (the composited far plane, here alpha 0
  // so black).
  for (int k = 0; k < 3; ++k) CHECK((grads.d_color[1].ch[k] - 1.0f).abs().maxCoeff() == 0.0f);
  const ChannelF expected_alpha =
      mpi.planes[1].color.ch[0] + mpi.planes[1].color.ch[1] + mpi.planes[1].color.ch[2];
  CHECK((grads.d_alpha[1] - expected_alpha).abs().maxCoeff() < 1e-6f);

  // Fully occluded far plane: no color influence.
  for (int k = 0; k < 3; ++k) CHECK(grads.d_color[0].ch[k].abs().maxCoeff() == 0.0f);
}

TEST_CASE("render_backward matches finite differences on plane values") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  const int h = 8, w = 8, d_count = 4;

  const Camera ref = simple_camera(w, h);
  Camera tgt = ref;
  tgt.world_from_camera.rotation = rotation_xyz(0.01, -0.02, 0.015);
  tgt.world_from_camera.translation = Eigen::Vector3d(0.05, -0.03, 0.02);

  MultiplaneImage<double> mpi;
  mpi.ref_camera = ref;
  mpi.depth_planes = make_depth_planes(1.0, 100.0, d_count);
  mpi.planes.resize(d_count);
  for (auto& plane : mpi.planes) {
    plane.color = Image3d(h, w);
    plane.alpha = ChannelD::Zero(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        plane.alpha(y, x) = unit(rng);
        for (int k = 0; k < 3; ++k) plane.color.ch[k](y, x) = unit(rng);
      }
  }

  // Loss = <W, rendered image> for a fixed random W; linear, so central
  // differences are exact up to fp noise.
  Image3d loss_weights(h, w);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) loss_weights.ch[k](y, x) = signed_unit(rng);
  const auto loss_of = [&](const MultiplaneImage<double>& m) {
    const Image3d img = render_view(m, tgt).image;
    double total = 0;
    for (int k = 0; k < 3; ++k) total += (img.ch[k] * loss_weights.ch[k]).sum();
    return total;
  };

  const RenderResult<double> fwd = render_view(mpi, tgt);
  const RenderGradients<double> grads = render_backward(mpi, fwd, loss_weights);

  const double step = 1e-5;
  double worst = 0.0;
  for (int d = 0; d < d_count; ++d)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        for (int k = 0; k < 3; ++k) {
          const double saved = mpi.planes[d].color.ch[k](y, x);
          mpi.planes[d].color.ch[k](y, x) = saved + step;
          const double up = loss_of(mpi);
          mpi.planes[d].color.ch[k](y, x) = saved - step;
          const double down = loss_of(mpi);
          mpi.planes[d].color.ch[k](y, x) = saved;
          const double fd = (up - down) / (2 * step);
          const double a = grads.d_color[d].ch[k](y, x);
          if (std::max(std::abs(a), std::abs(fd)) < 1e-9) continue;
          worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)));
        }
        const double saved = mpi.planes[d].alpha(y, x);
        mpi.planes[d].alpha(y, x) = saved + step;
        const double up = loss_of(mpi);
        mpi.planes[d].alpha(y, x) = saved - step;
        const double down = loss_of(mpi);
        mpi.planes[d].alpha(y, x) = saved;
        const double fd = (up - down) / (2 * step);
        const double a = grads.d_alpha[d](y, x);
        if (std::max(std::abs(a), std::abs(fd)) < 1e-9) continue;
        worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)));
      }
  CHECK(worst < 1e-4);
}

TEST_CASE("render_backward rejects a mismatched cache") {
  const int h = 6, w = 6;
  const Camera cam = simple_camera(w, h);
  MultiplaneImage<float> mpi;
  mpi.ref_camera = cam;
  mpi.depth_planes = make_depth_planes(1.0, 100.0, 2);
  mpi.planes.resize(2);
  for (auto& p : mpi.planes) {
    p.color = Image3f(h, w);
    p.alpha = ChannelF::Zero(h, w);
  }
  const RenderResult<float> fwd = render_view(mpi, cam);

  MultiplaneImage<float> other = mpi;
  other.planes.pop_back();
  other.depth_planes = make_depth_planes(1.0, 100.0, 2);
  Image3f g(h, w);
  CHECK_THROWS_AS(render_backward(other, fwd, g), std::invalid_argument);
}

TEST_CASE("render_view: all-transparent MPI yields black and zero accumulated alpha") {
  const int h = 6, w = 6;
  const Camera cam = simple_camera(w, h);
  MultiplaneImage<float> mpi;
  mpi.ref_camera = cam;
  mpi.depth_planes = make_depth_planes(1.0, 100.0, 3);
  mpi.planes.resize(3);
  for (auto& p : mpi.planes) {
    p.color = Image3f::constant(h, w, 0.5f, 0.5f, 0.5f);
    p.alpha = ChannelF::Zero(h, w);
  }
  const RenderResult<float> result = render_view(mpi, cam);
  CHECK(result.image.ch[0].maxCoeff() == 0.0f);
  CHECK(result.accum_alpha.maxCoeff() == 0.0f);
}

}  // TEST_SUITE
