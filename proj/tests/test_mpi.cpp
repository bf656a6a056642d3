#include "mpiv/mpi.h"

#include <doctest.h>

#include <random>

#include "oracles.h"

using namespace mpiv;
using namespace mpiv::testing;

namespace {

template <typename T>
Image3<T> random_image(std::mt19937_64& rng, int h, int w, T lo = T(0), T hi = T(1)) {
  std::uniform_real_distribution<double> dist{double(lo), double(hi)};
  Image3<T> img(h, w);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.ch[k](y, x) = T(dist(rng));
  return img;
}

}  // namespace

TEST_SUITE("mpi") {

TEST_CASE("parameter counts per variant") {
  CHECK(parameter_count(ColorVariant::kBgBlend, 32, 1, 1) == 67);
  CHECK(parameter_count(ColorVariant::kAllImages, 32, 1, 1) == 128);
  CHECK(parameter_count(ColorVariant::kNone, 8, 2, 2) == 32);
  CHECK(parameter_count(ColorVariant::kSingleImage, 32, 1, 1) == 35);
  CHECK(parameter_count(ColorVariant::kFgBgBlend, 32, 1, 1) == 70);
  CHECK(parameter_count(ColorVariant::kBgBlend, 32, 576, 1024) == 1024L * 576 * 67);
}

TEST_CASE("variant names round-trip") {
  for (ColorVariant v : all_color_variants()) CHECK(parse_color_variant(to_string(v)) == v);
  CHECK_THROWS_AS(parse_color_variant("bogus"), std::invalid_argument);
}

TEST_CASE("realize: saturated blend weights pick foreground or background") {
  std::mt19937_64 rng(3);
  const int h = 6, w = 5, d_count = 3;
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, d_count);
  const Camera cam = simple_camera(w, h);
  const Image3f reference = random_image<float>(rng, h, w);

  MpiParams<float> params = make_mpi_params(ColorVariant::kBgBlend, d_count, reference);

  for (auto& b : params.blend_logits) b.setConstant(40.0f);  // w -> 1
  MultiplaneImage<float> mpi = realize(params, reference, planes, cam);
  for (const auto& plane : mpi.planes)
    CHECK(max_abs_diff(plane.color, reference) == 0.0f);

  for (auto& b : params.blend_logits) b.setConstant(-40.0f);  // w -> 0
  mpi = realize(params, reference, planes, cam);
  const Image3f background = detail::sigmoid(params.background_logits);
  for (const auto& plane : mpi.planes)
    CHECK(max_abs_diff(plane.color, background) == 0.0f);
}

TEST_CASE("realize: half blend of constant images") {
  const int h = 4, w = 4, d_count = 2;
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, d_count);
  const Camera cam = simple_camera(w, h);
  const Image3f reference = Image3f::constant(h, w, 0.8f, 0.8f, 0.8f);

  MpiParams<float> params = make_mpi_params(ColorVariant::kBgBlend, d_count, reference);
  for (auto& b : params.blend_logits) b.setConstant(0.0f);  // w = 0.5
  const float bg_logit = std::log(0.2f / 0.8f);
  for (auto& c : params.background_logits.ch) c.setConstant(bg_logit);

  const MultiplaneImage<float> mpi = realize(params, reference, planes, cam);
  for (const auto& plane : mpi.planes)
    for (int k = 0; k < 3; ++k)
      CHECK(plane.color.ch[k](0, 0) == doctest::Approx(0.5f).epsilon(1e-6));
}

TEST_CASE("realize keeps every output in [0,1] for wild logits") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> logit(-50.0, 50.0);
  const int h = 5, w = 7, d_count = 4;
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, d_count);
  const Camera cam = simple_camera(w, h);
  const Image3f reference = random_image<float>(rng, h, w);

  for (ColorVariant variant : all_color_variants()) {
    MpiParams<float> params = make_mpi_params(variant, d_count, reference);
    params.for_each_block([&](ChannelF& block) {
      for (Eigen::Index y = 0; y < block.rows(); ++y)
        for (Eigen::Index x = 0; x < block.cols(); ++x) block(y, x) = float(logit(rng));
    });
    const MultiplaneImage<float> mpi = realize(params, reference, planes, cam);
    REQUIRE(mpi.plane_count() == d_count);
    for (const auto& plane : mpi.planes) {
      CHECK(plane.alpha.minCoeff() >= 0.0f);
      CHECK(plane.alpha.maxCoeff() <= 1.0f);
      for (int k = 0; k < 3; ++k) {
        CHECK(plane.color.ch[k].minCoeff() >= 0.0f);
        CHECK(plane.color.ch[k].maxCoeff() <= 1.0f);
      }
    }
  }
}

TEST_CASE("alpha strictly increases with its logit") {
  std::mt19937_64 rng(23);
  const int h = 3, w = 3;
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, 2);
  const Camera cam = simple_camera(w, h);
  const Image3f reference = random_image<float>(rng, h, w);
  MpiParams<float> params = make_mpi_params(ColorVariant::kNone, 2, reference);

  float prev = -1.0f;
  for (float logit = -8.0f; logit <= 8.0f; logit += 0.5f) {
    params.alpha_logits[0].setConstant(logit);
    const MultiplaneImage<float> mpi = realize(params, reference, planes, cam);
    CHECK(mpi.planes[0].alpha(0, 0) > prev);
    prev = mpi.planes[0].alpha(0, 0);
  }
}

TEST_CASE("bg-blend degenerates to the reference when background equals it") {
  std::mt19937_64 rng(29);
  const int h = 6, w = 6, d_count = 3;
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, d_count);
  const Camera cam = simple_camera(w, h);
  // Stay inside the clamped-logit range so sigma(logit(I)) = I up to fp error.
  const Image3f reference = random_image<float>(rng, h, w, 0.06f, 0.94f);

  MpiParams<float> params = make_mpi_params(ColorVariant::kBgBlend, d_count, reference);
  std::uniform_real_distribution<double> logit(-6.0, 6.0);
  for (auto& b : params.blend_logits)
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) b(y, x) = float(logit(rng));

  const MultiplaneImage<float> mpi = realize(params, reference, planes, cam);
  for (const auto& plane : mpi.planes) CHECK(max_abs_diff(plane.color, reference) < 1e-6f);
}

TEST_CASE("realize_backward matches finite differences") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> logit(-2.0, 2.0);
  const int h = 3, w = 4, d_count = 3;
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, d_count);
  const Camera cam = simple_camera(w, h);
  const Image3d reference = random_image<double>(rng, h, w);

  for (ColorVariant variant : all_color_variants()) {
    CAPTURE(to_string(variant));
    MpiParams<double> params = make_mpi_params(variant, d_count, reference);
    params.for_each_block([&](ChannelD& block) {
      for (Eigen::Index y = 0; y < block.rows(); ++y)
        for (Eigen::Index x = 0; x < block.cols(); ++x) block(y, x) = logit(rng);
    });

    // Random linear functional of the realized stack.
    std::vector<Image3d> d_color(d_count, Image3d(h, w));
    std::vector<ChannelD> d_alpha(d_count, ChannelD::Zero(h, w));
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    for (int d = 0; d < d_count; ++d) {
      for (int k = 0; k < 3; ++k)
        for (Eigen::Index y = 0; y < h; ++y)
          for (Eigen::Index x = 0; x < w; ++x) d_color[d].ch[k](y, x) = weight(rng);
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) d_alpha[d](y, x) = weight(rng);
    }

    const auto objective = [&](const MpiParams<double>& p) {
      const MultiplaneImage<double> mpi = realize(p, reference, planes, cam);
      double total = 0.0;
      for (int d = 0; d < d_count; ++d) {
        for (int k = 0; k < 3; ++k)
          total += (mpi.planes[d].color.ch[k] * d_color[d].ch[k]).sum();
        total += (mpi.planes[d].alpha * d_alpha[d]).sum();
      }
      return total;
    };

    MpiParams<double> analytic = realize_backward(params, reference, d_color, d_alpha);
    std::vector<ChannelD*> param_blocks, grad_blocks;
    params.for_each_block([&](ChannelD& b) { param_blocks.push_back(&b); });
    analytic.for_each_block([&](ChannelD& b) { grad_blocks.push_back(&b); });

    const double h_step = 1e-6;
    double worst = 0.0;
    for (std::size_t b = 0; b < param_blocks.size(); ++b)
      for (Eigen::Index y = 0; y < param_blocks[b]->rows(); ++y)
        for (Eigen::Index x = 0; x < param_blocks[b]->cols(); ++x) {
          const double saved = (*param_blocks[b])(y, x);
          (*param_blocks[b])(y, x) = saved + h_step;
          const double up = objective(params);
          (*param_blocks[b])(y, x) = saved - h_step;
          const double down = objective(params);
          (*param_blocks[b])(y, x) = saved;
          const double fd = (up - down) / (2 * h_step);
          const double a = (*grad_blocks[b])(y, x);
          if (std::max(std::abs(a), std::abs(fd)) < 1e-10) continue;
          worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)));
        }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("realize rejects mismatched shapes") {
  std::mt19937_64 rng(37);
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, 4);
  const Camera cam = simple_camera(5, 4);
  const Image3f reference = random_image<float>(rng, 4, 5);
  MpiParams<float> params = make_mpi_params(ColorVariant::kNone, 3, reference);  // 3 != 4
  CHECK_THROWS_AS(realize(params, reference, planes, cam), std::invalid_argument);
}

}  // TEST_SUITE
