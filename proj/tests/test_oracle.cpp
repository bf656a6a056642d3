#include "mpiv/oracle.h"

#include <doctest.h>

#include "mpiv/render.h"
#include "mpiv/selfcheck.h"
#include "oracles.h"

using namespace mpiv;
using namespace mpiv::testing;

TEST_SUITE("oracle") {

TEST_CASE("full-frame plane at the reference camera is the texture itself") {
  const int h = 24, w = 32;
  const Camera cam = simple_camera(w, h);
  SyntheticScene scene;
  scene.background = {50.0, -30, -30, 30, 30, TextureKind::kSolid, 7, 1.0};
  scene.layers = {{4.0, -10, -10, 10, 10, TextureKind::kChecker, 3, 1.0}};

  const Image3d img = oracle_render(scene, cam);
  // Supersampled box filter of a smooth texture stays close to the center
  // sample; check a few pixels against direct evaluation.
  for (int y : {2, 11, 20})
    for (int x : {3, 15, 29}) {
      const Eigen::Vector3d p = cam.unproject(x, y, 4.0);
      const Eigen::Vector3d direct = texture_at_point(scene.layers[0], p.x(), p.y());
      for (int k = 0; k < 3; ++k)
        CHECK(img.ch[k](y, x) == doctest::Approx(direct[k]).epsilon(2e-3));
    }
}

TEST_CASE("translated camera shifts a plane by fx*b/d") {
  const int h = 20, w = 40;
  const Camera ref = simple_camera(w, h);
  const double depth = 5.0;
  const double baseline = 4.0 * depth / ref.intrinsics.fx;  // 4 px shift
  Camera moved = ref;
  moved.world_from_camera.translation = Eigen::Vector3d(baseline, 0, 0);

  SyntheticScene scene;
  scene.background = {90.0, -60, -60, 60, 60, TextureKind::kSolid, 1, 1.0};
  scene.layers = {{depth, -20, -20, 20, 20, TextureKind::kNoise, 5, 1.0}};

  const Image3d at_ref = oracle_render(scene, ref);
  const Image3d at_moved = oracle_render(scene, moved);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 4; x < w - 1; ++x)
      for (int k = 0; k < 3; ++k)
        CHECK(at_moved.ch[k](y, x - 4) == doctest::Approx(at_ref.ch[k](y, x)).epsilon(1e-6));
}

TEST_CASE("semi-transparent layer composites in closed form") {
  const int h = 10, w = 10;
  const Camera cam = simple_camera(w, h);
  SyntheticScene scene;
  scene.background = {80.0, -50, -50, 50, 50, TextureKind::kSolid, 2, 1.0};
  scene.layers = {{3.0, -10, -10, 10, 10, TextureKind::kSolid, 9, 0.5}};

  const Image3d img = oracle_render(scene, cam);
  const Eigen::Vector3d front = sample_texture(scene.layers[0], 0.5, 0.5);
  // Solid textures are constant, so any extent coordinate works.
  const Eigen::Vector3d back = sample_texture(scene.background, 0.0, 0.0);
  for (int k = 0; k < 3; ++k)
    CHECK(img.ch[k](5, 5) == doctest::Approx(0.5 * front[k] + 0.5 * back[k]).epsilon(1e-9));
}

TEST_CASE("scene_to_mpi: empty scene is transparent except the background plane") {
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, 8);
  const Camera cam = simple_camera(16, 12);
  SyntheticScene scene;
  scene.background = {100.0, -70, -70, 70, 70, TextureKind::kGradient, 4, 1.0};

  const MultiplaneImage<float> mpi = scene_to_mpi<float>(scene, planes, cam);
  REQUIRE(mpi.plane_count() == 8);
  CHECK((mpi.planes[0].alpha == 1.0f).all());  // background on the far plane
  for (int d = 1; d < 8; ++d) CHECK(mpi.planes[d].alpha.maxCoeff() == 0.0f);
}

TEST_CASE("scene_to_mpi: layer depth off the plane grid is an error") {
  const DepthPlanes planes = make_depth_planes(1.0, 100.0, 8);
  const Camera cam = simple_camera(16, 12);
  SyntheticScene scene;
  scene.background = {100.0, -70, -70, 70, 70, TextureKind::kSolid, 4, 1.0};
  scene.layers = {{3.333, -5, -5, 5, 5, TextureKind::kSolid, 1, 1.0}};
  CHECK_THROWS_AS(scene_to_mpi<float>(scene, planes, cam), std::invalid_argument);
}

TEST_CASE("scene_to_mpi + identity render matches the oracle closely") {
  const DepthPlanes planes = standard_depth_planes(16);
  const Camera cam = standard_camera(192, 108);
  for (const SyntheticScene& scene : standard_scenes()) {
    const MultiplaneImage<float> mpi = scene_to_mpi<float>(scene, planes, cam);
    MaskXb edge;
    const Image3f truth = cast_image<float>(oracle_render(scene, cam, &edge));
    const Image3f rendered = render_view(mpi, cam).image;
    const MaskXb keep = !edge;
    CHECK(mean_abs_diff(rendered, truth, keep) < 1e-3f);
  }
}

TEST_CASE("renderer cross-validation at novel views") {
  const DepthPlanes planes = standard_depth_planes(16);
  const Camera ref = standard_camera(192, 108);
  const std::vector<SyntheticScene> scenes = standard_scenes();
  for (const SyntheticScene& scene : scenes) {
    const MultiplaneImage<float> mpi = scene_to_mpi<float>(scene, planes, ref);
    for (const Camera& cam : standard_target_cameras(ref, 4)) {
      MaskXb edge;
      const Image3f truth = cast_image<float>(oracle_render(scene, cam, &edge));
      const Image3f rendered = render_view(mpi, cam).image;

      MaskXb keep = !edge;
      keep.topRows(3).setConstant(false);
      keep.bottomRows(3).setConstant(false);
      keep.leftCols(3).setConstant(false);
      keep.rightCols(3).setConstant(false);

      CHECK(mean_abs_diff(rendered, truth, keep) < 2e-3f);

      // Worst pixel bound away from silhouettes.
      float worst = 0.0f;
      for (Eigen::Index y = 0; y < truth.height(); ++y)
        for (Eigen::Index x = 0; x < truth.width(); ++x) {
          if (!keep(y, x)) continue;
          for (int k = 0; k < 3; ++k)
            worst = std::max(worst, std::abs(rendered.ch[k](y, x) - truth.ch[k](y, x)));
        }
      CHECK(worst < 0.05f);
    }
  }
}

TEST_CASE("scene files round-trip") {
  SyntheticScene scene;
  scene.background = {100.0, -80, -55, 80, 55, TextureKind::kNoise, 42, 1.0};
  scene.layers = {{2.5, -1.0, -0.5, 1.25, 0.75, TextureKind::kChecker, 7, 0.8},
                  {13.0, -4.0, -3.0, 4.0, 3.0, TextureKind::kGradient, 9, 1.0}};

  const SyntheticScene parsed = parse_scene(serialize_scene(scene));
  REQUIRE(parsed.layers.size() == 2);
  CHECK(parsed.background.texture == TextureKind::kNoise);
  CHECK(parsed.background.seed == 42);
  CHECK(parsed.layers[0].depth == doctest::Approx(2.5));
  CHECK(parsed.layers[0].alpha == doctest::Approx(0.8));
  CHECK(parsed.layers[1].texture == TextureKind::kGradient);

  CHECK_THROWS_AS(parse_scene("layer 1 2 3\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scene("# nothing\n"), std::invalid_argument);  // no background
}

TEST_CASE("textures are deterministic in their seeds") {
  SceneLayer layer{5.0, 0, 0, 1, 1, TextureKind::kNoise, 123, 1.0};
  const Eigen::Vector3d a = sample_texture(layer, 0.3, 0.7);
  const Eigen::Vector3d b = sample_texture(layer, 0.3, 0.7);
  CHECK(a == b);
  layer.seed = 124;
  const Eigen::Vector3d c = sample_texture(layer, 0.3, 0.7);
  CHECK(a != c);
}

}  // TEST_SUITE
