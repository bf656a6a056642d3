#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpiv/geometry.h"
#include "mpiv/oracle.h"

namespace mpiv {

struct CheckOutcome {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured statistic
  double threshold = 0.0;  // pass bound on the statistic
  double seconds = 0.0;
  std::string detail;
};

std::string format_outcome(const CheckOutcome& outcome);

/// Worst pixel residual of the plane-induced homography against direct point
/// projection, over random camera pairs and plane depths. Passes below 1e-8.
CheckOutcome check_homography_oracle(int pairs = 100, std::uint64_t seed = 101);

/// Max relative error between analytic end-to-end gradients (loss ->
/// logits) and fp64 central finite differences on small random instances,
/// cycling through the color variants. Passes below 1e-4.
CheckOutcome check_gradient_correctness(int instances = 20, int size = 8, int planes = 4,
                                        std::uint64_t seed = 202);

/// Worst per-view mean absolute difference between the MPI renderer and the
/// brute-force scene renderer on plane-aligned scenes, excluding 2 px
/// silhouette bands and a 3 px image border. Passes below 2e-3.
CheckOutcome check_renderer_oracle_agreement(int cameras_per_scene = 10, int width = 256,
                                             int height = 144);

/// The fixed synthetic scene set used by the check and acceptance suites;
/// layer depths coincide with the D=16 plane stack over [1, 100].
std::vector<SyntheticScene> standard_scenes();
DepthPlanes standard_depth_planes(int count = 16);
Camera standard_camera(int width, int height);

/// Deterministic spread of target cameras around the reference.
std::vector<Camera> standard_target_cameras(const Camera& ref, int count,
                                            double max_offset = 0.12);

}  // namespace mpiv
