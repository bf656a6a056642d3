#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mpiv/geometry.h"

namespace mpiv {

struct SequenceFrame {
  std::string id;
  Camera camera;  // pose is world-from-camera
};

struct ScenePoint {
  long id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::vector<int> visible_frames;  // indices into PosedSequence::frames
};

/// A posed video clip plus its sparse reconstruction. `scale` accumulates the
/// unit multipliers applied so far (1.0 = as loaded).
struct PosedSequence {
  std::vector<SequenceFrame> frames;
  std::vector<ScenePoint> points;
  double scale = 1.0;
  int width = 0;
  int height = 0;
  double near_hint = 1.0;
  double far_hint = 100.0;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

/// Two source frames plus a target frame drawn from one strided window.
struct Triplet {
  int src1 = 0;
  int src2 = 0;
  int target = 0;
  bool extrapolation = false;  // target lies outside the source interval
  int stride = 1;
  int window_start = 0;
};

/// Linear interpolation between closest ranks, inclusive: percentile p of n
/// sorted values interpolates at rank p/100 * (n-1).
double percentile(std::vector<double> values, double pct);

/// Depth of a world point in a camera frame (z of the camera-coordinates).
double point_depth(const Camera& camera, const Eigen::Vector3d& world_point);

struct ScaleResult {
  PosedSequence sequence;
  double factor = 1.0;
};

/// Rescales translations and points so that the 10th percentile of per-frame
/// near-plane depths (the 5th percentile of each frame's visible point
/// depths) lands at 1.25 m.
ScaleResult scale_normalize(const PosedSequence& seq);

/// Per-frame smoothness verdicts: interior frame i is smooth iff
/// ||p_i - (p_{i+1}+p_{i-1})/2|| < 0.2 * ||p_{i+1} - p_{i-1}||; the end frames
/// inherit the verdict of their only interior neighbor.
std::vector<bool> smoothness_flags(const PosedSequence& seq);

/// Longest run of consecutive smooth frames (first run wins ties). Requires
/// at least 3 frames.
PosedSequence longest_smooth_run(const PosedSequence& seq);

/// Frames [start, start+count) with point visibility remapped; points left
/// with no visible frame are dropped.
PosedSequence subsequence(const PosedSequence& seq, int start, int count);

/// Drops head_tail frames from each end, then discards the whole clip when
/// fewer than min_len frames remain.
std::optional<PosedSequence> trim_and_filter(const PosedSequence& seq, int head_tail = 10,
                                             int min_len = 30);

/// Draws a strided 10-frame window (stride uniform over the feasible 1..10),
/// then two distinct source positions and a target position within it.
Triplet sample_triplet(const PosedSequence& seq, std::mt19937_64& rng);
Triplet sample_triplet(const PosedSequence& seq, std::uint64_t seed);

// --- sequence file format ---------------------------------------------------
//
// Header line:  H W near_hint far_hint
// Frame lines:  frame_id fx_n fy_n cx_n cy_n r11 r12 r13 r21 r22 r23 r31 r32 r33 t1 t2 t3
// with intrinsics normalized by resolution (fx_n = fx/W, cy_n = cy/H, ...) and
// (R, t) the world-from-camera pose. Points file lines: point_id x y z frame_id...

PosedSequence parse_sequence(const std::string& text);
std::string serialize_sequence(const PosedSequence& seq);
void parse_points_into(const std::string& text, PosedSequence& seq);
std::string serialize_points(const PosedSequence& seq);

PosedSequence load_sequence(const std::string& path,
                            const std::optional<std::string>& points_path = std::nullopt);
void save_sequence(const PosedSequence& seq, const std::string& path,
                   const std::optional<std::string>& points_path = std::nullopt);

}  // namespace mpiv
