#include "mpiv/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mpiv/io_util.h"

namespace mpiv {

double percentile(std::vector<double> values, double pct) {
  detail::require(!values.empty(), "percentile: empty set");
  detail::require(pct >= 0 && pct <= 100, "percentile: pct outside [0,100]");
  std::sort(values.begin(), values.end());
  const double rank = pct / 100.0 * double(values.size() - 1);
  const std::size_t lo = std::size_t(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - double(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double point_depth(const Camera& camera, const Eigen::Vector3d& world_point) {
  return camera.world_from_camera.inverse().apply(world_point).z();
}

ScaleResult scale_normalize(const PosedSequence& seq) {
  detail::require(!seq.frames.empty(), "scale_normalize: empty sequence");
  std::vector<std::vector<double>> per_frame_depths(seq.frames.size());
  for (const ScenePoint& point : seq.points)
    for (int frame : point.visible_frames)
      per_frame_depths[frame].push_back(point_depth(seq.frames[frame].camera, point.position));

  std::vector<double> near_depths;
  near_depths.reserve(seq.frames.size());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    if (per_frame_depths[i].empty())
      throw std::invalid_argument("scale_normalize: frame " + seq.frames[i].id +
                                  " observes no points");
    near_depths.push_back(percentile(per_frame_depths[i], 5.0));
  }

  const double p10 = percentile(near_depths, 10.0);
  detail::require(p10 > 0, "scale_normalize: nonpositive near-plane depth");
  const double factor = 1.25 / p10;

  ScaleResult result;
  result.factor = factor;
  result.sequence = seq;
  for (SequenceFrame& frame : result.sequence.frames)
    frame.camera.world_from_camera.translation *= factor;
  for (ScenePoint& point : result.sequence.points) point.position *= factor;
  result.sequence.scale = seq.scale * factor;
  return result;
}

std::vector<bool> smoothness_flags(const PosedSequence& seq) {
  const int n = seq.frame_count();
  detail::require(n >= 3, "smoothness: need at least 3 frames");
  std::vector<bool> smooth(n, false);
  for (int i = 1; i + 1 < n; ++i) {
    const Eigen::Vector3d& prev = seq.frames[i - 1].camera.position();
    const Eigen::Vector3d& here = seq.frames[i].camera.position();
    const Eigen::Vector3d& next = seq.frames[i + 1].camera.position();
    smooth[i] = (here - 0.5 * (prev + next)).norm() < 0.2 * (next - prev).norm();
  }
  smooth[0] = smooth[1];
  smooth[n - 1] = smooth[n - 2];
  return smooth;
}

PosedSequence subsequence(const PosedSequence& seq, int start, int count) {
  detail::require(start >= 0 && count >= 0 && start + count <= seq.frame_count(),
                  "subsequence: range out of bounds");
  PosedSequence out;
  out.scale = seq.scale;
  out.width = seq.width;
  out.height = seq.height;
  out.near_hint = seq.near_hint;
  out.far_hint = seq.far_hint;
  out.frames.assign(seq.frames.begin() + start, seq.frames.begin() + start + count);
  for (const ScenePoint& point : seq.points) {
    ScenePoint moved;
    moved.id = point.id;
    moved.position = point.position;
    for (int frame : point.visible_frames)
      if (frame >= start && frame < start + count) moved.visible_frames.push_back(frame - start);
    if (!moved.visible_frames.empty()) out.points.push_back(std::move(moved));
  }
  return out;
}

PosedSequence longest_smooth_run(const PosedSequence& seq) {
  const std::vector<bool> smooth = smoothness_flags(seq);
  int best_start = 0, best_len = 0;
  int run_start = -1;
  for (int i = 0; i <= seq.frame_count(); ++i) {
    const bool on = i < seq.frame_count() && smooth[i];
    if (on && run_start < 0) run_start = i;
    if (!on && run_start >= 0) {
      if (i - run_start > best_len) {
        best_len = i - run_start;
        best_start = run_start;
      }
      run_start = -1;
    }
  }
  return subsequence(seq, best_start, best_len);
}

std::optional<PosedSequence> trim_and_filter(const PosedSequence& seq, int head_tail,
                                             int min_len) {
  const int remaining = seq.frame_count() - 2 * head_tail;
  if (remaining < min_len) return std::nullopt;
  return subsequence(seq, head_tail, remaining);
}

Triplet sample_triplet(const PosedSequence& seq, std::mt19937_64& rng) {
  constexpr int kWindow = 10;
  constexpr int kMaxStride = 10;
  const int n = seq.frame_count();
  const int max_stride = std::min(kMaxStride, (n - 1) / (kWindow - 1));
  if (max_stride < 1)
    throw std::invalid_argument("sample_triplet: sequence shorter than 10 frames");

  std::uniform_int_distribution<int> stride_dist(1, max_stride);
  const int stride = stride_dist(rng);
  std::uniform_int_distribution<int> start_dist(0, n - 1 - (kWindow - 1) * stride);
  const int start = start_dist(rng);

  std::uniform_int_distribution<int> pos10(0, kWindow - 1);
  const int src1_pos = pos10(rng);
  std::uniform_int_distribution<int> pos9(0, kWindow - 2);
  int src2_pos = pos9(rng);
  if (src2_pos >= src1_pos) ++src2_pos;
  std::uniform_int_distribution<int> pos8(0, kWindow - 3);
  int target_pos = pos8(rng);
  for (int taken : {std::min(src1_pos, src2_pos), std::max(src1_pos, src2_pos)})
    if (target_pos >= taken) ++target_pos;

  Triplet triplet;
  triplet.stride = stride;
  triplet.window_start = start;
  triplet.src1 = start + src1_pos * stride;
  triplet.src2 = start + src2_pos * stride;
  triplet.target = start + target_pos * stride;
  triplet.extrapolation =
      target_pos < std::min(src1_pos, src2_pos) || target_pos > std::max(src1_pos, src2_pos);
  return triplet;
}

Triplet sample_triplet(const PosedSequence& seq, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_triplet(seq, rng);
}

// --- file format -------------------------------------------------------------

PosedSequence parse_sequence(const std::string& text) {
  std::istringstream in(text);
  PosedSequence seq;
  if (!(in >> seq.height >> seq.width >> seq.near_hint >> seq.far_hint))
    throw std::invalid_argument("sequence: bad header, expected 'H W near_hint far_hint'");
  detail::require(seq.height >= 1 && seq.width >= 1, "sequence: bad image size");

  SequenceFrame frame;
  double fx_n, fy_n, cx_n, cy_n;
  Eigen::Matrix3d r;
  Eigen::Vector3d t;
  while (in >> frame.id) {
    if (!(in >> fx_n >> fy_n >> cx_n >> cy_n >> r(0, 0) >> r(0, 1) >> r(0, 2) >> r(1, 0) >>
          r(1, 1) >> r(1, 2) >> r(2, 0) >> r(2, 1) >> r(2, 2) >> t.x() >> t.y() >> t.z()))
      throw std::invalid_argument("sequence: truncated frame line for id " + frame.id);
    frame.camera.intrinsics = {fx_n * seq.width, fy_n * seq.height, cx_n * seq.width,
                               cy_n * seq.height, seq.width, seq.height};
    frame.camera.intrinsics.validate();
    frame.camera.world_from_camera.rotation = r;
    frame.camera.world_from_camera.translation = t;
    if (!frame.camera.world_from_camera.is_rigid(1e-6))
      throw std::invalid_argument("sequence: frame " + frame.id + " rotation is not rigid");
    seq.frames.push_back(frame);
  }
  detail::require(!seq.frames.empty(), "sequence: no frames");
  return seq;
}

std::string serialize_sequence(const PosedSequence& seq) {
  std::ostringstream out;
  out.precision(9);
  out << seq.height << " " << seq.width << " " << seq.near_hint << " " << seq.far_hint << "\n";
  for (const SequenceFrame& frame : seq.frames) {
    const Intrinsics& k = frame.camera.intrinsics;
    const Pose& pose = frame.camera.world_from_camera;
    out << frame.id << " " << k.fx / seq.width << " " << k.fy / seq.height << " "
        << k.cx / seq.width << " " << k.cy / seq.height;
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) out << " " << pose.rotation(row, col);
    for (int i = 0; i < 3; ++i) out << " " << pose.translation[i];
    out << "\n";
  }
  return out.str();
}

void parse_points_into(const std::string& text, PosedSequence& seq) {
  std::map<std::string, int> index_by_id;
  for (int i = 0; i < seq.frame_count(); ++i) index_by_id[seq.frames[i].id] = i;

  seq.points.clear();
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    ScenePoint point;
    if (!(fields >> point.id)) continue;  // blank line
    if (!(fields >> point.position.x() >> point.position.y() >> point.position.z()))
      throw std::invalid_argument("points: truncated line for point " +
                                  std::to_string(point.id));
    std::string frame_id;
    while (fields >> frame_id) {
      const auto it = index_by_id.find(frame_id);
      if (it == index_by_id.end())
        throw std::invalid_argument("points: unknown frame id " + frame_id);
      point.visible_frames.push_back(it->second);
    }
    for (int frame : point.visible_frames)
      if (point_depth(seq.frames[frame].camera, point.position) <= 0)
        throw std::invalid_argument("points: point " + std::to_string(point.id) +
                                    " behind camera " + seq.frames[frame].id);
    seq.points.push_back(std::move(point));
  }
}

std::string serialize_points(const PosedSequence& seq) {
  std::ostringstream out;
  out.precision(9);
  for (const ScenePoint& point : seq.points) {
    out << point.id << " " << point.position.x() << " " << point.position.y() << " "
        << point.position.z();
    for (int frame : point.visible_frames) out << " " << seq.frames[frame].id;
    out << "\n";
  }
  return out.str();
}

PosedSequence load_sequence(const std::string& path,
                            const std::optional<std::string>& points_path) {
  PosedSequence seq = parse_sequence(read_text_file(path));
  if (points_path) parse_points_into(read_text_file(*points_path), seq);
  return seq;
}

void save_sequence(const PosedSequence& seq, const std::string& path,
                   const std::optional<std::string>& points_path) {
  atomic_write_text(path, serialize_sequence(seq));
  if (points_path) atomic_write_text(*points_path, serialize_points(seq));
}

}  // namespace mpiv
