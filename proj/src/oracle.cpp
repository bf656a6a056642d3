#include "mpiv/oracle.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mpiv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic value in [0,1) derived from (seed, index).
double unit(std::uint64_t seed, std::uint64_t index) {
  return double(splitmix64(seed * 0x9E3779B97F4A7C15ull + index) >> 11) * 0x1.0p-53;
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

const char* to_string(TextureKind kind) {
  switch (kind) {
    case TextureKind::kSolid: return "solid";
    case TextureKind::kGradient: return "gradient";
    case TextureKind::kChecker: return "checker";
    case TextureKind::kNoise: return "noise";
  }
  return "?";
}

TextureKind parse_texture_kind(const std::string& s) {
  if (s == "solid") return TextureKind::kSolid;
  if (s == "gradient") return TextureKind::kGradient;
  if (s == "checker") return TextureKind::kChecker;
  if (s == "noise") return TextureKind::kNoise;
  throw std::invalid_argument("unknown texture kind: " + s);
}

Eigen::Vector3d sample_texture(const SceneLayer& layer, double s, double t) {
  const std::uint64_t seed = layer.seed;
  Eigen::Vector3d color;
  switch (layer.texture) {
    case TextureKind::kSolid:
      for (int k = 0; k < 3; ++k) color[k] = lerp(0.2, 0.8, unit(seed, k));
      break;
    case TextureKind::kGradient:
      for (int k = 0; k < 3; ++k) {
        const double base = lerp(0.4, 0.6, unit(seed, 10 + k));
        const double gx = lerp(-0.18, 0.18, unit(seed, 20 + k));
        const double gy = lerp(-0.18, 0.18, unit(seed, 30 + k));
        color[k] = base + gx * s + gy * t;
      }
      break;
    case TextureKind::kChecker: {
      const double freq = 2.0;  // cells per extent; smooth at test resolutions
      for (int k = 0; k < 3; ++k) {
        const double amp = lerp(0.22, 0.35, unit(seed, 40 + k));
        const double phase_s = kTwoPi * unit(seed, 50 + k);
        const double phase_t = kTwoPi * unit(seed, 60 + k);
        color[k] = 0.5 + amp * std::sin(kTwoPi * freq * s + phase_s) *
                             std::sin(kTwoPi * freq * t + phase_t);
      }
      break;
    }
    case TextureKind::kNoise: {
      for (int k = 0; k < 3; ++k) color[k] = 0.5;
      for (int j = 0; j < 4; ++j) {
        const double fs = lerp(0.5, 2.5, unit(seed, 100 + j));
        const double ft = lerp(0.5, 2.5, unit(seed, 110 + j));
        const double amp = 0.09;
        for (int k = 0; k < 3; ++k) {
          const double phase = kTwoPi * unit(seed, 120 + 10 * j + k);
          color[k] += amp * std::sin(kTwoPi * (fs * s + ft * t) + phase);
        }
      }
      break;
    }
  }
  for (int k = 0; k < 3; ++k) color[k] = std::clamp(color[k], 0.01, 0.99);
  return color;
}

Eigen::Vector3d texture_at_point(const SceneLayer& layer, double x, double y) {
  const double s = (x - layer.x0) / (layer.x1 - layer.x0);
  const double t = (y - layer.y0) / (layer.y1 - layer.y0);
  return sample_texture(layer, s, t);
}

Image3d oracle_render(const SyntheticScene& scene, const Camera& cam, MaskXb* edge_mask) {
  const Eigen::Index h = cam.intrinsics.height;
  const Eigen::Index w = cam.intrinsics.width;
  Image3d out(h, w);
  MaskXb straddle = MaskXb::Constant(h, w, false);

  // Front-to-back layer order; the background always terminates the ray.
  std::vector<const SceneLayer*> order;
  for (const SceneLayer& layer : scene.layers) order.push_back(&layer);
  std::sort(order.begin(), order.end(),
            [](const SceneLayer* a, const SceneLayer* b) { return a->depth < b->depth; });

  const Eigen::Matrix3d rotation = cam.world_from_camera.rotation;
  const Eigen::Vector3d origin = cam.world_from_camera.translation;
  constexpr double offsets[2] = {-0.25, +0.25};

  // Footprint corners for silhouette detection. Wider than half a pixel so
  // adjacent footprints overlap and no extent edge can slip between them.
  constexpr double corner = 0.6;
  const auto layer_hit = [&](const SceneLayer& layer, double u, double v) {
    const Eigen::Vector3d dir =
        rotation * Eigen::Vector3d((u - cam.intrinsics.cx) / cam.intrinsics.fx,
                                   (v - cam.intrinsics.cy) / cam.intrinsics.fy, 1.0);
    if (!(dir.z() > 1e-12)) return false;
    const double tau = (layer.depth - origin.z()) / dir.z();
    if (tau <= 0) return false;
    const Eigen::Vector3d p = origin + tau * dir;
    return layer.contains(p.x(), p.y());
  };

  for (Eigen::Index v = 0; v < h; ++v) {
    for (Eigen::Index u = 0; u < w; ++u) {
      Eigen::Vector3d accum = Eigen::Vector3d::Zero();
      for (double du : offsets) {
        for (double dv : offsets) {
          const Eigen::Vector3d dir_cam((double(u) + du - cam.intrinsics.cx) / cam.intrinsics.fx,
                                        (double(v) + dv - cam.intrinsics.cy) / cam.intrinsics.fy,
                                        1.0);
          const Eigen::Vector3d dir = rotation * dir_cam;
          Eigen::Vector3d color = Eigen::Vector3d::Zero();
          double transmittance = 1.0;
          if (dir.z() > 1e-12) {
            for (const SceneLayer* layer : order) {
              const double tau = (layer->depth - origin.z()) / dir.z();
              if (tau <= 0) continue;
              const Eigen::Vector3d p = origin + tau * dir;
              if (!layer->contains(p.x(), p.y())) continue;
              const Eigen::Vector3d tex = texture_at_point(*layer, p.x(), p.y());
              color += transmittance * layer->alpha * tex;
              transmittance *= (1.0 - layer->alpha);
            }
            const double tau_bg = (scene.background.depth - origin.z()) / dir.z();
            if (tau_bg > 0) {
              const Eigen::Vector3d p = origin + tau_bg * dir;
              color += transmittance * texture_at_point(scene.background, p.x(), p.y());
            }
          }
          accum += color;
        }
      }
      for (int k = 0; k < 3; ++k) out.ch[k](v, u) = accum[k] / 4.0;

      for (const SceneLayer* layer : order) {
        int inside = 0;
        for (double du : {-corner, corner})
          for (double dv : {-corner, corner})
            inside += layer_hit(*layer, double(u) + du, double(v) + dv);
        if (inside != 0 && inside != 4) {
          straddle(v, u) = true;
          break;
        }
      }
    }
  }

  if (edge_mask) {
    *edge_mask = MaskXb::Constant(h, w, false);
    constexpr Eigen::Index radius = 2;
    for (Eigen::Index v = 0; v < h; ++v)
      for (Eigen::Index u = 0; u < w; ++u) {
        if (!straddle(v, u)) continue;
        for (Eigen::Index dv = -radius; dv <= radius; ++dv)
          for (Eigen::Index du = -radius; du <= radius; ++du) {
            const Eigen::Index y = v + dv, x = u + du;
            if (y >= 0 && y < h && x >= 0 && x < w) (*edge_mask)(y, x) = true;
          }
      }
  }
  return out;
}

namespace detail {

int matching_plane_index(double depth, const DepthPlanes& planes) {
  for (int d = 0; d < planes.count(); ++d)
    if (std::abs(planes.depths[d] - depth) <= 1e-9 * std::max(1.0, depth)) return d;
  return -1;
}

}  // namespace detail

void validate_scene(const SyntheticScene& scene, const DepthPlanes& depth_planes) {
  for (const SceneLayer& layer : scene.layers) {
    mpiv::detail::require(layer.depth > depth_planes.near && layer.depth < depth_planes.far,
                          "scene: layer depth outside (near, far)");
    mpiv::detail::require(layer.x1 > layer.x0 && layer.y1 > layer.y0,
                          "scene: empty layer extent");
    mpiv::detail::require(layer.alpha >= 0 && layer.alpha <= 1, "scene: alpha outside [0,1]");
  }
}

SyntheticScene parse_scene(const std::string& text) {
  SyntheticScene scene;
  bool have_background = false;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag) || tag[0] == '#') continue;
    const std::string where = "scene line " + std::to_string(line_number);
    if (tag == "background") {
      std::string kind;
      SceneLayer bg;
      if (!(fields >> bg.depth >> kind >> bg.seed))
        throw std::invalid_argument(where + ": expected 'background depth texture seed'");
      bg.texture = parse_texture_kind(kind);
      bg.alpha = 1.0;
      // Texture scale window roughly matching a 90-degree view footprint.
      bg.x0 = -bg.depth;
      bg.x1 = bg.depth;
      bg.y0 = -bg.depth;
      bg.y1 = bg.depth;
      scene.background = bg;
      have_background = true;
    } else if (tag == "layer") {
      SceneLayer layer;
      std::string kind;
      if (!(fields >> layer.depth >> layer.x0 >> layer.y0 >> layer.x1 >> layer.y1 >> kind >>
            layer.seed >> layer.alpha))
        throw std::invalid_argument(
            where + ": expected 'layer depth x0 y0 x1 y1 texture seed alpha'");
      layer.texture = parse_texture_kind(kind);
      scene.layers.push_back(layer);
    } else {
      throw std::invalid_argument(where + ": unknown tag '" + tag + "'");
    }
  }
  if (!have_background) throw std::invalid_argument("scene: missing background line");
  return scene;
}

std::string serialize_scene(const SyntheticScene& scene) {
  std::ostringstream out;
  out.precision(9);
  out << "background " << scene.background.depth << " " << to_string(scene.background.texture)
      << " " << scene.background.seed << "\n";
  for (const SceneLayer& layer : scene.layers) {
    out << "layer " << layer.depth << " " << layer.x0 << " " << layer.y0 << " " << layer.x1
        << " " << layer.y1 << " " << to_string(layer.texture) << " " << layer.seed << " "
        << layer.alpha << "\n";
  }
  return out.str();
}

SyntheticScene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scene file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str());
}

}  // namespace mpiv
