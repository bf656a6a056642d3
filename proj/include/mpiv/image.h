#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>

#include "mpiv/errors.h"

namespace mpiv {

/// One image channel, rows = height, cols = width.
template <typename T>
using Channel = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ChannelF = Channel<float>;
using ChannelD = Channel<double>;
using MaskXb = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Planar three-channel (RGB) image in [0,1].
template <typename T>
struct Image3 {
  std::array<Channel<T>, 3> ch;

  Image3() = default;
  Image3(Eigen::Index height, Eigen::Index width) {
    for (auto& c : ch) c = Channel<T>::Zero(height, width);
  }

  Eigen::Index height() const { return ch[0].rows(); }
  Eigen::Index width() const { return ch[0].cols(); }

  Channel<T>& operator[](int i) { return ch[i]; }
  const Channel<T>& operator[](int i) const { return ch[i]; }

  static Image3 constant(Eigen::Index height, Eigen::Index width, T r, T g, T b) {
    Image3 img;
    img.ch[0] = Channel<T>::Constant(height, width, r);
    img.ch[1] = Channel<T>::Constant(height, width, g);
    img.ch[2] = Channel<T>::Constant(height, width, b);
    return img;
  }

  void setZero(Eigen::Index height, Eigen::Index width) {
    for (auto& c : ch) c = Channel<T>::Zero(height, width);
  }

  bool same_size(const Image3& other) const {
    return height() == other.height() && width() == other.width();
  }
};

using Image3f = Image3<float>;
using Image3d = Image3<double>;

template <typename T>
bool same_size(const Image3<T>& a, const Image3<T>& b) {
  return a.same_size(b);
}

template <typename To, typename From>
Image3<To> cast_image(const Image3<From>& src) {
  Image3<To> out;
  for (int k = 0; k < 3; ++k) out.ch[k] = src.ch[k].template cast<To>();
  return out;
}

/// Rec.601 luma.
template <typename T>
Channel<T> luma(const Image3<T>& img) {
  return T(0.299) * img.ch[0] + T(0.587) * img.ch[1] + T(0.114) * img.ch[2];
}

template <typename T>
Image3<T> clamp01(const Image3<T>& img) {
  Image3<T> out;
  for (int k = 0; k < 3; ++k) out.ch[k] = img.ch[k].min(T(1)).max(T(0));
  return out;
}

template <typename T>
T max_abs_diff(const Image3<T>& a, const Image3<T>& b) {
  detail::require(same_size(a, b), "max_abs_diff: shape mismatch");
  T m = 0;
  for (int k = 0; k < 3; ++k) m = std::max(m, (a.ch[k] - b.ch[k]).abs().maxCoeff());
  return m;
}

template <typename T>
T mean_abs_diff(const Image3<T>& a, const Image3<T>& b) {
  detail::require(same_size(a, b), "mean_abs_diff: shape mismatch");
  T s = 0;
  for (int k = 0; k < 3; ++k) s += (a.ch[k] - b.ch[k]).abs().sum();
  return s / T(3 * a.height() * a.width());
}

/// Mean absolute difference restricted to pixels where keep is true.
template <typename T>
T mean_abs_diff(const Image3<T>& a, const Image3<T>& b, const MaskXb& keep) {
  detail::require(same_size(a, b), "mean_abs_diff: shape mismatch");
  detail::require(keep.rows() == a.height() && keep.cols() == a.width(),
                  "mean_abs_diff: mask shape mismatch");
  double s = 0;
  long n = 0;
  for (Eigen::Index y = 0; y < a.height(); ++y)
    for (Eigen::Index x = 0; x < a.width(); ++x) {
      if (!keep(y, x)) continue;
      for (int k = 0; k < 3; ++k) s += std::abs(double(a.ch[k](y, x) - b.ch[k](y, x)));
      n += 3;
    }
  return n ? T(s / double(n)) : T(0);
}

/// Bilinear resize; output pixel centers map to (x+0.5)*sx-0.5 in the input,
/// clamped at the borders.
template <typename T>
Image3<T> resize_bilinear(const Image3<T>& src, Eigen::Index out_h, Eigen::Index out_w) {
  detail::require(out_h >= 1 && out_w >= 1, "resize_bilinear: empty output");
  const Eigen::Index h = src.height(), w = src.width();
  const double sy = double(h) / double(out_h);
  const double sx = double(w) / double(out_w);
  Image3<T> out(out_h, out_w);
  for (Eigen::Index y = 0; y < out_h; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(h - 1));
    Eigen::Index y0 = std::min<Eigen::Index>(Eigen::Index(fy), h >= 2 ? h - 2 : 0);
    T wy = T(fy - double(y0));
    Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, h - 1);
    for (Eigen::Index x = 0; x < out_w; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(w - 1));
      Eigen::Index x0 = std::min<Eigen::Index>(Eigen::Index(fx), w >= 2 ? w - 2 : 0);
      T wx = T(fx - double(x0));
      Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, w - 1);
      for (int k = 0; k < 3; ++k) {
        const auto& c = src.ch[k];
        out.ch[k](y, x) = (1 - wy) * ((1 - wx) * c(y0, x0) + wx * c(y0, x1)) +
                          wy * ((1 - wx) * c(y1, x0) + wx * c(y1, x1));
      }
    }
  }
  return out;
}

}  // namespace mpiv
