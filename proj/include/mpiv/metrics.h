#pragma once

#include <cmath>
#include <limits>

#include "mpiv/image.h"

namespace mpiv {

/// Peak signal-to-noise ratio in dB for images in [0,1]; +inf for identical
/// inputs. MSE is taken over all pixels and channels.
template <typename T>
double psnr(const Image3<T>& pred, const Image3<T>& truth) {
  detail::require(same_size(pred, truth), "psnr: shape mismatch");
  double se = 0.0;
  for (int k = 0; k < 3; ++k)
    se += (pred.ch[k].template cast<double>() - truth.ch[k].template cast<double>())
              .square()
              .sum();
  const double mse = se / double(3 * pred.height() * pred.width());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace detail {

inline Eigen::ArrayXd gaussian_kernel(int size, double sigma) {
  Eigen::ArrayXd k(size);
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) k[i] = std::exp(-0.5 * ((i - c) / sigma) * ((i - c) / sigma));
  return k / k.sum();
}

// Separable "valid" convolution: output shrinks by size-1 in each dimension.
inline ChannelD conv_valid(const ChannelD& img, const Eigen::ArrayXd& kernel) {
  const int size = int(kernel.size());
  const Eigen::Index h = img.rows(), w = img.cols();
  ChannelD rows(h, w - size + 1);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x + size <= w; ++x) {
      double s = 0;
      for (int i = 0; i < size; ++i) s += kernel[i] * img(y, x + i);
      rows(y, x) = s;
    }
  ChannelD out(h - size + 1, w - size + 1);
  for (Eigen::Index y = 0; y + size <= h; ++y)
    for (Eigen::Index x = 0; x < rows.cols(); ++x) {
      double s = 0;
      for (int i = 0; i < size; ++i) s += kernel[i] * rows(y + i, x);
      out(y, x) = s;
    }
  return out;
}

}  // namespace detail

/// Mean local SSIM on luma: 11x11 Gaussian window (sigma 1.5), K1=0.01,
/// K2=0.03, dynamic range 1, valid-window boundary handling.
template <typename T>
double ssim(const Image3<T>& pred, const Image3<T>& truth) {
  detail::require(same_size(pred, truth), "ssim: shape mismatch");
  constexpr int kWindow = 11;
  detail::require(pred.height() >= kWindow && pred.width() >= kWindow,
                  "ssim: image smaller than the 11x11 window");
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;

  const ChannelD x = luma(pred).template cast<double>();
  const ChannelD y = luma(truth).template cast<double>();
  const Eigen::ArrayXd kernel = detail::gaussian_kernel(kWindow, 1.5);

  const ChannelD mu_x = detail::conv_valid(x, kernel);
  const ChannelD mu_y = detail::conv_valid(y, kernel);
  const ChannelD xx = detail::conv_valid(ChannelD(x * x), kernel);
  const ChannelD yy = detail::conv_valid(ChannelD(y * y), kernel);
  const ChannelD xy = detail::conv_valid(ChannelD(x * y), kernel);

  const ChannelD sigma_x = xx - mu_x * mu_x;
  const ChannelD sigma_y = yy - mu_y * mu_y;
  const ChannelD sigma_xy = xy - mu_x * mu_y;

  const ChannelD numerator = (2.0 * mu_x * mu_y + kC1) * (2.0 * sigma_xy + kC2);
  const ChannelD denominator = (mu_x * mu_x + mu_y * mu_y + kC1) * (sigma_x + sigma_y + kC2);
  return (numerator / denominator).mean();
}

}  // namespace mpiv
