#include "mpiv/metrics.h"

#include <doctest.h>

#include <random>

using namespace mpiv;

namespace {

Image3f noise_image(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image3f img(h, w);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.ch[k](y, x) = float(unit(rng));
  return img;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("psnr: identical images hit the infinity sentinel") {
  std::mt19937_64 rng(1);
  const Image3f img = noise_image(rng, 16, 16);
  CHECK(std::isinf(psnr(img, img)));
}

TEST_CASE("psnr: uniform 0.1 error is 20 dB") {
  const int h = 12, w = 20;
  const Image3d truth = Image3d::constant(h, w, 0.25, 0.5, 0.75);
  Image3d pred = truth;
  for (int k = 0; k < 3; ++k) pred.ch[k] += 0.1;
  CHECK(std::abs(psnr(pred, truth) - 20.0) < 1e-9);

  // Single precision carries the 0.1 rounding into the last digits only.
  const Image3f truth_f(h, w);
  const Image3f pred_f = Image3f::constant(h, w, 0.1f, 0.1f, 0.1f);
  CHECK(std::abs(psnr(pred_f, truth_f) - 20.0) < 1e-6);
}

TEST_CASE("psnr: one-step-of-255 error") {
  const int h = 8, w = 8;
  const Image3f truth = Image3f::constant(h, w, 0.5f, 0.5f, 0.5f);
  Image3f pred = truth;
  for (int k = 0; k < 3; ++k) pred.ch[k] += 1.0f / 255.0f;
  CHECK(psnr(pred, truth) == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-6));
}

TEST_CASE("psnr strictly decreases as the error grows") {
  std::mt19937_64 rng(2);
  const int h = 16, w = 16;
  const Image3f truth = noise_image(rng, h, w);
  Image3f error(h, w);
  std::uniform_real_distribution<double> unit(-0.1, 0.1);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) error.ch[k](y, x) = float(unit(rng));

  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {0.5, 1.0, 2.0, 4.0}) {
    Image3f pred = truth;
    for (int k = 0; k < 3; ++k) pred.ch[k] += float(scale) * error.ch[k];
    const double value = psnr(pred, truth);
    CHECK(value < prev);
    prev = value;
  }
}

TEST_CASE("ssim: identical images give exactly 1.0") {
  std::mt19937_64 rng(3);
  const Image3f img = noise_image(rng, 24, 32);
  CHECK(ssim(img, img) == 1.0);
}

TEST_CASE("ssim: inverted binary image has negative structure") {
  const int h = 16, w = 16;
  Image3f truth(h, w);
  for (int k = 0; k < 3; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) truth.ch[k](y, x) = float((x + y) % 2);
  Image3f pred(h, w);
  for (int k = 0; k < 3; ++k) pred.ch[k] = 1.0f - truth.ch[k];
  CHECK(ssim(pred, truth) < 0.0);
}

TEST_CASE("ssim: constant shift keeps structure but loses luminance") {
  std::mt19937_64 rng(4);
  const int h = 20, w = 20;
  Image3f truth = noise_image(rng, h, w);
  for (int k = 0; k < 3; ++k) truth.ch[k] = 0.2f + 0.5f * truth.ch[k];
  Image3f pred = truth;
  for (int k = 0; k < 3; ++k) pred.ch[k] += 0.1f;
  const double value = ssim(pred, truth);
  CHECK(value < 1.0);
  CHECK(value > 0.5);  // structure intact
}

TEST_CASE("ssim is symmetric and bounded") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Image3f a = noise_image(rng, 14, 18);
    const Image3f b = noise_image(rng, 14, 18);
    const double ab = ssim(a, b);
    const double ba = ssim(b, a);
    CHECK(std::abs(ab - ba) < 1e-9);
    CHECK(ab <= 1.0);
    CHECK(ab >= -1.0);
  }
}

TEST_CASE("ssim rejects images smaller than the window") {
  const Image3f small = Image3f::constant(8, 8, 0.5f, 0.5f, 0.5f);
  CHECK_THROWS_AS(ssim(small, small), std::invalid_argument);
}

TEST_CASE("shape mismatches are rejected") {
  const Image3f a = Image3f::constant(12, 12, 0.5f, 0.5f, 0.5f);
  const Image3f b = Image3f::constant(12, 13, 0.5f, 0.5f, 0.5f);
  CHECK_THROWS_AS(psnr(a, b), std::invalid_argument);
  CHECK_THROWS_AS(ssim(a, b), std::invalid_argument);
}

}  // TEST_SUITE
