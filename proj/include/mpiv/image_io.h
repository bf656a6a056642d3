#pragma once

#include <string>

#include "mpiv/image.h"

namespace mpiv {

struct ImageWithAlpha {
  Image3f color;
  ChannelF alpha;     // all-ones when the file had no alpha channel
  bool has_alpha = false;
};

/// Reads an 8/16-bit PNG or binary PPM into [0,1] floats.
Image3f read_image(const std::string& path);
ImageWithAlpha read_image_rgba(const std::string& path);

/// Writes by extension: .png (8-bit RGB) or .ppm. Values are clamped to [0,1].
void write_image(const std::string& path, const Image3f& image);

/// 16-bit RGBA PNG; round-trips values within 1/65535.
void write_png16_rgba(const std::string& path, const Image3f& color, const ChannelF& alpha);

}  // namespace mpiv
