#include "mpiv/image_io.h"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "mpiv/io_util.h"

namespace mpiv {

namespace {

namespace fs = std::filesystem;

std::string lower_extension(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  for (char& c : ext) c = char(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageWithAlpha read_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw std::invalid_argument("cannot open image: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png: out of memory");
  }
  std::vector<png_byte> data;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::invalid_argument("png: failed to decode " + path);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  data.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = data.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImageWithAlpha out;
  out.color = Image3f(height, width);
  out.alpha = ChannelF::Ones(height, width);
  out.has_alpha = channels == 4;
  const float scale8 = 1.0f / 255.0f;
  const float scale16 = 1.0f / 65535.0f;
  for (png_uint_32 y = 0; y < height; ++y) {
    const png_byte* row = rows[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      float px[4] = {0, 0, 0, 1};
      if (depth == 16) {
        const png_byte* p = row + x * channels * 2;
        for (int c = 0; c < channels; ++c)
          px[c] = float((unsigned(p[2 * c]) << 8) | unsigned(p[2 * c + 1])) * scale16;
      } else {
        const png_byte* p = row + x * channels;
        for (int c = 0; c < channels; ++c) px[c] = float(p[c]) * scale8;
      }
      for (int k = 0; k < 3; ++k) out.color.ch[k](y, x) = px[k];
      if (channels == 4) out.alpha(y, x) = px[3];
    }
  }
  return out;
}

ImageWithAlpha read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw std::invalid_argument("ppm: only binary P6 supported: " + path);
  long width = 0, height = 0, maxval = 0;
  // Header tokens may be separated by comments.
  auto next_long = [&](long& value) {
    std::string token;
    while (in >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      value = std::stol(token);
      return;
    }
    throw std::invalid_argument("ppm: truncated header: " + path);
  };
  next_long(width);
  next_long(height);
  next_long(maxval);
  if (width < 1 || height < 1 || (maxval != 255 && maxval != 65535))
    throw std::invalid_argument("ppm: unsupported header: " + path);
  in.get();  // single whitespace after maxval

  const int bytes_per_value = maxval == 255 ? 1 : 2;
  std::vector<unsigned char> data(std::size_t(width) * height * 3 * bytes_per_value);
  in.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size()));
  if (!in) throw std::invalid_argument("ppm: truncated pixel data: " + path);

  ImageWithAlpha out;
  out.color = Image3f(height, width);
  out.alpha = ChannelF::Ones(height, width);
  const float scale = 1.0f / float(maxval);
  std::size_t i = 0;
  for (long y = 0; y < height; ++y)
    for (long x = 0; x < width; ++x)
      for (int k = 0; k < 3; ++k) {
        unsigned value = data[i++];
        if (bytes_per_value == 2) value = (value << 8) | data[i++];
        out.color.ch[k](y, x) = float(value) * scale;
      }
  return out;
}

void write_png(const std::string& path, const Image3f& color, const ChannelF* alpha,
               int bit_depth) {
  const Eigen::Index h = color.height(), w = color.width();
  const int channels = alpha ? 4 : 3;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";

  FilePtr file(std::fopen(tmp.c_str(), "wb"));
  if (!file) throw std::invalid_argument("cannot write image: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: failed to encode " + path);
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), bit_depth,
               alpha ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t bytes_per_value = bit_depth == 16 ? 2 : 1;
  std::vector<png_byte> row(std::size_t(w) * channels * bytes_per_value);
  for (Eigen::Index y = 0; y < h; ++y) {
    std::size_t i = 0;
    for (Eigen::Index x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        const float value =
            c < 3 ? color.ch[c](y, x) : (*alpha)(y, x);
        const unsigned q =
            unsigned(std::lround(std::clamp(double(value), 0.0, 1.0) * maxval));
        if (bit_depth == 16) {
          row[i++] = png_byte(q >> 8);
          row[i++] = png_byte(q & 0xFF);
        } else {
          row[i++] = png_byte(q);
        }
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  file.reset();
  fs::rename(tmp, target);
}

void write_ppm(const std::string& path, const Image3f& color) {
  const Eigen::Index h = color.height(), w = color.width();
  std::string payload = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  payload.reserve(payload.size() + std::size_t(h) * w * 3);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      for (int k = 0; k < 3; ++k)
        payload.push_back(
            char(std::lround(std::clamp(double(color.ch[k](y, x)), 0.0, 1.0) * 255.0)));
  atomic_write_text(path, payload);
}

}  // namespace

Image3f read_image(const std::string& path) { return read_image_rgba(path).color; }

ImageWithAlpha read_image_rgba(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm") return read_ppm(path);
  throw std::invalid_argument("unsupported image format (" + ext + "): " + path);
}

void write_image(const std::string& path, const Image3f& image) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_png(path, image, nullptr, 8);
  } else if (ext == ".ppm") {
    write_ppm(path, image);
  } else {
    throw std::invalid_argument("unsupported image format (" + ext + "): " + path);
  }
}

void write_png16_rgba(const std::string& path, const Image3f& color, const ChannelF& alpha) {
  detail::require(color.height() == alpha.rows() && color.width() == alpha.cols(),
                  "write_png16_rgba: color/alpha shape mismatch");
  write_png(path, color, &alpha, 16);
}

}  // namespace mpiv
