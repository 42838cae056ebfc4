// Copyright (c) the hodr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hodr/error.hpp"
#include "hodr/image.hpp"

namespace hodr {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<unsigned char> bytes;
  std::vector<png_bytep> rows;
  std::string message;
  bool unsupported = false;
};

[[noreturn]] inline void png_error_to_longjmp(png_structp png,
                                              png_const_charp msg) {
  auto* sink = static_cast<std::string*>(png_get_error_ptr(png));
  if (sink) *sink = msg ? msg : "libpng error";
  png_longjmp(png, 1);
}

inline void png_ignore_warning(png_structp, png_const_charp) {}

// libpng reports errors by longjmp. Everything with a destructor is owned by
// the caller, so the jump never skips one.
inline bool read_png_raw(std::FILE* fp, RawPng& raw) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &raw.message,
                                           png_error_to_longjmp,
                                           png_ignore_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 8 && bit_depth != 16) {
    raw.unsupported = true;
    raw.message = "bit depth " + std::to_string(bit_depth);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  if (raw.channels != 1 && raw.channels != 3) {
    raw.unsupported = true;
    raw.message = std::to_string(raw.channels) + " channels after transforms";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  const size_t rowbytes = png_get_rowbytes(png, info);
  raw.bytes.resize(rowbytes * raw.height);
  raw.rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) raw.rows[y] = raw.bytes.data() + y * rowbytes;
  png_read_image(png, raw.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

inline bool write_png_raw(std::FILE* fp, const RawPng& raw) {
  png_structp png = png_create_write_struct(
      PNG_LIBPNG_VER_STRING, const_cast<std::string*>(&raw.message),
      png_error_to_longjmp, png_ignore_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, raw.width, raw.height, 8,
               raw.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(raw.rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace detail

// Half-up 8-bit quantization of a clipped sample.
inline unsigned char quantize8(double s) {
  const double c = std::clamp(s, 0.0, 1.0);
  return static_cast<unsigned char>(std::floor(c * 255.0 + 0.5));
}

inline Image load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::kUnreadableFile, path.string());

  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": not a PNG");
  }
  std::rewind(fp.get());

  detail::RawPng raw;
  if (!detail::read_png_raw(fp.get(), raw)) {
    if (raw.unsupported) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  path.string() + ": " + raw.message);
    }
    throw Error(ErrorCode::kUnreadableFile, path.string() + ": " + raw.message);
  }

  Image img(raw.width, raw.height, raw.channels);
  const bool wide = raw.bit_depth == 16;
  const double scale = wide ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (int y = 0; y < raw.height; ++y) {
    const unsigned char* row = raw.rows[y];
    for (int x = 0; x < raw.width; ++x) {
      for (int c = 0; c < raw.channels; ++c) {
        const size_t i = static_cast<size_t>(x) * raw.channels + c;
        const unsigned v = wide ? (unsigned(row[2 * i]) << 8) | row[2 * i + 1]
                                : unsigned(row[i]);
        img.at(c, y, x) = v * scale;
      }
    }
  }
  return img;
}

// Writes an 8-bit gray or RGB PNG; samples are clipped then rounded half-up.
inline void save_image(const Image& img, const std::filesystem::path& path) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "save_image needs 1 or 3 channels, got " +
                    std::to_string(img.channels()));
  }
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::kUnwritablePath, path.string());

  detail::RawPng raw;
  raw.width = img.width();
  raw.height = img.height();
  raw.channels = img.channels();
  raw.bit_depth = 8;
  const size_t rowbytes = static_cast<size_t>(raw.width) * raw.channels;
  raw.bytes.resize(rowbytes * raw.height);
  raw.rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) {
    raw.rows[y] = raw.bytes.data() + y * rowbytes;
    for (int x = 0; x < raw.width; ++x) {
      for (int c = 0; c < raw.channels; ++c) {
        raw.rows[y][static_cast<size_t>(x) * raw.channels + c] =
            quantize8(img.at(c, y, x));
      }
    }
  }
  if (!detail::write_png_raw(fp.get(), raw)) {
    throw Error(ErrorCode::kUnwritablePath, path.string() + ": " + raw.message);
  }
}

}  // namespace hodr
