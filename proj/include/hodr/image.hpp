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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hodr/error.hpp"

namespace hodr {

struct Dims {
  int width = 0;
  int height = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(Dims d) {
  return std::to_string(d.width) + "x" + std::to_string(d.height);
}

// Planar floating-point raster. Samples are nominally in [0,1]; intermediate
// results (residuals, unclipped convolutions) may leave that range.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1 || channels < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image dims must be positive, got " + std::to_string(width) +
                      "x" + std::to_string(height) + "x" +
                      std::to_string(channels));
    }
    data_.assign(static_cast<size_t>(width) * height * channels, fill);
  }
  Image(Dims dims, int channels, double fill = 0.0)
      : Image(dims.width, dims.height, channels, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  Dims dims() const { return {width_, height_}; }
  bool empty() const { return data_.empty(); }
  size_t plane_size() const { return static_cast<size_t>(width_) * height_; }
  size_t size() const { return data_.size(); }

  double& at(int c, int y, int x) {
    return data_[c * plane_size() + static_cast<size_t>(y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return data_[c * plane_size() + static_cast<size_t>(y) * width_ + x];
  }

  std::span<double> plane(int c) {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }

  std::span<double> samples() { return data_; }
  std::span<const double> samples() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

inline bool same_shape(const Image& a, const Image& b) {
  return a.dims() == b.dims() && a.channels() == b.channels();
}

inline void require_same_shape(const Image& a, const Image& b,
                               std::string_view what) {
  if (!same_shape(a, b)) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": " + to_string(a.dims()) + "x" +
                    std::to_string(a.channels()) + " vs " +
                    to_string(b.dims()) + "x" + std::to_string(b.channels()));
  }
}

inline void clip_in_place(Image& img, double lo = 0.0, double hi = 1.0) {
  for (double& s : img.samples()) s = std::clamp(s, lo, hi);
}

inline Image clip(Image img, double lo = 0.0, double hi = 1.0) {
  clip_in_place(img, lo, hi);
  return img;
}

// Rec. 601 luma. Single-channel input is returned unchanged.
inline Image luminance(const Image& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "luminance needs 1 or 3 channels, got " +
                    std::to_string(img.channels()));
  }
  Image out(img.dims(), 1);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto y = out.plane(0);
  for (size_t i = 0; i < y.size(); ++i) {
    y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  }
  return out;
}

inline double mean(const Image& img) {
  double sum = 0.0;
  for (double s : img.samples()) sum += s;
  return img.empty() ? 0.0 : sum / static_cast<double>(img.size());
}

inline double max_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto sa = a.samples(), sb = b.samples();
  for (size_t i = 0; i < sa.size(); ++i) m = std::max(m, std::abs(sa[i] - sb[i]));
  return m;
}

inline double mean_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "mean_abs_diff");
  double sum = 0.0;
  auto sa = a.samples(), sb = b.samples();
  for (size_t i = 0; i < sa.size(); ++i) sum += std::abs(sa[i] - sb[i]);
  return sum / static_cast<double>(sa.size());
}

// out = a + scale * b, elementwise.
inline Image axpy(const Image& a, double scale, const Image& b) {
  require_same_shape(a, b, "axpy");
  Image out = a;
  auto so = out.samples();
  auto sb = b.samples();
  for (size_t i = 0; i < so.size(); ++i) so[i] += scale * sb[i];
  return out;
}

}  // namespace hodr
