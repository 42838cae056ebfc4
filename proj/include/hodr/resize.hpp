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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hodr/error.hpp"
#include "hodr/image.hpp"

namespace hodr {

enum class ResizeMethod { kBilinear, kBicubic, kArea };

inline constexpr ResizeMethod kAllResizeMethods[] = {
    ResizeMethod::kBilinear, ResizeMethod::kBicubic, ResizeMethod::kArea};

inline std::string_view to_string(ResizeMethod m) {
  switch (m) {
    case ResizeMethod::kBilinear: return "bilinear";
    case ResizeMethod::kBicubic: return "bicubic";
    case ResizeMethod::kArea: return "area";
  }
  return "bilinear";
}

inline std::optional<ResizeMethod> parse_resize_method(std::string_view s) {
  for (ResizeMethod m : kAllResizeMethods) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

enum class Clamp { kNo, kYes };

namespace detail {

struct Tap {
  int index;
  double weight;
};

// Catmull-Rom (a = -0.5) cubic convolution weight.
inline double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

// Per-output-index taps along one axis. Pixel centers sit at i + 0.5.
inline std::vector<std::vector<Tap>> axis_taps(int in, int out,
                                               ResizeMethod method) {
  std::vector<std::vector<Tap>> taps(out);
  const double scale = static_cast<double>(out) / in;
  auto clamp_index = [in](int i) { return std::clamp(i, 0, in - 1); };
  for (int o = 0; o < out; ++o) {
    auto& t = taps[o];
    if (in == out) {
      t.push_back({o, 1.0});
      continue;
    }
    switch (method) {
      case ResizeMethod::kBilinear: {
        const double src = (o + 0.5) / scale - 0.5;
        const int i0 = static_cast<int>(std::floor(src));
        const double f = src - i0;
        t.push_back({clamp_index(i0), 1.0 - f});
        t.push_back({clamp_index(i0 + 1), f});
        break;
      }
      case ResizeMethod::kBicubic: {
        const double src = (o + 0.5) / scale - 0.5;
        const int i0 = static_cast<int>(std::floor(src));
        const double f = src - i0;
        double sum = 0.0;
        for (int k = -1; k <= 2; ++k) {
          const double w = cubic_weight(k - f);
          t.push_back({clamp_index(i0 + k), w});
          sum += w;
        }
        for (auto& tap : t) tap.weight /= sum;
        break;
      }
      case ResizeMethod::kArea: {
        // Exact box integration of the piecewise-constant input over the
        // output pixel's footprint [o/scale, (o+1)/scale).
        const double lo = o / scale;
        const double hi = (o + 1) / scale;
        const int first = static_cast<int>(std::floor(lo));
        const int last = std::min(in - 1, static_cast<int>(std::ceil(hi)) - 1);
        for (int i = std::max(0, first); i <= last; ++i) {
          const double overlap = std::min(hi, i + 1.0) - std::max(lo, double(i));
          if (overlap > 0.0) t.push_back({i, overlap * scale});
        }
        break;
      }
    }
  }
  return taps;
}

}  // namespace detail

// Resamples to exact target dims. Clamp::kNo is for signed intermediates such
// as back-projection residuals.
inline Image resize(const Image& img, Dims target, ResizeMethod method,
                    Clamp clamp = Clamp::kYes) {
  if (target.width < 1 || target.height < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "resize target must be at least 1x1, got " + to_string(target));
  }
  if (target == img.dims()) {
    return clamp == Clamp::kYes ? clip(img) : img;
  }
  const auto xt = detail::axis_taps(img.width(), target.width, method);
  const auto yt = detail::axis_taps(img.height(), target.height, method);

  Image horiz(target.width, img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < target.width; ++x) {
        double acc = 0.0;
        for (const auto& tap : xt[x]) acc += tap.weight * img.at(c, y, tap.index);
        horiz.at(c, y, x) = acc;
      }
    }
  }
  Image out(target, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < target.height; ++y) {
      for (int x = 0; x < target.width; ++x) {
        double acc = 0.0;
        for (const auto& tap : yt[y]) acc += tap.weight * horiz.at(c, tap.index, x);
        out.at(c, y, x) = acc;
      }
    }
  }
  if (clamp == Clamp::kYes) clip_in_place(out);
  return out;
}

inline Dims scaled_dims(Dims d, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "resize scale must be positive, got " + std::to_string(scale));
  }
  return {std::max(1, static_cast<int>(std::lround(d.width * scale))),
          std::max(1, static_cast<int>(std::lround(d.height * scale)))};
}

inline Image resize(const Image& img, double scale, ResizeMethod method,
                    Clamp clamp = Clamp::kYes) {
  return resize(img, scaled_dims(img.dims(), scale), method, clamp);
}

}  // namespace hodr
