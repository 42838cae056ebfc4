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
#include <cstdint>
#include <numbers>
#include <vector>

#include "hodr/image.hpp"
#include "hodr/resize.hpp"
#include "hodr/rng.hpp"

namespace hodr {

// Procedural test imagery: multi-octave smooth fields, hard-edged shapes and
// striped texture patches. Deterministic in the seed; no external data.
inline Image synthetic_image(uint64_t seed, Dims dims, int channels = 3) {
  Rng rng(seed);
  Image img(dims, channels, 0.0);

  // Smooth background: random coarse grids bicubically upsampled.
  for (int octave = 1; octave <= 4; ++octave) {
    const int cells = 1 << (octave + 1);
    const double amp = 0.35 / octave;
    Image coarse(cells, cells, channels);
    for (int y = 0; y < cells; ++y) {
      for (int x = 0; x < cells; ++x) {
        const double shared = rng.uniform(-1.0, 1.0);
        for (int c = 0; c < channels; ++c) {
          coarse.at(c, y, x) = 0.5 + 0.5 * (0.7 * shared + 0.3 * rng.uniform(-1.0, 1.0));
        }
      }
    }
    const Image up = resize(coarse, dims, ResizeMethod::kBicubic, Clamp::kNo);
    auto dst = img.samples();
    auto src = up.samples();
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += amp * (src[i] - 0.5);
  }
  for (double& s : img.samples()) s += 0.5;

  auto paint = [&](auto inside, const std::vector<double>& color, double opacity) {
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        if (!inside(x, y)) continue;
        for (int c = 0; c < channels; ++c) {
          double& v = img.at(c, y, x);
          v = (1.0 - opacity) * v + opacity * color[c];
        }
      }
    }
  };
  auto random_color = [&] {
    const double base = rng.uniform(0.05, 0.95);
    std::vector<double> col(channels);
    for (double& v : col) v = std::clamp(base + rng.uniform(-0.2, 0.2), 0.0, 1.0);
    return col;
  };

  const int shapes = rng.uniform_int(5, 10);
  for (int s = 0; s < shapes; ++s) {
    const double cx = rng.uniform(0, dims.width), cy = rng.uniform(0, dims.height);
    const double ext = rng.uniform(0.06, 0.25) * std::min(dims.width, dims.height);
    const auto color = random_color();
    const double opacity = rng.uniform(0.6, 1.0);
    switch (rng.uniform_int(0, 2)) {
      case 0: {
        const double ax = ext * rng.uniform(0.5, 1.5), ay = ext * rng.uniform(0.5, 1.5);
        paint([&](int x, int y) { return std::abs(x - cx) < ax && std::abs(y - cy) < ay; },
              color, opacity);
        break;
      }
      case 1:
        paint([&](int x, int y) {
          return (x - cx) * (x - cx) + (y - cy) * (y - cy) < ext * ext;
        }, color, opacity);
        break;
      default: {
        // Striped patch.
        const double freq = rng.uniform(0.08, 0.35);
        const double ang = rng.uniform(0.0, std::numbers::pi);
        const double ca = std::cos(ang), sa = std::sin(ang);
        const auto alt = random_color();
        for (int y = 0; y < dims.height; ++y) {
          for (int x = 0; x < dims.width; ++x) {
            if (std::abs(x - cx) >= ext || std::abs(y - cy) >= ext) continue;
            const double phase = 2.0 * std::numbers::pi * freq * (ca * x + sa * y);
            const double t = 0.5 + 0.5 * std::sin(phase);
            for (int c = 0; c < channels; ++c) {
              img.at(c, y, x) = t * color[c] + (1.0 - t) * alt[c];
            }
          }
        }
        break;
      }
    }
  }
  for (double& s : img.samples()) s = std::clamp(s, 0.02, 0.98);
  return img;
}

// The fixed evaluation set used by the property and trend tests.
inline std::vector<Image> desk_corpus(int count = 20, Dims dims = {96, 96},
                                      uint64_t seed = 2024) {
  std::vector<Image> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(synthetic_image(derive_seed(seed, i, 0), dims));
  }
  return out;
}

}  // namespace hodr
