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

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hodr/convolve.hpp"
#include "hodr/error.hpp"
#include "hodr/image.hpp"
#include "hodr/kernels.hpp"
#include "hodr/resize.hpp"
#include "hodr/rng.hpp"

namespace hodr {

enum class NoiseKind { kGaussian, kPoisson };

inline std::string_view to_string(NoiseKind k) {
  return k == NoiseKind::kGaussian ? "gaussian" : "poisson";
}

inline std::optional<NoiseKind> parse_noise_kind(std::string_view s) {
  if (s == "gaussian") return NoiseKind::kGaussian;
  if (s == "poisson") return NoiseKind::kPoisson;
  return std::nullopt;
}

// level: Gaussian sigma on the 0-255 scale, or Poisson level lambda where the
// photon scale is 255 / lambda.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  double level = 1.0;
  bool gray = false;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

enum class ResizeMode { kUp, kDown, kKeep };

inline std::string_view to_string(ResizeMode m) {
  switch (m) {
    case ResizeMode::kUp: return "up";
    case ResizeMode::kDown: return "down";
    case ResizeMode::kKeep: return "keep";
  }
  return "keep";
}

inline std::optional<ResizeMode> parse_resize_mode(std::string_view s) {
  if (s == "up") return ResizeMode::kUp;
  if (s == "down") return ResizeMode::kDown;
  if (s == "keep") return ResizeMode::kKeep;
  return std::nullopt;
}

struct ResizeSpec {
  ResizeMode mode = ResizeMode::kKeep;
  double scale = 1.0;
  ResizeMethod method = ResizeMethod::kBilinear;

  friend bool operator==(const ResizeSpec&, const ResizeSpec&) = default;
};

// One first-order factor: noise(resize(blur(x))).
struct StageRecipe {
  std::optional<KernelSpec> blur;
  ResizeSpec resize;
  NoiseSpec noise;
  uint64_t noise_seed = 0;

  friend bool operator==(const StageRecipe&, const StageRecipe&) = default;
};

struct DegradationRecipe {
  int order = 1;
  std::vector<StageRecipe> stages;
  int final_scale = 2;
  ResizeMethod final_method = ResizeMethod::kBicubic;
  uint64_t master_seed = 0;

  friend bool operator==(const DegradationRecipe&, const DegradationRecipe&) = default;
};

// images[0] is the HR input, images[l] the output of stage l (before the
// final resize). pre_noise[l-1] is stage l's image just before noise.
struct StageTrace {
  std::vector<Image> images;
  std::vector<Image> pre_noise;
};

// ---------------------------------------------------------------------------
// Sampling schedule.

struct StageRanges {
  double up_probability;
  double down_probability;
  double scale_min;
  double scale_max;
  double gaussian_max;
  double poisson_max;
};

inline StageRanges stage_ranges(int stage) {
  if (stage <= 1) return {0.2, 0.7, 0.5, 1.5, 25.0, 2.5};
  return {0.3, 0.4, 0.8, 1.2, 20.0, 2.0};
}

inline constexpr double kGaussianLevelMin = 1.0;
inline constexpr double kPoissonLevelMin = 0.05;
inline constexpr double kGaussianNoiseProbability = 0.5;
inline constexpr double kGrayNoiseProbability = 0.4;
inline constexpr double kBlurSkipProbability = 0.2;

enum class SeedPurpose : uint64_t {
  kBlur = 1,
  kResize = 2,
  kNoise = 3,
  kNoiseSeed = 4,
  kFinal = 5,
};

inline uint64_t stage_seed(uint64_t master, int stage, SeedPurpose purpose) {
  return derive_seed(master, static_cast<uint64_t>(stage),
                     static_cast<uint64_t>(purpose));
}

inline StageRecipe sample_stage(uint64_t master_seed, int stage) {
  const StageRanges r = stage_ranges(stage);
  StageRecipe out;

  Rng blur_rng(stage_seed(master_seed, stage, SeedPurpose::kBlur));
  if (stage == 1 || !blur_rng.bernoulli(kBlurSkipProbability)) {
    out.blur = sample_kernel_spec(blur_rng, stage);
  }

  Rng resize_rng(stage_seed(master_seed, stage, SeedPurpose::kResize));
  const double u = resize_rng.uniform();
  const double v = resize_rng.uniform();
  if (u < r.up_probability) {
    out.resize.mode = ResizeMode::kUp;
    out.resize.scale = r.scale_max - (r.scale_max - 1.0) * v;  // (1, max]
  } else if (u < r.up_probability + r.down_probability) {
    out.resize.mode = ResizeMode::kDown;
    out.resize.scale = r.scale_min + (1.0 - r.scale_min) * v;  // [min, 1)
  } else {
    out.resize.mode = ResizeMode::kKeep;
    out.resize.scale = 1.0;
  }
  out.resize.method = kAllResizeMethods[resize_rng.uniform_int(0, 2)];

  Rng noise_rng(stage_seed(master_seed, stage, SeedPurpose::kNoise));
  if (noise_rng.bernoulli(kGaussianNoiseProbability)) {
    out.noise.kind = NoiseKind::kGaussian;
    out.noise.level = noise_rng.uniform(kGaussianLevelMin, r.gaussian_max);
  } else {
    out.noise.kind = NoiseKind::kPoisson;
    out.noise.level = noise_rng.uniform(kPoissonLevelMin, r.poisson_max);
  }
  out.noise.gray = noise_rng.bernoulli(kGrayNoiseProbability);
  out.noise_seed = stage_seed(master_seed, stage, SeedPurpose::kNoiseSeed);
  return out;
}

inline void require_order_and_scale(int k, int s) {
  if (k < 1 || k > 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "order must be 1, 2 or 3, got " + std::to_string(k));
  }
  if (s < 2 || s > 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "final scale must be 2, 3 or 4, got " + std::to_string(s));
  }
}

// Every draw comes from a (master_seed, stage, purpose) substream, so stage l
// of an order-k recipe equals stage l of any other order with the same seed.
inline DegradationRecipe sample_recipe(uint64_t master_seed, int k, int s) {
  require_order_and_scale(k, s);
  DegradationRecipe recipe;
  recipe.order = k;
  recipe.final_scale = s;
  recipe.master_seed = master_seed;
  for (int stage = 1; stage <= k; ++stage) {
    recipe.stages.push_back(sample_stage(master_seed, stage));
  }
  Rng final_rng(stage_seed(master_seed, 0, SeedPurpose::kFinal));
  recipe.final_method = kAllResizeMethods[final_rng.uniform_int(0, 2)];
  return recipe;
}

inline DegradationRecipe sample_recipe(Rng& rng, int k, int s) {
  return sample_recipe(rng.next_u64(), k, s);
}

// ---------------------------------------------------------------------------
// Noise.

inline Image add_gaussian_noise(const Image& img, double sigma255, bool gray,
                                Rng& rng) {
  const double sigma = sigma255 / 255.0;
  Image out = img;
  if (gray && img.channels() > 1) {
    std::vector<double> field(img.plane_size());
    for (double& e : field) e = sigma * rng.normal();
    for (int c = 0; c < img.channels(); ++c) {
      auto p = out.plane(c);
      for (size_t i = 0; i < p.size(); ++i) p[i] += field[i];
    }
  } else {
    for (double& s : out.samples()) s += sigma * rng.normal();
  }
  clip_in_place(out);
  return out;
}

inline Image add_poisson_noise(const Image& img, double lambda, bool gray,
                               Rng& rng) {
  const double photons = 255.0 / lambda;
  auto shot = [&](double x) {
    const double mean = std::clamp(x, 0.0, 1.0) * photons;
    return static_cast<double>(rng.poisson(mean)) / photons;
  };
  Image out = img;
  if (gray && img.channels() > 1) {
    // One luminance-driven realization, added to every channel.
    const Image y = luminance(img);
    auto yp = y.plane(0);
    std::vector<double> field(img.plane_size());
    for (size_t i = 0; i < field.size(); ++i) {
      field[i] = shot(yp[i]) - std::clamp(yp[i], 0.0, 1.0);
    }
    for (int c = 0; c < img.channels(); ++c) {
      auto p = out.plane(c);
      for (size_t i = 0; i < p.size(); ++i) p[i] += field[i];
    }
  } else {
    for (double& s : out.samples()) s = shot(s);
  }
  clip_in_place(out);
  return out;
}

inline Image add_noise(const Image& img, const NoiseSpec& noise, Rng& rng) {
  if (noise.kind == NoiseKind::kGaussian) {
    return add_gaussian_noise(img, noise.level, noise.gray, rng);
  }
  return add_poisson_noise(img, noise.level, noise.gray, rng);
}

// ---------------------------------------------------------------------------
// Application.

struct StageOutput {
  Image pre_noise;
  Image out;
};

// out = N(S(B(img))), clipping after each operator.
inline StageOutput apply_stage(const Image& img, const StageRecipe& stage) {
  Image x = img;
  if (stage.blur) x = clip(convolve(x, make_kernel(*stage.blur)));
  if (stage.resize.mode != ResizeMode::kKeep) {
    x = resize(x, stage.resize.scale, stage.resize.method);
  }
  StageOutput result;
  result.pre_noise = x;
  Rng rng(stage.noise_seed);
  result.out = add_noise(x, stage.noise, rng);
  return result;
}

// Dims of g_0 .. g_k for a given HR size.
inline std::vector<Dims> stage_dims(Dims hr, const DegradationRecipe& recipe) {
  std::vector<Dims> dims{hr};
  for (const auto& st : recipe.stages) {
    dims.push_back(st.resize.mode == ResizeMode::kKeep
                       ? dims.back()
                       : scaled_dims(dims.back(), st.resize.scale));
  }
  return dims;
}

inline Dims lr_dims(Dims hr, int final_scale) {
  return {hr.width / final_scale, hr.height / final_scale};
}

inline StageTrace run_chain(const Image& img,
                            const std::vector<StageRecipe>& stages) {
  StageTrace trace;
  trace.images.push_back(img);
  for (const auto& st : stages) {
    StageOutput o = apply_stage(trace.images.back(), st);
    trace.pre_noise.push_back(std::move(o.pre_noise));
    trace.images.push_back(std::move(o.out));
  }
  return trace;
}

inline Image final_resize(const Image& gk, Dims target, ResizeMethod method) {
  return resize(gk, target, method);
}

struct DegradeResult {
  Image lr;
  StageTrace trace;
};

inline void validate_recipe(const DegradationRecipe& recipe) {
  if (recipe.order < 1 ||
      recipe.stages.size() != static_cast<size_t>(recipe.order)) {
    throw Error(ErrorCode::kInvalidArgument,
                "recipe order " + std::to_string(recipe.order) + " with " +
                    std::to_string(recipe.stages.size()) + " stages");
  }
  if (recipe.final_scale < 1) {
    throw Error(ErrorCode::kInvalidArgument, "final_scale must be >= 1");
  }
}

inline DegradeResult degrade(const Image& img, const DegradationRecipe& recipe) {
  validate_recipe(recipe);
  const int s = recipe.final_scale;
  if (img.width() % s != 0 || img.height() % s != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "HR dims " + to_string(img.dims()) + " not divisible by " +
                    std::to_string(s));
  }
  DegradeResult result;
  result.trace = run_chain(img, recipe.stages);
  result.lr = final_resize(result.trace.images.back(), lr_dims(img.dims(), s),
                           recipe.final_method);
  return result;
}

}  // namespace hodr
