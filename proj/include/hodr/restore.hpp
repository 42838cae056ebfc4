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
#include <cassert>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hodr/convolve.hpp"
#include "hodr/degrade.hpp"
#include "hodr/error.hpp"
#include "hodr/image.hpp"
#include "hodr/kernels.hpp"
#include "hodr/resize.hpp"

namespace hodr {

enum class RestoreMode { kOracle, kBlind };

inline std::string_view to_string(RestoreMode m) {
  return m == RestoreMode::kOracle ? "oracle" : "blind";
}

inline std::optional<RestoreMode> parse_restore_mode(std::string_view s) {
  if (s == "oracle") return RestoreMode::kOracle;
  if (s == "blind") return RestoreMode::kBlind;
  return std::nullopt;
}

// Noise level at which prox_lambda is applied unscaled.
inline constexpr double kReferenceNoiseSigma = 0.06;

struct RestorationConfig {
  int order = 2;
  int neumann_terms = 1;
  double prox_lambda = 0.15;
  int prox_iters = 60;
  RestoreMode mode = RestoreMode::kOracle;
  // Blind mode only; defaults to final_scale^(1/order).
  std::optional<double> per_stage_upscale;
  int final_scale = 2;
  int backprojection_iters = 5;
  std::optional<KernelSpec> blind_kernel =
      KernelSpec{KernelFamily::kIsoGauss, 5, 1.0, 1.0, 0.0, 1.0, 3.141592653589793};
};

inline void validate_config(const RestorationConfig& c) {
  if (c.order < 1) throw Error(ErrorCode::kInvalidArgument, "order must be >= 1");
  if (c.neumann_terms < 0) {
    throw Error(ErrorCode::kInvalidArgument, "neumann_terms must be >= 0");
  }
  if (c.prox_iters < 1) {
    throw Error(ErrorCode::kInvalidArgument, "prox_iters must be >= 1");
  }
  if (!(c.prox_lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "prox_lambda must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Denoising: proximal map of isotropic total variation.

struct TvProxResult {
  Image image;
  // Dual objective 0.5 * ||f + theta * div p||^2 per channel-summed
  // iteration, starting with p = 0.
  std::vector<double> objective;
};

namespace detail {

inline void tv_gradient(std::span<const double> v, int w, int h,
                        std::vector<double>& gx, std::vector<double>& gy) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      gx[i] = x + 1 < w ? v[i + 1] - v[i] : 0.0;
      gy[i] = y + 1 < h ? v[i + w] - v[i] : 0.0;
    }
  }
}

// Negative adjoint of tv_gradient.
inline void tv_divergence(const std::vector<double>& px,
                          const std::vector<double>& py, int w, int h,
                          std::vector<double>& div) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      double d = 0.0;
      if (x + 1 < w) d += px[i];
      if (x > 0) d -= px[i - 1];
      if (y + 1 < h) d += py[i];
      if (y > 0) d -= py[i - w];
      div[i] = d;
    }
  }
}

}  // namespace detail

// argmin_v ||v - f||^2 + lambda * TV(v) by projected gradient on the dual
// with step 1/8. Equivalent to ROF with weight theta = lambda / 2.
inline TvProxResult tv_prox(const Image& img, double lambda, int iters) {
  TvProxResult result{img, {}};
  if (lambda == 0.0) return result;
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "prox lambda must be >= 0");
  }
  const double theta = 0.5 * lambda;
  const double step = 1.0 / (8.0 * theta);
  const int w = img.width(), h = img.height();
  const size_t n = img.plane_size();

  std::vector<std::vector<double>> px(img.channels(), std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> py = px;
  std::vector<double> div(n), gx(n), gy(n), v(n);

  auto primal = [&](int c) {
    auto f = img.plane(c);
    detail::tv_divergence(px[c], py[c], w, h, div);
    double energy = 0.0;
    for (size_t i = 0; i < n; ++i) {
      v[i] = f[i] + theta * div[i];
      energy += v[i] * v[i];
    }
    return 0.5 * energy;
  };

  double objective = 0.0;
  for (int c = 0; c < img.channels(); ++c) objective += primal(c);
  result.objective.push_back(objective);

  for (int it = 0; it < iters; ++it) {
    objective = 0.0;
    for (int c = 0; c < img.channels(); ++c) {
      primal(c);
      detail::tv_gradient(v, w, h, gx, gy);
      auto& qx = px[c];
      auto& qy = py[c];
      for (size_t i = 0; i < n; ++i) {
        const double ax = qx[i] + step * gx[i];
        const double ay = qy[i] + step * gy[i];
        const double norm = std::max(1.0, std::sqrt(ax * ax + ay * ay));
        qx[i] = ax / norm;
        qy[i] = ay / norm;
      }
      objective += primal(c);
    }
    assert(objective <= result.objective.back() * (1.0 + 1e-12) + 1e-15);
    result.objective.push_back(objective);
  }

  for (int c = 0; c < img.channels(); ++c) {
    primal(c);
    std::copy(v.begin(), v.end(), result.image.plane(c).begin());
  }
  clip_in_place(result.image);
  return result;
}

inline Image prox_denoise(const Image& img, double lambda, int iters) {
  return tv_prox(img, lambda, iters).image;
}

// ---------------------------------------------------------------------------
// Super-resolution: bilinear interpolation refined by back-projection so that
// area-downsampling the result reproduces the input.
//
// The output stays in the range of bilinear upsampling, x = U z, and the
// iterations solve (D U) z = g with D the area downsampler. D U is a low-pass
// averaging operator with spectrum inside [0.25, 1], so Chebyshev acceleration
// over that interval converges about three times faster per step than plain
// back-projection while never amplifying any mode.

inline constexpr double kBackprojectionSpectrumMin = 0.25;
inline constexpr double kBackprojectionSpectrumMax = 1.0;

inline Image super_resolve(const Image& img, Dims target, int backprojection_iters) {
  if (target == img.dims()) return img;
  const Dims in = img.dims();
  if (target.width < in.width || target.height < in.height) {
    return resize(img, target, ResizeMethod::kArea, Clamp::kNo);
  }
  auto up = [&](const Image& z) {
    return resize(z, target, ResizeMethod::kBilinear, Clamp::kNo);
  };
  Image x = up(img);
  const double d = 0.5 * (kBackprojectionSpectrumMax + kBackprojectionSpectrumMin);
  const double c = 0.5 * (kBackprojectionSpectrumMax - kBackprojectionSpectrumMin);
  double alpha = 0.0;
  Image direction;
  for (int it = 0; it < backprojection_iters; ++it) {
    const Image residual =
        axpy(img, -1.0, resize(x, in, ResizeMethod::kArea, Clamp::kNo));
    if (it == 0) {
      direction = residual;
      alpha = 1.0 / d;
    } else {
      const double beta = it == 1 ? 0.5 * (c * alpha) * (c * alpha)
                                  : (0.5 * c * alpha) * (0.5 * c * alpha);
      alpha = 1.0 / (d - beta / alpha);
      direction = axpy(residual, beta, direction);
    }
    x = axpy(x, alpha, up(direction));
  }
  return x;
}

inline Image upsample_sr(const Image& img, double ratio, int backprojection_iters = 5) {
  if (!(ratio >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "upsample ratio must be >= 1, got " + std::to_string(ratio));
  }
  return super_resolve(img, scaled_dims(img.dims(), ratio), backprojection_iters);
}

// ---------------------------------------------------------------------------
// Deblurring: truncated Neumann series sum_{i=0}^{m} (I - B)^i applied by the
// recurrence y_0 = g, y_{i+1} = g + (I - B) y_i.

inline Image neumann_series(const Image& img, const BlurKernel& kernel, int terms) {
  if (terms < 0) {
    throw Error(ErrorCode::kInvalidArgument, "neumann terms must be >= 0");
  }
  if (terms == 0) return img;
  FftConvolver blur(img.dims(), kernel);
  Image y = img;
  for (int i = 0; i < terms; ++i) {
    const Image by = blur.apply(y);
    auto ys = y.samples();
    auto gs = img.samples();
    auto bs = by.samples();
    for (size_t j = 0; j < ys.size(); ++j) ys[j] = gs[j] + ys[j] - bs[j];
  }
  return y;
}

inline Image neumann_deblur(const Image& img, const BlurKernel& kernel, int terms) {
  return clip(neumann_series(img, kernel, terms));
}

// ---------------------------------------------------------------------------
// Noise estimation: MAD of the finest diagonal Haar band.

inline double estimate_noise_sigma(const Image& img) {
  std::vector<double> band;
  const int hw = img.width() / 2, hh = img.height() / 2;
  band.reserve(static_cast<size_t>(hw) * hh * img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < hh; ++y) {
      for (int x = 0; x < hw; ++x) {
        const double a = img.at(c, 2 * y, 2 * x), b = img.at(c, 2 * y, 2 * x + 1);
        const double d = img.at(c, 2 * y + 1, 2 * x), e = img.at(c, 2 * y + 1, 2 * x + 1);
        band.push_back(std::abs(a - b - d + e) * 0.5);
      }
    }
  }
  if (band.empty()) return 0.0;
  auto mid = band.begin() + band.size() / 2;
  std::nth_element(band.begin(), mid, band.end());
  double med = *mid;
  if (band.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(band.begin(), mid));
  }
  return med / 0.6745;
}

// ---------------------------------------------------------------------------
// Stage driver.

// What one inverse stage knows about its forward counterpart.
struct StageEstimate {
  std::optional<BlurKernel> kernel;
  double noise_sigma = 0.0;
  Dims target;
};

inline double recipe_noise_sigma(const NoiseSpec& noise, const Image& observed) {
  if (noise.kind == NoiseKind::kGaussian) return noise.level / 255.0;
  // Poisson variance x * level / 255, taken at the mean intensity.
  return std::sqrt(std::max(0.0, mean(observed)) * noise.level / 255.0);
}

inline StageEstimate oracle_stage_estimate(const StageRecipe& stage,
                                           const Image& observed, Dims target) {
  StageEstimate est;
  if (stage.blur) est.kernel = make_kernel(*stage.blur);
  est.noise_sigma = recipe_noise_sigma(stage.noise, observed);
  est.target = target;
  return est;
}

inline StageEstimate blind_stage_estimate(const Image& observed, Dims target,
                                          const RestorationConfig& config) {
  if (!config.blind_kernel) {
    throw Error(ErrorCode::kInvalidArgument,
                "blind mode needs a kernel assumption (blind_kernel unset)");
  }
  StageEstimate est;
  est.kernel = make_kernel(*config.blind_kernel);
  est.noise_sigma = estimate_noise_sigma(observed);
  est.target = target;
  return est;
}

struct StageRestoration {
  int stage = 0;
  Image input;
  Image dn;
  Image sr;
  Image db;
};

inline double effective_lambda(double lambda, double sigma) {
  return lambda * sigma / kReferenceNoiseSigma;
}

// g_{l-1} = deblur(super_resolve(denoise(g_l))).
inline StageRestoration restore_stage(const Image& g, const StageEstimate& est,
                                      const RestorationConfig& config) {
  validate_config(config);
  StageRestoration r;
  r.input = g;
  r.dn = prox_denoise(g, effective_lambda(config.prox_lambda, est.noise_sigma),
                      config.prox_iters);
  r.sr = super_resolve(r.dn, est.target, config.backprojection_iters);
  r.db = est.kernel ? neumann_deblur(r.sr, *est.kernel, config.neumann_terms)
                    : clip(r.sr);
  return r;
}

struct RestorationTrace {
  // LR after inverting the final resize (g_k estimate).
  Image initial;
  // Ordered l = k, k-1, ..., 1.
  std::vector<StageRestoration> stages;
};

struct RestoreResult {
  Image estimate;
  RestorationTrace trace;
};

// Progressive inversion g_k -> g_{k-1} -> ... -> g_0.
inline RestoreResult restore(const Image& lr, const DegradationRecipe* recipe,
                             const RestorationConfig& config) {
  validate_config(config);
  RestoreResult result;
  std::vector<Dims> dims;
  if (config.mode == RestoreMode::kOracle) {
    if (!recipe) {
      throw Error(ErrorCode::kInvalidArgument, "oracle mode requires a recipe");
    }
    validate_recipe(*recipe);
    if (recipe->order != config.order) {
      throw Error(ErrorCode::kInvalidArgument,
                  "config order " + std::to_string(config.order) +
                      " != recipe order " + std::to_string(recipe->order));
    }
    const Dims hr{lr.width() * recipe->final_scale,
                  lr.height() * recipe->final_scale};
    dims = stage_dims(hr, *recipe);
    result.trace.initial =
        clip(super_resolve(lr, dims.back(), config.backprojection_iters));
  } else {
    const int k = config.order;
    const double s = config.final_scale;
    const double ratio = config.per_stage_upscale.value_or(std::pow(s, 1.0 / k));
    if (!(ratio >= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "per_stage_upscale must be >= 1");
    }
    dims.assign(k + 1, lr.dims());
    for (int l = k - 1; l >= 1; --l) {
      dims[l] = scaled_dims(lr.dims(), std::pow(ratio, k - l));
    }
    dims[0] = {lr.width() * config.final_scale, lr.height() * config.final_scale};
    result.trace.initial = lr;
  }

  Image g = result.trace.initial;
  for (int l = config.order; l >= 1; --l) {
    const Dims target = dims[l - 1];
    const StageEstimate est =
        config.mode == RestoreMode::kOracle
            ? oracle_stage_estimate(recipe->stages[l - 1], g, target)
            : blind_stage_estimate(g, target, config);
    StageRestoration sr = restore_stage(g, est, config);
    sr.stage = l;
    g = sr.db;
    result.trace.stages.push_back(std::move(sr));
  }
  result.estimate = std::move(g);
  return result;
}

}  // namespace hodr
