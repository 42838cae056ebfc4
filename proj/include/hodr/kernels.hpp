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
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "hodr/convolve.hpp"
#include "hodr/error.hpp"
#include "hodr/rng.hpp"

namespace hodr {

enum class KernelFamily {
  kIsoGauss,
  kAnisoGauss,
  kIsoGenGauss,
  kAnisoGenGauss,
  kIsoPlateau,
  kAnisoPlateau,
  kSinc,
};

inline constexpr KernelFamily kAllKernelFamilies[] = {
    KernelFamily::kIsoGauss,    KernelFamily::kAnisoGauss,
    KernelFamily::kIsoGenGauss, KernelFamily::kAnisoGenGauss,
    KernelFamily::kIsoPlateau,  KernelFamily::kAnisoPlateau,
    KernelFamily::kSinc,
};

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::kIsoGauss: return "iso_gauss";
    case KernelFamily::kAnisoGauss: return "aniso_gauss";
    case KernelFamily::kIsoGenGauss: return "iso_gen_gauss";
    case KernelFamily::kAnisoGenGauss: return "aniso_gen_gauss";
    case KernelFamily::kIsoPlateau: return "iso_plateau";
    case KernelFamily::kAnisoPlateau: return "aniso_plateau";
    case KernelFamily::kSinc: return "sinc";
  }
  return "iso_gauss";
}

inline std::optional<KernelFamily> parse_kernel_family(std::string_view s) {
  for (KernelFamily f : kAllKernelFamilies) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

inline bool is_isotropic(KernelFamily f) {
  return f == KernelFamily::kIsoGauss || f == KernelFamily::kIsoGenGauss ||
         f == KernelFamily::kIsoPlateau || f == KernelFamily::kSinc;
}

inline constexpr int kMinHalfSize = 3;
inline constexpr int kMaxHalfSize = 10;
inline constexpr double kGenGaussBetaMin = 0.5;
inline constexpr double kGenGaussBetaMax = 4.0;
inline constexpr double kPlateauBetaMin = 1.0;
inline constexpr double kPlateauBetaMax = 2.0;
inline constexpr double kSincOmegaMin = std::numbers::pi / 3.0;
inline constexpr double kSincOmegaMax = std::numbers::pi;

// Symbolic kernel description. Fields a family does not use keep neutral
// defaults (beta = 1 reduces the shaped families to Gaussian/Cauchy forms).
struct KernelSpec {
  KernelFamily family = KernelFamily::kIsoGauss;
  int half_size = 3;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double theta = 0.0;
  double beta = 1.0;
  double omega_c = std::numbers::pi;

  int side() const { return 2 * half_size + 1; }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

namespace detail {

inline void require_half_size(const KernelSpec& s) {
  if (s.half_size < kMinHalfSize || s.half_size > kMaxHalfSize) {
    throw Error(ErrorCode::kOutOfRange,
                "half_size " + std::to_string(s.half_size) + " outside [3, 10]");
  }
}

inline void require_sigmas(const KernelSpec& s) {
  if (!(s.sigma_x > 0.0) || !(s.sigma_y > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  }
  if (is_isotropic(s.family) && s.family != KernelFamily::kSinc &&
      (s.sigma_x != s.sigma_y || s.theta != 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(to_string(s.family)) +
                    " requires sigma_x == sigma_y and theta == 0");
  }
}

inline void require_family(const KernelSpec& s,
                           std::initializer_list<KernelFamily> allowed,
                           std::string_view op) {
  for (KernelFamily f : allowed) {
    if (s.family == f) return;
  }
  throw Error(ErrorCode::kInvalidArgument,
              std::string(op) + " does not build family " +
                  std::string(to_string(s.family)));
}

inline void require_beta(const KernelSpec& s, double lo, double hi) {
  if (!(s.beta >= lo && s.beta <= hi)) {
    throw Error(ErrorCode::kOutOfRange,
                "beta " + std::to_string(s.beta) + " outside [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

// Half the Mahalanobis distance 0.5 * d^T Sigma^-1 d with
// Sigma = R(theta) diag(sx^2, sy^2) R(theta)^T. Odd in d before squaring, so
// q(d) == q(-d) bit-exactly.
inline double half_quadratic(const KernelSpec& s, int x, int y) {
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  const double u = c * x + sn * y;
  const double v = -sn * x + c * y;
  return 0.5 * (u * u / (s.sigma_x * s.sigma_x) + v * v / (s.sigma_y * s.sigma_y));
}

template <typename Profile>
BlurKernel tabulate(const KernelSpec& s, Profile profile) {
  BlurKernel k;
  k.side = s.side();
  k.weights.assign(static_cast<size_t>(k.side) * k.side, 0.0);
  const int n = s.half_size;
  for (int y = -n; y <= n; ++y) {
    for (int x = -n; x <= n; ++x) k.at(y, x) = profile(x, y);
  }
  normalize(k);
  return k;
}

}  // namespace detail

inline BlurKernel gaussian_kernel(const KernelSpec& s) {
  detail::require_family(s, {KernelFamily::kIsoGauss, KernelFamily::kAnisoGauss},
                         "gaussian_kernel");
  detail::require_half_size(s);
  detail::require_sigmas(s);
  return detail::tabulate(s, [&](int x, int y) {
    return std::exp(-detail::half_quadratic(s, x, y));
  });
}

inline BlurKernel generalized_gaussian_kernel(const KernelSpec& s) {
  detail::require_family(
      s, {KernelFamily::kIsoGenGauss, KernelFamily::kAnisoGenGauss},
      "generalized_gaussian_kernel");
  detail::require_half_size(s);
  detail::require_sigmas(s);
  detail::require_beta(s, kGenGaussBetaMin, kGenGaussBetaMax);
  return detail::tabulate(s, [&](int x, int y) {
    return std::exp(-std::pow(detail::half_quadratic(s, x, y), s.beta));
  });
}

inline BlurKernel plateau_kernel(const KernelSpec& s) {
  detail::require_family(s, {KernelFamily::kIsoPlateau, KernelFamily::kAnisoPlateau},
                         "plateau_kernel");
  detail::require_half_size(s);
  detail::require_sigmas(s);
  detail::require_beta(s, kPlateauBetaMin, kPlateauBetaMax);
  return detail::tabulate(s, [&](int x, int y) {
    return 1.0 / (1.0 + std::pow(detail::half_quadratic(s, x, y), s.beta));
  });
}

// Circular ideal low-pass, w(r) = wc J1(wc r) / (2 pi r). Negative lobes are
// kept; only the sum is normalized.
inline BlurKernel sinc_kernel(const KernelSpec& s) {
  detail::require_family(s, {KernelFamily::kSinc}, "sinc_kernel");
  detail::require_half_size(s);
  if (!(s.omega_c > 0.0 && s.omega_c <= std::numbers::pi)) {
    throw Error(ErrorCode::kOutOfRange,
                "omega_c " + std::to_string(s.omega_c) + " outside (0, pi]");
  }
  const double wc = s.omega_c;
  return detail::tabulate(s, [&](int x, int y) {
    const double r = std::sqrt(double(x * x + y * y));
    if (r == 0.0) return wc * wc / (4.0 * std::numbers::pi);
    return wc * std::cyl_bessel_j(1.0, wc * r) / (2.0 * std::numbers::pi * r);
  });
}

inline BlurKernel make_kernel(const KernelSpec& s) {
  switch (s.family) {
    case KernelFamily::kIsoGauss:
    case KernelFamily::kAnisoGauss:
      return gaussian_kernel(s);
    case KernelFamily::kIsoGenGauss:
    case KernelFamily::kAnisoGenGauss:
      return generalized_gaussian_kernel(s);
    case KernelFamily::kIsoPlateau:
    case KernelFamily::kAnisoPlateau:
      return plateau_kernel(s);
    case KernelFamily::kSinc:
      return sinc_kernel(s);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown kernel family");
}

inline constexpr double kSincProbability = 0.1;
// Non-sinc family proportions, in kAllKernelFamilies order.
inline constexpr double kFamilyProportions[6] = {0.45, 0.25, 0.12,
                                                 0.03, 0.12, 0.03};

inline double max_blur_sigma(int stage) { return stage <= 1 ? 2.0 : 1.0; }
inline constexpr double kMinBlurSigma = 0.1;

inline KernelSpec sample_kernel_spec(Rng& rng, int stage) {
  if (stage < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "stage must be >= 1, got " + std::to_string(stage));
  }
  KernelSpec s;
  s.half_size = rng.uniform_int(kMinHalfSize, kMaxHalfSize);
  if (rng.bernoulli(kSincProbability)) {
    s.family = KernelFamily::kSinc;
    s.omega_c = rng.uniform(kSincOmegaMin, kSincOmegaMax);
    return s;
  }
  const double u = rng.uniform();
  double acc = 0.0;
  s.family = KernelFamily::kAnisoPlateau;
  for (int i = 0; i < 6; ++i) {
    acc += kFamilyProportions[i];
    if (u < acc) {
      s.family = kAllKernelFamilies[i];
      break;
    }
  }
  const double smax = max_blur_sigma(stage);
  if (is_isotropic(s.family)) {
    s.sigma_x = s.sigma_y = rng.uniform(kMinBlurSigma, smax);
  } else {
    s.sigma_x = rng.uniform(kMinBlurSigma, smax);
    s.sigma_y = rng.uniform(kMinBlurSigma, smax);
    s.theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
  }
  switch (s.family) {
    case KernelFamily::kIsoGenGauss:
    case KernelFamily::kAnisoGenGauss:
      s.beta = rng.uniform(kGenGaussBetaMin, kGenGaussBetaMax);
      break;
    case KernelFamily::kIsoPlateau:
    case KernelFamily::kAnisoPlateau:
      s.beta = rng.uniform(kPlateauBetaMin, kPlateauBetaMax);
      break;
    default:
      break;
  }
  return s;
}

}  // namespace hodr
