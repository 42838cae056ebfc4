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

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hodr/convolve.hpp"
#include "hodr/degrade.hpp"
#include "hodr/kernels.hpp"
#include "hodr/metrics.hpp"
#include "hodr/recipe_json.hpp"
#include "hodr/restore.hpp"
#include "hodr/synthetic.hpp"

namespace hodr {

struct SelftestOptions {
  // Name of a check whose input is deliberately corrupted. Used to prove the
  // suite catches a failure and names it.
  std::optional<std::string> inject_fault;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SelftestReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }
};

namespace detail {

// A check returns an empty string on success, otherwise a failure detail.
using CheckFn = std::function<std::string(bool fault)>;

inline std::string fmt_value(const char* what, double v, double tol) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s = %.3e exceeds %.1e", what, v, tol);
  return buf;
}

inline std::string check_kernel_sum(bool fault) {
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    BlurKernel k = make_kernel(sample_kernel_spec(rng, 1 + i % 2));
    if (fault && i == 0) k.weights[k.weights.size() / 2] += 1e-3;
    worst = std::max(worst, std::abs(k.sum() - 1.0));
  }
  return worst < 1e-6 ? "" : fmt_value("max |sum - 1|", worst, 1e-6);
}

inline std::string check_kernel_symmetry(bool fault) {
  Rng rng(12);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    BlurKernel k = make_kernel(sample_kernel_spec(rng, 1 + i % 2));
    if (fault && i == 0) k.weights.front() += 1e-3;
    const int r = k.radius();
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        worst = std::max(worst, std::abs(k.at(dy, dx) - k.at(-dy, -dx)));
      }
    }
  }
  return worst < 1e-12 ? "" : fmt_value("max 180-degree asymmetry", worst, 1e-12);
}

inline std::string check_gen_gauss_beta1(bool fault) {
  KernelSpec g{KernelFamily::kAnisoGauss, 7, 1.7, 0.6, 0.8};
  KernelSpec gg = g;
  gg.family = KernelFamily::kAnisoGenGauss;
  gg.beta = fault ? 1.01 : 1.0;
  const BlurKernel a = make_kernel(g);
  const BlurKernel b = make_kernel(gg);
  double worst = 0.0;
  for (size_t i = 0; i < a.weights.size(); ++i) {
    worst = std::max(worst, std::abs(a.weights[i] - b.weights[i]));
  }
  return worst < 1e-12 ? "" : fmt_value("beta=1 vs gaussian", worst, 1e-12);
}

inline std::string check_fft_vs_direct(bool fault) {
  Rng rng(13);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Image img = synthetic_image(100 + i, {64, 64}, 1 + 2 * (i % 2));
    const BlurKernel k = make_kernel(sample_kernel_spec(rng, 1));
    Image fft = convolve_fft(img, k);
    if (fault && i == 0) fft.at(0, 0, 0) += 1e-3;
    worst = std::max(worst, max_abs_diff(convolve(img, k), fft));
  }
  return worst < 1e-5 ? "" : fmt_value("max |direct - fft|", worst, 1e-5);
}

inline std::string check_neumann_scalar(bool fault) {
  const Image img = synthetic_image(14, {16, 16}, 1);
  double worst = 0.0;
  for (double c : {0.25, 0.5, 0.9}) {
    for (int m = 0; m <= 8; ++m) {
      const double gain = (1.0 - std::pow(1.0 - c, m + 1)) / c;
      const Image out =
          neumann_series(img, BlurKernel::scaled_delta(fault ? c * 1.01 : c), m);
      for (size_t i = 0; i < img.size(); ++i) {
        const double want = gain * img.samples()[i];
        worst = std::max(worst, std::abs(out.samples()[i] - want) / std::abs(want));
      }
    }
  }
  return worst < 1e-10 ? "" : fmt_value("max relative error", worst, 1e-10);
}

inline std::string check_psnr_closed_form(bool fault) {
  const Image a(16, 16, 3, 0.5);
  const Image b(16, 16, 3, 0.5 + (fault ? 11.0 : 10.0) / 255.0);
  const double got = psnr(a, b);
  const double want = 10.0 * std::log10(255.0 * 255.0 / 100.0);
  if (!std::isinf(psnr(a, a))) return "psnr(a, a) is not +inf";
  return std::abs(got - want) < 1e-9 ? "" : fmt_value("psnr error", std::abs(got - want), 1e-9);
}

inline std::string check_ssim_identity(bool fault) {
  const Image a = synthetic_image(15, {48, 48}, 3);
  Image b = a;
  if (fault) b.at(0, 20, 20) += 0.2;
  const double s = ssim(a, b);
  if (std::abs(s - 1.0) >= 1e-9) return fmt_value("|ssim(a, a) - 1|", std::abs(s - 1.0), 1e-9);
  const Image c = synthetic_image(16, {48, 48}, 3);
  const double d = std::abs(ssim(a, c) - ssim(c, a));
  return d < 1e-12 ? "" : fmt_value("ssim asymmetry", d, 1e-12);
}

inline std::string check_mscn_constant(bool fault) {
  Image img(32, 32, 1, 0.4);
  if (fault) img.at(0, 5, 5) = 0.6;
  const Image m = mscn(img);
  double worst = 0.0;
  for (double v : m.samples()) worst = std::max(worst, std::abs(v));
  return worst == 0.0 ? "" : fmt_value("max |mscn| of constant image", worst, 0.0);
}

inline std::string check_recipe_roundtrip(bool fault) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const DegradationRecipe r = sample_recipe(seed, 1 + seed % 3, 2 + seed % 3);
    DegradationRecipe back = recipe_from_json(recipe_to_json(r));
    if (fault && seed == 0) back.final_scale += 1;
    if (!(back == r)) return "recipe JSON round trip differs for seed " + std::to_string(seed);
  }
  return "";
}

inline std::string check_degrade_determinism(bool fault) {
  const Image hr = synthetic_image(17, {48, 48}, 3);
  const DegradationRecipe r = sample_recipe(17, 2, 2);
  const Image a = degrade(hr, r).lr;
  const Image b = degrade(hr, fault ? sample_recipe(18, 2, 2) : r).lr;
  return a == b ? "" : "degrading twice with one recipe gave different output";
}

struct NamedCheck {
  const char* name;
  std::string (*fn)(bool);
};

inline constexpr NamedCheck kChecks[] = {
    {"kernel_sum", check_kernel_sum},
    {"kernel_symmetry", check_kernel_symmetry},
    {"gen_gauss_beta1", check_gen_gauss_beta1},
    {"fft_vs_direct", check_fft_vs_direct},
    {"neumann_scalar", check_neumann_scalar},
    {"psnr_closed_form", check_psnr_closed_form},
    {"ssim_identity", check_ssim_identity},
    {"mscn_constant", check_mscn_constant},
    {"recipe_roundtrip", check_recipe_roundtrip},
    {"degrade_determinism", check_degrade_determinism},
};

}  // namespace detail

inline std::vector<std::string> selftest_check_names() {
  std::vector<std::string> names;
  for (const auto& c : detail::kChecks) names.emplace_back(c.name);
  return names;
}

// Fast offline invariant suite. Exceptions inside a check count as failures.
inline SelftestReport run_selftest(const SelftestOptions& options = {}) {
  if (options.inject_fault) {
    const auto names = selftest_check_names();
    if (std::find(names.begin(), names.end(), *options.inject_fault) == names.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown selftest check \"" + *options.inject_fault + "\"");
    }
  }
  SelftestReport report;
  for (const auto& c : detail::kChecks) {
    CheckResult r;
    r.name = c.name;
    const bool fault = options.inject_fault && *options.inject_fault == c.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.detail = c.fn(fault);
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.checks.push_back(std::move(r));
  }
  return report;
}

}  // namespace hodr
