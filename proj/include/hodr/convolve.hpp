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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hodr/error.hpp"
#include "hodr/image.hpp"

namespace hodr {

// Square convolution kernel with odd side, stored row-major.
struct BlurKernel {
  int side = 1;
  std::vector<double> weights{1.0};

  int radius() const { return side / 2; }
  // dy, dx in [-radius, radius].
  double at(int dy, int dx) const {
    return weights[static_cast<size_t>(dy + radius()) * side + (dx + radius())];
  }
  double& at(int dy, int dx) {
    return weights[static_cast<size_t>(dy + radius()) * side + (dx + radius())];
  }
  double sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

  static BlurKernel identity() { return {}; }
  static BlurKernel scaled_delta(double c) { return {1, {c}}; }

  friend bool operator==(const BlurKernel&, const BlurKernel&) = default;
};

inline void validate_kernel(const BlurKernel& k) {
  if (k.side < 1 || k.side % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel side must be odd, got " + std::to_string(k.side));
  }
  if (k.weights.size() != static_cast<size_t>(k.side) * k.side) {
    throw Error(ErrorCode::kInvalidArgument, "kernel weight count != side^2");
  }
}

inline void normalize(BlurKernel& k) {
  const double s = k.sum();
  for (double& w : k.weights) w /= s;
}

// Mirror without edge repetition (…c b | a b c d | c b…), any offset.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Direct spatial convolution with reflect padding; no clipping.
inline Image convolve(const Image& img, const BlurKernel& k) {
  validate_kernel(k);
  const int r = k.radius();
  const int w = img.width(), h = img.height();
  std::vector<int> xi(w + 2 * r), yi(h + 2 * r);
  for (int i = -r; i < w + r; ++i) xi[i + r] = reflect_index(i, w);
  for (int i = -r; i < h + r; ++i) yi[i + r] = reflect_index(i, h);

  Image out(img.dims(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          const int sy = yi[y - dy + r];
          for (int dx = -r; dx <= r; ++dx) {
            acc += k.at(dy, dx) * img.at(c, sy, xi[x - dx + r]);
          }
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

namespace detail {

// FFTW planning is not thread-safe; execution with new-array calls is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace detail

// Frequency-domain convolution for a fixed (image dims, kernel) pair. The
// kernel spectrum is computed once so repeated applications (Neumann terms)
// cost two transforms each. Not safe to share one instance across threads.
class FftConvolver {
 public:
  FftConvolver(Dims dims, const BlurKernel& k)
      : dims_(dims), radius_(k.radius()) {
    validate_kernel(k);
    ph_ = dims.height + 2 * radius_;
    pw_ = dims.width + 2 * radius_;
    const size_t n_real = static_cast<size_t>(ph_) * pw_;
    const size_t n_cplx = static_cast<size_t>(ph_) * (pw_ / 2 + 1);
    real_.reset(fftw_alloc_real(n_real));
    spec_.reset(fftw_alloc_complex(n_cplx));
    kernel_spec_.resize(n_cplx);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      forward_ = fftw_plan_dft_r2c_2d(ph_, pw_, real_.get(), spec_.get(),
                                      FFTW_ESTIMATE);
      inverse_ = fftw_plan_dft_c2r_2d(ph_, pw_, spec_.get(), real_.get(),
                                      FFTW_ESTIMATE);
    }
    // Kernel centre at the origin, negative offsets wrapped.
    std::fill(real_.get(), real_.get() + n_real, 0.0);
    for (int dy = -radius_; dy <= radius_; ++dy) {
      for (int dx = -radius_; dx <= radius_; ++dx) {
        const int y = (dy + ph_) % ph_;
        const int x = (dx + pw_) % pw_;
        real_.get()[static_cast<size_t>(y) * pw_ + x] += k.at(dy, dx);
      }
    }
    fftw_execute_dft_r2c(forward_, real_.get(), spec_.get());
    const double norm = 1.0 / static_cast<double>(n_real);
    for (size_t i = 0; i < n_cplx; ++i) {
      kernel_spec_[i] = std::complex<double>(spec_.get()[i][0], spec_.get()[i][1]) * norm;
    }
  }

  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  ~FftConvolver() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
  }

  Dims dims() const { return dims_; }

  Image apply(const Image& img) {
    if (img.dims() != dims_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "FftConvolver built for " + to_string(dims_) + ", got " +
                      to_string(img.dims()));
    }
    const int w = dims_.width, h = dims_.height;
    Image out(dims_, img.channels());
    double* real = real_.get();
    for (int c = 0; c < img.channels(); ++c) {
      for (int y = 0; y < ph_; ++y) {
        const int sy = reflect_index(y - radius_, h);
        for (int x = 0; x < pw_; ++x) {
          real[static_cast<size_t>(y) * pw_ + x] =
              img.at(c, sy, reflect_index(x - radius_, w));
        }
      }
      fftw_execute_dft_r2c(forward_, real, spec_.get());
      for (size_t i = 0; i < kernel_spec_.size(); ++i) {
        const std::complex<double> v(spec_.get()[i][0], spec_.get()[i][1]);
        const std::complex<double> p = v * kernel_spec_[i];
        spec_.get()[i][0] = p.real();
        spec_.get()[i][1] = p.imag();
      }
      fftw_execute_dft_c2r(inverse_, spec_.get(), real);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          out.at(c, y, x) =
              real[static_cast<size_t>(y + radius_) * pw_ + (x + radius_)];
        }
      }
    }
    return out;
  }

 private:
  Dims dims_;
  int radius_ = 0;
  int ph_ = 0;
  int pw_ = 0;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  std::vector<std::complex<double>> kernel_spec_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline Image convolve_fft(const Image& img, const BlurKernel& k) {
  FftConvolver conv(img.dims(), k);
  return conv.apply(img);
}

}  // namespace hodr
