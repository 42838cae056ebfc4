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
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hodr/convolve.hpp"
#include "hodr/error.hpp"
#include "hodr/image.hpp"
#include "hodr/resize.hpp"

namespace hodr {

// ---------------------------------------------------------------------------
// Full reference.

inline double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  double acc = 0.0;
  auto sa = a.samples(), sb = b.samples();
  for (size_t i = 0; i < sa.size(); ++i) {
    const double d = sa[i] - sb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(sa.size());
}

// Identical inputs give +infinity.
inline double psnr(const Image& a, const Image& b, double peak = 1.0) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

inline std::vector<double> gaussian_taps(int side, double sigma) {
  std::vector<double> t(side);
  const int r = side / 2;
  double sum = 0.0;
  for (int i = 0; i < side; ++i) {
    t[i] = std::exp(-0.5 * (i - r) * (i - r) / (sigma * sigma));
    sum += t[i];
  }
  for (double& v : t) v /= sum;
  return t;
}

namespace detail {

// Separable filtering keeping only windows fully inside the image.
inline std::vector<double> filter_valid(std::span<const double> src, int w, int h,
                                        const std::vector<double>& taps) {
  const int side = static_cast<int>(taps.size());
  const int ow = w - side + 1, oh = h - side + 1;
  std::vector<double> tmp(static_cast<size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < side; ++k) acc += taps[k] * src[static_cast<size_t>(y) * w + x + k];
      tmp[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < side; ++k) acc += taps[k] * tmp[static_cast<size_t>(y + k) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace detail

// Mean SSIM over all 11x11 windows (Gaussian sigma 1.5), on luma for RGB.
inline double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw Error(ErrorCode::kInvalidArgument,
                "ssim needs at least 11x11, got " + to_string(a.dims()));
  }
  const Image la = luminance(a), lb = luminance(b);
  const int w = a.width(), h = a.height();
  const size_t n = la.plane_size();
  std::vector<double> aa(n), bb(n), ab(n);
  auto pa = la.plane(0), pb = lb.plane(0);
  for (size_t i = 0; i < n; ++i) {
    aa[i] = pa[i] * pa[i];
    bb[i] = pb[i] * pb[i];
    ab[i] = pa[i] * pb[i];
  }
  const auto taps = gaussian_taps(kSsimWindow, kSsimSigma);
  const auto mu_a = detail::filter_valid(pa, w, h, taps);
  const auto mu_b = detail::filter_valid(pb, w, h, taps);
  const auto e_aa = detail::filter_valid(aa, w, h, taps);
  const auto e_bb = detail::filter_valid(bb, w, h, taps);
  const auto e_ab = detail::filter_valid(ab, w, h, taps);

  const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
  const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
  double sum = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    sum += ((2 * ma * mb + c1) * (2 * cov + c2)) /
           ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

// ---------------------------------------------------------------------------
// No reference: BRISQUE natural-scene statistics.

inline constexpr int kMscnWindow = 7;
inline constexpr double kMscnSigma = 7.0 / 6.0;
inline constexpr double kMscnC = 1.0 / 255.0;
inline constexpr size_t kBrisqueFeatureCount = 36;

// Mean-subtracted contrast-normalized coefficients of the luma plane.
inline Image mscn(const Image& img) {
  if (img.width() < 16 || img.height() < 16) {
    throw Error(ErrorCode::kInvalidArgument,
                "mscn needs at least 16x16, got " + to_string(img.dims()));
  }
  const Image gray = luminance(img);
  const auto taps = gaussian_taps(kMscnWindow, kMscnSigma);
  BlurKernel window{kMscnWindow, std::vector<double>(kMscnWindow * kMscnWindow)};
  for (int y = 0; y < kMscnWindow; ++y) {
    for (int x = 0; x < kMscnWindow; ++x) window.weights[y * kMscnWindow + x] = taps[y] * taps[x];
  }
  // Moments are accumulated as offsets from the centre sample, so flat
  // regions give exactly zero and the variance avoids cancellation.
  const int w = gray.width(), h = gray.height(), r = kMscnWindow / 2;
  Image out(gray.dims(), 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double center = gray.at(0, y, x);
      double m1 = 0.0, m2 = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = reflect_index(y + dy, h);
        for (int dx = -r; dx <= r; ++dx) {
          const double d = gray.at(0, yy, reflect_index(x + dx, w)) - center;
          const double wt = window.at(dy, dx);
          m1 += wt * d;
          m2 += wt * d * d;
        }
      }
      const double sigma = std::sqrt(std::max(0.0, m2 - m1 * m1));
      out.at(0, y, x) = -m1 / (sigma + kMscnC);
    }
  }
  return out;
}

// Asymmetric generalized Gaussian parameters.
struct AGGDParams {
  double alpha = 2.0;
  double sigma_l = 1.0;
  double sigma_r = 1.0;
  double mean_offset = 0.0;
};

namespace detail {

inline constexpr double kAlphaMin = 0.2;
inline constexpr double kAlphaMax = 10.0;
inline constexpr double kAlphaStep = 0.001;

// Generalized Gaussian ratio Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)) tabulated
// on the alpha search grid.
inline const std::vector<double>& ggd_ratio_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t;
    const int count = static_cast<int>(std::lround((kAlphaMax - kAlphaMin) / kAlphaStep)) + 1;
    t.reserve(count);
    for (int i = 0; i < count; ++i) {
      const double a = kAlphaMin + i * kAlphaStep;
      t.push_back(std::exp(2.0 * std::lgamma(2.0 / a) - std::lgamma(1.0 / a) -
                           std::lgamma(3.0 / a)));
    }
    return t;
  }();
  return table;
}

}  // namespace detail

// Moment matching: the normalized ratio (E|x|)^2 / E[x^2], corrected for the
// left/right asymmetry, is inverted over alpha in [0.2, 10] at step 0.001.
inline AGGDParams fit_aggd(std::span<const double> samples) {
  if (samples.size() < 100) {
    throw Error(ErrorCode::kDegenerateInput,
                "fit_aggd needs >= 100 samples, got " + std::to_string(samples.size()));
  }
  size_t neg = 0, pos = 0;
  double neg_sq = 0.0, pos_sq = 0.0, abs_sum = 0.0;
  for (double v : samples) {
    if (v < 0) {
      ++neg;
      neg_sq += v * v;
      abs_sum -= v;
    } else if (v > 0) {
      ++pos;
      pos_sq += v * v;
      abs_sum += v;
    }
  }
  if (neg == 0 || pos == 0) {
    throw Error(ErrorCode::kDegenerateInput,
                "fit_aggd needs samples on both sides of zero");
  }
  const double total = static_cast<double>(samples.size());
  AGGDParams p;
  p.sigma_l = std::sqrt(neg_sq / neg);
  p.sigma_r = std::sqrt(pos_sq / pos);
  const double gamma = p.sigma_l / p.sigma_r;
  const double mean_abs = abs_sum / total;
  const double rhat = mean_abs * mean_abs / ((neg_sq + pos_sq) / total);
  const double rnorm = rhat * (gamma * gamma * gamma + 1.0) * (gamma + 1.0) /
                       ((gamma * gamma + 1.0) * (gamma * gamma + 1.0));

  const auto& table = detail::ggd_ratio_table();
  size_t best = 0;
  double best_diff = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < table.size(); ++i) {
    const double d = std::abs(table[i] - rnorm);
    if (d < best_diff) {
      best_diff = d;
      best = i;
    }
  }
  p.alpha = detail::kAlphaMin + static_cast<double>(best) * detail::kAlphaStep;
  const double a = p.alpha;
  p.mean_offset = (p.sigma_r - p.sigma_l) * std::exp(std::lgamma(2.0 / a) -
                  0.5 * (std::lgamma(1.0 / a) + std::lgamma(3.0 / a)));
  return p;
}

namespace detail {

inline void append_scale_features(const Image& img, std::vector<double>& out) {
  const Image m = mscn(img);
  const AGGDParams base = fit_aggd(m.samples());
  out.push_back(base.alpha);
  out.push_back(0.5 * (base.sigma_l * base.sigma_l + base.sigma_r * base.sigma_r));

  // Horizontal, vertical, main diagonal, secondary diagonal neighbours.
  constexpr std::array<std::array<int, 2>, 4> shifts{{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};
  const int w = m.width(), h = m.height();
  std::vector<double> prod;
  for (const auto& [dy, dx] : shifts) {
    prod.clear();
    for (int y = 0; y + dy < h; ++y) {
      for (int x = std::max(0, -dx); x < w && x + dx < w; ++x) {
        prod.push_back(m.at(0, y, x) * m.at(0, y + dy, x + dx));
      }
    }
    const AGGDParams p = fit_aggd(prod);
    out.push_back(p.alpha);
    out.push_back(p.mean_offset);
    out.push_back(p.sigma_l * p.sigma_l);
    out.push_back(p.sigma_r * p.sigma_r);
  }
}

}  // namespace detail

// 36 features: for the full-size image then its area half-scale,
//   [mscn alpha, mscn variance,
//    then for H, V, D1, D2 pairwise products: alpha, mean, var_l, var_r].
inline std::vector<double> brisque_features(const Image& img) {
  if (img.width() < 32 || img.height() < 32) {
    throw Error(ErrorCode::kInvalidArgument,
                "brisque_features needs at least 32x32, got " + to_string(img.dims()));
  }
  const Image gray = luminance(img);
  std::vector<double> f;
  f.reserve(kBrisqueFeatureCount);
  detail::append_scale_features(gray, f);
  const Dims half{gray.width() / 2, gray.height() / 2};
  detail::append_scale_features(resize(gray, half, ResizeMethod::kArea), f);
  return f;
}

// RBF support-vector regressor over min/max-scaled features. Text format:
//
//   hodr-brisque-svr 1
//   gamma <g>
//   rho <rho>
//   feature_min <36 numbers>
//   feature_max <36 numbers>
//   support_vectors <N>
//   <coef> <36 numbers>      (N lines)
//
// Blank lines and lines starting with '#' are ignored. Features are mapped to
// [-1, 1] with feature_min/max, and the score is
//   sum_i coef_i * exp(-g * |x - sv_i|^2) - rho.
struct BrisqueModel {
  double gamma = 0.0;
  double rho = 0.0;
  std::vector<double> feature_min;
  std::vector<double> feature_max;
  std::vector<double> coefs;
  std::vector<std::vector<double>> support_vectors;

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "hodr-brisque-svr 1\n";
    os << "gamma " << gamma << "\nrho " << rho << "\nfeature_min";
    for (double v : feature_min) os << ' ' << v;
    os << "\nfeature_max";
    for (double v : feature_max) os << ' ' << v;
    os << "\nsupport_vectors " << coefs.size() << '\n';
    for (size_t i = 0; i < coefs.size(); ++i) {
      os << coefs[i];
      for (double v : support_vectors[i]) os << ' ' << v;
      os << '\n';
    }
    return os.str();
  }
};

inline BrisqueModel parse_brisque_model(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  size_t cursor = 0;
  auto next = [&](std::string_view expect) {
    if (cursor >= lines.size()) {
      throw Error(ErrorCode::kSchemaViolation,
                  "brisque model truncated before \"" + std::string(expect) + "\"");
    }
    std::istringstream ls(lines[cursor++]);
    std::string key;
    ls >> key;
    if (!expect.empty() && key != expect) {
      throw Error(ErrorCode::kSchemaViolation, "brisque model: expected \"" +
                                                   std::string(expect) + "\", got \"" +
                                                   key + "\"");
    }
    std::string rest;
    std::getline(ls, rest);
    return std::pair<std::string, std::string>(key, rest);
  };
  auto numbers = [](const std::string& rest, size_t count, std::string_view what) {
    std::istringstream ls(rest);
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    if (v.size() != count) {
      throw Error(ErrorCode::kSchemaViolation,
                  "brisque model: \"" + std::string(what) + "\" expects " +
                      std::to_string(count) + " numbers, got " + std::to_string(v.size()));
    }
    return v;
  };

  auto header = next("hodr-brisque-svr");
  if (numbers(header.second, 1, "hodr-brisque-svr")[0] != 1) {
    throw Error(ErrorCode::kSchemaViolation, "brisque model: unsupported version");
  }
  BrisqueModel m;
  m.gamma = numbers(next("gamma").second, 1, "gamma")[0];
  m.rho = numbers(next("rho").second, 1, "rho")[0];
  m.feature_min = numbers(next("feature_min").second, kBrisqueFeatureCount, "feature_min");
  m.feature_max = numbers(next("feature_max").second, kBrisqueFeatureCount, "feature_max");
  const double count = numbers(next("support_vectors").second, 1, "support_vectors")[0];
  if (count < 0 || count != std::floor(count)) {
    throw Error(ErrorCode::kSchemaViolation, "brisque model: bad support vector count");
  }
  for (size_t i = 0; i < static_cast<size_t>(count); ++i) {
    if (cursor >= lines.size()) {
      throw Error(ErrorCode::kSchemaViolation, "brisque model: missing support vectors");
    }
    auto v = numbers(lines[cursor++], kBrisqueFeatureCount + 1, "support vector");
    m.coefs.push_back(v[0]);
    m.support_vectors.emplace_back(v.begin() + 1, v.end());
  }
  return m;
}

inline BrisqueModel load_brisque_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return parse_brisque_model(in);
}

// Lower is better. A missing model is an error; there is no default score.
inline double brisque_score(std::span<const double> features,
                            const BrisqueModel* model) {
  if (!model) throw Error(ErrorCode::kNoModelLoaded, "brisque_score");
  if (features.size() != kBrisqueFeatureCount) {
    throw Error(ErrorCode::kInvalidArgument,
                "brisque_score expects 36 features, got " + std::to_string(features.size()));
  }
  std::vector<double> x(kBrisqueFeatureCount);
  for (size_t i = 0; i < x.size(); ++i) {
    const double lo = model->feature_min[i], hi = model->feature_max[i];
    x[i] = hi > lo ? -1.0 + 2.0 * (features[i] - lo) / (hi - lo) : 0.0;
  }
  double score = -model->rho;
  for (size_t s = 0; s < model->coefs.size(); ++s) {
    double d2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - model->support_vectors[s][i];
      d2 += d * d;
    }
    score += model->coefs[s] * std::exp(-model->gamma * d2);
  }
  return score;
}

inline double brisque_score(std::span<const double> features,
                            const std::optional<BrisqueModel>& model) {
  return brisque_score(features, model ? &*model : nullptr);
}

// ---------------------------------------------------------------------------
// Reports.

struct MetricsRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> brisque;
};

struct ColumnStats {
  size_t count = 0;     // rows that entered the aggregate
  size_t excluded = 0;  // +inf PSNR rows or rows without a value
  double mean = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();  // sample (n-1)
};

inline ColumnStats column_stats(std::vector<double> values, size_t excluded) {
  ColumnStats s;
  s.count = values.size();
  s.excluded = excluded;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return s;
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct MetricsReport {
  std::vector<MetricsRow> rows;

  ColumnStats psnr_stats() const {
    std::vector<double> v;
    size_t excluded = 0;
    for (const auto& r : rows) {
      if (std::isfinite(r.psnr)) {
        v.push_back(r.psnr);
      } else {
        ++excluded;
      }
    }
    return column_stats(std::move(v), excluded);
  }

  ColumnStats ssim_stats() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.ssim);
    return column_stats(std::move(v), 0);
  }

  ColumnStats brisque_stats() const {
    std::vector<double> v;
    size_t excluded = 0;
    for (const auto& r : rows) {
      if (r.brisque) {
        v.push_back(*r.brisque);
      } else {
        ++excluded;
      }
    }
    return column_stats(std::move(v), excluded);
  }

  // Header id,psnr_db,ssim,brisque; "inf" marks identical pairs and an empty
  // brisque cell means no model was loaded.
  std::string to_csv() const {
    std::string out = "id,psnr_db,ssim,brisque\n";
    for (const auto& r : rows) {
      out += r.id + "," + format_number(r.psnr) + "," + format_number(r.ssim) + "," +
             (r.brisque ? format_number(*r.brisque) : "") + "\n";
    }
    return out;
  }

  std::string summary_table() const {
    std::ostringstream os;
    char buf[160];
    auto line = [&](const char* name, const ColumnStats& s, const char* note) {
      std::snprintf(buf, sizeof(buf), "%-8s %6zu %12.4f %12.4f %12.4f  %s\n", name,
                    s.count, s.mean, s.median, s.stddev, note);
      os << buf;
    };
    os << "metric    count         mean       median          std\n";
    const ColumnStats p = psnr_stats();
    std::string note = p.excluded ? std::to_string(p.excluded) + " inf row(s) excluded" : "";
    line("psnr_db", p, note.c_str());
    line("ssim", ssim_stats(), "");
    const ColumnStats b = brisque_stats();
    if (b.count) line("brisque", b, "");
    return os.str();
  }
};

}  // namespace hodr
