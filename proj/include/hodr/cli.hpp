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

// Batch front-end: degrade, restore, evaluate, kernel-dump and selftest
// subcommands over directories of PNG files. Argument parsing lives in the
// executable; everything here takes a parsed RunConfig and output streams.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hodr/degrade.hpp"
#include "hodr/error.hpp"
#include "hodr/kernels.hpp"
#include "hodr/metrics.hpp"
#include "hodr/png_io.hpp"
#include "hodr/recipe_json.hpp"
#include "hodr/restore.hpp"
#include "hodr/rng.hpp"
#include "hodr/selftest.hpp"

namespace hodr {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFileErrors = 1;
inline constexpr int kExitUsage = 2;

inline constexpr uint64_t kDefaultSeed = 0;
inline constexpr int kDefaultOrder = 2;
inline constexpr int kDefaultScale = 2;

struct RunConfig {
  fs::path input;
  fs::path output;
  // Unset means: 2 for degrade and blind restore, the recipe's value for
  // oracle restore.
  std::optional<int> order;
  std::optional<int> scale;
  uint64_t seed = kDefaultSeed;
  RestorationConfig restoration;
  int workers = 1;
  bool trace = false;
  // restore: optional HR references; evaluate: required reference dir.
  std::optional<fs::path> ground_truth;
  std::optional<fs::path> brisque_model;
};

inline void validate_run_config(const RunConfig& c) {
  if (c.order) require_order_and_scale(*c.order, c.scale.value_or(kDefaultScale));
  if (c.scale) require_order_and_scale(c.order.value_or(kDefaultOrder), *c.scale);
  if (c.workers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "--workers must be >= 1");
  }
  validate_config(c.restoration);
}

// Seed for one image: the master seed combined with a stable hash of the
// file name, so any subset of a corpus reproduces exactly.
inline uint64_t image_seed(uint64_t master, std::string_view file_name) {
  return derive_seed(master, stable_hash(file_name), 0);
}

namespace detail {

inline bool has_png_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".png";
}

inline std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kFileNotFound, "input directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_png_extension(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kUnwritablePath, "cannot create output directory " + dir.string());
  }
  const fs::path probe = dir / ".hodr_write_probe";
  {
    std::ofstream f(probe);
    if (!f) {
      throw Error(ErrorCode::kUnwritablePath, "output directory not writable: " + dir.string());
    }
  }
  fs::remove(probe, ec);
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  f.close();
  if (!f) throw Error(ErrorCode::kUnwritablePath, "cannot write " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must not throw.
template <typename Fn>
void parallel_for(size_t n, int workers, Fn&& fn) {
  std::atomic<size_t> next{0};
  auto loop = [&] {
    for (size_t i; (i = next.fetch_add(1)) < n;) fn(i);
  };
  const size_t threads = std::min<size_t>(static_cast<size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    loop();
    return;
  }
  std::vector<std::jthread> pool;
  for (size_t t = 0; t < threads; ++t) pool.emplace_back(loop);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string two_digits(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

// "x_lr" -> "x"; other stems unchanged.
inline std::string base_name(const fs::path& file) {
  std::string stem = file.stem().string();
  constexpr std::string_view kSuffix = "_lr";
  if (stem.size() > kSuffix.size() && stem.ends_with(kSuffix)) {
    stem.resize(stem.size() - kSuffix.size());
  }
  return stem;
}

inline nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// degrade

struct DegradeRow {
  std::string name;
  uint64_t image_seed = 0;
  Dims hr{0, 0};
  Dims lr{0, 0};
  std::string lr_file, recipe_file, trace_dir;
  std::string error;
};

// Writes <name>_lr.png, <name>_recipe.json, optional <name>_trace/ and
// manifest.csv. Trace holds g_00.png (HR) ... g_0k.png (stage outputs) and
// p_01.png ... p_0k.png (stage images just before noise).
inline int cmd_degrade(const RunConfig& config, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  std::vector<fs::path> files;
  const int k = config.order.value_or(kDefaultOrder);
  const int s = config.scale.value_or(kDefaultScale);
  try {
    validate_run_config(config);
    require_order_and_scale(k, s);
    files = detail::list_pngs(config.input);
    if (files.empty()) {
      throw Error(ErrorCode::kFileNotFound,
                  "no PNG files in input directory " + config.input.string());
    }
    detail::prepare_output_dir(config.output);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<DegradeRow> rows(files.size());
  detail::parallel_for(files.size(), config.workers, [&](size_t i) {
    DegradeRow& row = rows[i];
    row.name = files[i].stem().string();
    row.image_seed = image_seed(config.seed, files[i].filename().string());
    try {
      const Image hr = load_image(files[i]);
      row.hr = hr.dims();
      const DegradationRecipe recipe = sample_recipe(row.image_seed, k, s);
      const DegradeResult result = degrade(hr, recipe);
      row.lr = result.lr.dims();
      row.lr_file = row.name + "_lr.png";
      row.recipe_file = row.name + "_recipe.json";
      save_image(result.lr, config.output / row.lr_file);
      detail::write_text(config.output / row.recipe_file, recipe_to_json(recipe));
      if (config.trace) {
        row.trace_dir = row.name + "_trace";
        const fs::path dir = config.output / row.trace_dir;
        fs::create_directories(dir);
        for (size_t l = 0; l < result.trace.images.size(); ++l) {
          save_image(result.trace.images[l],
                     dir / ("g_" + detail::two_digits(static_cast<int>(l)) + ".png"));
        }
        for (size_t l = 0; l < result.trace.pre_noise.size(); ++l) {
          save_image(clip(result.trace.pre_noise[l]),
                     dir / ("p_" + detail::two_digits(static_cast<int>(l + 1)) + ".png"));
        }
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  std::string manifest =
      "name,master_seed,image_seed,order,scale,hr_width,hr_height,lr_width,lr_height,"
      "lr_file,recipe_file,trace_dir,status,error\n";
  int failures = 0;
  for (const auto& r : rows) {
    const bool ok = r.error.empty();
    failures += ok ? 0 : 1;
    manifest += detail::csv_escape(r.name) + "," + std::to_string(config.seed) + "," +
                std::to_string(r.image_seed) + "," + std::to_string(k) + "," +
                std::to_string(s) + "," + std::to_string(r.hr.width) + "," +
                std::to_string(r.hr.height) + "," + std::to_string(r.lr.width) + "," +
                std::to_string(r.lr.height) + "," + detail::csv_escape(r.lr_file) + "," +
                detail::csv_escape(r.recipe_file) + "," + detail::csv_escape(r.trace_dir) +
                "," + (ok ? "ok" : "error") + "," + detail::csv_escape(r.error) + "\n";
    if (!ok) err << "error: " << r.name << ": " << r.error << "\n";
  }
  try {
    detail::write_text(config.output / "manifest.csv", manifest);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  out << "degraded " << rows.size() - failures << "/" << rows.size() << " image(s), k=" << k
      << " s=" << s << " seed=" << config.seed << " -> " << config.output.string() << "\n";
  return failures ? kExitFileErrors : kExitOk;
}

// ---------------------------------------------------------------------------
// restore

struct RestoreRow {
  std::string name;
  std::string output_file;
  Dims dims{0, 0};
  int order = 0;
  std::optional<double> psnr_db;
  std::optional<double> ssim;
  // Per stage l = k..1: PSNR of the stage output against its reference.
  std::vector<std::pair<int, double>> stage_psnr;
  std::string stage_reference;
  std::string error;
};

namespace detail {

// Reference for stage l's output g_{l-1}: the degrade trace image when one
// sits next to the input, otherwise the ground truth area-resized to the
// stage grid.
inline std::optional<Image> stage_reference(const fs::path& input_dir, const std::string& name,
                                            int l, const std::optional<Image>& gt, Dims dims,
                                            std::string& kind) {
  const fs::path traced = input_dir / (name + "_trace") / ("g_" + two_digits(l - 1) + ".png");
  std::error_code ec;
  if (fs::is_regular_file(traced, ec)) {
    Image ref = load_image(traced);
    if (ref.dims() == dims) {
      kind = "trace";
      return ref;
    }
  }
  if (!gt) return std::nullopt;
  kind = "resized_ground_truth";
  return resize(*gt, dims, ResizeMethod::kArea);
}

inline std::vector<fs::path> restore_inputs(const fs::path& dir) {
  std::vector<fs::path> all = list_pngs(dir);
  std::vector<fs::path> lr;
  for (const auto& p : all) {
    if (p.stem().string().ends_with("_lr")) lr.push_back(p);
  }
  return lr.empty() ? all : lr;
}

}  // namespace detail

// Writes <name>_restored.png, optional <name>_restore_trace/r_<l>_<dn|sr|db>.png
// and restore_summary.json.
inline int cmd_restore(const RunConfig& config, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  std::vector<fs::path> files;
  try {
    validate_run_config(config);
    files = detail::restore_inputs(config.input);
    if (files.empty()) {
      throw Error(ErrorCode::kFileNotFound,
                  "no PNG files in input directory " + config.input.string());
    }
    if (config.ground_truth && !fs::is_directory(*config.ground_truth)) {
      throw Error(ErrorCode::kFileNotFound,
                  "ground-truth directory not found: " + config.ground_truth->string());
    }
    detail::prepare_output_dir(config.output);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const bool oracle = config.restoration.mode == RestoreMode::kOracle;

  std::vector<RestoreRow> rows(files.size());
  detail::parallel_for(files.size(), config.workers, [&](size_t i) {
    RestoreRow& row = rows[i];
    row.name = detail::base_name(files[i]);
    try {
      const Image lr = load_image(files[i]);
      RestorationConfig rc = config.restoration;
      std::optional<DegradationRecipe> recipe;
      if (oracle) {
        const fs::path rp = config.input / (row.name + "_recipe.json");
        std::error_code ec;
        if (!fs::is_regular_file(rp, ec)) {
          throw Error(ErrorCode::kFileNotFound, "missing recipe " + rp.filename().string());
        }
        recipe = recipe_from_json(detail::read_text(rp));
        rc.order = config.order.value_or(recipe->order);
        rc.final_scale = recipe->final_scale;
        if (config.scale && *config.scale != recipe->final_scale) {
          throw Error(ErrorCode::kInvalidArgument,
                      "--scale " + std::to_string(*config.scale) + " != recipe scale " +
                          std::to_string(recipe->final_scale));
        }
      } else {
        rc.order = config.order.value_or(kDefaultOrder);
        rc.final_scale = config.scale.value_or(kDefaultScale);
      }
      row.order = rc.order;
      const RestoreResult result = restore(lr, recipe ? &*recipe : nullptr, rc);
      row.dims = result.estimate.dims();
      row.output_file = row.name + "_restored.png";
      save_image(result.estimate, config.output / row.output_file);

      std::optional<Image> gt;
      if (config.ground_truth) {
        const fs::path gp = *config.ground_truth / (row.name + ".png");
        std::error_code ec;
        if (fs::is_regular_file(gp, ec)) {
          gt = load_image(gp);
          require_same_shape(result.estimate, *gt, "ground truth");
          row.psnr_db = psnr(result.estimate, *gt);
          row.ssim = ssim(result.estimate, *gt);
        }
      }
      for (const auto& st : result.trace.stages) {
        std::string kind;
        const auto ref = detail::stage_reference(config.input, row.name, st.stage, gt,
                                                 st.db.dims(), kind);
        if (!ref || ref->channels() != st.db.channels()) continue;
        row.stage_reference = kind;
        row.stage_psnr.emplace_back(st.stage, psnr(st.db, *ref));
      }
      if (config.trace) {
        const fs::path dir = config.output / (row.name + "_restore_trace");
        fs::create_directories(dir);
        for (const auto& st : result.trace.stages) {
          const std::string p = "r_" + std::to_string(st.stage) + "_";
          save_image(clip(st.dn), dir / (p + "dn.png"));
          save_image(clip(st.sr), dir / (p + "sr.png"));
          save_image(clip(st.db), dir / (p + "db.png"));
        }
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  nlohmann::ordered_json summary;
  summary["mode"] = std::string(to_string(config.restoration.mode));
  summary["neumann_terms"] = config.restoration.neumann_terms;
  summary["prox_lambda"] = config.restoration.prox_lambda;
  summary["prox_iters"] = config.restoration.prox_iters;
  summary["images"] = nlohmann::ordered_json::array();
  int failures = 0;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["status"] = r.error.empty() ? "ok" : "error";
    if (!r.error.empty()) {
      ++failures;
      j["error"] = r.error;
      err << "error: " << r.name << ": " << r.error << "\n";
    } else {
      j["output"] = r.output_file;
      j["order"] = r.order;
      j["width"] = r.dims.width;
      j["height"] = r.dims.height;
      if (r.psnr_db) j["psnr_db"] = detail::json_number(*r.psnr_db);
      if (r.ssim) j["ssim"] = *r.ssim;
      if (!r.stage_psnr.empty()) {
        j["stage_reference"] = r.stage_reference;
        auto& stages = j["stages"] = nlohmann::ordered_json::array();
        for (const auto& [stage, value] : r.stage_psnr) {
          stages.push_back({{"stage", stage}, {"psnr_db", detail::json_number(value)}});
        }
      }
    }
    summary["images"].push_back(std::move(j));
  }
  try {
    detail::write_text(config.output / "restore_summary.json", summary.dump(2) + "\n");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  out << "restored " << rows.size() - failures << "/" << rows.size() << " image(s) ("
      << to_string(config.restoration.mode) << ") -> " << config.output.string() << "\n";
  return failures ? kExitFileErrors : kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

namespace detail {

struct EvalPair {
  std::string id;
  fs::path restored;
  fs::path reference;
};

// Pairs reference <id>.png with <id>.png or <id>_restored.png.
inline std::vector<EvalPair> match_pairs(const fs::path& restored_dir, const fs::path& gt_dir,
                                         std::vector<std::string>& problems) {
  std::vector<fs::path> restored = list_pngs(restored_dir);
  std::vector<fs::path> refs = list_pngs(gt_dir);
  std::vector<bool> used(restored.size(), false);
  std::vector<EvalPair> pairs;
  auto find = [&](const std::string& file) -> std::optional<size_t> {
    for (size_t i = 0; i < restored.size(); ++i) {
      if (!used[i] && restored[i].filename().string() == file) return i;
    }
    return std::nullopt;
  };
  for (const auto& ref : refs) {
    const std::string id = ref.stem().string();
    auto hit = find(id + ".png");
    if (!hit) hit = find(id + "_restored.png");
    if (!hit) {
      problems.push_back("no restored counterpart for " + ref.filename().string());
      continue;
    }
    used[*hit] = true;
    pairs.push_back({id, restored[*hit], ref});
  }
  for (size_t i = 0; i < restored.size(); ++i) {
    if (!used[i]) {
      problems.push_back("no ground-truth counterpart for " + restored[i].filename().string());
    }
  }
  return pairs;
}

}  // namespace detail

// Writes metrics.csv to the output dir (or prints it when no output dir is
// set) and prints the aggregate table.
inline int cmd_evaluate(const RunConfig& config, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  std::vector<detail::EvalPair> pairs;
  std::optional<BrisqueModel> model;
  try {
    if (config.workers < 1) throw Error(ErrorCode::kInvalidArgument, "--workers must be >= 1");
    if (!config.ground_truth) {
      throw Error(ErrorCode::kInvalidArgument, "evaluate requires --ground-truth");
    }
    std::vector<std::string> problems;
    pairs = detail::match_pairs(config.input, *config.ground_truth, problems);
    if (!problems.empty()) {
      for (const auto& p : problems) err << "error: " << p << "\n";
      throw Error(ErrorCode::kDimensionMismatch, "unmatched file sets");
    }
    if (pairs.empty()) throw Error(ErrorCode::kFileNotFound, "no PNG pairs to evaluate");
    if (config.brisque_model) model = load_brisque_model(*config.brisque_model);
    if (!config.output.empty()) detail::prepare_output_dir(config.output);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<MetricsRow> rows(pairs.size());
  std::vector<std::string> errors(pairs.size());
  detail::parallel_for(pairs.size(), config.workers, [&](size_t i) {
    rows[i].id = pairs[i].id;
    try {
      const Image a = load_image(pairs[i].restored);
      const Image b = load_image(pairs[i].reference);
      rows[i].psnr = psnr(a, b);
      rows[i].ssim = ssim(a, b);
      if (model) rows[i].brisque = brisque_score(brisque_features(a), &*model);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  MetricsReport report;
  int failures = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (errors[i].empty()) {
      report.rows.push_back(rows[i]);
    } else {
      ++failures;
      err << "error: " << rows[i].id << ": " << errors[i] << "\n";
    }
  }
  const std::string csv = report.to_csv();
  if (config.output.empty()) {
    out << csv;
  } else {
    try {
      detail::write_text(config.output / "metrics.csv", csv);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  out << report.summary_table();
  return failures ? kExitFileErrors : kExitOk;
}

// ---------------------------------------------------------------------------
// kernel-dump

struct KernelDumpArgs {
  std::string family = "iso_gauss";
  int n = 3;
  std::optional<double> sigma;
  std::optional<double> sigma_x;
  std::optional<double> sigma_y;
  double theta = 0.0;
  std::optional<double> beta;
  std::optional<double> omega_c;
};

// Short aliases name the isotropic variant.
inline std::optional<KernelFamily> parse_family_alias(std::string_view s) {
  if (s == "gauss") return KernelFamily::kIsoGauss;
  if (s == "gen_gauss") return KernelFamily::kIsoGenGauss;
  if (s == "plateau") return KernelFamily::kIsoPlateau;
  return parse_kernel_family(s);
}

inline KernelSpec kernel_spec_from_args(const KernelDumpArgs& a) {
  const auto family = parse_family_alias(a.family);
  if (!family) {
    throw Error(ErrorCode::kInvalidArgument, "unknown kernel family \"" + a.family + "\"");
  }
  KernelSpec s;
  s.family = *family;
  s.half_size = a.n;
  const double sigma = a.sigma.value_or(1.0);
  s.sigma_x = a.sigma_x.value_or(sigma);
  s.sigma_y = a.sigma_y.value_or(a.sigma ? sigma : s.sigma_x);
  s.theta = a.theta;
  if (a.beta) s.beta = *a.beta;
  if (a.omega_c) s.omega_c = *a.omega_c;
  return s;
}

// Prints the kernel as CSV rows followed by "sum,<value>".
inline int cmd_kernel_dump(const KernelDumpArgs& args, std::ostream& out = std::cout,
                           std::ostream& err = std::cerr) {
  BlurKernel k;
  try {
    k = make_kernel(kernel_spec_from_args(args));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (int y = 0; y < k.side; ++y) {
    for (int x = 0; x < k.side; ++x) {
      if (x) out << ",";
      out << format_number(k.weights[static_cast<size_t>(y) * k.side + x]);
    }
    out << "\n";
  }
  out << "sum," << format_number(k.sum()) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest

inline int cmd_selftest(const SelftestOptions& options = {}, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  SelftestReport report;
  try {
    report = run_selftest(options);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  char buf[256];
  double total = 0.0;
  for (const auto& c : report.checks) {
    total += c.seconds;
    std::snprintf(buf, sizeof(buf), "%-4s %-20s %7.3fs", c.passed ? "ok" : "FAIL",
                  c.name.c_str(), c.seconds);
    out << buf;
    if (!c.passed) out << "  " << c.detail;
    out << "\n";
  }
  std::snprintf(buf, sizeof(buf), "selftest %s in %.3fs\n",
                report.passed() ? "passed" : "FAILED", total);
  out << buf;
  if (!report.passed()) {
    for (const auto& c : report.checks) {
      if (!c.passed) err << "failed check: " << c.name << "\n";
    }
    return kExitFileErrors;
  }
  return kExitOk;
}

}  // namespace hodr
