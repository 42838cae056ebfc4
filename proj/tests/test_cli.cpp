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


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hodr/cli.hpp"
#include "hodr/synthetic.hpp"

namespace hodr {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("hodr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(hr_dir());
    save_image(synthetic_image(1, {48, 48}, 3), hr_dir() / "alpha.png");
    save_image(synthetic_image(2, {64, 40}, 3), hr_dir() / "beta.png");
    save_image(synthetic_image(3, {40, 40}, 1), hr_dir() / "gamma.png");
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path hr_dir() const { return root_ / "hr"; }

  RunConfig degrade_config(const std::string& out) const {
    RunConfig c;
    c.input = hr_dir();
    c.output = root_ / out;
    c.order = 2;
    c.scale = 2;
    c.seed = 0;
    return c;
  }

  int run_degrade(const RunConfig& c) { return cmd_degrade(c, out_, err_); }

  fs::path root_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, DegradeWritesLrRecipesAndManifest) {
  ASSERT_EQ(run_degrade(degrade_config("d")), kExitOk) << err_.str();
  const fs::path d = root_ / "d";
  for (const auto& [name, w, h] : {std::tuple{"alpha", 24, 24}, std::tuple{"beta", 32, 20},
                                   std::tuple{"gamma", 20, 20}}) {
    const Image lr = load_image(d / (std::string(name) + "_lr.png"));
    EXPECT_EQ(lr.dims(), (Dims{w, h})) << name;
    const DegradationRecipe r = recipe_from_json(slurp(d / (std::string(name) + "_recipe.json")));
    EXPECT_EQ(r.order, 2);
    EXPECT_EQ(r.final_scale, 2);
    EXPECT_EQ(r.master_seed, image_seed(0, std::string(name) + ".png"));
  }
  const std::string manifest = slurp(d / "manifest.csv");
  EXPECT_EQ(manifest.rfind("name,master_seed,image_seed,order,scale,", 0), 0u);
  EXPECT_NE(manifest.find("alpha,0,"), std::string::npos);
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 4);
}

TEST_F(Cli, DegradeTraceHoldsEveryStage) {
  RunConfig c = degrade_config("d");
  c.order = 3;
  c.trace = true;
  ASSERT_EQ(run_degrade(c), kExitOk);
  const fs::path t = root_ / "d" / "alpha_trace";
  for (const char* f : {"g_00.png", "g_01.png", "g_02.png", "g_03.png", "p_01.png", "p_02.png",
                        "p_03.png"}) {
    EXPECT_TRUE(fs::exists(t / f)) << f;
  }
  EXPECT_EQ(load_image(t / "g_00.png"), load_image(hr_dir() / "alpha.png"));
}

TEST_F(Cli, DegradeRerunIsByteIdentical) {
  RunConfig c = degrade_config("a");
  c.trace = true;
  ASSERT_EQ(run_degrade(c), kExitOk);
  c.output = root_ / "b";
  ASSERT_EQ(run_degrade(c), kExitOk);
  EXPECT_EQ(tree(root_ / "a"), tree(root_ / "b"));
}

TEST_F(Cli, ParallelAndSerialAreByteIdentical) {
  RunConfig c = degrade_config("serial");
  c.trace = true;
  ASSERT_EQ(run_degrade(c), kExitOk);
  c.output = root_ / "parallel";
  c.workers = 3;
  ASSERT_EQ(run_degrade(c), kExitOk);
  EXPECT_EQ(tree(root_ / "serial"), tree(root_ / "parallel"));
}

TEST_F(Cli, SubsetOfCorpusReproducesExactly) {
  ASSERT_EQ(run_degrade(degrade_config("full")), kExitOk);
  fs::create_directories(root_ / "subset_in");
  fs::copy_file(hr_dir() / "beta.png", root_ / "subset_in" / "beta.png");
  RunConfig c = degrade_config("subset");
  c.input = root_ / "subset_in";
  ASSERT_EQ(run_degrade(c), kExitOk);
  EXPECT_EQ(slurp(root_ / "full" / "beta_lr.png"), slurp(root_ / "subset" / "beta_lr.png"));
  EXPECT_EQ(slurp(root_ / "full" / "beta_recipe.json"),
            slurp(root_ / "subset" / "beta_recipe.json"));
}

TEST_F(Cli, DifferentSeedsDiffer) {
  ASSERT_EQ(run_degrade(degrade_config("s0")), kExitOk);
  RunConfig c = degrade_config("s1");
  c.seed = 1;
  ASSERT_EQ(run_degrade(c), kExitOk);
  EXPECT_NE(slurp(root_ / "s0" / "alpha_recipe.json"), slurp(root_ / "s1" / "alpha_recipe.json"));
}

TEST_F(Cli, OrderFourIsAUsageErrorBeforeAnyIo) {
  RunConfig c = degrade_config("never");
  c.order = 4;
  EXPECT_EQ(run_degrade(c), kExitUsage);
  EXPECT_FALSE(fs::exists(root_ / "never"));
  EXPECT_NE(err_.str().find("order"), std::string::npos);
}

TEST_F(Cli, EmptyInputDirIsAnError) {
  fs::create_directories(root_ / "empty");
  RunConfig c = degrade_config("out");
  c.input = root_ / "empty";
  EXPECT_EQ(run_degrade(c), kExitUsage);
  EXPECT_NE(err_.str().find("no PNG"), std::string::npos);
}

TEST_F(Cli, UnwritableOutputIsAnError) {
  std::ofstream(root_ / "file") << "x";
  RunConfig c = degrade_config("file/sub");
  EXPECT_EQ(run_degrade(c), kExitUsage);
}

TEST_F(Cli, PerFileErrorsDoNotAbortTheBatch) {
  save_image(synthetic_image(4, {31, 30}, 3), hr_dir() / "odd.png");
  std::ofstream(hr_dir() / "broken.png") << "not a png";
  EXPECT_EQ(run_degrade(degrade_config("d")), kExitFileErrors);
  EXPECT_TRUE(fs::exists(root_ / "d" / "alpha_lr.png"));
  EXPECT_TRUE(fs::exists(root_ / "d" / "gamma_lr.png"));
  EXPECT_FALSE(fs::exists(root_ / "d" / "odd_lr.png"));
  const std::string manifest = slurp(root_ / "d" / "manifest.csv");
  EXPECT_NE(manifest.find("odd,"), std::string::npos);
  EXPECT_NE(manifest.find(",error,"), std::string::npos);
  EXPECT_NE(err_.str().find("odd"), std::string::npos);
  EXPECT_NE(err_.str().find("broken"), std::string::npos);
}

class CliRestore : public Cli {
 protected:
  void SetUp() override {
    Cli::SetUp();
    RunConfig c = degrade_config("d");
    c.trace = true;
    ASSERT_EQ(run_degrade(c), kExitOk);
  }
  RunConfig restore_config(const std::string& out) const {
    RunConfig c;
    c.input = root_ / "d";
    c.output = root_ / out;
    c.restoration.prox_iters = 20;
    return c;
  }
};

TEST_F(CliRestore, OracleRestoresToHrDims) {
  RunConfig c = restore_config("r");
  c.ground_truth = hr_dir();
  c.trace = true;
  ASSERT_EQ(cmd_restore(c, out_, err_), kExitOk) << err_.str();
  EXPECT_EQ(load_image(root_ / "r" / "alpha_restored.png").dims(), (Dims{48, 48}));
  EXPECT_EQ(load_image(root_ / "r" / "beta_restored.png").dims(), (Dims{64, 40}));
  EXPECT_EQ(load_image(root_ / "r" / "gamma_restored.png").channels(), 1);
  for (const char* f : {"r_2_dn.png", "r_2_sr.png", "r_2_db.png", "r_1_dn.png", "r_1_sr.png",
                        "r_1_db.png"}) {
    EXPECT_TRUE(fs::exists(root_ / "r" / "alpha_restore_trace" / f)) << f;
  }
  const auto summary = nlohmann::json::parse(slurp(root_ / "r" / "restore_summary.json"));
  ASSERT_EQ(summary["images"].size(), 3u);
  const auto& alpha = summary["images"][0];
  EXPECT_EQ(alpha["name"], "alpha");
  EXPECT_EQ(alpha["status"], "ok");
  EXPECT_TRUE(alpha["psnr_db"].is_number());
  EXPECT_EQ(alpha["stage_reference"], "trace");
  ASSERT_EQ(alpha["stages"].size(), 2u);
  EXPECT_EQ(alpha["stages"][0]["stage"], 2);
  // The last stage's reference is the HR image itself.
  EXPECT_DOUBLE_EQ(alpha["stages"][1]["psnr_db"].get<double>(), alpha["psnr_db"].get<double>());
}

TEST_F(CliRestore, BlindRestoresWithoutRecipes) {
  for (const char* f : {"alpha_recipe.json", "beta_recipe.json", "gamma_recipe.json"}) {
    fs::remove(root_ / "d" / f);
  }
  RunConfig c = restore_config("r");
  c.restoration.mode = RestoreMode::kBlind;
  ASSERT_EQ(cmd_restore(c, out_, err_), kExitOk) << err_.str();
  EXPECT_EQ(load_image(root_ / "r" / "alpha_restored.png").dims(), (Dims{48, 48}));
}

TEST_F(CliRestore, MissingRecipeInOracleModeIsAPerFileError) {
  fs::remove(root_ / "d" / "beta_recipe.json");
  EXPECT_EQ(cmd_restore(restore_config("r"), out_, err_), kExitFileErrors);
  EXPECT_NE(err_.str().find("beta_recipe.json"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "r" / "alpha_restored.png"));
}

TEST_F(CliRestore, CorruptRecipeIsRecordedAndTheRunContinues) {
  std::ofstream(root_ / "d" / "alpha_recipe.json") << "{\"order\": 2, \"stages\": [";
  EXPECT_EQ(cmd_restore(restore_config("r"), out_, err_), kExitFileErrors);
  EXPECT_TRUE(fs::exists(root_ / "r" / "beta_restored.png"));
  EXPECT_TRUE(fs::exists(root_ / "r" / "gamma_restored.png"));
  const auto summary = nlohmann::json::parse(slurp(root_ / "r" / "restore_summary.json"));
  EXPECT_EQ(summary["images"][0]["status"], "error");
  EXPECT_EQ(summary["images"][1]["status"], "ok");
}

TEST_F(CliRestore, RestoreIsDeterministic) {
  ASSERT_EQ(cmd_restore(restore_config("r1"), out_, err_), kExitOk);
  RunConfig c = restore_config("r2");
  c.workers = 2;
  ASSERT_EQ(cmd_restore(c, out_, err_), kExitOk);
  EXPECT_EQ(tree(root_ / "r1"), tree(root_ / "r2"));
}

TEST_F(Cli, EvaluateIdenticalDirs) {
  RunConfig c;
  c.input = hr_dir();
  c.ground_truth = hr_dir();
  c.output = root_ / "eval";
  ASSERT_EQ(cmd_evaluate(c, out_, err_), kExitOk) << err_.str();
  EXPECT_EQ(slurp(root_ / "eval" / "metrics.csv"),
            "id,psnr_db,ssim,brisque\nalpha,inf,1,\nbeta,inf,1,\ngamma,inf,1,\n");
  EXPECT_NE(out_.str().find("3 inf row(s) excluded"), std::string::npos);
}

TEST_F(Cli, EvaluateMatchesLibraryCalls) {
  fs::create_directories(root_ / "restored");
  for (const char* n : {"alpha", "beta", "gamma"}) {
    const Image ref = load_image(hr_dir() / (std::string(n) + ".png"));
    Rng rng(stable_hash(n));
    save_image(add_gaussian_noise(ref, 12.0, false, rng),
               root_ / "restored" / (std::string(n) + "_restored.png"));
  }
  RunConfig c;
  c.input = root_ / "restored";
  c.ground_truth = hr_dir();
  ASSERT_EQ(cmd_evaluate(c, out_, err_), kExitOk) << err_.str();
  std::istringstream csv(out_.str());
  std::string line;
  std::getline(csv, line);
  for (const char* n : {"alpha", "beta", "gamma"}) {
    std::getline(csv, line);
    const Image a = load_image(root_ / "restored" / (std::string(n) + "_restored.png"));
    const Image b = load_image(hr_dir() / (std::string(n) + ".png"));
    EXPECT_EQ(line, std::string(n) + "," + format_number(psnr(a, b)) + "," +
                        format_number(ssim(a, b)) + ",");
  }
}

TEST_F(Cli, EvaluateNamesMissingCounterparts) {
  fs::create_directories(root_ / "restored");
  fs::copy_file(hr_dir() / "alpha.png", root_ / "restored" / "alpha_restored.png");
  fs::copy_file(hr_dir() / "beta.png", root_ / "restored" / "extra.png");
  RunConfig c;
  c.input = root_ / "restored";
  c.ground_truth = hr_dir();
  EXPECT_EQ(cmd_evaluate(c, out_, err_), kExitUsage);
  EXPECT_NE(err_.str().find("beta.png"), std::string::npos);
  EXPECT_NE(err_.str().find("gamma.png"), std::string::npos);
  EXPECT_NE(err_.str().find("extra.png"), std::string::npos);
}

TEST_F(Cli, EvaluateWithBrisqueModel) {
  BrisqueModel m;
  m.gamma = 0.1;
  m.feature_min.assign(36, -1.0);
  m.feature_max.assign(36, 1.0);
  m.coefs = {1.0};
  m.support_vectors = {std::vector<double>(36, 0.0)};
  std::ofstream(root_ / "model.txt") << m.to_text();
  RunConfig c;
  c.input = hr_dir();
  c.ground_truth = hr_dir();
  c.brisque_model = root_ / "model.txt";
  ASSERT_EQ(cmd_evaluate(c, out_, err_), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("brisque"), std::string::npos);
  const Image a = load_image(hr_dir() / "alpha.png");
  EXPECT_NE(out_.str().find("alpha,inf,1," + format_number(brisque_score(brisque_features(a), &m))),
            std::string::npos);
}

std::vector<std::vector<double>> parse_dump(const std::string& text, double& sum) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("sum,", 0) == 0) {
      sum = std::stod(line.substr(4));
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

TEST(KernelDump, NearDeltaGaussian) {
  KernelDumpArgs a;
  a.family = "iso_gauss";
  a.n = 3;
  a.sigma = 0.1;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_kernel_dump(a, out, err), kExitOk) << err.str();
  double sum = 0.0;
  const auto rows = parse_dump(out.str(), sum);
  ASSERT_EQ(rows.size(), 7u);
  for (const auto& r : rows) EXPECT_EQ(r.size(), 7u);
  EXPECT_GT(rows[3][3], 0.999);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(KernelDump, GenGaussBetaOneEqualsGaussDump) {
  KernelDumpArgs g;
  g.family = "iso_gauss";
  g.n = 4;
  g.sigma = 1.3;
  KernelDumpArgs gg = g;
  gg.family = "gen_gauss";
  gg.beta = 1.0;
  std::ostringstream a, b, err;
  ASSERT_EQ(cmd_kernel_dump(g, a, err), kExitOk);
  ASSERT_EQ(cmd_kernel_dump(gg, b, err), kExitOk);
  double sa = 0, sb = 0;
  const auto ra = parse_dump(a.str(), sa), rb = parse_dump(b.str(), sb);
  for (size_t y = 0; y < ra.size(); ++y) {
    for (size_t x = 0; x < ra[y].size(); ++x) EXPECT_NEAR(ra[y][x], rb[y][x], 1e-12);
  }
}

TEST(KernelDump, PlateauBetaNineIsARangeError) {
  KernelDumpArgs a;
  a.family = "plateau";
  a.beta = 9.0;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_kernel_dump(a, out, err), kExitUsage);
  EXPECT_NE(err.str().find("beta"), std::string::npos);
  EXPECT_TRUE(out.str().empty());
}

TEST(KernelDump, InvalidCombinations) {
  std::ostringstream out, err;
  KernelDumpArgs unknown;
  unknown.family = "motion";
  EXPECT_EQ(cmd_kernel_dump(unknown, out, err), kExitUsage);
  KernelDumpArgs iso;
  iso.family = "iso_gauss";
  iso.sigma_x = 1.0;
  iso.sigma_y = 2.0;
  EXPECT_EQ(cmd_kernel_dump(iso, out, err), kExitUsage);
  KernelDumpArgs aniso;
  aniso.family = "aniso_plateau";
  aniso.sigma_x = 1.0;
  aniso.sigma_y = 2.0;
  aniso.theta = 0.5;
  aniso.beta = 1.5;
  EXPECT_EQ(cmd_kernel_dump(aniso, out, err), kExitOk);
}

TEST(CliSelftest, PassesAndNamesInjectedFault) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_selftest({}, out, err), kExitOk);
  SelftestOptions bad;
  bad.inject_fault = "kernel_sum";
  std::ostringstream out2, err2;
  EXPECT_NE(cmd_selftest(bad, out2, err2), kExitOk);
  EXPECT_NE(err2.str().find("kernel_sum"), std::string::npos);
}

}  // namespace
}  // namespace hodr
