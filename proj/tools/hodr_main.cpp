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


#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hodr/cli.hpp"

namespace {

void add_run_flags(CLI::App& cmd, hodr::RunConfig& c, bool with_order) {
  cmd.add_option("--input", c.input, "Input directory of PNG files")->required();
  if (with_order) {
    cmd.add_option("--order", c.order, "Degradation order k (1-3)");
    cmd.add_option("--scale", c.scale, "Final downscale factor s (2-4)");
  }
  cmd.add_option("--workers", c.workers, "Worker threads")->capture_default_str();
}

void add_restoration_flags(CLI::App& cmd, hodr::RunConfig& c, std::string& mode) {
  auto& r = c.restoration;
  cmd.add_option("--mode", mode, "oracle (uses *_recipe.json) or blind")
      ->check(CLI::IsMember({"oracle", "blind"}))
      ->capture_default_str();
  cmd.add_option("--neumann-terms", r.neumann_terms, "Neumann series terms m")
      ->capture_default_str();
  cmd.add_option("--prox-lambda", r.prox_lambda, "TV weight at noise sigma 0.06")
      ->capture_default_str();
  cmd.add_option("--prox-iters", r.prox_iters, "TV dual iterations")->capture_default_str();
  cmd.add_option("--backprojection-iters", r.backprojection_iters,
                 "Back-projection iterations per upsampling")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hodr: high-order degradation simulation and progressive restoration"};
  app.require_subcommand(1);

  hodr::RunConfig degrade_cfg;
  auto* degrade = app.add_subcommand("degrade", "Degrade HR images with sampled recipes");
  add_run_flags(*degrade, degrade_cfg, true);
  degrade->add_option("--output", degrade_cfg.output, "Output directory")->required();
  degrade->add_option("--seed", degrade_cfg.seed, "Master seed")->capture_default_str();
  degrade->add_flag("--trace", degrade_cfg.trace, "Write per-stage intermediate images");

  hodr::RunConfig restore_cfg;
  std::string restore_mode = "oracle";
  auto* restore = app.add_subcommand("restore", "Restore LR images stage by stage");
  add_run_flags(*restore, restore_cfg, true);
  add_restoration_flags(*restore, restore_cfg, restore_mode);
  restore->add_option("--output", restore_cfg.output, "Output directory")->required();
  restore->add_option("--seed", restore_cfg.seed, "Accepted for symmetry; restoration is deterministic");
  restore->add_option("--ground-truth", restore_cfg.ground_truth,
                      "HR directory for PSNR/SSIM in the summary");
  restore->add_flag("--trace", restore_cfg.trace, "Write r_<stage>_<dn|sr|db>.png");

  hodr::RunConfig eval_cfg;
  auto* evaluate = app.add_subcommand("evaluate", "PSNR/SSIM/BRISQUE of restored vs reference");
  add_run_flags(*evaluate, eval_cfg, false);
  evaluate->add_option("--ground-truth", eval_cfg.ground_truth, "Reference directory")
      ->required();
  evaluate->add_option("--output", eval_cfg.output, "Directory for metrics.csv");
  evaluate->add_option("--brisque-model", eval_cfg.brisque_model, "BRISQUE SVR model file");

  hodr::KernelDumpArgs kd;
  auto* kernel = app.add_subcommand("kernel-dump", "Print a blur kernel as CSV");
  kernel->add_option("--family", kd.family,
                     "iso_gauss, aniso_gauss, iso_gen_gauss, aniso_gen_gauss, iso_plateau, "
                     "aniso_plateau, sinc (aliases: gauss, gen_gauss, plateau)")
      ->capture_default_str();
  kernel->add_option("--n", kd.n, "Half size; side = 2n+1")->capture_default_str();
  kernel->add_option("--sigma", kd.sigma, "Sigma for both axes");
  kernel->add_option("--sigma-x", kd.sigma_x, "Sigma along the rotated x axis");
  kernel->add_option("--sigma-y", kd.sigma_y, "Sigma along the rotated y axis");
  kernel->add_option("--theta", kd.theta, "Rotation in radians")->capture_default_str();
  kernel->add_option("--beta", kd.beta, "Shape for gen_gauss and plateau");
  kernel->add_option("--omega", kd.omega_c, "Sinc cutoff frequency");

  hodr::SelftestOptions st;
  auto* selftest = app.add_subcommand("selftest", "Run the offline invariant suite");
  selftest->add_option("--inject-fault", st.inject_fault,
                       "Corrupt the named check's input (debug hook)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : hodr::kExitUsage;
  }

  try {
    if (*degrade) return hodr::cmd_degrade(degrade_cfg);
    if (*restore) {
      restore_cfg.restoration.mode = *hodr::parse_restore_mode(restore_mode);
      return hodr::cmd_restore(restore_cfg);
    }
    if (*evaluate) return hodr::cmd_evaluate(eval_cfg);
    if (*kernel) return hodr::cmd_kernel_dump(kd);
    if (*selftest) return hodr::cmd_selftest(st);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hodr::kExitUsage;
  }
  return hodr::kExitUsage;
}
