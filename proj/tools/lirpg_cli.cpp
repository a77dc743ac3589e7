#include "lirpg/analysis.hpp"
#include "lirpg/checkpoint.hpp"
#include "lirpg/compare.hpp"
#include "lirpg/experiment.hpp"
#include "lirpg/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kVerifyFailed = 2;

int cmd_run(const std::string& path) {
  const lirpg::RunConfig cfg = lirpg::load_config(path);
  const auto root = lirpg::output_root(cfg);
  std::cout << "running " << cfg.modes.size() * cfg.seeds.size() << " run(s) into " << root.string() << '\n';
  const auto results = lirpg::run_experiment(cfg, true);
  for (const auto& r : results) {
    const double last = r.curve.empty() ? 0.0 : r.curve.back().mean_ex_return_100;
    std::printf("%-24s seed %-4llu final mean_ex_return_100 %.4f\n", lirpg::to_string(r.mode),
                static_cast<unsigned long long>(r.seed), last);
  }
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& json_path, bool quick,
               std::optional<long> corrupt) {
  lirpg::verify::Options opts;
  if (quick) {
    opts.model_seeds = 3;
    opts.bilevel_draws = 3;
    opts.estimator_draws = 2;
  }
  if (corrupt) opts.corrupt_coordinate = *corrupt;
  const auto report = lirpg::verify::run_suite(suite, opts);
  report.write_text(std::cout);
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write '" + json_path + "'");
    out << report.to_json() << '\n';
  }
  return report.passed() ? kOk : kVerifyFailed;
}

int cmd_analyze(const std::string& path, long steps, std::uint64_t seed, const std::string& out_path) {
  if (steps < 1) throw CLI::ValidationError("--steps", "must be >= 1");
  const lirpg::Checkpoint ckpt = lirpg::load_checkpoint(path);
  const auto profile = lirpg::analyze_intrinsic(ckpt, steps, seed);
  if (out_path.empty()) {
    lirpg::write_profile(std::cout, profile);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    lirpg::write_profile(out, profile);
  }
  return kOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& metric, double threshold) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  const auto table = lirpg::compare_runs(paths, lirpg::parse_metric(metric), threshold);
  lirpg::write_table(std::cout, table);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning intrinsic rewards for policy-gradient agents"};
  app.set_version_flag("--version", std::string(lirpg::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Train every (mode, seed) pair of a config file");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  std::string suite;
  std::string json_path;
  bool quick = false;
  std::optional<long> corrupt;
  auto* verify = app.add_subcommand("verify", "Check analytic gradients and estimators against exact oracles");
  verify->add_option("suite", suite, "gradients | estimators | bilevel | all")
      ->required()
      ->check(CLI::IsMember({"gradients", "estimators", "bilevel", "all"}));
  verify->add_option("--json", json_path, "Write a machine-readable report here");
  verify->add_flag("--quick", quick, "Fewer random draws");
  verify->add_option("--corrupt-coordinate", corrupt,
                     "Negative control: perturb this coordinate of every analytic grad_log_pi");

  std::string ckpt_path;
  long steps = 0;
  std::uint64_t seed = 1;
  std::string profile_out;
  auto* analyze = app.add_subcommand("analyze", "Per-action intrinsic reward profile of a frozen checkpoint");
  analyze->add_option("checkpoint", ckpt_path, "checkpoint.txt of a run")->required()->check(CLI::ExistingFile);
  analyze->add_option("--steps", steps, "Environment steps to roll out")->required();
  analyze->add_option("--seed", seed, "Rollout seed");
  analyze->add_option("--out", profile_out, "Write the profile CSV here instead of stdout");

  std::vector<std::string> dirs;
  std::string metric = "final";
  double threshold = 0.0;
  auto* compare = app.add_subcommand("compare", "Summarize runs across seeds");
  compare->add_option("dirs", dirs, "Run or experiment directories")->required()->expected(1, -1);
  compare->add_option("--metric", metric, "final | auc | iters_to_threshold")
      ->check(CLI::IsMember({"final", "auc", "iters_to_threshold"}));
  compare->add_option("--threshold", threshold, "Return level for iters_to_threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*verify) return cmd_verify(suite, json_path, quick, corrupt);
    if (*analyze) return cmd_analyze(ckpt_path, steps, seed, profile_out);
    if (*compare) return cmd_compare(dirs, metric, threshold);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
