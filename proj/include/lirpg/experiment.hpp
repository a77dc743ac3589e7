#pragma once

#include "lirpg/config.hpp"
#include "lirpg/lirpg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lirpg {

/// One row of a learning curve, aggregated over the iterations since the
/// previous row.
struct CurvePoint {
  long iteration = 0;
  long env_steps = 0;
  long episodes = 0;
  double mean_ex_return_100 = 0.0;  // mean over the last eval_window episodes
  double mean_in_reward = 0.0;
  double mean_is_ratio = 0.0;
  double max_is_ratio = 0.0;
  double theta_grad_norm = 0.0;
  double eta_grad_norm = 0.0;
};

inline constexpr const char* kCurveHeader =
    "iteration,env_steps,episodes,mean_ex_return_100,mean_in_reward,mean_is_ratio,max_is_ratio,theta_grad_norm,"
    "eta_grad_norm";

std::string format_curve_row(const CurvePoint& p);
CurvePoint parse_curve_row(const std::string& line);
/// Reads a curve file; a trailing partial row (no newline) is ignored.
std::vector<CurvePoint> read_curve(const std::filesystem::path& path);

struct RunOutcome {
  AgentMode mode = AgentMode::lirpg_mixed;
  std::uint64_t seed = 0;
  std::filesystem::path dir;  // empty for in-memory runs
  std::vector<CurvePoint> curve;
  AgentState final_state;
};

/// Trains one (mode, seed) run of cfg. When out_dir is given, writes
/// curve.csv (flushed per row), checkpoint.txt, config.txt and manifest.txt
/// there. The generator is seeded once with `seed` and drives both
/// initialization and sampling.
RunOutcome train_run(const RunConfig& cfg, AgentMode mode, std::uint64_t seed,
                     const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Directory name of one run inside an experiment directory.
std::string run_dir_name(AgentMode mode, std::uint64_t seed);

/// Output root: $LIRPG_OUTPUT_ROOT when set, else cfg.output_dir.
std::filesystem::path output_root(const RunConfig& cfg);

/// Runs every (mode, seed) pair, in parallel over cfg.threads workers.
/// Results come back in (mode, seed) order regardless of scheduling.
std::vector<RunOutcome> run_experiment(const RunConfig& cfg, bool write_outputs = true);
std::vector<RunOutcome> run_experiment_file(const std::string& config_path);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lirpg
