#pragma once

#include "lirpg/env.hpp"
#include "lirpg/lirpg.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lirpg {

/// One experiment: an environment, a set of agent modes, a set of seeds and
/// the shared hyperparameters. Each (mode, seed) pair is an independent run.
struct RunConfig {
  EnvConfig env;
  std::vector<AgentMode> modes{AgentMode::lirpg_mixed};
  LirpgConfig agent;
  std::vector<std::uint64_t> seeds{1};
  long iterations = 1000;
  long log_interval = 10;
  int eval_window = 100;
  std::string output_dir = "runs";
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  /// The config of a single run: modes = {mode}, seeds = {seed}.
  RunConfig single_run(AgentMode mode, std::uint64_t seed) const;
};

/// Parses "key = value" lines. '#' starts a comment. Lists are
/// comma-separated; grid cells are written x:y. Unknown or repeated keys are
/// errors. Throws std::invalid_argument with the offending line number.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every key, one per line, in a fixed order. parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a of the serialized config with output_dir and threads blanked, so
/// the hash identifies everything that affects results.
std::uint64_t config_hash(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace lirpg
