#pragma once

#include "lirpg/checkpoint.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace lirpg {

struct ActionStats {
  double mean_in_reward = 0.0;
  double std_in_reward = 0.0;
  double frequency = 0.0;
  long count = 0;
};

/// Per-action intrinsic reward and selection frequency of a frozen agent.
struct ActionRewardProfile {
  std::vector<ActionStats> actions;
  long steps = 0;
  /// Mean r^in per (state, action); NaN where the pair was never visited.
  std::vector<std::vector<double>> state_action_mean;
};

/// Rolls out the checkpoint's policy without learning for `steps`
/// environment steps (resetting at episode ends) and records r^in of every
/// chosen action.
ActionRewardProfile analyze_intrinsic(const Checkpoint& ckpt, long steps, std::uint64_t seed);

void write_profile(std::ostream& os, const ActionRewardProfile& profile);

}  // namespace lirpg
