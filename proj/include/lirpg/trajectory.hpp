#pragma once

#include "lirpg/env.hpp"

#include <vector>

namespace lirpg {

/// One decision point of a rollout: the observation the action was taken in,
/// the reward it produced and the log-probability under the behavior policy.
struct Step {
  Observation obs;
  int state = 0;
  int action = 0;
  double reward_ex = 0.0;
  bool done = false;
  double behavior_logp = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;
  bool truncated = false;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  std::vector<double> extrinsic_rewards() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.reward_ex);
    return out;
  }

  double total_extrinsic() const {
    double total = 0.0;
    for (const auto& s : steps) total += s.reward_ex;
    return total;
  }
};

}  // namespace lirpg
