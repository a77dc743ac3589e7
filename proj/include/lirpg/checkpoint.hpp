#pragma once

#include "lirpg/config.hpp"
#include "lirpg/lirpg.hpp"

#include <iosfwd>
#include <string>

namespace lirpg {

/// A run's complete learner state plus the single-run config that produced
/// it, enough to rebuild both the agent and the environment.
struct Checkpoint {
  RunConfig config;
  AgentState agent;
};

/// Text format:
///
///   lirpg-checkpoint 1
///   iteration <n>
///   config <num_lines>
///   <serialized config lines>
///   params theta ... / policy_value / eta / ex_value   (see write_params)
///   optimizer <name> <steps>, followed by params <name>.m and <name>.v
///   end
void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lirpg
