#include "lirpg/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lirpg {

ActionRewardProfile analyze_intrinsic(const Checkpoint& ckpt, long steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("analyze_intrinsic: steps must be >= 1");
  auto env = make_env(ckpt.config.env);
  const AgentState& agent = ckpt.agent;
  if (agent.policy.net().input_dim() != env->obs_dim() || agent.policy.num_actions() != env->num_actions()) {
    throw std::invalid_argument("analyze_intrinsic: checkpoint does not match the environment");
  }
  const int A = env->num_actions();
  const int S = env->num_states();
  std::vector<double> sum(static_cast<std::size_t>(A), 0.0);
  std::vector<double> sum_sq(static_cast<std::size_t>(A), 0.0);
  std::vector<long> count(static_cast<std::size_t>(A), 0);
  std::vector<std::vector<double>> sa_sum(static_cast<std::size_t>(S), std::vector<double>(static_cast<std::size_t>(A), 0.0));
  std::vector<std::vector<long>> sa_count(static_cast<std::size_t>(S), std::vector<long>(static_cast<std::size_t>(A), 0));

  Rng rng(seed);
  Observation obs = env->reset(rng);
  int state = env->state();
  for (long t = 0; t < steps; ++t) {
    const Eigen::VectorXd probs = agent.policy.action_dist(obs);
    const int a = sample_categorical(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), rng);
    const double r = agent.irm.intrinsic_reward(obs, a);
    const auto ua = static_cast<std::size_t>(a);
    sum[ua] += r;
    sum_sq[ua] += r * r;
    ++count[ua];
    sa_sum[static_cast<std::size_t>(state)][ua] += r;
    ++sa_count[static_cast<std::size_t>(state)][ua];
    StepResult res = env->step(a, rng);
    if (res.done) {
      obs = env->reset(rng);
      state = env->state();
    } else {
      obs = std::move(res.obs);
      state = res.state;
    }
  }

  ActionRewardProfile p;
  p.steps = steps;
  for (std::size_t a = 0; a < sum.size(); ++a) {
    ActionStats st;
    st.count = count[a];
    st.frequency = static_cast<double>(count[a]) / static_cast<double>(steps);
    if (count[a] > 0) {
      st.mean_in_reward = sum[a] / static_cast<double>(count[a]);
      st.std_in_reward = std::sqrt(std::max(0.0, sum_sq[a] / static_cast<double>(count[a]) - st.mean_in_reward * st.mean_in_reward));
    }
    p.actions.push_back(st);
  }
  p.state_action_mean.assign(static_cast<std::size_t>(S),
                             std::vector<double>(static_cast<std::size_t>(A), std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t s = 0; s < sa_sum.size(); ++s) {
    for (std::size_t a = 0; a < sum.size(); ++a) {
      if (sa_count[s][a] > 0) p.state_action_mean[s][a] = sa_sum[s][a] / static_cast<double>(sa_count[s][a]);
    }
  }
  return p;
}

void write_profile(std::ostream& os, const ActionRewardProfile& profile) {
  os << "action,mean_in_reward,std_in_reward,frequency,count\n";
  char buf[256];
  for (std::size_t a = 0; a < profile.actions.size(); ++a) {
    const auto& s = profile.actions[a];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%ld\n", a, s.mean_in_reward, s.std_in_reward, s.frequency,
                  s.count);
    os << buf;
  }
}

}  // namespace lirpg
