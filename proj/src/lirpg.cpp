#include "lirpg/lirpg.hpp"

#include <algorithm>
#include <cmath>

namespace lirpg {

const char* to_string(AgentMode m) {
  switch (m) {
    case AgentMode::extrinsic_only:
      return "extrinsic_only";
    case AgentMode::live_bonus:
      return "live_bonus";
    case AgentMode::lirpg_mixed:
      return "lirpg_mixed";
    case AgentMode::lirpg_intrinsic_only:
      return "lirpg_intrinsic_only";
  }
  return "?";
}

AgentMode parse_mode(const std::string& s) {
  if (s == "extrinsic_only") return AgentMode::extrinsic_only;
  if (s == "live_bonus") return AgentMode::live_bonus;
  if (s == "lirpg_mixed") return AgentMode::lirpg_mixed;
  if (s == "lirpg_intrinsic_only") return AgentMode::lirpg_intrinsic_only;
  throw std::invalid_argument("unknown agent mode '" + s + "'");
}

void LirpgConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(alpha) || alpha < 0.0) throw std::invalid_argument("alpha must be finite and >= 0");
  if (!finite(beta) || beta < 0.0) throw std::invalid_argument("beta must be finite and >= 0");
  if (!finite(lambda_mix) || lambda_mix < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!finite(xi) || xi < 0.0) throw std::invalid_argument("xi must be finite and >= 0");
  if (!finite(value_coef) || value_coef < 0.0) throw std::invalid_argument("value_coef must be finite and >= 0");
  if (!finite(entropy_coef) || entropy_coef < 0.0) throw std::invalid_argument("entropy_coef must be finite and >= 0");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be > 0");
  if (!finite(live_bonus)) throw std::invalid_argument("live_bonus must be finite");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("gae_lambda must lie in [0, 1]");
  if (nstep < 1) throw std::invalid_argument("nstep must be >= 1");
  if (!(is_floor > 0.0)) throw std::invalid_argument("is_floor must be > 0");
  if (!finite(init_scale) || init_scale < 0.0) throw std::invalid_argument("init_scale must be finite and >= 0");
}

AgentState AgentState::create(int obs_dim, int num_actions, const LirpgConfig& cfg, Rng& rng) {
  cfg.validate();
  AgentState a;
  a.policy = PolicyModel(cfg.policy_arch, obs_dim, num_actions);
  a.policy_value = ValueHead(cfg.value_arch, obs_dim);
  a.irm = IntrinsicRewardModel(cfg.irm_arch, obs_dim, num_actions);
  a.ex_value = ValueHead(cfg.value_arch, obs_dim);
  fill_uniform(a.policy.params().values(), cfg.init_scale, rng);
  fill_uniform(a.policy_value.params().values(), cfg.init_scale, rng);
  fill_uniform(a.ex_value.params().values(), cfg.init_scale, rng);
  const OptimizerSettings theta_opt{cfg.optimizer};
  const OptimizerSettings eta_opt{cfg.eta_optimizer};
  a.opt_theta = Optimizer(theta_opt, a.policy.params().size());
  a.opt_policy_value = Optimizer(theta_opt, a.policy_value.params().size());
  a.opt_eta = Optimizer(eta_opt, a.irm.params().size());
  a.opt_ex_value = Optimizer(eta_opt, a.ex_value.params().size());
  return a;
}

Trajectory sample_trajectory(Environment& env, const PolicyModel& policy, Rng& rng) {
  Trajectory traj;
  Observation obs = env.reset(rng);
  int state = env.state();
  for (;;) {
    const Eigen::VectorXd probs = policy.action_dist(obs);
    const int action = sample_categorical(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), rng);
    StepResult res = env.step(action, rng);
    traj.steps.push_back(Step{std::move(obs), state, action, res.reward_ex, res.done, std::log(probs[action])});
    if (res.done) {
      traj.truncated = res.truncated;
      break;
    }
    obs = std::move(res.obs);
    state = res.state;
  }
  return traj;
}

std::vector<double> intrinsic_rewards(const Trajectory& traj, const AgentState& agent, const LirpgConfig& cfg) {
  std::vector<double> r(traj.size(), 0.0);
  if (cfg.mode == AgentMode::live_bonus) {
    std::fill(r.begin(), r.end(), cfg.live_bonus);
  } else if (learns_intrinsic_reward(cfg.mode)) {
    for (std::size_t t = 0; t < traj.size(); ++t) {
      r[t] = agent.irm.intrinsic_reward(traj.steps[t].obs, traj.steps[t].action);
    }
  }
  return r;
}

double intrinsic_weight(const LirpgConfig& cfg) { return learns_intrinsic_reward(cfg.mode) ? cfg.lambda_mix : 0.0; }

RewardTrace policy_reward_trace(const Trajectory& traj, std::span<const double> r_in, const LirpgConfig& cfg) {
  if (r_in.size() != traj.size()) throw std::invalid_argument("policy_reward_trace: r_in length mismatch");
  RewardTrace trace;
  trace.gamma = cfg.gamma;
  trace.r_in.assign(r_in.begin(), r_in.end());
  switch (cfg.mode) {
    case AgentMode::extrinsic_only:
      trace.r_ex = traj.extrinsic_rewards();
      trace.lambda_mix = 0.0;
      break;
    case AgentMode::live_bonus:
      trace.r_ex = traj.extrinsic_rewards();
      trace.lambda_mix = 1.0;
      break;
    case AgentMode::lirpg_mixed:
      trace.r_ex = traj.extrinsic_rewards();
      trace.lambda_mix = cfg.lambda_mix;
      break;
    case AgentMode::lirpg_intrinsic_only:
      trace.r_ex.assign(traj.size(), 0.0);
      trace.lambda_mix = cfg.lambda_mix;
      break;
  }
  return trace;
}

std::vector<double> state_weights(std::size_t length, const LirpgConfig& cfg) {
  std::vector<double> w(length, 1.0);
  if (cfg.discount_state_weighting) {
    double d = 1.0;
    for (auto& x : w) {
      x = d;
      d *= cfg.gamma;
    }
  }
  return w;
}

namespace {

std::vector<double> head_values(const ValueHead& head, const Trajectory& traj) {
  std::vector<double> v(traj.size() + 1, 0.0);  // bootstrap 0: the horizon cap counts as termination
  for (std::size_t t = 0; t < traj.size(); ++t) v[t] = head.value(traj.steps[t].obs);
  return v;
}

bool needs_values(AdvantageKind k) { return k != AdvantageKind::monte_carlo; }

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteError(std::string("non-finite ") + what);
}

}  // namespace

PolicyGradient policy_gradient_mixed(const Trajectory& traj, const AgentState& agent, const LirpgConfig& cfg) {
  return policy_gradient_mixed(traj, agent, intrinsic_rewards(traj, agent, cfg), cfg);
}

PolicyGradient policy_gradient_mixed(const Trajectory& traj, const AgentState& agent, std::span<const double> r_in,
                                     const LirpgConfig& cfg) {
  if (traj.empty()) throw std::invalid_argument("policy_gradient_mixed: empty trajectory");
  const RewardTrace trace = policy_reward_trace(traj, r_in, cfg);
  const std::vector<double> rewards = mixed_rewards(trace);
  const std::vector<double> values =
      needs_values(cfg.policy_advantage) ? head_values(agent.policy_value, traj) : std::vector<double>{};
  AdvantageEstimate adv = compute_advantage(cfg.policy_advantage_settings(), rewards, values, cfg.gamma);
  const std::vector<double> w = state_weights(traj.size(), cfg);

  PolicyGradient out;
  out.g = agent.policy.params().zeros_like();
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const Step& s = traj.steps[t];
    agent.policy.accumulate_grad_log_pi(s.obs, s.action, w[t] * adv.values[t], out.g.values());
    if (cfg.entropy_coef > 0.0) agent.policy.accumulate_grad_entropy(s.obs, w[t] * cfg.entropy_coef, out.g.values());
  }
  require_finite(out.g.values(), "policy gradient");
  out.raw_norm = out.g.values().norm();
  out.clip_scale = clip_by_norm(out.g.values(), cfg.clip_norm);
  out.advantages = std::move(adv.values);
  return out;
}

ThetaUpdate update_theta(AgentState& agent, const ParamVector& g_theta, const LirpgConfig& cfg) {
  require_finite(g_theta.values(), "theta gradient");
  ThetaUpdate out;
  const Eigen::VectorXd delta = agent.opt_theta.step(g_theta.values(), cfg.alpha);
  out.theta_prime = ParamVector(agent.policy.params().layout(), agent.policy.params().values() + delta);
  out.preconditioner = agent.opt_theta.preconditioner();
  require_finite(out.theta_prime.values(), "theta'");
  return out;
}

namespace {

std::vector<double> extrinsic_targets(const Trajectory& traj, const ValueHead* ex_value, const LirpgConfig& cfg) {
  const std::vector<double> r_ex = traj.extrinsic_rewards();
  std::vector<double> values;
  if (needs_values(cfg.meta_advantage)) {
    if (!ex_value) throw std::invalid_argument("extrinsic gradient: baseline requested without V^ex");
    values = head_values(*ex_value, traj);
  }
  return compute_advantage(cfg.meta_advantage_settings(), r_ex, values, cfg.gamma).values;
}

}  // namespace

ParamVector extrinsic_gradient_onpolicy(const Trajectory& traj, const PolicyModel& policy, const ValueHead* ex_value,
                                        const LirpgConfig& cfg) {
  const std::vector<double> g_ex = extrinsic_targets(traj, ex_value, cfg);
  const std::vector<double> w = state_weights(traj.size(), cfg);
  ParamVector out = policy.params().zeros_like();
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (g_ex[t] != 0.0) policy.accumulate_grad_log_pi(traj.steps[t].obs, traj.steps[t].action, w[t] * g_ex[t], out.values());
  }
  require_finite(out.values(), "on-policy extrinsic gradient");
  return out;
}

ParamVector extrinsic_gradient_is(const Trajectory& traj, const PolicyModel& behavior, const PolicyModel& target,
                                  const ValueHead* ex_value, const LirpgConfig& cfg, IsDiagnostics* diag) {
  const std::vector<double> g_ex = extrinsic_targets(traj, ex_value, cfg);
  const std::vector<double> w = state_weights(traj.size(), cfg);

  ParamVector out = target.params().zeros_like();
  IsDiagnostics d;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const Step& s = traj.steps[t];
    double denom = behavior.prob(s.obs, s.action);
    if (denom < cfg.is_floor) {
      denom = cfg.is_floor;
      ++d.floor_events;
    }
    const double ratio = target.prob(s.obs, s.action) / denom;
    d.mean_ratio += ratio;
    d.max_ratio = std::max(d.max_ratio, ratio);
    if (g_ex[t] != 0.0) target.accumulate_grad_pi(s.obs, s.action, w[t] * g_ex[t] / denom, out.values());
  }
  if (!traj.empty()) d.mean_ratio /= static_cast<double>(traj.size());
  if (diag) *diag = d;
  require_finite(out.values(), "importance-sampled extrinsic gradient");
  return out;
}

MetaGradient meta_gradient(const Trajectory& traj, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                           const ParamVector& g_ex_prime, const Eigen::VectorXd& preconditioner,
                           const LirpgConfig& cfg) {
  if (g_ex_prime.size() != policy.params().size() || preconditioner.size() != policy.params().size()) {
    throw std::invalid_argument("meta_gradient: theta-shaped inputs have the wrong size");
  }
  MetaGradient out;
  out.g_eta = irm.params().zeros_like();
  out.step_products.assign(traj.size(), 0.0);
  const double weight = intrinsic_weight(cfg);
  if (weight == 0.0) return out;

  const Eigen::VectorXd direction = preconditioner.cwiseProduct(g_ex_prime.values());
  const std::vector<double> w = state_weights(traj.size(), cfg);
  Eigen::VectorXd score(policy.params().size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    score.setZero();
    policy.accumulate_grad_log_pi(traj.steps[t].obs, traj.steps[t].action, 1.0, score);
    out.step_products[t] = w[t] * direction.dot(score);
  }
  const std::vector<double> credit =
      forward_credit(out.step_products, credit_kernel(cfg.policy_advantage_settings(), cfg.gamma));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (credit[i] != 0.0) irm.accumulate_grad(traj.steps[i].obs, traj.steps[i].action, weight * credit[i], out.g_eta.values());
  }
  require_finite(out.g_eta.values(), "meta-gradient");
  out.raw_norm = out.g_eta.values().norm();
  return out;
}

MetaGradient meta_gradient(const Trajectory& traj, const AgentState& agent, const ParamVector& g_ex_prime,
                           const LirpgConfig& cfg) {
  return meta_gradient(traj, agent.policy, agent.irm, g_ex_prime,
                       Eigen::VectorXd::Constant(agent.policy.params().size(), cfg.alpha), cfg);
}

double update_eta(AgentState& agent, const MetaGradient& meta, const LirpgConfig& cfg) {
  Eigen::VectorXd g = meta.g_eta.values();
  require_finite(g, "eta gradient");
  const double norm = g.norm();
  clip_by_norm(g, cfg.clip_norm);
  agent.irm.params().values() += agent.opt_eta.step(g, cfg.beta);
  require_finite(agent.irm.params().values(), "eta");
  return norm;
}

void regress_value(ValueHead& head, Optimizer& opt, const Trajectory& traj, std::span<const double> targets,
                   double lr) {
  if (targets.size() != traj.size()) throw std::invalid_argument("regress_value: target length mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(head.params().size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const double err = targets[t] - head.value(traj.steps[t].obs);
    if (err != 0.0) head.accumulate_grad_value(traj.steps[t].obs, err, g);
  }
  require_finite(g, "value gradient");
  head.params().values() += opt.step(g, lr);
}

void train_value_heads(const Trajectory& traj, AgentState& agent, std::span<const double> r_in,
                       const LirpgConfig& cfg) {
  const RewardTrace trace = policy_reward_trace(traj, r_in, cfg);
  regress_value(agent.policy_value, agent.opt_policy_value, traj, returns_mixed(trace), cfg.alpha * cfg.value_coef);
  regress_value(agent.ex_value, agent.opt_ex_value, traj, discounted_returns(traj.extrinsic_rewards(), cfg.gamma),
                cfg.beta * cfg.xi);
}

IterationReport run_iteration(AgentState& agent, Environment& env, const LirpgConfig& cfg, Rng& rng) {
  IterationReport rep;
  const Trajectory traj = sample_trajectory(env, agent.policy, rng);
  const std::vector<double> r_in = intrinsic_rewards(traj, agent, cfg);

  const PolicyGradient pg = policy_gradient_mixed(traj, agent, r_in, cfg);
  ThetaUpdate step = update_theta(agent, pg.g, cfg);

  if (learns_intrinsic_reward(cfg.mode)) {
    const PolicyModel target = agent.policy.with_params(step.theta_prime.values());
    IsDiagnostics diag;
    const ParamVector g_prime = extrinsic_gradient_is(traj, agent.policy, target, &agent.ex_value, cfg, &diag);
    const MetaGradient meta =
        meta_gradient(traj, agent.policy, agent.irm, g_prime, step.preconditioner * pg.clip_scale, cfg);
    rep.eta_grad_norm = update_eta(agent, meta, cfg);
    rep.mean_is_ratio = diag.mean_ratio;
    rep.max_is_ratio = diag.max_ratio;
    rep.is_floor_events = diag.floor_events;
  }
  agent.policy.params().values() = step.theta_prime.values();
  train_value_heads(traj, agent, r_in, cfg);
  ++agent.iteration;

  rep.iteration = agent.iteration;
  rep.episode_length = static_cast<int>(traj.size());
  rep.episode_return = traj.total_extrinsic();
  rep.truncated = traj.truncated;
  double sum_in = 0.0;
  for (double r : r_in) sum_in += r;
  rep.mean_in_reward = traj.empty() ? 0.0 : sum_in / static_cast<double>(traj.size());
  rep.theta_grad_norm = pg.raw_norm;
  return rep;
}

}  // namespace lirpg
