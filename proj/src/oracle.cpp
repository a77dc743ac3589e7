#include "lirpg/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lirpg::oracle {

namespace {

struct Enumerator {
  const Environment& env;
  const MdpSpec& spec;
  const PolicyModel& policy;
  std::size_t cap;
  std::vector<Eigen::VectorXd> dists;  // pi(.|s), cached per state
  std::vector<WeightedTrajectory> out;
  Trajectory current;

  void run() {
    dists.reserve(static_cast<std::size_t>(spec.num_states));
    for (int s = 0; s < spec.num_states; ++s) dists.push_back(policy.action_dist(env.observe(s)));
    for (int s = 0; s < spec.num_states; ++s) {
      const double mu = spec.initial_dist[static_cast<std::size_t>(s)];
      if (mu > 0.0) expand(s, mu);
    }
  }

  void expand(int s, double prob) {
    const auto& pi = dists[static_cast<std::size_t>(s)];
    for (int a = 0; a < spec.num_actions; ++a) {
      if (pi[a] <= 0.0) continue;
      for (int next = 0; next < spec.num_states; ++next) {
        const double p = spec.prob(s, a, next);
        if (p <= 0.0) continue;
        const bool terminal = spec.is_terminal(next);
        const bool done = terminal || static_cast<int>(current.size()) + 1 >= spec.horizon;
        current.steps.push_back(Step{env.observe(s), s, a, spec.r(s, a), done, std::log(pi[a])});
        const double branch = prob * pi[a] * p;
        if (done) {
          if (out.size() >= cap) throw std::length_error("enumerate_trajectories: trajectory cap exceeded");
          WeightedTrajectory w{branch, current};
          w.traj.truncated = !terminal;
          out.push_back(std::move(w));
        } else {
          expand(next, branch);
        }
        current.steps.pop_back();
      }
    }
  }
};

double discounted_sum(const std::vector<double>& r, double gamma) {
  double acc = 0.0;
  double d = 1.0;
  for (double x : r) {
    acc += d * x;
    d *= gamma;
  }
  return acc;
}

}  // namespace

std::vector<WeightedTrajectory> enumerate_trajectories(const Environment& env, const PolicyModel& policy,
                                                       std::size_t cap) {
  Enumerator e{env, env.spec(), policy, cap, {}, {}, {}};
  e.run();
  return std::move(e.out);
}

EnumerationResult enumerate_values(const Environment& env, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                                   double lambda_mix, double gamma, std::size_t cap) {
  const auto trajs = enumerate_trajectories(env, policy, cap);
  EnumerationResult res;
  res.exact_grad_theta_mixed = policy.params().zeros_like();
  res.exact_grad_theta_ex = policy.params().zeros_like();
  res.trajectory_count = trajs.size();
  Eigen::VectorXd score(policy.params().size());
  for (const auto& w : trajs) {
    std::vector<double> r_ex;
    std::vector<double> r_in;
    score.setZero();
    for (const auto& s : w.traj.steps) {
      r_ex.push_back(s.reward_ex);
      r_in.push_back(irm.intrinsic_reward(s.obs, s.action));
      policy.accumulate_grad_log_pi(s.obs, s.action, 1.0, score);
    }
    const double ret_ex = discounted_sum(r_ex, gamma);
    const double ret_in = discounted_sum(r_in, gamma);
    const double ret_mixed = ret_ex + lambda_mix * ret_in;
    res.total_prob += w.prob;
    res.j_ex += w.prob * ret_ex;
    res.j_in += w.prob * ret_in;
    res.j_mixed += w.prob * ret_mixed;
    res.exact_grad_theta_ex.values() += (w.prob * ret_ex) * score;
    res.exact_grad_theta_mixed.values() += (w.prob * ret_mixed) * score;
  }
  return res;
}

// ---------------------------------------------------------------------------

double dp_policy_value(const MdpSpec& spec, const Eigen::MatrixXd& probs, const Eigen::MatrixXd& rewards,
                       double gamma) {
  const int S = spec.num_states;
  const int A = spec.num_actions;
  if (probs.rows() != S || probs.cols() != A || rewards.rows() != S || rewards.cols() != A) {
    throw std::invalid_argument("dp_policy_value: tables must be S x A");
  }
  // value[s] with k steps remaining; terminal successors contribute 0.
  Eigen::VectorXd value = Eigen::VectorXd::Zero(S);
  for (int k = 1; k <= spec.horizon; ++k) {
    Eigen::VectorXd next_value(S);
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        double cont = 0.0;
        for (int n = 0; n < S; ++n) {
          if (!spec.is_terminal(n)) cont += spec.prob(s, a, n) * value[n];
        }
        v += probs(s, a) * (rewards(s, a) + gamma * cont);
      }
      next_value[s] = v;
    }
    value = std::move(next_value);
  }
  double j = 0.0;
  for (int s = 0; s < S; ++s) j += spec.initial_dist[static_cast<std::size_t>(s)] * value[s];
  return j;
}

namespace {

Eigen::MatrixXd reward_table(const MdpSpec& spec) {
  Eigen::MatrixXd r(spec.num_states, spec.num_actions);
  for (int s = 0; s < spec.num_states; ++s) {
    for (int a = 0; a < spec.num_actions; ++a) r(s, a) = spec.r(s, a);
  }
  return r;
}

}  // namespace

double dp_policy_value(const Environment& env, const PolicyModel& policy, double gamma) {
  const MdpSpec& spec = env.spec();
  Eigen::MatrixXd probs(spec.num_states, spec.num_actions);
  for (int s = 0; s < spec.num_states; ++s) probs.row(s) = policy.action_dist(env.observe(s)).transpose();
  return dp_policy_value(spec, probs, reward_table(spec), gamma);
}

double dp_uniform_value(const MdpSpec& spec, double gamma) {
  const Eigen::MatrixXd probs = Eigen::MatrixXd::Constant(spec.num_states, spec.num_actions, 1.0 / spec.num_actions);
  return dp_policy_value(spec, probs, reward_table(spec), gamma);
}

double dp_optimal_value(const MdpSpec& spec, double gamma) {
  const int S = spec.num_states;
  Eigen::VectorXd value = Eigen::VectorXd::Zero(S);
  for (int k = 1; k <= spec.horizon; ++k) {
    Eigen::VectorXd next_value(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < spec.num_actions; ++a) {
        double cont = 0.0;
        for (int n = 0; n < S; ++n) {
          if (!spec.is_terminal(n)) cont += spec.prob(s, a, n) * value[n];
        }
        best = std::max(best, spec.r(s, a) + gamma * cont);
      }
      next_value[s] = best;
    }
    value = std::move(next_value);
  }
  double j = 0.0;
  for (int s = 0; s < S; ++s) j += spec.initial_dist[static_cast<std::size_t>(s)] * value[s];
  return j;
}

// ---------------------------------------------------------------------------

FdReport fd_check_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& analytic, double epsilon) {
  if (analytic.size() != x.size()) throw std::invalid_argument("fd_check_gradient: gradient size mismatch");
  FdReport rep;
  rep.epsilon = epsilon;
  rep.analytic = analytic;
  rep.numeric.resize(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + epsilon;
    const double up = f(probe);
    probe[i] = x[i] - epsilon;
    const double down = f(probe);
    probe[i] = x[i];
    rep.numeric[i] = (up - down) / (2.0 * epsilon);
  }
  rep.abs_errors = (analytic - rep.numeric).cwiseAbs();
  if (x.size() == 0) return rep;
  const double scale = std::max({analytic.cwiseAbs().maxCoeff(), rep.numeric.cwiseAbs().maxCoeff(), kFdScaleFloor});
  rep.max_abs_error = rep.abs_errors.maxCoeff(&rep.worst_index);
  rep.max_rel_error = rep.max_abs_error / scale;
  if (!std::isfinite(rep.max_rel_error)) rep.max_rel_error = std::numeric_limits<double>::infinity();
  return rep;
}

double bilevel_objective(const Environment& env, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                         double alpha, double lambda_mix, double gamma, std::size_t cap) {
  const EnumerationResult inner = enumerate_values(env, policy, irm, lambda_mix, gamma, cap);
  const PolicyModel stepped =
      policy.with_params(policy.params().values() + alpha * inner.exact_grad_theta_mixed.values());
  return dp_policy_value(env, stepped, gamma);
}

Eigen::VectorXd exact_meta_gradient(const Environment& env, const PolicyModel& policy,
                                    const IntrinsicRewardModel& irm, double alpha, double lambda_mix, double gamma,
                                    std::size_t cap) {
  const EnumerationResult inner = enumerate_values(env, policy, irm, lambda_mix, gamma, cap);
  const PolicyModel stepped =
      policy.with_params(policy.params().values() + alpha * inner.exact_grad_theta_mixed.values());
  const EnumerationResult outer = enumerate_values(env, stepped, irm, lambda_mix, gamma, cap);

  LirpgConfig cfg;
  cfg.mode = AgentMode::lirpg_mixed;
  cfg.lambda_mix = lambda_mix;
  cfg.gamma = gamma;
  cfg.alpha = alpha;
  cfg.policy_advantage = AdvantageKind::monte_carlo;
  cfg.discount_state_weighting = true;
  const Eigen::VectorXd precond = Eigen::VectorXd::Constant(policy.params().size(), alpha);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(irm.params().size());
  for (const auto& w : enumerate_trajectories(env, policy, cap)) {
    g += w.prob * meta_gradient(w.traj, policy, irm, outer.exact_grad_theta_ex, precond, cfg).g_eta.values();
  }
  return g;
}

FdReport fd_check_meta(const Environment& env, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                       double alpha, double lambda_mix, double gamma, double epsilon, std::size_t cap) {
  const Eigen::VectorXd analytic = exact_meta_gradient(env, policy, irm, alpha, lambda_mix, gamma, cap);
  auto f = [&](const Eigen::VectorXd& eta) {
    return bilevel_objective(env, policy, irm.with_params(eta), alpha, lambda_mix, gamma, cap);
  };
  return fd_check_gradient(f, irm.params().values(), analytic, epsilon);
}

ParamVector estimator_expectation(const Environment& env, const PolicyModel& behavior, const PolicyModel& target,
                                  const IntrinsicRewardModel& irm, EstimatorKind kind, const LirpgConfig& cfg,
                                  std::size_t cap) {
  LirpgConfig c = cfg;
  c.entropy_coef = 0.0;
  c.clip_norm = std::numeric_limits<double>::infinity();
  c.policy_advantage = AdvantageKind::monte_carlo;
  c.meta_advantage = AdvantageKind::monte_carlo;

  AgentState agent;
  agent.policy = behavior;
  agent.irm = irm;

  ParamVector out = (kind == EstimatorKind::importance_sampled ? target : behavior).params().zeros_like();
  for (const auto& w : enumerate_trajectories(env, behavior, cap)) {
    switch (kind) {
      case EstimatorKind::policy_gradient:
        out.values() += w.prob * policy_gradient_mixed(w.traj, agent, c).g.values();
        break;
      case EstimatorKind::onpolicy_extrinsic:
        out.values() += w.prob * extrinsic_gradient_onpolicy(w.traj, behavior, nullptr, c).values();
        break;
      case EstimatorKind::importance_sampled:
        out.values() += w.prob * extrinsic_gradient_is(w.traj, behavior, target, nullptr, c).values();
        break;
    }
  }
  return out;
}

}  // namespace lirpg::oracle
