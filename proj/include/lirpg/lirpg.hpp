#pragma once

#include "lirpg/env.hpp"
#include "lirpg/models.hpp"
#include "lirpg/optimizer.hpp"
#include "lirpg/returns.hpp"
#include "lirpg/trajectory.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace lirpg {

enum class AgentMode { extrinsic_only, live_bonus, lirpg_mixed, lirpg_intrinsic_only };

const char* to_string(AgentMode m);
AgentMode parse_mode(const std::string& s);

/// True for the two modes that learn eta.
inline bool learns_intrinsic_reward(AgentMode m) {
  return m == AgentMode::lirpg_mixed || m == AgentMode::lirpg_intrinsic_only;
}

struct LirpgConfig {
  double alpha = 0.1;          // policy step size
  double beta = 0.01;          // intrinsic-reward step size
  double lambda_mix = 0.01;    // weight of r^in in the policy's reward
  double gamma = 0.99;
  double xi = 1.0;             // V^ex loss weight, relative to beta
  double value_coef = 0.5;     // V^ex+in loss weight, relative to alpha
  double entropy_coef = 0.01;
  double clip_norm = 0.5;
  OptimizerKind optimizer = OptimizerKind::sgd;          // theta and V^ex+in
  OptimizerKind eta_optimizer = OptimizerKind::rmsprop;  // eta and V^ex
  AgentMode mode = AgentMode::lirpg_mixed;
  double live_bonus = 0.01;
  AdvantageKind policy_advantage = AdvantageKind::monte_carlo;
  AdvantageKind meta_advantage = AdvantageKind::monte_carlo;
  double gae_lambda = 0.95;
  int nstep = 5;
  double is_floor = 1e-8;
  /// Weight step t of every estimator by gamma^t, giving the exact gradient
  /// of the discounted objective. Off by default (undiscounted state weighting).
  bool discount_state_weighting = false;
  Arch policy_arch{ArchKind::tabular, {}};
  Arch value_arch{ArchKind::tabular, {}};
  Arch irm_arch{ArchKind::tabular, {}};
  double init_scale = 0.05;

  void validate() const;

  AdvantageSettings policy_advantage_settings() const { return {policy_advantage, gae_lambda, nstep}; }
  AdvantageSettings meta_advantage_settings() const { return {meta_advantage, gae_lambda, nstep}; }
};

/// Raised when a gradient or parameter vector becomes non-finite.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one LIRPG learner owns.
struct AgentState {
  PolicyModel policy;
  ValueHead policy_value;  // V^{ex+in}
  IntrinsicRewardModel irm;
  ValueHead ex_value;  // V^{ex}
  Optimizer opt_theta;
  Optimizer opt_eta;
  Optimizer opt_policy_value;
  Optimizer opt_ex_value;
  long iteration = 0;

  /// Policy and value parameters ~ U[-init_scale, init_scale]; eta = 0.
  static AgentState create(int obs_dim, int num_actions, const LirpgConfig& cfg, Rng& rng);
};

/// Rolls out one episode under `policy`.
Trajectory sample_trajectory(Environment& env, const PolicyModel& policy, Rng& rng);

/// r^in along the trajectory as seen by the current mode: the learned reward
/// for the lirpg modes, the constant bonus for live_bonus, zeros otherwise.
std::vector<double> intrinsic_rewards(const Trajectory& traj, const AgentState& agent, const LirpgConfig& cfg);

/// d(policy reward)/d(r^in): lambda for the lirpg modes, 0 otherwise.
double intrinsic_weight(const LirpgConfig& cfg);

/// The reward stream the policy is trained on.
RewardTrace policy_reward_trace(const Trajectory& traj, std::span<const double> r_in, const LirpgConfig& cfg);

/// Per-step estimator weights: gamma^t or 1.
std::vector<double> state_weights(std::size_t length, const LirpgConfig& cfg);

struct PolicyGradient {
  ParamVector g;
  double raw_norm = 0.0;
  double clip_scale = 1.0;
  std::vector<double> advantages;
};

/// sum_t w_t A_t grad log pi(a_t|s_t) + entropy_coef * sum_t w_t grad H(pi(.|s_t)),
/// clipped to clip_norm.
PolicyGradient policy_gradient_mixed(const Trajectory& traj, const AgentState& agent, const LirpgConfig& cfg);
PolicyGradient policy_gradient_mixed(const Trajectory& traj, const AgentState& agent, std::span<const double> r_in,
                                     const LirpgConfig& cfg);

struct ThetaUpdate {
  ParamVector theta_prime;
  Eigen::VectorXd preconditioner;  // d(theta' - theta)/d(g), diagonal
};

/// Ascent step on theta through the agent's optimizer. The agent's policy
/// parameters are left untouched; the caller installs theta_prime.
ThetaUpdate update_theta(AgentState& agent, const ParamVector& g_theta, const LirpgConfig& cfg);

struct IsDiagnostics {
  double mean_ratio = 0.0;
  double max_ratio = 0.0;
  int floor_events = 0;
};

/// sum_t w_t G^ex_t grad_{theta'} pi_{theta'}(a_t|s_t) / max(pi_theta(a_t|s_t), is_floor),
/// for a trajectory sampled under `behavior`. When cfg.meta_advantage uses a
/// baseline, `ex_value` supplies V^ex (may be null otherwise).
ParamVector extrinsic_gradient_is(const Trajectory& traj, const PolicyModel& behavior, const PolicyModel& target,
                                  const ValueHead* ex_value, const LirpgConfig& cfg, IsDiagnostics* diag = nullptr);

/// On-policy form: sum_t w_t G^ex_t grad log pi(a_t|s_t).
ParamVector extrinsic_gradient_onpolicy(const Trajectory& traj, const PolicyModel& policy, const ValueHead* ex_value,
                                        const LirpgConfig& cfg);

struct MetaGradient {
  ParamVector g_eta;
  std::vector<double> step_products;  // c_t
  double raw_norm = 0.0;
};

/// Chain-rule gradient of J^ex with respect to eta through one policy step:
///
///   c_t   = w_t * (P g') . grad log pi_theta(a_t|s_t)
///   g_eta = lambda * sum_t c_t * sum_{i >= t} k(i - t) grad r^in(s_i, a_i)
///
/// where P is the diagonal step preconditioner (alpha for sgd) and k the
/// credit kernel of the policy advantage. The |theta| x |eta| Jacobian is
/// never formed.
MetaGradient meta_gradient(const Trajectory& traj, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                           const ParamVector& g_ex_prime, const Eigen::VectorXd& preconditioner,
                           const LirpgConfig& cfg);

/// Same, with the plain sgd preconditioner alpha.
MetaGradient meta_gradient(const Trajectory& traj, const AgentState& agent, const ParamVector& g_ex_prime,
                           const LirpgConfig& cfg);

/// Clips g_eta to clip_norm and takes an ascent step of size beta. Returns the
/// pre-clip norm.
double update_eta(AgentState& agent, const MetaGradient& meta, const LirpgConfig& cfg);

/// One gradient step on sum_t 1/2 (V(s_t) - target_t)^2.
void regress_value(ValueHead& head, Optimizer& opt, const Trajectory& traj, std::span<const double> targets,
                   double lr);

/// Regresses V^{ex+in} toward the policy-reward returns (step alpha * value_coef)
/// and V^ex toward extrinsic returns (step beta * xi).
void train_value_heads(const Trajectory& traj, AgentState& agent, std::span<const double> r_in,
                       const LirpgConfig& cfg);

struct IterationReport {
  long iteration = 0;
  int episode_length = 0;
  double episode_return = 0.0;  // undiscounted sum of emitted extrinsic reward
  bool truncated = false;
  double mean_in_reward = 0.0;
  double mean_is_ratio = 1.0;
  double max_is_ratio = 1.0;
  int is_floor_events = 0;
  double theta_grad_norm = 0.0;
  double eta_grad_norm = 0.0;
};

/// One full cycle: sample, policy step, importance-sampled extrinsic gradient
/// on the same trajectory, meta step on eta, value heads last.
IterationReport run_iteration(AgentState& agent, Environment& env, const LirpgConfig& cfg, Rng& rng);

}  // namespace lirpg
