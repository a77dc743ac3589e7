#pragma once

#include "lirpg/env.hpp"
#include "lirpg/lirpg.hpp"
#include "lirpg/models.hpp"
#include "lirpg/trajectory.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <vector>

namespace lirpg::oracle {

inline constexpr std::size_t kDefaultTrajectoryCap = 1'000'000;

struct WeightedTrajectory {
  double prob = 0.0;
  Trajectory traj;  // behavior_logp filled from the enumerating policy
};

/// Every trajectory the policy can produce in env's MdpSpec, with its exact
/// probability. Reward delays are ignored: rewards come from the raw table.
/// Throws std::length_error once more than `cap` trajectories are produced.
std::vector<WeightedTrajectory> enumerate_trajectories(const Environment& env, const PolicyModel& policy,
                                                       std::size_t cap = kDefaultTrajectoryCap);

struct EnumerationResult {
  double j_ex = 0.0;
  double j_in = 0.0;
  double j_mixed = 0.0;
  /// Exact gradients of the discounted objectives, from
  /// sum_tau p(tau) R(tau) sum_t grad log pi(a_t|s_t).
  ParamVector exact_grad_theta_mixed;
  ParamVector exact_grad_theta_ex;
  std::size_t trajectory_count = 0;
  double total_prob = 0.0;
};

EnumerationResult enumerate_values(const Environment& env, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                                   double lambda_mix, double gamma, std::size_t cap = kDefaultTrajectoryCap);

/// Finite-horizon policy evaluation by backward induction over
/// (steps remaining, state). probs and rewards are S x A tables.
double dp_policy_value(const MdpSpec& spec, const Eigen::MatrixXd& probs, const Eigen::MatrixXd& rewards,
                       double gamma);
/// Extrinsic value of `policy` by dynamic programming.
double dp_policy_value(const Environment& env, const PolicyModel& policy, double gamma);
/// Value of the uniform random policy.
double dp_uniform_value(const MdpSpec& spec, double gamma);
/// Optimal finite-horizon value (max over actions).
double dp_optimal_value(const MdpSpec& spec, double gamma);

struct FdReport {
  double epsilon = 0.0;
  double max_abs_error = 0.0;
  /// max_i |analytic_i - numeric_i| / max(|analytic|_inf, |numeric|_inf, scale_floor)
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  Eigen::VectorXd abs_errors;
  Eigen::VectorXd numeric;
  Eigen::VectorXd analytic;

  bool passes(double rel_tol) const { return max_rel_error <= rel_tol; }
};

inline constexpr double kFdScaleFloor = 1e-8;

/// Central differences of f at x, compared coordinate-wise with `analytic`.
FdReport fd_check_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& analytic, double epsilon = 1e-4);

/// eta -> J^ex_exact(theta + alpha * grad_theta J^{ex+in}_exact(theta, eta)).
double bilevel_objective(const Environment& env, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                         double alpha, double lambda_mix, double gamma, std::size_t cap = kDefaultTrajectoryCap);

/// Chain-rule gradient of bilevel_objective: exact grad_{theta'} J^ex at
/// theta' contracted with the exact expectation of the meta-gradient
/// estimator under pi_theta.
Eigen::VectorXd exact_meta_gradient(const Environment& env, const PolicyModel& policy,
                                    const IntrinsicRewardModel& irm, double alpha, double lambda_mix, double gamma,
                                    std::size_t cap = kDefaultTrajectoryCap);

FdReport fd_check_meta(const Environment& env, const PolicyModel& policy, const IntrinsicRewardModel& irm,
                       double alpha, double lambda_mix, double gamma, double epsilon = 1e-4,
                       std::size_t cap = kDefaultTrajectoryCap);

enum class EstimatorKind {
  policy_gradient,     // sum_t G^{ex+in}_t grad log pi_theta
  onpolicy_extrinsic,  // sum_t G^ex_t grad log pi_theta
  importance_sampled,  // sum_t G^ex_t grad pi_theta' / pi_theta
};

/// Exact expectation, under trajectories of `behavior`, of the named sample
/// estimator. `target` is theta' for importance_sampled and ignored otherwise.
/// Entropy and clipping are disabled; monte_carlo returns are used.
ParamVector estimator_expectation(const Environment& env, const PolicyModel& behavior, const PolicyModel& target,
                                  const IntrinsicRewardModel& irm, EstimatorKind kind, const LirpgConfig& cfg,
                                  std::size_t cap = kDefaultTrajectoryCap);

}  // namespace lirpg::oracle
