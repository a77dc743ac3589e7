#pragma once

#include "lirpg/env.hpp"
#include "lirpg/network.hpp"
#include "lirpg/param_vector.hpp"

#include <Eigen/Core>

namespace lirpg {

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& scores);

/// Fills v with draws from U[-scale, scale].
void fill_uniform(Eigen::VectorXd& v, double scale, Rng& rng);

/// Softmax policy pi_theta(a|s) over the scores of a Network.
class PolicyModel {
 public:
  PolicyModel() = default;
  PolicyModel(Arch arch, int obs_dim, int num_actions);

  const Network& net() const { return net_; }
  ParamVector& params() { return theta_; }
  const ParamVector& params() const { return theta_; }
  int num_actions() const { return net_.output_dim(); }

  /// Copy evaluated at a different parameter point.
  PolicyModel with_params(const Eigen::VectorXd& theta) const;

  Eigen::VectorXd scores(const Observation& obs) const;
  Eigen::VectorXd action_dist(const Observation& obs) const;
  double log_prob(const Observation& obs, int action) const;
  double prob(const Observation& obs, int action) const;
  double entropy(const Observation& obs) const;

  /// d log pi(a|s) / d theta.
  ParamVector grad_log_pi(const Observation& obs, int action) const;
  /// d pi(a|s) / d theta = pi(a|s) * grad_log_pi.
  ParamVector grad_pi(const Observation& obs, int action) const;
  /// d H(pi(.|s)) / d theta.
  ParamVector grad_entropy(const Observation& obs) const;

  // In-place accumulators: grad += scale * (...).
  void accumulate_grad_log_pi(const Observation& obs, int action, double scale, Eigen::VectorXd& grad) const;
  void accumulate_grad_pi(const Observation& obs, int action, double scale, Eigen::VectorXd& grad) const;
  void accumulate_grad_entropy(const Observation& obs, double scale, Eigen::VectorXd& grad) const;

 private:
  Network net_;
  ParamVector theta_;
};

/// Scalar state-value head.
class ValueHead {
 public:
  ValueHead() = default;
  ValueHead(Arch arch, int obs_dim);

  const Network& net() const { return net_; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  double value(const Observation& obs) const;
  ParamVector grad_value(const Observation& obs) const;
  void accumulate_grad_value(const Observation& obs, double scale, Eigen::VectorXd& grad) const;

 private:
  Network net_;
  ParamVector params_;
};

/// r^in_eta(s, a) = tanh(raw_eta(s, a)), bounded to [-1, 1].
///
/// The tabular architecture keeps one raw score per (state, action). Linear
/// and mlp architectures read the concatenation [obs features, one-hot action]
/// and emit a single raw score.
class IntrinsicRewardModel {
 public:
  IntrinsicRewardModel() = default;
  IntrinsicRewardModel(Arch arch, int obs_dim, int num_actions);

  const Network& net() const { return net_; }
  ParamVector& params() { return eta_; }
  const ParamVector& params() const { return eta_; }
  int num_actions() const { return num_actions_; }

  IntrinsicRewardModel with_params(const Eigen::VectorXd& eta) const;

  double raw(const Observation& obs, int action) const;
  double intrinsic_reward(const Observation& obs, int action) const;
  ParamVector grad_intrinsic_reward(const Observation& obs, int action) const;
  void accumulate_grad(const Observation& obs, int action, double scale, Eigen::VectorXd& grad) const;

 private:
  Eigen::VectorXd input(const Observation& obs, int action) const;
  bool per_action_output() const { return net_.arch().kind == ArchKind::tabular; }

  Network net_;
  ParamVector eta_;
  int num_actions_ = 0;
};

}  // namespace lirpg
