#pragma once

#include <Eigen/Core>

#include <string>

namespace lirpg {

enum class OptimizerKind { sgd, rmsprop, adam };

const char* to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& s);

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::sgd;
  double rms_decay = 0.99;
  double epsilon = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
};

/// Gradient-ascent optimizer over one flat parameter vector.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerSettings settings, Eigen::Index size);

  /// Consumes gradient g and returns the ascent step to add to the
  /// parameters. Also records the diagonal of d(step)/d(g) with the moment
  /// accumulators held fixed; see preconditioner().
  Eigen::VectorXd step(const Eigen::VectorXd& g, double lr);

  /// Diagonal Jacobian of the most recent step with respect to its gradient,
  /// treating accumulators as constants. For sgd this is lr everywhere.
  const Eigen::VectorXd& preconditioner() const { return precond_; }

  const OptimizerSettings& settings() const { return settings_; }
  long steps() const { return steps_; }

  // Accumulator access for checkpointing.
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  void restore(Eigen::VectorXd m, Eigen::VectorXd v, long steps);

 private:
  OptimizerSettings settings_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  Eigen::VectorXd precond_;
  long steps_ = 0;
};

}  // namespace lirpg
