#include "lirpg/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace lirpg {

const char* to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd:
      return "sgd";
    case OptimizerKind::rmsprop:
      return "rmsprop";
    case OptimizerKind::adam:
      return "adam";
  }
  return "?";
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "rmsprop") return OptimizerKind::rmsprop;
  if (s == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

Optimizer::Optimizer(OptimizerSettings settings, Eigen::Index size)
    : settings_(settings),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)),
      precond_(Eigen::VectorXd::Zero(size)) {}

Eigen::VectorXd Optimizer::step(const Eigen::VectorXd& g, double lr) {
  if (g.size() != m_.size()) throw std::invalid_argument("Optimizer::step: gradient size mismatch");
  ++steps_;
  const double eps = settings_.epsilon;
  switch (settings_.kind) {
    case OptimizerKind::sgd:
      precond_.setConstant(lr);
      break;
    case OptimizerKind::rmsprop: {
      const double rho = settings_.rms_decay;
      v_ = rho * v_.array() + (1.0 - rho) * g.array().square();
      precond_ = lr / (v_.array().sqrt() + eps);
      break;
    }
    case OptimizerKind::adam: {
      const double b1 = settings_.beta1;
      const double b2 = settings_.beta2;
      m_ = b1 * m_.array() + (1.0 - b1) * g.array();
      v_ = b2 * v_.array() + (1.0 - b2) * g.array().square();
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
      const Eigen::ArrayXd denom = (v_.array() / c2).sqrt() + eps;
      precond_ = lr * (1.0 - b1) / c1 / denom;
      return lr * (m_.array() / c1) / denom;
    }
  }
  return precond_.array() * g.array();
}

void Optimizer::restore(Eigen::VectorXd m, Eigen::VectorXd v, long steps) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw std::invalid_argument("Optimizer::restore: size mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  steps_ = steps;
}

}  // namespace lirpg
