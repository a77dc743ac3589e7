#include "lirpg/models.hpp"

#include <cmath>
#include <stdexcept>

namespace lirpg {

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  const double m = scores.maxCoeff();
  Eigen::VectorXd e = (scores.array() - m).exp();
  return e / e.sum();
}

void fill_uniform(Eigen::VectorXd& v, double scale, Rng& rng) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = unif(rng);
}

namespace {

void check_action(int action, int num_actions) {
  if (action < 0 || action >= num_actions) throw std::out_of_range("action index out of range");
}

}  // namespace

// ---------------------------------------------------------------------------

PolicyModel::PolicyModel(Arch arch, int obs_dim, int num_actions)
    : net_(std::move(arch), obs_dim, num_actions), theta_(net_.layout()) {}

PolicyModel PolicyModel::with_params(const Eigen::VectorXd& theta) const {
  PolicyModel out = *this;
  out.theta_ = ParamVector(theta_.layout(), theta);
  return out;
}

Eigen::VectorXd PolicyModel::scores(const Observation& obs) const {
  return net_.forward(theta_.values(), obs.features);
}

Eigen::VectorXd PolicyModel::action_dist(const Observation& obs) const { return softmax(scores(obs)); }

double PolicyModel::log_prob(const Observation& obs, int action) const {
  check_action(action, num_actions());
  const Eigen::VectorXd z = scores(obs);
  const double m = z.maxCoeff();
  return z[action] - m - std::log((z.array() - m).exp().sum());
}

double PolicyModel::prob(const Observation& obs, int action) const {
  check_action(action, num_actions());
  return action_dist(obs)[action];
}

double PolicyModel::entropy(const Observation& obs) const {
  const Eigen::VectorXd p = action_dist(obs);
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

void PolicyModel::accumulate_grad_log_pi(const Observation& obs, int action, double scale,
                                         Eigen::VectorXd& grad) const {
  check_action(action, num_actions());
  Eigen::VectorXd upstream = -action_dist(obs);
  upstream[action] += 1.0;
  net_.backward(theta_.values(), obs.features, upstream, grad, scale);
}

void PolicyModel::accumulate_grad_pi(const Observation& obs, int action, double scale, Eigen::VectorXd& grad) const {
  check_action(action, num_actions());
  const Eigen::VectorXd p = action_dist(obs);
  Eigen::VectorXd upstream = -p;
  upstream[action] += 1.0;
  net_.backward(theta_.values(), obs.features, upstream, grad, scale * p[action]);
}

void PolicyModel::accumulate_grad_entropy(const Observation& obs, double scale, Eigen::VectorXd& grad) const {
  // dH/dz_j = -p_j (log p_j + H)
  const Eigen::VectorXd z = scores(obs);
  const double m = z.maxCoeff();
  const Eigen::VectorXd logp = (z.array() - m) - std::log((z.array() - m).exp().sum());
  const Eigen::VectorXd p = logp.array().exp();
  const double h = -(p.array() * logp.array()).sum();
  const Eigen::VectorXd upstream = -(p.array() * (logp.array() + h));
  net_.backward(theta_.values(), obs.features, upstream, grad, scale);
}

ParamVector PolicyModel::grad_log_pi(const Observation& obs, int action) const {
  ParamVector g = theta_.zeros_like();
  accumulate_grad_log_pi(obs, action, 1.0, g.values());
  return g;
}

ParamVector PolicyModel::grad_pi(const Observation& obs, int action) const {
  ParamVector g = theta_.zeros_like();
  accumulate_grad_pi(obs, action, 1.0, g.values());
  return g;
}

ParamVector PolicyModel::grad_entropy(const Observation& obs) const {
  ParamVector g = theta_.zeros_like();
  accumulate_grad_entropy(obs, 1.0, g.values());
  return g;
}

// ---------------------------------------------------------------------------

ValueHead::ValueHead(Arch arch, int obs_dim) : net_(std::move(arch), obs_dim, 1), params_(net_.layout()) {}

double ValueHead::value(const Observation& obs) const { return net_.forward(params_.values(), obs.features)[0]; }

void ValueHead::accumulate_grad_value(const Observation& obs, double scale, Eigen::VectorXd& grad) const {
  net_.backward(params_.values(), obs.features, Eigen::VectorXd::Ones(1), grad, scale);
}

ParamVector ValueHead::grad_value(const Observation& obs) const {
  ParamVector g = params_.zeros_like();
  accumulate_grad_value(obs, 1.0, g.values());
  return g;
}

// ---------------------------------------------------------------------------

IntrinsicRewardModel::IntrinsicRewardModel(Arch arch, int obs_dim, int num_actions) : num_actions_(num_actions) {
  if (arch.kind == ArchKind::tabular) {
    net_ = Network(std::move(arch), obs_dim, num_actions);
  } else {
    net_ = Network(std::move(arch), obs_dim + num_actions, 1);
  }
  eta_ = ParamVector(net_.layout());
}

IntrinsicRewardModel IntrinsicRewardModel::with_params(const Eigen::VectorXd& eta) const {
  IntrinsicRewardModel out = *this;
  out.eta_ = ParamVector(eta_.layout(), eta);
  return out;
}

Eigen::VectorXd IntrinsicRewardModel::input(const Observation& obs, int action) const {
  check_action(action, num_actions_);
  if (per_action_output()) return obs.features;
  Eigen::VectorXd x(obs.features.size() + num_actions_);
  x << obs.features, Eigen::VectorXd::Unit(num_actions_, action);
  return x;
}

double IntrinsicRewardModel::raw(const Observation& obs, int action) const {
  const Eigen::VectorXd out = net_.forward(eta_.values(), input(obs, action));
  return per_action_output() ? out[action] : out[0];
}

double IntrinsicRewardModel::intrinsic_reward(const Observation& obs, int action) const {
  return std::tanh(raw(obs, action));
}

void IntrinsicRewardModel::accumulate_grad(const Observation& obs, int action, double scale,
                                           Eigen::VectorXd& grad) const {
  const double t = intrinsic_reward(obs, action);
  const double dsquash = 1.0 - t * t;
  Eigen::VectorXd upstream;
  if (per_action_output()) {
    upstream = Eigen::VectorXd::Zero(num_actions_);
    upstream[action] = dsquash;
  } else {
    upstream = Eigen::VectorXd::Constant(1, dsquash);
  }
  net_.backward(eta_.values(), input(obs, action), upstream, grad, scale);
}

ParamVector IntrinsicRewardModel::grad_intrinsic_reward(const Observation& obs, int action) const {
  ParamVector g = eta_.zeros_like();
  accumulate_grad(obs, action, 1.0, g.values());
  return g;
}

}  // namespace lirpg
