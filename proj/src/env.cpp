#include "lirpg/env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lirpg {

int sample_categorical(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  int last_nonzero = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_nonzero = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  if (last_nonzero < 0) throw std::invalid_argument("sample_categorical: no probability mass");
  return last_nonzero;
}

MdpSpec MdpSpec::zeros(int num_states, int num_actions, int horizon) {
  MdpSpec m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.horizon = horizon;
  m.transition.assign(static_cast<std::size_t>(num_states) * num_actions * num_states, 0.0);
  m.reward.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
  m.initial_dist.assign(static_cast<std::size_t>(num_states), 0.0);
  m.terminal.assign(static_cast<std::size_t>(num_states), false);
  return m;
}

void MdpSpec::validate() const {
  if (num_states < 1 || num_actions < 1) throw std::invalid_argument("MdpSpec: empty state or action space");
  if (horizon < 1) throw std::invalid_argument("MdpSpec: horizon must be >= 1");
  const auto S = static_cast<std::size_t>(num_states);
  const auto A = static_cast<std::size_t>(num_actions);
  if (transition.size() != S * A * S || reward.size() != S * A || initial_dist.size() != S ||
      terminal.size() != S) {
    throw std::invalid_argument("MdpSpec: table sizes do not match num_states/num_actions");
  }
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      double row = 0.0;
      for (int n = 0; n < num_states; ++n) {
        const double p = prob(s, a, n);
        if (!(p >= 0.0)) throw std::invalid_argument("MdpSpec: negative transition probability");
        row += p;
      }
      if (std::abs(row - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "MdpSpec: transition row (" << s << "," << a << ") sums to " << row;
        throw std::invalid_argument(msg.str());
      }
      if (!std::isfinite(r(s, a))) throw std::invalid_argument("MdpSpec: non-finite reward");
    }
  }
  double mu = 0.0;
  for (double p : initial_dist) {
    if (!(p >= 0.0)) throw std::invalid_argument("MdpSpec: negative initial probability");
    mu += p;
  }
  if (std::abs(mu - 1.0) > 1e-12) throw std::invalid_argument("MdpSpec: initial_dist does not sum to 1");
}

// ---------------------------------------------------------------------------

MdpEnvironment::MdpEnvironment(MdpSpec spec, std::vector<Eigen::VectorXd> features, std::string name)
    : spec_(std::move(spec)), features_(std::move(features)), name_(std::move(name)) {
  spec_.validate();
  if (features_.size() != static_cast<std::size_t>(spec_.num_states)) {
    throw std::invalid_argument("MdpEnvironment: need one feature vector per state");
  }
  for (const auto& f : features_) {
    if (f.size() != features_.front().size()) {
      throw std::invalid_argument("MdpEnvironment: feature vectors differ in dimension");
    }
  }
}

std::vector<Eigen::VectorXd> MdpEnvironment::one_hot_features(int num_states) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(num_states));
  for (int s = 0; s < num_states; ++s) out.push_back(Eigen::VectorXd::Unit(num_states, s));
  return out;
}

Observation MdpEnvironment::reset(Rng& rng) {
  state_ = sample_categorical(spec_.initial_dist, rng);
  t_ = 0;
  done_ = false;
  return observe(state_);
}

StepResult MdpEnvironment::step(int action, Rng& rng) {
  if (done_) throw std::logic_error("MdpEnvironment::step: episode already finished; call reset()");
  if (action < 0 || action >= spec_.num_actions) throw std::out_of_range("MdpEnvironment::step: bad action");

  const auto row_begin =
      spec_.transition.begin() +
      static_cast<std::ptrdiff_t>((static_cast<std::size_t>(state_) * spec_.num_actions + action) * spec_.num_states);
  const std::span<const double> row(&*row_begin, static_cast<std::size_t>(spec_.num_states));

  StepResult out;
  out.reward_ex = spec_.r(state_, action);
  state_ = sample_categorical(row, rng);
  ++t_;
  const bool terminal = spec_.is_terminal(state_);
  out.done = terminal || t_ >= spec_.horizon;
  out.truncated = !terminal && out.done;
  out.state = state_;
  out.obs = observe(state_);
  done_ = out.done;
  return out;
}

Observation MdpEnvironment::observe(int state) const {
  return Observation{features_.at(static_cast<std::size_t>(state))};
}

int MdpEnvironment::obs_dim() const { return static_cast<int>(features_.front().size()); }

std::unique_ptr<Environment> MdpEnvironment::clone() const {
  return std::make_unique<MdpEnvironment>(*this);
}

// ---------------------------------------------------------------------------

DelayedRewardEnv::DelayedRewardEnv(std::unique_ptr<Environment> inner, int delay)
    : inner_(std::move(inner)), delay_(delay) {
  if (!inner_) throw std::invalid_argument("DelayedRewardEnv: null inner environment");
  if (delay_ < 1) throw std::invalid_argument("DelayedRewardEnv: delay must be >= 1");
}

Observation DelayedRewardEnv::reset(Rng& rng) {
  pending_ = 0.0;
  since_emit_ = 0;
  return inner_->reset(rng);
}

StepResult DelayedRewardEnv::step(int action, Rng& rng) {
  StepResult out = inner_->step(action, rng);
  pending_ += out.reward_ex;
  ++since_emit_;
  if (since_emit_ == delay_ || out.done) {
    out.reward_ex = pending_;
    pending_ = 0.0;
    since_emit_ = 0;
  } else {
    out.reward_ex = 0.0;
  }
  return out;
}

std::string DelayedRewardEnv::describe() const {
  return "delayed(" + std::to_string(delay_) + "," + inner_->describe() + ")";
}

std::unique_ptr<Environment> DelayedRewardEnv::clone() const {
  return std::make_unique<DelayedRewardEnv>(inner_->clone(), delay_);
}

std::unique_ptr<Environment> wrap_delayed(std::unique_ptr<Environment> env, int delay) {
  return std::make_unique<DelayedRewardEnv>(std::move(env), delay);
}

// ---------------------------------------------------------------------------

std::unique_ptr<MdpEnvironment> make_chain(int length, int horizon) {
  if (length < 2) throw std::invalid_argument("chain: length must be >= 2");
  if (horizon < 1) throw std::invalid_argument("chain: horizon must be >= 1");
  MdpSpec m = MdpSpec::zeros(length, 2, horizon);
  for (int s = 0; s < length; ++s) {
    const int left = std::max(s - 1, 0);
    const int right = std::min(s + 1, length - 1);
    m.prob(s, 0, left) = 1.0;
    m.prob(s, 1, right) = 1.0;
  }
  m.r(length - 2, 1) = 1.0;
  m.terminal[static_cast<std::size_t>(length - 1)] = true;
  m.initial_dist[0] = 1.0;
  return std::make_unique<MdpEnvironment>(std::move(m), MdpEnvironment::one_hot_features(length),
                                          "chain(" + std::to_string(length) + ",h=" + std::to_string(horizon) + ")");
}

std::unique_ptr<MdpEnvironment> make_gridworld(const EnvConfig& cfg) {
  const int w = cfg.width;
  const int h = cfg.height;
  if (w < 1 || h < 1 || w * h < 2) throw std::invalid_argument("gridworld: invalid dimensions");
  if (cfg.horizon < 1) throw std::invalid_argument("gridworld: horizon must be >= 1");
  const GridCell goal = cfg.goal.x < 0 ? GridCell{w - 1, h - 1} : cfg.goal;
  auto inside = [&](GridCell c) { return c.x >= 0 && c.x < w && c.y >= 0 && c.y < h; };
  if (!inside(goal) || !inside(cfg.start)) throw std::invalid_argument("gridworld: start/goal outside the grid");
  if (goal == cfg.start) throw std::invalid_argument("gridworld: start equals goal");

  std::vector<bool> wall(static_cast<std::size_t>(w * h), false);
  for (const auto& c : cfg.walls) {
    if (!inside(c)) throw std::invalid_argument("gridworld: wall outside the grid");
    if (c == goal || c == cfg.start) throw std::invalid_argument("gridworld: wall on start or goal");
    wall[static_cast<std::size_t>(c.y * w + c.x)] = true;
  }

  auto index = [w](GridCell c) { return c.y * w + c.x; };
  MdpSpec m = MdpSpec::zeros(w * h, 4, cfg.horizon);
  const int dx[4] = {0, 1, 0, -1};
  const int dy[4] = {-1, 0, 1, 0};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int s = index({x, y});
      for (int a = 0; a < 4; ++a) {
        GridCell next{x + dx[a], y + dy[a]};
        if (wall[static_cast<std::size_t>(s)] || !inside(next) || wall[static_cast<std::size_t>(index(next))]) {
          next = {x, y};
        }
        m.prob(s, a, index(next)) = 1.0;
        m.r(s, a) = (next == goal && !(GridCell{x, y} == goal)) ? cfg.goal_reward : cfg.step_penalty;
      }
    }
  }
  m.terminal[static_cast<std::size_t>(index(goal))] = true;
  m.initial_dist[static_cast<std::size_t>(index(cfg.start))] = 1.0;

  std::vector<Eigen::VectorXd> features;
  if (cfg.encoding == ObsEncoding::one_hot) {
    features = MdpEnvironment::one_hot_features(w * h);
  } else {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Eigen::VectorXd f(2);
        f << (w > 1 ? static_cast<double>(x) / (w - 1) : 0.0), (h > 1 ? static_cast<double>(y) / (h - 1) : 0.0);
        features.push_back(f);
      }
    }
  }
  std::ostringstream name;
  name << "gridworld(" << w << "x" << h << ",goal=" << goal.x << ":" << goal.y << ",h=" << cfg.horizon << ","
       << to_string(cfg.encoding) << ")";
  return std::make_unique<MdpEnvironment>(std::move(m), std::move(features), name.str());
}

std::unique_ptr<Environment> make_env(const EnvConfig& cfg) {
  std::string name = cfg.name;
  int delay = cfg.delay;
  if (delay < 1) throw std::invalid_argument("make_env: delay must be >= 1");
  if (name == "delayed") {
    name = cfg.base;
    if (name == "delayed") throw std::invalid_argument("make_env: delayed env cannot wrap itself");
  }
  std::unique_ptr<Environment> env;
  if (name == "chain") {
    env = make_chain(cfg.length, cfg.horizon);
  } else if (name == "gridworld") {
    env = make_gridworld(cfg);
  } else {
    throw std::invalid_argument("make_env: unknown environment '" + cfg.name + "'");
  }
  if (delay > 1 || cfg.name == "delayed") env = wrap_delayed(std::move(env), delay);
  return env;
}

const char* to_string(ObsEncoding e) { return e == ObsEncoding::one_hot ? "onehot" : "coords"; }

ObsEncoding parse_encoding(const std::string& s) {
  if (s == "onehot") return ObsEncoding::one_hot;
  if (s == "coords") return ObsEncoding::coords;
  throw std::invalid_argument("unknown observation encoding '" + s + "'");
}

}  // namespace lirpg
