#pragma once

#include <Eigen/Core>

#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lirpg {

using Rng = std::mt19937_64;

/// Draws an index from a discrete distribution. Probabilities need not be
/// normalized exactly; the last index with nonzero mass absorbs roundoff.
int sample_categorical(std::span<const double> probs, Rng& rng);

/// Finite episodic MDP. Tables are dense and row-major:
/// transition[(s * A + a) * S + s'], reward[s * A + a].
struct MdpSpec {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> transition;
  std::vector<double> reward;
  std::vector<double> initial_dist;
  int horizon = 1;
  std::vector<bool> terminal;

  double prob(int s, int a, int next) const {
    return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + next];
  }
  double& prob(int s, int a, int next) {
    return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + next];
  }
  double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * num_actions + a]; }
  double& r(int s, int a) { return reward[static_cast<std::size_t>(s) * num_actions + a]; }
  bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)]; }

  /// Allocates zeroed tables of the right shape.
  static MdpSpec zeros(int num_states, int num_actions, int horizon);

  /// Throws std::invalid_argument when a table is malformed.
  void validate() const;
};

struct Observation {
  Eigen::VectorXd features;
};

/// What the environment reports after one step.
struct StepResult {
  Observation obs;
  int state = 0;
  double reward_ex = 0.0;
  bool done = false;
  bool truncated = false;
};

/// Episodic discrete environment backed by a complete MdpSpec so that the
/// oracle can enumerate it.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Observation reset(Rng& rng) = 0;
  virtual StepResult step(int action, Rng& rng) = 0;

  virtual const MdpSpec& spec() const = 0;
  virtual Observation observe(int state) const = 0;
  virtual int obs_dim() const = 0;
  virtual int state() const = 0;
  virtual std::string describe() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  int num_actions() const { return spec().num_actions; }
  int num_states() const { return spec().num_states; }
};

/// Samples directly from the tables of an MdpSpec. Observations come from a
/// per-state feature table.
class MdpEnvironment : public Environment {
 public:
  MdpEnvironment(MdpSpec spec, std::vector<Eigen::VectorXd> features, std::string name);

  /// One-hot state features.
  static std::vector<Eigen::VectorXd> one_hot_features(int num_states);

  Observation reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;

  const MdpSpec& spec() const override { return spec_; }
  Observation observe(int state) const override;
  int obs_dim() const override;
  int state() const override { return state_; }
  std::string describe() const override { return name_; }
  std::unique_ptr<Environment> clone() const override;

 private:
  MdpSpec spec_;
  std::vector<Eigen::VectorXd> features_;
  std::string name_;
  int state_ = 0;
  int t_ = 0;
  bool done_ = true;
};

/// Holds back extrinsic reward and releases the accumulated sum every
/// delay-th step or at episode end, whichever comes first.
class DelayedRewardEnv : public Environment {
 public:
  DelayedRewardEnv(std::unique_ptr<Environment> inner, int delay);

  Observation reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;

  const MdpSpec& spec() const override { return inner_->spec(); }
  Observation observe(int state) const override { return inner_->observe(state); }
  int obs_dim() const override { return inner_->obs_dim(); }
  int state() const override { return inner_->state(); }
  std::string describe() const override;
  std::unique_ptr<Environment> clone() const override;

  int delay() const { return delay_; }

 private:
  std::unique_ptr<Environment> inner_;
  int delay_;
  double pending_ = 0.0;
  int since_emit_ = 0;
};

std::unique_ptr<Environment> wrap_delayed(std::unique_ptr<Environment> env, int delay);

enum class ObsEncoding { one_hot, coords };

struct GridCell {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Parameters for the built-in environments. Fields irrelevant to the chosen
/// environment are ignored.
struct EnvConfig {
  std::string name = "chain";  // chain | gridworld | delayed
  std::string base = "gridworld";  // inner env when name == delayed
  int length = 6;  // chain states
  int width = 5;
  int height = 5;
  GridCell start{0, 0};
  GridCell goal{-1, -1};  // defaults to the far corner
  std::vector<GridCell> walls;
  double goal_reward = 1.0;
  double step_penalty = 0.0;
  int horizon = 20;
  int delay = 1;
  ObsEncoding encoding = ObsEncoding::one_hot;
};

/// Chain of `length` states. Action 0 moves left, action 1 moves right; the
/// transition into the last state pays +1 and ends the episode.
std::unique_ptr<MdpEnvironment> make_chain(int length, int horizon);

/// Grid of width x height cells. Actions: 0 up, 1 right, 2 down, 3 left.
/// Moves into walls or off the grid leave the agent in place. Entering the
/// goal pays goal_reward and ends the episode; every other step pays
/// step_penalty.
std::unique_ptr<MdpEnvironment> make_gridworld(const EnvConfig& cfg);

/// Builds the environment named by cfg.name, wrapping it with the delayed
/// reward wrapper when cfg.delay > 1 or cfg.name == "delayed".
std::unique_ptr<Environment> make_env(const EnvConfig& cfg);

const char* to_string(ObsEncoding e);
ObsEncoding parse_encoding(const std::string& s);

}  // namespace lirpg
