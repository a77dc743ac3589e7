#include "lirpg/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

namespace lirpg {

namespace {

void expect_word(std::istream& is, const std::string& word) {
  std::string tok;
  if (!(is >> tok) || tok != word) throw std::runtime_error("checkpoint: expected '" + word + "', found '" + tok + "'");
}

ParamVector flat(const Eigen::VectorXd& v) { return ParamVector({{"all", 0, v.size()}}, v); }

void write_optimizer(std::ostream& os, const std::string& name, const Optimizer& opt) {
  os << "optimizer " << name << ' ' << opt.steps() << '\n';
  write_params(os, name + ".m", flat(opt.first_moment()));
  write_params(os, name + ".v", flat(opt.second_moment()));
}

void read_optimizer(std::istream& is, const std::string& name, Optimizer& opt) {
  expect_word(is, "optimizer");
  expect_word(is, name);
  long steps = 0;
  if (!(is >> steps)) throw std::runtime_error("checkpoint: bad optimizer step count");
  ParamVector m = read_params(is, name + ".m");
  ParamVector v = read_params(is, name + ".v");
  opt.restore(m.values(), v.values(), steps);
}

void load_into(ParamVector& dst, const ParamVector& src, const std::string& what) {
  if (!dst.same_layout(src)) throw std::runtime_error("checkpoint: " + what + " layout does not match the config");
  dst.values() = src.values();
}

}  // namespace

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  const std::string cfg = serialize_config(ckpt.config);
  std::size_t lines = 0;
  for (char c : cfg) lines += (c == '\n');
  os << "lirpg-checkpoint 1\n";
  os << "iteration " << ckpt.agent.iteration << '\n';
  os << "config " << lines << '\n' << cfg;
  write_params(os, "theta", ckpt.agent.policy.params());
  write_params(os, "policy_value", ckpt.agent.policy_value.params());
  write_params(os, "eta", ckpt.agent.irm.params());
  write_params(os, "ex_value", ckpt.agent.ex_value.params());
  write_optimizer(os, "opt_theta", ckpt.agent.opt_theta);
  write_optimizer(os, "opt_eta", ckpt.agent.opt_eta);
  write_optimizer(os, "opt_policy_value", ckpt.agent.opt_policy_value);
  write_optimizer(os, "opt_ex_value", ckpt.agent.opt_ex_value);
  os << "end\n";
}

Checkpoint read_checkpoint(std::istream& is) {
  expect_word(is, "lirpg-checkpoint");
  int version = 0;
  if (!(is >> version) || version != 1) throw std::runtime_error("checkpoint: unsupported version");
  expect_word(is, "iteration");
  long iteration = 0;
  if (!(is >> iteration)) throw std::runtime_error("checkpoint: bad iteration");
  expect_word(is, "config");
  std::size_t lines = 0;
  if (!(is >> lines)) throw std::runtime_error("checkpoint: bad config line count");
  std::string line;
  std::getline(is, line);
  std::string text;
  for (std::size_t i = 0; i < lines; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("checkpoint: truncated config");
    text += line + '\n';
  }

  Checkpoint ckpt;
  ckpt.config = parse_config_text(text);
  if (ckpt.config.modes.size() != 1) throw std::runtime_error("checkpoint: config must name exactly one mode");
  const auto env = make_env(ckpt.config.env);
  Rng unused(0);
  ckpt.agent = AgentState::create(env->obs_dim(), env->num_actions(), ckpt.config.agent, unused);
  ckpt.agent.iteration = iteration;
  load_into(ckpt.agent.policy.params(), read_params(is, "theta"), "theta");
  load_into(ckpt.agent.policy_value.params(), read_params(is, "policy_value"), "policy_value");
  load_into(ckpt.agent.irm.params(), read_params(is, "eta"), "eta");
  load_into(ckpt.agent.ex_value.params(), read_params(is, "ex_value"), "ex_value");
  read_optimizer(is, "opt_theta", ckpt.agent.opt_theta);
  read_optimizer(is, "opt_eta", ckpt.agent.opt_eta);
  read_optimizer(is, "opt_policy_value", ckpt.agent.opt_policy_value);
  read_optimizer(is, "opt_ex_value", ckpt.agent.opt_ex_value);
  expect_word(is, "end");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  write_checkpoint(os, ckpt);
  if (!os) throw std::runtime_error("error writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return read_checkpoint(is);
}

}  // namespace lirpg
