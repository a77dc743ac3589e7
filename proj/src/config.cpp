#include "lirpg/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lirpg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(trim(tok));
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || s.front() == '-') {
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + s + "'");
}

GridCell to_cell(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("expected a cell x:y, got '" + s + "'");
  return {static_cast<int>(to_long(trim(s.substr(0, colon)))), static_cast<int>(to_long(trim(s.substr(colon + 1))))};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const GridCell& c) { return std::to_string(c.x) + ":" + std::to_string(c.y); }

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += f(xs[i]);
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Ordered: serialization follows this order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"env", {[](RunConfig& c, const std::string& v) { c.env.name = v; }, [](const RunConfig& c) { return c.env.name; }}},
      {"env.base", {[](RunConfig& c, const std::string& v) { c.env.base = v; }, [](const RunConfig& c) { return c.env.base; }}},
      {"env.length",
       {[](RunConfig& c, const std::string& v) { c.env.length = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.env.length); }}},
      {"env.width",
       {[](RunConfig& c, const std::string& v) { c.env.width = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.env.width); }}},
      {"env.height",
       {[](RunConfig& c, const std::string& v) { c.env.height = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.env.height); }}},
      {"env.start", {[](RunConfig& c, const std::string& v) { c.env.start = to_cell(v); }, [](const RunConfig& c) { return fmt(c.env.start); }}},
      {"env.goal", {[](RunConfig& c, const std::string& v) { c.env.goal = to_cell(v); }, [](const RunConfig& c) { return fmt(c.env.goal); }}},
      {"env.walls",
       {[](RunConfig& c, const std::string& v) {
          c.env.walls.clear();
          for (const auto& tok : split_list(v)) c.env.walls.push_back(to_cell(tok));
        },
        [](const RunConfig& c) { return join(c.env.walls, [](const GridCell& g) { return fmt(g); }); }}},
      {"env.goal_reward",
       {[](RunConfig& c, const std::string& v) { c.env.goal_reward = to_double(v); },
        [](const RunConfig& c) { return fmt(c.env.goal_reward); }}},
      {"env.step_penalty",
       {[](RunConfig& c, const std::string& v) { c.env.step_penalty = to_double(v); },
        [](const RunConfig& c) { return fmt(c.env.step_penalty); }}},
      {"env.horizon",
       {[](RunConfig& c, const std::string& v) { c.env.horizon = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.env.horizon); }}},
      {"env.delay",
       {[](RunConfig& c, const std::string& v) { c.env.delay = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.env.delay); }}},
      {"env.encoding",
       {[](RunConfig& c, const std::string& v) { c.env.encoding = parse_encoding(v); },
        [](const RunConfig& c) { return std::string(to_string(c.env.encoding)); }}},
      {"modes",
       {[](RunConfig& c, const std::string& v) {
          c.modes.clear();
          for (const auto& tok : split_list(v)) c.modes.push_back(parse_mode(tok));
        },
        [](const RunConfig& c) { return join(c.modes, [](AgentMode m) { return std::string(to_string(m)); }); }}},
      {"seeds",
       {[](RunConfig& c, const std::string& v) {
          c.seeds.clear();
          for (const auto& tok : split_list(v)) c.seeds.push_back(to_u64(tok));
        },
        [](const RunConfig& c) { return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }); }}},
      {"iterations",
       {[](RunConfig& c, const std::string& v) { c.iterations = to_long(v); },
        [](const RunConfig& c) { return std::to_string(c.iterations); }}},
      {"log_interval",
       {[](RunConfig& c, const std::string& v) { c.log_interval = to_long(v); },
        [](const RunConfig& c) { return std::to_string(c.log_interval); }}},
      {"eval_window",
       {[](RunConfig& c, const std::string& v) { c.eval_window = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.eval_window); }}},
      {"output_dir", {[](RunConfig& c, const std::string& v) { c.output_dir = v; }, [](const RunConfig& c) { return c.output_dir; }}},
      {"threads",
       {[](RunConfig& c, const std::string& v) { c.threads = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.threads); }}},
      {"alpha", {[](RunConfig& c, const std::string& v) { c.agent.alpha = to_double(v); }, [](const RunConfig& c) { return fmt(c.agent.alpha); }}},
      {"beta", {[](RunConfig& c, const std::string& v) { c.agent.beta = to_double(v); }, [](const RunConfig& c) { return fmt(c.agent.beta); }}},
      {"lambda",
       {[](RunConfig& c, const std::string& v) { c.agent.lambda_mix = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.lambda_mix); }}},
      {"gamma", {[](RunConfig& c, const std::string& v) { c.agent.gamma = to_double(v); }, [](const RunConfig& c) { return fmt(c.agent.gamma); }}},
      {"xi", {[](RunConfig& c, const std::string& v) { c.agent.xi = to_double(v); }, [](const RunConfig& c) { return fmt(c.agent.xi); }}},
      {"value_coef",
       {[](RunConfig& c, const std::string& v) { c.agent.value_coef = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.value_coef); }}},
      {"entropy_coef",
       {[](RunConfig& c, const std::string& v) { c.agent.entropy_coef = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.entropy_coef); }}},
      {"clip_norm",
       {[](RunConfig& c, const std::string& v) { c.agent.clip_norm = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.clip_norm); }}},
      {"optimizer",
       {[](RunConfig& c, const std::string& v) { c.agent.optimizer = parse_optimizer(v); },
        [](const RunConfig& c) { return std::string(to_string(c.agent.optimizer)); }}},
      {"eta_optimizer",
       {[](RunConfig& c, const std::string& v) { c.agent.eta_optimizer = parse_optimizer(v); },
        [](const RunConfig& c) { return std::string(to_string(c.agent.eta_optimizer)); }}},
      {"live_bonus",
       {[](RunConfig& c, const std::string& v) { c.agent.live_bonus = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.live_bonus); }}},
      {"policy_advantage",
       {[](RunConfig& c, const std::string& v) { c.agent.policy_advantage = parse_advantage(v); },
        [](const RunConfig& c) { return std::string(to_string(c.agent.policy_advantage)); }}},
      {"meta_advantage",
       {[](RunConfig& c, const std::string& v) { c.agent.meta_advantage = parse_advantage(v); },
        [](const RunConfig& c) { return std::string(to_string(c.agent.meta_advantage)); }}},
      {"gae_lambda",
       {[](RunConfig& c, const std::string& v) { c.agent.gae_lambda = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.gae_lambda); }}},
      {"nstep",
       {[](RunConfig& c, const std::string& v) { c.agent.nstep = static_cast<int>(to_long(v)); },
        [](const RunConfig& c) { return std::to_string(c.agent.nstep); }}},
      {"is_floor",
       {[](RunConfig& c, const std::string& v) { c.agent.is_floor = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.is_floor); }}},
      {"discount_state_weighting",
       {[](RunConfig& c, const std::string& v) { c.agent.discount_state_weighting = to_bool(v); },
        [](const RunConfig& c) { return std::string(c.agent.discount_state_weighting ? "true" : "false"); }}},
      {"policy_arch",
       {[](RunConfig& c, const std::string& v) { c.agent.policy_arch = parse_arch(v); },
        [](const RunConfig& c) { return to_string(c.agent.policy_arch); }}},
      {"value_arch",
       {[](RunConfig& c, const std::string& v) { c.agent.value_arch = parse_arch(v); },
        [](const RunConfig& c) { return to_string(c.agent.value_arch); }}},
      {"irm_arch",
       {[](RunConfig& c, const std::string& v) { c.agent.irm_arch = parse_arch(v); },
        [](const RunConfig& c) { return to_string(c.agent.irm_arch); }}},
      {"init_scale",
       {[](RunConfig& c, const std::string& v) { c.agent.init_scale = to_double(v); },
        [](const RunConfig& c) { return fmt(c.agent.init_scale); }}},
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return &f;
  }
  return nullptr;
}

}  // namespace

void RunConfig::validate() const {
  agent.validate();
  make_env(env);  // throws on bad env parameters
  if (modes.empty()) throw std::invalid_argument("config: modes must not be empty");
  if (seeds.empty()) throw std::invalid_argument("config: seeds must not be empty");
  if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
  if (log_interval < 1) throw std::invalid_argument("config: log_interval must be >= 1");
  if (eval_window < 1) throw std::invalid_argument("config: eval_window must be >= 1");
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
  std::set<AgentMode> m(modes.begin(), modes.end());
  if (m.size() != modes.size()) throw std::invalid_argument("config: repeated mode");
  std::set<std::uint64_t> s(seeds.begin(), seeds.end());
  if (s.size() != seeds.size()) throw std::invalid_argument("config: repeated seed");
}

RunConfig RunConfig::single_run(AgentMode mode, std::uint64_t seed) const {
  RunConfig c = *this;
  c.modes = {mode};
  c.seeds = {seed};
  c.agent.mode = mode;
  return c;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
    try {
      f->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  if (cfg.modes.size() == 1) cfg.agent.mode = cfg.modes.front();
  cfg.validate();
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + " = " + f.get(cfg) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.output_dir.clear();
  c.threads = 0;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace lirpg
