#include "lirpg/experiment.hpp"

#include "lirpg/checkpoint.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lirpg {

namespace fs = std::filesystem;

std::string format_curve_row(const CurvePoint& p) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%ld,%ld,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", p.iteration, p.env_steps,
                p.episodes, p.mean_ex_return_100, p.mean_in_reward, p.mean_is_ratio, p.max_is_ratio, p.theta_grad_norm,
                p.eta_grad_norm);
  return buf;
}

CurvePoint parse_curve_row(const std::string& line) {
  CurvePoint p;
  std::istringstream in(line);
  std::string tok;
  std::vector<std::string> cols;
  while (std::getline(in, tok, ',')) cols.push_back(tok);
  if (cols.size() != 9) throw std::runtime_error("curve row has " + std::to_string(cols.size()) + " columns: " + line);
  try {
    p.iteration = std::stol(cols[0]);
    p.env_steps = std::stol(cols[1]);
    p.episodes = std::stol(cols[2]);
    p.mean_ex_return_100 = std::stod(cols[3]);
    p.mean_in_reward = std::stod(cols[4]);
    p.mean_is_ratio = std::stod(cols[5]);
    p.max_is_ratio = std::stod(cols[6]);
    p.theta_grad_norm = std::stod(cols[7]);
    p.eta_grad_norm = std::stod(cols[8]);
  } catch (const std::exception&) {
    throw std::runtime_error("malformed curve row: " + line);
  }
  return p;
}

std::vector<CurvePoint> read_curve(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open curve file '" + path.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<CurvePoint> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // interrupted mid-row
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (header) {
      if (line != kCurveHeader) throw std::runtime_error("unexpected curve header in '" + path.string() + "'");
      header = false;
      continue;
    }
    if (!line.empty()) out.push_back(parse_curve_row(line));
  }
  return out;
}

std::string run_dir_name(AgentMode mode, std::uint64_t seed) {
  return std::string(to_string(mode)) + "_seed" + std::to_string(seed);
}

fs::path output_root(const RunConfig& cfg) {
  if (const char* env = std::getenv("LIRPG_OUTPUT_ROOT"); env && *env) return fs::path(env);
  return fs::path(cfg.output_dir);
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class IntervalStats {
 public:
  void add(const IterationReport& r) {
    ++n_;
    in_reward_ += r.mean_in_reward;
    is_ratio_ += r.mean_is_ratio;
    max_ratio_ = std::max(max_ratio_, r.max_is_ratio);
    theta_norm_ += r.theta_grad_norm;
    eta_norm_ += r.eta_grad_norm;
  }

  void fill(CurvePoint& p) const {
    const double n = n_ > 0 ? static_cast<double>(n_) : 1.0;
    p.mean_in_reward = in_reward_ / n;
    p.mean_is_ratio = is_ratio_ / n;
    p.max_is_ratio = max_ratio_;
    p.theta_grad_norm = theta_norm_ / n;
    p.eta_grad_norm = eta_norm_ / n;
  }

 private:
  long n_ = 0;
  double in_reward_ = 0.0;
  double is_ratio_ = 0.0;
  double max_ratio_ = 0.0;
  double theta_norm_ = 0.0;
  double eta_norm_ = 0.0;
};

}  // namespace

RunOutcome train_run(const RunConfig& base, AgentMode mode, std::uint64_t seed,
                     const std::optional<fs::path>& out_dir) {
  const RunConfig cfg = base.single_run(mode, seed);
  cfg.validate();
  auto env = make_env(cfg.env);
  Rng rng(seed);

  RunOutcome out;
  out.mode = mode;
  out.seed = seed;
  out.final_state = AgentState::create(env->obs_dim(), env->num_actions(), cfg.agent, rng);
  AgentState& agent = out.final_state;

  std::ofstream curve_file;
  if (out_dir) {
    out.dir = *out_dir;
    fs::create_directories(*out_dir);
    {
      std::ofstream c(*out_dir / "config.txt");
      c << serialize_config(cfg);
    }
    curve_file.open(*out_dir / "curve.csv", std::ios::binary | std::ios::trunc);
    if (!curve_file) throw std::runtime_error("cannot write to '" + out_dir->string() + "'");
    curve_file << kCurveHeader << '\n' << std::flush;
  }

  std::deque<double> window;
  long env_steps = 0;
  IntervalStats stats;
  for (long it = 1; it <= cfg.iterations; ++it) {
    const IterationReport rep = run_iteration(agent, *env, cfg.agent, rng);
    env_steps += rep.episode_length;
    window.push_back(rep.episode_return);
    if (static_cast<int>(window.size()) > cfg.eval_window) window.pop_front();
    stats.add(rep);
    if (it % cfg.log_interval == 0) {
      CurvePoint p;
      p.iteration = it;
      p.env_steps = env_steps;
      p.episodes = it;
      double sum = 0.0;
      for (double r : window) sum += r;
      p.mean_ex_return_100 = sum / static_cast<double>(window.size());
      stats.fill(p);
      stats = IntervalStats{};
      out.curve.push_back(p);
      if (curve_file.is_open()) curve_file << format_curve_row(p) << '\n' << std::flush;
    }
  }

  if (out_dir) {
    save_checkpoint((*out_dir / "checkpoint.txt").string(), Checkpoint{cfg, agent});
    std::ofstream m(*out_dir / "manifest.txt");
    m << "config_hash = " << hex64(config_hash(cfg)) << '\n'
      << "mode = " << to_string(mode) << '\n'
      << "seed = " << seed << '\n'
      << "env = " << env->describe() << '\n'
      << "iterations = " << cfg.iterations << '\n'
      << "log_interval = " << cfg.log_interval << '\n'
      << "version = " << kVersion << '\n';
  }
  return out;
}

std::vector<RunOutcome> run_experiment(const RunConfig& cfg, bool write_outputs) {
  cfg.validate();
  struct Job {
    AgentMode mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (AgentMode m : cfg.modes) {
    for (std::uint64_t s : cfg.seeds) jobs.push_back({m, s});
  }
  const fs::path root = output_root(cfg);
  if (write_outputs) fs::create_directories(root);

  std::vector<RunOutcome> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        std::optional<fs::path> dir;
        if (write_outputs) dir = root / run_dir_name(jobs[i].mode, jobs[i].seed);
        results[i] = train_run(cfg, jobs[i].mode, jobs[i].seed, dir);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<RunOutcome> run_experiment_file(const std::string& config_path) {
  return run_experiment(load_config(config_path), true);
}

}  // namespace lirpg
