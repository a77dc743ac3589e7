#include "lirpg/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace lirpg {

namespace fs = std::filesystem;

const char* to_string(Metric m) {
  switch (m) {
    case Metric::final_return:
      return "final";
    case Metric::auc:
      return "auc";
    case Metric::iterations_to_threshold:
      return "iters_to_threshold";
  }
  return "?";
}

Metric parse_metric(const std::string& s) {
  if (s == "final") return Metric::final_return;
  if (s == "auc") return Metric::auc;
  if (s == "iters_to_threshold") return Metric::iterations_to_threshold;
  throw std::invalid_argument("unknown metric '" + s + "' (final | auc | iters_to_threshold)");
}

RunRecord load_run(const fs::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw std::runtime_error("no manifest.txt in '" + dir.string() + "'");
  RunRecord r;
  r.dir = dir;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "mode") r.mode = value;
    if (key == "seed") r.seed = std::stoull(value);
    if (key == "env") r.env = value;
  }
  r.curve = read_curve(dir / "curve.csv");
  return r;
}

double metric_value(const std::vector<CurvePoint>& curve, Metric metric, double threshold) {
  if (curve.empty()) throw std::invalid_argument("metric_value: empty curve");
  switch (metric) {
    case Metric::final_return:
      return curve.back().mean_ex_return_100;
    case Metric::auc: {
      double area = 0.0;
      for (std::size_t i = 1; i < curve.size(); ++i) {
        const double dx = static_cast<double>(curve[i].iteration - curve[i - 1].iteration);
        area += 0.5 * dx * (curve[i].mean_ex_return_100 + curve[i - 1].mean_ex_return_100);
      }
      return area;
    }
    case Metric::iterations_to_threshold:
      for (const auto& p : curve) {
        if (p.mean_ex_return_100 >= threshold) return static_cast<double>(p.iteration);
      }
      return std::numeric_limits<double>::infinity();
  }
  throw std::logic_error("metric_value: unhandled metric");
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi || xs[lo] == xs[hi]) return xs[lo];
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

ComparisonTable compare_groups(std::vector<std::pair<std::string, std::vector<RunRecord>>> groups, Metric metric,
                               double threshold) {
  if (groups.empty()) throw std::invalid_argument("compare: nothing to compare");
  std::string env;
  for (const auto& [label, runs] : groups) {
    if (runs.empty()) throw std::invalid_argument("compare: group '" + label + "' has no runs");
    for (const auto& r : runs) {
      if (env.empty()) env = r.env;
      if (r.env != env) throw std::invalid_argument("compare: mismatched environments '" + env + "' vs '" + r.env + "'");
    }
  }

  ComparisonTable t;
  t.metric = metric;
  double best = -std::numeric_limits<double>::infinity();
  // Lower is better for iterations-to-threshold.
  const double sign = metric == Metric::iterations_to_threshold ? -1.0 : 1.0;
  for (auto& [label, runs] : groups) {
    std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
    GroupSummary g;
    g.label = label;
    for (const auto& r : runs) {
      g.seeds.push_back(r.seed);
      g.values.push_back(metric_value(r.curve, metric, threshold));
    }
    g.median = quantile(g.values, 0.5);
    g.q25 = quantile(g.values, 0.25);
    g.q75 = quantile(g.values, 0.75);
    double sum = 0.0;
    for (double v : g.values) sum += v;
    g.mean = sum / static_cast<double>(g.values.size());
    if (t.best_mean.empty() || sign * g.mean > best) {
      best = sign * g.mean;
      t.best_mean = label;
    }
    t.groups.push_back(std::move(g));
  }
  for (const auto& g : t.groups) t.median_difference.push_back(g.median - t.groups.front().median);

  for (std::size_t i = 0; i < t.groups.front().seeds.size(); ++i) {
    const std::uint64_t seed = t.groups.front().seeds[i];
    std::string winner;
    double winner_value = 0.0;
    bool in_all = true;
    for (const auto& g : t.groups) {
      const auto it = std::find(g.seeds.begin(), g.seeds.end(), seed);
      if (it == g.seeds.end()) {
        in_all = false;
        break;
      }
      const double v = sign * g.values[static_cast<std::size_t>(it - g.seeds.begin())];
      if (winner.empty() || v > winner_value) {
        winner = g.label;
        winner_value = v;
      }
    }
    if (in_all) t.per_seed_best.emplace_back(seed, winner);
  }
  return t;
}

ComparisonTable compare_runs(const std::vector<fs::path>& dirs, Metric metric, double threshold) {
  std::vector<std::pair<std::string, std::vector<RunRecord>>> groups;
  for (const auto& d : dirs) {
    if (fs::exists(d / "manifest.txt")) {
      RunRecord r = load_run(d);
      groups.emplace_back(d.string(), std::vector<RunRecord>{std::move(r)});
      continue;
    }
    if (!fs::is_directory(d)) throw std::invalid_argument("compare: '" + d.string() + "' is not a directory");
    std::map<std::string, std::vector<RunRecord>> by_mode;
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(d)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.txt")) subdirs.push_back(entry.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& s : subdirs) {
      RunRecord r = load_run(s);
      by_mode[r.mode].push_back(std::move(r));
    }
    if (by_mode.empty()) throw std::invalid_argument("compare: no runs under '" + d.string() + "'");
    for (auto& [mode, runs] : by_mode) groups.emplace_back(d.string() + "/" + mode, std::move(runs));
  }
  return compare_groups(std::move(groups), metric, threshold);
}

void write_table(std::ostream& os, const ComparisonTable& t) {
  char buf[512];
  os << "metric: " << to_string(t.metric) << '\n';
  os << "group,n,median,q25,q75,mean,median_minus_first\n";
  for (std::size_t i = 0; i < t.groups.size(); ++i) {
    const auto& g = t.groups[i];
    std::snprintf(buf, sizeof buf, "%s,%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n", g.label.c_str(), g.values.size(), g.median,
                  g.q25, g.q75, g.mean, t.median_difference[i]);
    os << buf;
  }
  os << "best_mean: " << t.best_mean << '\n';
  os << "per_seed_best:";
  for (const auto& [seed, label] : t.per_seed_best) os << ' ' << seed << "=" << label;
  os << '\n';
}

}  // namespace lirpg
