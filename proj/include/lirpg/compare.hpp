#pragma once

#include "lirpg/experiment.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lirpg {

enum class Metric { final_return, auc, iterations_to_threshold };

const char* to_string(Metric m);
Metric parse_metric(const std::string& s);

/// A logged run read back from disk.
struct RunRecord {
  std::filesystem::path dir;
  std::string mode;
  std::uint64_t seed = 0;
  std::string env;
  std::vector<CurvePoint> curve;
};

RunRecord load_run(const std::filesystem::path& dir);

/// Final-window return, trapezoidal area under mean_ex_return_100 over
/// iterations, or the first logged iteration whose window mean reaches
/// `threshold` (+inf when never reached).
double metric_value(const std::vector<CurvePoint>& curve, Metric metric, double threshold = 0.0);

struct GroupSummary {
  std::string label;
  std::vector<std::uint64_t> seeds;
  std::vector<double> values;  // one per seed, in seed order
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
};

struct ComparisonTable {
  Metric metric = Metric::final_return;
  std::vector<GroupSummary> groups;
  /// Label of the group with the best mean.
  std::string best_mean;
  /// For each seed present in every group, which group was best; ties go to
  /// the earlier group.
  std::vector<std::pair<std::uint64_t, std::string>> per_seed_best;
  /// median(group i) - median(group 0).
  std::vector<double> median_difference;
};

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> xs, double q);

/// Each argument is either a single run directory (has manifest.txt) or an
/// experiment directory holding run subdirectories. Every argument becomes
/// one group per mode it contains. All runs must share an environment.
ComparisonTable compare_runs(const std::vector<std::filesystem::path>& dirs, Metric metric, double threshold = 0.0);
ComparisonTable compare_groups(std::vector<std::pair<std::string, std::vector<RunRecord>>> groups, Metric metric,
                               double threshold = 0.0);

void write_table(std::ostream& os, const ComparisonTable& table);

}  // namespace lirpg
