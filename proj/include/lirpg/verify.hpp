#pragma once

#include "lirpg/oracle.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lirpg::verify {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;      // the measured error
  double tolerance = 0.0;  // pass iff value <= tolerance
  std::string detail;
  /// Reported but excluded from the overall verdict.
  bool informational = false;
};

struct Report {
  std::vector<CheckResult> checks;

  bool passed() const;
  std::size_t failures() const;
  void append(const Report& other);
  /// Machine-readable form: {"passed": bool, "checks": [...]}.
  std::string to_json() const;
  void write_text(std::ostream& os) const;
};

struct Options {
  int model_seeds = 10;         // per architecture
  int bilevel_draws = 20;       // random (theta, eta) per grid cell
  int estimator_draws = 5;
  std::uint64_t seed = 20260101;
  double fd_epsilon_models = 1e-5;
  double fd_epsilon_bilevel = 1e-4;
  double model_tolerance = 1e-5;
  double bilevel_tolerance = 1e-4;
  double estimator_tolerance = 1e-10;
  /// Negative control: when set, this coordinate of every analytic
  /// grad_log_pi is perturbed by `corrupt_amount` before comparison.
  std::optional<Eigen::Index> corrupt_coordinate;
  double corrupt_amount = 1e-3;
};

/// "worst coordinate 3 (table): analytic 0.1, numeric 0.2, abs err 0.1"
std::string describe_worst(const oracle::FdReport& rep, const std::vector<Slice>& layout);

/// Finite-difference checks of grad_log_pi, grad_pi, grad_entropy,
/// grad_intrinsic_reward and grad_value across tabular, linear and mlp
/// models.
Report gradients(const Options& opts = {});

/// Exact expectations of the sample estimators versus the enumeration
/// gradients on a chain.
Report estimators(const Options& opts = {});

/// Analytic meta-gradient versus central differences of the exact bilevel
/// map, over a grid of alpha, lambda and gamma, plus the lambda = 0 zeros.
Report bilevel(const Options& opts = {});

/// "gradients" | "estimators" | "bilevel" | "all". Throws on unknown names.
Report run_suite(const std::string& suite, const Options& opts = {});

}  // namespace lirpg::verify
