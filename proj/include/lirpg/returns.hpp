#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace lirpg {

/// Reward streams of one trajectory. r_in entries are intrinsic rewards in
/// [-1, 1]; lambda_mix weighs them against r_ex.
struct RewardTrace {
  std::vector<double> r_ex;
  std::vector<double> r_in;
  double lambda_mix = 0.0;
  double gamma = 1.0;

  void validate() const;
  std::size_t size() const { return r_ex.size(); }
};

/// G_t = r_t + gamma * G_{t+1}, with G_T = bootstrap.
std::vector<double> discounted_returns(std::span<const double> r, double gamma, double bootstrap = 0.0);

std::vector<double> returns_ex(const RewardTrace& trace);
std::vector<double> returns_in(const RewardTrace& trace);
/// Return of r_ex + lambda_mix * r_in.
std::vector<double> returns_mixed(const RewardTrace& trace);
std::vector<double> mixed_rewards(const RewardTrace& trace);

enum class AdvantageKind { monte_carlo, baseline, nstep, gae };

const char* to_string(AdvantageKind k);
AdvantageKind parse_advantage(const std::string& s);

struct AdvantageEstimate {
  std::vector<double> values;
  AdvantageKind kind = AdvantageKind::monte_carlo;
  bool baseline_used = false;
};

/// n-step targets: sum_{k<n} gamma^k r_{t+k} + gamma^n V_{t+n}, truncated at
/// the end of the trajectory where values[T] is the final bootstrap.
std::vector<double> nstep_returns(std::span<const double> r, std::span<const double> values, double gamma, int n);

/// delta_t = r_t + gamma V_{t+1} - V_t, A_t = delta_t + gamma * lambda * A_{t+1}.
/// `values` has length T + 1 (the last entry is the bootstrap).
AdvantageEstimate gae(std::span<const double> r, std::span<const double> values, double gamma, double lambda_gae);
/// GAE over the mixed reward stream of the trace.
AdvantageEstimate gae(const RewardTrace& trace, std::span<const double> values, double lambda_gae);

struct AdvantageSettings {
  AdvantageKind kind = AdvantageKind::monte_carlo;
  double gae_lambda = 0.95;
  int nstep = 5;
};

/// Per-step advantages of the requested kind. `values` (length T + 1) is
/// ignored for plain monte_carlo.
AdvantageEstimate compute_advantage(const AdvantageSettings& settings, std::span<const double> r,
                                    std::span<const double> values, double gamma);

/// How a reward at step i enters the advantage at step t <= i: with weight
/// decay^(i - t) when i - t < window, zero otherwise. Value-function terms
/// are excluded.
struct CreditKernel {
  double decay = 1.0;
  int window = std::numeric_limits<int>::max();
};

CreditKernel credit_kernel(const AdvantageSettings& settings, double gamma);

/// out_i = sum_{t <= i, i - t < window} decay^(i - t) * c_t.
std::vector<double> forward_credit(std::span<const double> c, const CreditKernel& kernel);

}  // namespace lirpg
