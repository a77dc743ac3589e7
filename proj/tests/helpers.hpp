#pragma once

#include "lirpg/env.hpp"
#include "lirpg/models.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace lirpg::testing {

/// Random stochastic MDP with one-hot observations. State S-1 is terminal
/// when `with_terminal` is set. `dyadic` rounds rewards to multiples of 1/64
/// so that sums are exact in any order.
inline std::unique_ptr<MdpEnvironment> random_mdp(int S, int A, int horizon, std::uint64_t seed,
                                                  bool with_terminal = true, bool dyadic = false) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MdpSpec spec = MdpSpec::zeros(S, A, horizon);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double total = 0.0;
      for (int n = 0; n < S; ++n) total += spec.prob(s, a, n) = u(rng) + 0.05;
      for (int n = 0; n < S; ++n) spec.prob(s, a, n) /= total;
      spec.r(s, a) = 2.0 * u(rng) - 1.0;
      if (dyadic) spec.r(s, a) = std::round(spec.r(s, a) * 64.0) / 64.0;
    }
  }
  double total = 0.0;
  for (int s = 0; s < S; ++s) total += spec.initial_dist[static_cast<std::size_t>(s)] = u(rng);
  for (auto& p : spec.initial_dist) p /= total;
  if (with_terminal) {
    spec.terminal[static_cast<std::size_t>(S - 1)] = true;
    spec.initial_dist[static_cast<std::size_t>(S - 1)] = 0.0;
    total = 0.0;
    for (double p : spec.initial_dist) total += p;
    for (auto& p : spec.initial_dist) p /= total;
  }
  spec.validate();
  return std::make_unique<MdpEnvironment>(std::move(spec), MdpEnvironment::one_hot_features(S), "random_mdp");
}

inline void randomize(Eigen::VectorXd& v, double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& x : v) x = u(rng);
}

}  // namespace lirpg::testing
