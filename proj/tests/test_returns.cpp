#include "helpers.hpp"

#include "lirpg/returns.hpp"

#include <doctest.h>

#include <cmath>

using namespace lirpg;

namespace {

std::vector<double> random_seq(std::size_t n, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Direct double-loop sum_{i >= t} gamma^(i - t) r_i.
std::vector<double> brute_returns(const std::vector<double>& r, double gamma) {
  std::vector<double> g(r.size(), 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    for (std::size_t i = t; i < r.size(); ++i) g[t] += std::pow(gamma, static_cast<double>(i - t)) * r[i];
  }
  return g;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

RewardTrace trace(std::vector<double> ex, std::vector<double> in, double lambda, double gamma) {
  RewardTrace t;
  t.r_ex = std::move(ex);
  t.r_in = std::move(in);
  t.lambda_mix = lambda;
  t.gamma = gamma;
  return t;
}

}  // namespace

TEST_CASE("discounted returns, small cases") {
  const std::vector<double> r{1, 1, 1};
  CHECK(discounted_returns(r, 0.5) == std::vector<double>{1.75, 1.5, 1.0});
  const std::vector<double> x{0.3, -2.0, 4.0};
  CHECK(discounted_returns(x, 0.0) == x);
  CHECK(discounted_returns(std::vector<double>{}, 0.9).empty());
  CHECK(discounted_returns(r, 1.0, 2.0) == std::vector<double>{5, 4, 3});
}

TEST_CASE("backward recursion matches the double loop") {
  Rng rng(12);
  for (double gamma : {0.0, 0.5, 0.99, 1.0}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto r = random_seq(12, rng);
      CHECK(max_diff(discounted_returns(r, gamma), brute_returns(r, gamma)) <= 1e-12);
    }
  }
}

TEST_CASE("intrinsic and mixed returns") {
  CHECK(returns_in(trace({0, 0}, {0, 0}, 0.01, 1.0)) == std::vector<double>{0, 0});
  CHECK(returns_in(trace({0, 0}, {0.5, -0.5}, 0.01, 1.0)) == std::vector<double>{0.0, -0.5});

  const auto m = returns_mixed(trace({1, 0}, {1, 1}, 0.01, 1.0));
  CHECK(m[0] == doctest::Approx(1.02).epsilon(1e-14));
  CHECK(m[1] == doctest::Approx(0.01).epsilon(1e-14));

  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ex = random_seq(9, rng);
    const auto in = random_seq(9, rng);
    const double lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto t = trace(ex, in, lambda, 0.97);
    CHECK(returns_mixed(trace(ex, in, 0.0, 0.97)) == returns_ex(t));
    CHECK(returns_in(t) == returns_ex(trace(in, ex, lambda, 0.97)));
    const auto gex = returns_ex(t);
    const auto gin = returns_in(t);
    const auto gm = returns_mixed(t);
    for (std::size_t i = 0; i < gm.size(); ++i) CHECK(std::abs(gm[i] - (gex[i] + lambda * gin[i])) <= 1e-12);
  }
}

TEST_CASE("trace validation") {
  CHECK_THROWS_AS(trace({1, 2}, {1}, 0.1, 0.9).validate(), std::invalid_argument);
  CHECK_THROWS_AS(trace({1}, {0.5}, -0.1, 0.9).validate(), std::invalid_argument);
  CHECK_THROWS_AS(trace({1}, {0.5}, 0.1, 1.5).validate(), std::invalid_argument);
  CHECK_NOTHROW(trace({1}, {-1.0}, 0.1, 0.9).validate());
}

TEST_CASE("gae with lambda one is the Monte Carlo advantage") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto r = random_seq(10, rng);
    auto v = random_seq(11, rng);
    v.back() = 0.0;
    const auto a = gae(r, v, 0.95, 1.0).values;
    const auto g = discounted_returns(r, 0.95);
    for (std::size_t t = 0; t < r.size(); ++t) CHECK(std::abs(a[t] - (g[t] - v[t])) <= 1e-10);
  }
}

TEST_CASE("gae with lambda zero is the TD error") {
  Rng rng(4);
  const auto r = random_seq(7, rng);
  const auto v = random_seq(8, rng);
  const auto a = gae(r, v, 0.9, 0.0).values;
  for (std::size_t t = 0; t < r.size(); ++t) CHECK(a[t] == r[t] + 0.9 * v[t + 1] - v[t]);
}

TEST_CASE("gae matches the direct double sum") {
  Rng rng(6);
  constexpr double kGamma = 0.99;
  constexpr double kLambda = 0.95;
  for (int rep = 0; rep < 20; ++rep) {
    const auto r = random_seq(8, rng);
    const auto v = random_seq(9, rng);
    std::vector<double> delta(8);
    for (std::size_t t = 0; t < 8; ++t) delta[t] = r[t] + kGamma * v[t + 1] - v[t];
    const auto a = gae(r, v, kGamma, kLambda).values;
    for (std::size_t t = 0; t < 8; ++t) {
      double direct = 0.0;
      for (std::size_t k = 0; t + k < 8; ++k) direct += std::pow(kGamma * kLambda, static_cast<double>(k)) * delta[t + k];
      CHECK(std::abs(a[t] - direct) <= 1e-12);
    }
  }
}

TEST_CASE("n-step returns") {
  Rng rng(8);
  const auto r = random_seq(6, rng);
  const auto v = random_seq(7, rng);
  const auto g = nstep_returns(r, v, 0.9, 2);
  CHECK(std::abs(g[0] - (r[0] + 0.9 * r[1] + 0.81 * v[2])) <= 1e-14);
  CHECK(std::abs(g[5] - (r[5] + 0.9 * v[6])) <= 1e-14);

  // A window longer than the episode falls back to the full return plus the
  // final bootstrap.
  auto vz = v;
  vz.back() = 0.0;
  const auto long_window = nstep_returns(r, vz, 0.9, 100);
  CHECK(max_diff(long_window, discounted_returns(r, 0.9)) <= 1e-12);
}

TEST_CASE("advantage kinds") {
  Rng rng(10);
  const auto r = random_seq(5, rng);
  auto v = random_seq(6, rng);
  v.back() = 0.0;
  const auto mc = compute_advantage({AdvantageKind::monte_carlo}, r, {}, 0.9);
  CHECK(mc.values == discounted_returns(r, 0.9));
  CHECK_FALSE(mc.baseline_used);

  const auto base = compute_advantage({AdvantageKind::baseline}, r, v, 0.9);
  for (std::size_t t = 0; t < 5; ++t) CHECK(base.values[t] == doctest::Approx(mc.values[t] - v[t]).epsilon(1e-14));

  CHECK_THROWS_AS(compute_advantage({AdvantageKind::baseline}, r, {}, 0.9), std::invalid_argument);
  for (AdvantageKind k : {AdvantageKind::monte_carlo, AdvantageKind::baseline, AdvantageKind::nstep, AdvantageKind::gae}) {
    CHECK(parse_advantage(to_string(k)) == k);
  }
}

TEST_CASE("credit kernel reproduces how each advantage depends on rewards") {
  // d A_t / d r_i = kernel weight of (i - t); checked by perturbing r_i.
  Rng rng(13);
  const auto r = random_seq(9, rng);
  const auto v = random_seq(10, rng);
  const double gamma = 0.9;
  for (AdvantageSettings s : {AdvantageSettings{AdvantageKind::monte_carlo}, AdvantageSettings{AdvantageKind::baseline},
                              AdvantageSettings{AdvantageKind::nstep, 0.95, 3},
                              AdvantageSettings{AdvantageKind::gae, 0.8, 5}}) {
    const CreditKernel k = credit_kernel(s, gamma);
    const auto a0 = compute_advantage(s, r, v, gamma).values;
    for (std::size_t i = 0; i < r.size(); ++i) {
      auto bumped = r;
      bumped[i] += 1.0;
      const auto a1 = compute_advantage(s, bumped, v, gamma).values;
      for (std::size_t t = 0; t < r.size(); ++t) {
        double w = 0.0;
        if (i >= t && static_cast<long>(i - t) < k.window) w = std::pow(k.decay, static_cast<double>(i - t));
        CHECK(std::abs((a1[t] - a0[t]) - w) <= 1e-12);
      }
    }
  }
}

TEST_CASE("forward credit matches the double loop") {
  Rng rng(14);
  const auto c = random_seq(11, rng);
  for (CreditKernel k : {CreditKernel{0.9}, CreditKernel{1.0, 3}, CreditKernel{0.5, 1}}) {
    const auto out = forward_credit(c, k);
    for (std::size_t i = 0; i < c.size(); ++i) {
      double direct = 0.0;
      for (std::size_t t = 0; t <= i; ++t) {
        if (static_cast<long>(i - t) < k.window) direct += std::pow(k.decay, static_cast<double>(i - t)) * c[t];
      }
      CHECK(std::abs(out[i] - direct) <= 1e-12);
    }
  }
}
