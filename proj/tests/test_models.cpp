#include "helpers.hpp"

#include "lirpg/models.hpp"
#include "lirpg/optimizer.hpp"
#include "lirpg/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace lirpg;

namespace {

const std::vector<Arch> kArchs{{ArchKind::tabular, {}}, {ArchKind::linear, {}}, {ArchKind::mlp, {6, 5}}};

Observation one_hot(int dim, int i) { return Observation{Eigen::VectorXd::Unit(dim, i)}; }

Observation observation_for(const Arch& arch, int dim, Rng& rng) {
  if (arch.kind == ArchKind::tabular) {
    std::uniform_int_distribution<int> pick(0, dim - 1);
    return one_hot(dim, pick(rng));
  }
  Observation o{Eigen::VectorXd(dim)};
  testing::randomize(o.features, 1.5, rng);
  return o;
}

}  // namespace

TEST_CASE("zero parameters give a uniform policy") {
  for (const Arch& arch : kArchs) {
    PolicyModel p(arch, 4, 3);
    Rng rng(1);
    const Eigen::VectorXd d = p.action_dist(observation_for(arch, 4, rng));
    for (int a = 0; a < 3; ++a) CHECK(d[a] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("tabular softmax closed form") {
  PolicyModel p(Arch{}, 2, 2);
  p.params().values()[0] = std::log(2.0);
  const Eigen::VectorXd d = p.action_dist(one_hot(2, 0));
  CHECK(d[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax is shift invariant and stable") {
  Eigen::VectorXd s(3);
  s << 0.3, -1.2, 2.0;
  const Eigen::VectorXd a = softmax(s);
  const Eigen::VectorXd b = softmax(s.array() + 1000.0);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(b.allFinite());
}

TEST_CASE("action distributions are normalized for every architecture") {
  for (const Arch& arch : kArchs) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed);
      PolicyModel p(arch, 5, 4);
      testing::randomize(p.params().values(), 3.0, rng);
      const Eigen::VectorXd d = p.action_dist(observation_for(arch, 5, rng));
      CHECK(std::abs(d.sum() - 1.0) <= 1e-10);
      CHECK(d.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("tabular score gradient is onehot minus pi on the state's row") {
  Rng rng(3);
  PolicyModel p(Arch{}, 4, 3);
  testing::randomize(p.params().values(), 1.0, rng);
  const Observation o = one_hot(4, 2);
  const Eigen::VectorXd pi = p.action_dist(o);
  const Eigen::VectorXd g = p.grad_log_pi(o, 1).values();
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(12);
  expected.segment(6, 3) = Eigen::VectorXd::Unit(3, 1) - pi;
  CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("score function has zero mean under the policy") {
  for (const Arch& arch : kArchs) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed);
      PolicyModel p(arch, 5, 4);
      testing::randomize(p.params().values(), 2.0, rng);
      const Observation o = observation_for(arch, 5, rng);
      const Eigen::VectorXd pi = p.action_dist(o);
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(p.params().size());
      for (int a = 0; a < 4; ++a) mean += pi[a] * p.grad_log_pi(o, a).values();
      CHECK(mean.cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("grad_pi is pi times the score") {
  for (const Arch& arch : kArchs) {
    Rng rng(4);
    PolicyModel p(arch, 5, 4);
    testing::randomize(p.params().values(), 2.0, rng);
    const Observation o = observation_for(arch, 5, rng);
    for (int a = 0; a < 4; ++a) {
      const Eigen::VectorXd lhs = p.grad_pi(o, a).values();
      const Eigen::VectorXd rhs = p.prob(o, a) * p.grad_log_pi(o, a).values();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("uniform two-action grad_pi") {
  PolicyModel p(Arch{}, 3, 2);
  const Eigen::VectorXd g = p.grad_pi(one_hot(3, 1), 0).values();
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
  expected[2] = 0.25;
  expected[3] = -0.25;
  CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("model gradients match central differences") {
  // Random mlp parameters, eps 1e-5, relative error 1e-6.
  for (const Arch& arch : kArchs) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      PolicyModel p(arch, 4, 3);
      IntrinsicRewardModel irm(arch, 4, 3);
      ValueHead v(arch, 4);
      testing::randomize(p.params().values(), 1.0, rng);
      testing::randomize(irm.params().values(), 1.0, rng);
      testing::randomize(v.params().values(), 1.0, rng);
      const Observation o = observation_for(arch, 4, rng);
      for (int a = 0; a < 3; ++a) {
        auto r = oracle::fd_check_gradient([&](const Eigen::VectorXd& t) { return p.with_params(t).log_prob(o, a); },
                                           p.params().values(), p.grad_log_pi(o, a).values(), 1e-5);
        CHECK(r.max_rel_error <= 1e-6);
        r = oracle::fd_check_gradient([&](const Eigen::VectorXd& t) { return p.with_params(t).prob(o, a); },
                                      p.params().values(), p.grad_pi(o, a).values(), 1e-5);
        CHECK(r.max_rel_error <= 1e-6);
        r = oracle::fd_check_gradient(
            [&](const Eigen::VectorXd& e) { return irm.with_params(e).intrinsic_reward(o, a); },
            irm.params().values(), irm.grad_intrinsic_reward(o, a).values(), 1e-5);
        CHECK(r.max_rel_error <= 1e-6);
      }
      ValueHead probe = v;
      auto r = oracle::fd_check_gradient(
          [&](const Eigen::VectorXd& w) {
            probe.params().values() = w;
            return probe.value(o);
          },
          v.params().values(), v.grad_value(o).values(), 1e-5);
      CHECK(r.max_rel_error <= 1e-6);
      r = oracle::fd_check_gradient([&](const Eigen::VectorXd& t) { return p.with_params(t).entropy(o); },
                                    p.params().values(), p.grad_entropy(o).values(), 1e-5);
      CHECK(r.max_rel_error <= 1e-6);
    }
  }
}

TEST_CASE("intrinsic reward basics") {
  IntrinsicRewardModel irm(Arch{}, 3, 2);
  CHECK(irm.intrinsic_reward(one_hot(3, 0), 1) == 0.0);

  irm.params().values()[1 * 2 + 0] = 1.0;
  CHECK(irm.intrinsic_reward(one_hot(3, 1), 0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  CHECK(irm.intrinsic_reward(one_hot(3, 1), 0) == doctest::Approx(0.7616).epsilon(1e-4));

  IntrinsicRewardModel zero(Arch{}, 3, 2);
  const Eigen::VectorXd g = zero.grad_intrinsic_reward(one_hot(3, 2), 1).values();
  CHECK(g == Eigen::VectorXd::Unit(6, 5));
}

TEST_CASE("intrinsic reward stays in [-1, 1] for large parameters") {
  for (const Arch& arch : kArchs) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      IntrinsicRewardModel irm(arch, 4, 3);
      testing::randomize(irm.params().values(), 10.0, rng);
      for (int a = 0; a < 3; ++a) {
        const double r = irm.intrinsic_reward(observation_for(arch, 4, rng), a);
        CHECK(std::abs(r) <= 1.0);
      }
    }
  }
}

TEST_CASE("value head basics") {
  ValueHead v(Arch{}, 4);
  CHECK(v.value(one_hot(4, 3)) == 0.0);
  CHECK(v.grad_value(one_hot(4, 3)).values() == Eigen::VectorXd::Unit(4, 3));
  ValueHead lin(Arch{ArchKind::linear, {}}, 4);
  CHECK(lin.value(Observation{Eigen::VectorXd::Ones(4)}) == 0.0);
}

TEST_CASE("tabular models reject non one-hot input") {
  PolicyModel p(Arch{}, 3, 2);
  CHECK_THROWS_AS(p.action_dist(Observation{Eigen::VectorXd::Ones(3)}), std::invalid_argument);
}

TEST_CASE("architecture names round trip") {
  for (const Arch& arch : kArchs) CHECK(parse_arch(to_string(arch)) == arch);
  CHECK_THROWS(parse_arch("mlp:"));
  CHECK_THROWS(parse_arch("conv"));
}

TEST_CASE("optimizers") {
  Eigen::VectorXd g = Eigen::VectorXd::Unit(3, 1);
  Optimizer sgd(OptimizerSettings{OptimizerKind::sgd}, 3);
  CHECK(sgd.step(g, 0.1) == 0.1 * g);
  CHECK(sgd.preconditioner() == Eigen::VectorXd::Constant(3, 0.1));
  CHECK(sgd.step(g, 0.0) == Eigen::VectorXd::Zero(3));

  // Constant gradients with fresh accumulators: steps of about lr per coordinate.
  for (OptimizerKind k : {OptimizerKind::rmsprop, OptimizerKind::adam}) {
    Optimizer opt(OptimizerSettings{k}, 2);
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(2, 0.3);
    Eigen::VectorXd step;
    for (int i = 0; i < 5; ++i) step = opt.step(c, 0.01);
    if (k == OptimizerKind::adam) {
      CHECK(step[0] == doctest::Approx(0.01).epsilon(1e-3));
    } else {
      CHECK(step[0] > 0.01);  // the decayed second moment is still small after 5 steps
    }
  }
}

TEST_CASE("optimizer preconditioner is the step's derivative in g") {
  // sgd and rmsprop steps are exactly P * g; adam is too on its first step,
  // before momentum carries anything over.
  for (OptimizerKind k : {OptimizerKind::sgd, OptimizerKind::rmsprop, OptimizerKind::adam}) {
    Rng rng(9);
    Optimizer opt(OptimizerSettings{k}, 4);
    Eigen::VectorXd g(4);
    const int warmup = k == OptimizerKind::adam ? 0 : 3;
    for (int i = 0; i < warmup; ++i) {
      testing::randomize(g, 1.0, rng);
      opt.step(g, 0.05);
    }
    testing::randomize(g, 1.0, rng);
    const Eigen::VectorXd step = opt.step(g, 0.05);
    const Eigen::VectorXd linear = opt.preconditioner().cwiseProduct(g);
    CHECK((step - linear).cwiseAbs().maxCoeff() <= 1e-15);
  }
}
