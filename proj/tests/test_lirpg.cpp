#include "helpers.hpp"

#include "lirpg/lirpg.hpp"
#include "lirpg/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lirpg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LirpgConfig plain_config(double lambda, double gamma) {
  LirpgConfig cfg;
  cfg.mode = AgentMode::lirpg_mixed;
  cfg.lambda_mix = lambda;
  cfg.gamma = gamma;
  cfg.entropy_coef = 0.0;
  cfg.clip_norm = kInf;
  return cfg;
}

AgentState random_agent(const Environment& env, const LirpgConfig& cfg, Rng& rng, double scale = 1.0) {
  AgentState a = AgentState::create(env.obs_dim(), env.num_actions(), cfg, rng);
  testing::randomize(a.policy.params().values(), scale, rng);
  testing::randomize(a.irm.params().values(), scale, rng);
  return a;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("mode names round trip") {
  for (AgentMode m : {AgentMode::extrinsic_only, AgentMode::live_bonus, AgentMode::lirpg_mixed,
                      AgentMode::lirpg_intrinsic_only}) {
    CHECK(parse_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_mode("lirpg"), std::invalid_argument);
}

TEST_CASE("agent creation initializes policy and values but not eta") {
  auto env = make_chain(4, 6);
  LirpgConfig cfg;
  Rng rng(1);
  const AgentState a = AgentState::create(env->obs_dim(), 2, cfg, rng);
  CHECK(max_abs(a.policy.params().values()) <= cfg.init_scale);
  CHECK(max_abs(a.policy.params().values()) > 0.0);
  CHECK(a.irm.params().values().isZero(0.0));
  Rng again(1);
  const AgentState b = AgentState::create(env->obs_dim(), 2, cfg, again);
  CHECK(a.policy.params().values() == b.policy.params().values());
}

TEST_CASE("with lambda zero the policy gradient is textbook REINFORCE") {
  auto env = testing::random_mdp(4, 3, 5, 2);
  const LirpgConfig cfg = plain_config(0.0, 0.95);
  Rng rng(3);
  AgentState agent = random_agent(*env, cfg, rng);
  for (int rep = 0; rep < 10; ++rep) {
    const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
    const auto g = discounted_returns(traj.extrinsic_rewards(), 0.95);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(agent.policy.params().size());
    for (std::size_t t = 0; t < traj.size(); ++t) {
      expected += g[t] * agent.policy.grad_log_pi(traj.steps[t].obs, traj.steps[t].action).values();
    }
    CHECK(max_abs(policy_gradient_mixed(traj, agent, cfg).g.values() - expected) <= 1e-12);
  }
}

TEST_CASE("one-step policy gradient by hand") {
  // Deterministic one-step MDP with two actions paying 1 and 0.
  MdpSpec m = MdpSpec::zeros(2, 2, 1);
  m.prob(0, 0, 1) = m.prob(0, 1, 1) = m.prob(1, 0, 1) = m.prob(1, 1, 1) = 1.0;
  m.r(0, 0) = 1.0;
  m.initial_dist[0] = 1.0;
  MdpEnvironment env(m, MdpEnvironment::one_hot_features(2), "bandit");
  const LirpgConfig cfg = plain_config(0.0, 1.0);
  Rng rng(4);
  AgentState agent = random_agent(env, cfg, rng);
  const Eigen::VectorXd pi = agent.policy.action_dist(env.observe(0));
  for (int rep = 0; rep < 10; ++rep) {
    const Trajectory traj = sample_trajectory(env, agent.policy, rng);
    REQUIRE(traj.size() == 1);
    const int a = traj.steps[0].action;
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
    expected.segment(0, 2) = (a == 0 ? 1.0 : 0.0) * (Eigen::VectorXd::Unit(2, a) - pi);
    CHECK(max_abs(policy_gradient_mixed(traj, agent, cfg).g.values() - expected) <= 1e-12);
  }
}

TEST_CASE("policy gradient expectation equals the exact mixed gradient") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto env = testing::random_mdp(4, 2, 3, seed);
    LirpgConfig cfg = plain_config(0.3, 0.9);
    cfg.discount_state_weighting = true;
    Rng rng(seed);
    AgentState agent = random_agent(*env, cfg, rng);
    const auto exact = oracle::enumerate_values(*env, agent.policy, agent.irm, 0.3, 0.9);
    const auto expectation = oracle::estimator_expectation(*env, agent.policy, agent.policy, agent.irm,
                                                           oracle::EstimatorKind::policy_gradient, cfg);
    CHECK(max_abs(expectation.values() - exact.exact_grad_theta_mixed.values()) <= 1e-10);
  }
}

TEST_CASE("policy gradient clipping") {
  auto env = make_chain(4, 6);
  LirpgConfig cfg = plain_config(0.0, 1.0);
  cfg.clip_norm = 1e-3;
  Rng rng(5);
  AgentState agent = random_agent(*env, cfg, rng);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pg = policy_gradient_mixed(sample_trajectory(*env, agent.policy, rng), agent, cfg);
    CHECK(pg.g.values().norm() <= 1e-3 * (1.0 + 1e-12));
    if (pg.raw_norm > 1e-3) CHECK(pg.clip_scale == doctest::Approx(1e-3 / pg.raw_norm));
  }
}

TEST_CASE("theta update") {
  auto env = make_chain(4, 6);
  LirpgConfig cfg = plain_config(0.0, 1.0);
  Rng rng(6);
  AgentState agent = random_agent(*env, cfg, rng);
  const Eigen::VectorXd before = agent.policy.params().values();
  ParamVector g = agent.policy.params().zeros_like();
  g.values()[3] = 1.0;
  const ThetaUpdate up = update_theta(agent, g, cfg);
  CHECK(up.theta_prime.values() - before == 0.1 * g.values());
  CHECK(agent.policy.params().values() == before);

  cfg.alpha = 0.0;
  CHECK(update_theta(agent, g, cfg).theta_prime.values() == before);

  g.values()[0] = std::nan("");
  CHECK_THROWS_AS(update_theta(agent, g, cfg), NonFiniteError);
}

TEST_CASE("importance-sampled gradient at theta' = theta is the on-policy estimator") {
  auto env = testing::random_mdp(5, 3, 6, 8);
  const LirpgConfig cfg = plain_config(0.1, 0.97);
  Rng rng(8);
  AgentState agent = random_agent(*env, cfg, rng);
  for (int rep = 0; rep < 20; ++rep) {
    const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
    IsDiagnostics d;
    const auto is = extrinsic_gradient_is(traj, agent.policy, agent.policy, nullptr, cfg, &d);
    const auto on = extrinsic_gradient_onpolicy(traj, agent.policy, nullptr, cfg);
    CHECK(max_abs(is.values() - on.values()) <= 1e-12);
    CHECK(d.mean_ratio == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("importance-sampled gradient vanishes without extrinsic reward") {
  auto env = make_chain(6, 3);  // the goal is out of reach
  const LirpgConfig cfg = plain_config(0.1, 0.99);
  Rng rng(9);
  AgentState agent = random_agent(*env, cfg, rng);
  const PolicyModel target = agent.policy.with_params(agent.policy.params().values() * 1.5);
  const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
  CHECK(extrinsic_gradient_is(traj, agent.policy, target, nullptr, cfg).values().isZero(0.0));
}

TEST_CASE("importance-sampled expectation on a one-step problem is the exact gradient at theta'") {
  auto env = testing::random_mdp(3, 3, 1, 10);
  const LirpgConfig cfg = plain_config(0.1, 1.0);
  Rng rng(10);
  for (int rep = 0; rep < 5; ++rep) {
    AgentState agent = random_agent(*env, cfg, rng);
    const auto exact = oracle::enumerate_values(*env, agent.policy, agent.irm, 0.1, 1.0);
    const PolicyModel target =
        agent.policy.with_params(agent.policy.params().values() + 0.5 * exact.exact_grad_theta_mixed.values());
    const auto at_target = oracle::enumerate_values(*env, target, agent.irm, 0.1, 1.0);
    const auto e = oracle::estimator_expectation(*env, agent.policy, target, agent.irm,
                                                 oracle::EstimatorKind::importance_sampled, cfg);
    CHECK(max_abs(e.values() - at_target.exact_grad_theta_ex.values()) <= 1e-10);
  }
}

TEST_CASE("importance-sampled expectation off-policy is biased on a three-step problem") {
  // Per-decision ratios correct the action at step t only; the visited-state
  // distribution and the later returns still come from theta.
  auto env = testing::random_mdp(4, 2, 3, 11);
  const LirpgConfig cfg = plain_config(0.1, 1.0);
  Rng rng(11);
  AgentState agent = random_agent(*env, cfg, rng);
  const auto exact = oracle::enumerate_values(*env, agent.policy, agent.irm, 0.1, 1.0);
  const PolicyModel target =
      agent.policy.with_params(agent.policy.params().values() + 0.1 * exact.exact_grad_theta_mixed.values());
  const auto at_target = oracle::enumerate_values(*env, target, agent.irm, 0.1, 1.0);
  const auto e = oracle::estimator_expectation(*env, agent.policy, target, agent.irm,
                                               oracle::EstimatorKind::importance_sampled, cfg);
  const double bias = max_abs(e.values() - at_target.exact_grad_theta_ex.values());
  CHECK(bias > 1e-8);
  CHECK(bias < 0.1 * max_abs(at_target.exact_grad_theta_ex.values()));
}

TEST_CASE("meta-gradient is exactly zero without intrinsic weight") {
  auto env = make_chain(4, 6);
  LirpgConfig cfg = plain_config(0.0, 0.99);
  Rng rng(12);
  AgentState agent = random_agent(*env, cfg, rng);
  ParamVector g = agent.policy.params().zeros_like();
  g.values().setOnes();
  for (int rep = 0; rep < 10; ++rep) {
    const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
    CHECK(meta_gradient(traj, agent, g, cfg).g_eta.values().isZero(0.0));
  }
  cfg.lambda_mix = 0.5;
  cfg.mode = AgentMode::extrinsic_only;
  CHECK(meta_gradient(sample_trajectory(*env, agent.policy, rng), agent, g, cfg).g_eta.values().isZero(0.0));
}

TEST_CASE("meta-gradient on a one-step trajectory by hand") {
  auto env = testing::random_mdp(3, 2, 1, 13);
  const LirpgConfig cfg = plain_config(0.2, 0.9);
  Rng rng(13);
  AgentState agent = random_agent(*env, cfg, rng);
  ParamVector g = agent.policy.params().zeros_like();
  testing::randomize(g.values(), 1.0, rng);
  const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
  REQUIRE(traj.size() == 1);
  const Step& s = traj.steps[0];
  const double c0 = g.values().dot(agent.policy.grad_log_pi(s.obs, s.action).values());
  const Eigen::VectorXd expected = cfg.alpha * cfg.lambda_mix * c0 * agent.irm.grad_intrinsic_reward(s.obs, s.action).values();
  CHECK(max_abs(meta_gradient(traj, agent, g, cfg).g_eta.values() - expected) <= 1e-15);
}

TEST_CASE("matrix-free meta-gradient equals the materialized Jacobian product") {
  const std::vector<AdvantageSettings> kinds{{AdvantageKind::monte_carlo}, {AdvantageKind::nstep, 0.95, 2},
                                             {AdvantageKind::gae, 0.7, 5}};
  for (const Arch& arch : {Arch{}, Arch{ArchKind::mlp, {3}}}) {
    for (const auto& adv : kinds) {
      auto env = testing::random_mdp(4, 3, 6, 14);
      LirpgConfig cfg = plain_config(0.3, 0.9);
      cfg.policy_arch = cfg.irm_arch = cfg.value_arch = arch;
      cfg.policy_advantage = adv.kind;
      cfg.nstep = adv.nstep;
      cfg.gae_lambda = adv.gae_lambda;
      cfg.discount_state_weighting = true;
      Rng rng(14);
      AgentState agent = random_agent(*env, cfg, rng);
      REQUIRE(agent.policy.params().size() <= 60);
      REQUIRE(agent.irm.params().size() <= 60);
      ParamVector g = agent.policy.params().zeros_like();
      testing::randomize(g.values(), 1.0, rng);
      const CreditKernel k = credit_kernel(cfg.policy_advantage_settings(), cfg.gamma);

      for (int rep = 0; rep < 5; ++rep) {
        const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
        const auto w = state_weights(traj.size(), cfg);
        // d theta' / d eta = alpha * lambda * sum_{t <= i} w_t k(i - t) score_t grad_r_i^T
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(agent.policy.params().size(), agent.irm.params().size());
        for (std::size_t t = 0; t < traj.size(); ++t) {
          const Eigen::VectorXd score = agent.policy.grad_log_pi(traj.steps[t].obs, traj.steps[t].action).values();
          for (std::size_t i = t; i < traj.size(); ++i) {
            if (static_cast<long>(i - t) >= k.window) continue;
            const Eigen::VectorXd gr =
                agent.irm.grad_intrinsic_reward(traj.steps[i].obs, traj.steps[i].action).values();
            jac += cfg.alpha * cfg.lambda_mix * w[t] * std::pow(k.decay, static_cast<double>(i - t)) * score *
                   gr.transpose();
          }
        }
        const Eigen::VectorXd explicit_product = jac.transpose() * g.values();
        const Eigen::VectorXd matrix_free = meta_gradient(traj, agent, g, cfg).g_eta.values();
        CHECK(max_abs(matrix_free - explicit_product) <= 1e-12);

        // And the materialized Jacobian is the actual derivative of theta'.
        if (adv.kind == AdvantageKind::monte_carlo) {
          auto theta_prime = [&](const Eigen::VectorXd& eta) {
            AgentState probe = agent;
            probe.irm.params().values() = eta;
            return Eigen::VectorXd(cfg.alpha * policy_gradient_mixed(traj, probe, cfg).g.values());
          };
          const Eigen::VectorXd eta = agent.irm.params().values();
          for (Eigen::Index j = 0; j < eta.size(); ++j) {
            Eigen::VectorXd up = eta;
            Eigen::VectorXd down = eta;
            up[j] += 1e-6;
            down[j] -= 1e-6;
            const Eigen::VectorXd col = (theta_prime(up) - theta_prime(down)) / 2e-6;
            CHECK(max_abs(col - jac.col(j)) <= 1e-7);
          }
        }
      }
    }
  }
}

TEST_CASE("eta update") {
  auto env = make_chain(4, 6);
  LirpgConfig cfg = plain_config(0.1, 0.99);
  cfg.eta_optimizer = OptimizerKind::sgd;
  cfg.clip_norm = 1.0;
  Rng rng(15);
  AgentState agent = random_agent(*env, cfg, rng);
  MetaGradient meta;
  meta.g_eta = agent.irm.params().zeros_like();
  meta.g_eta.values()[2] = 0.5;

  const Eigen::VectorXd before = agent.irm.params().values();
  cfg.beta = 0.0;
  update_eta(agent, meta, cfg);
  CHECK(agent.irm.params().values() == before);

  cfg.beta = 0.1;
  update_eta(agent, meta, cfg);
  CHECK(max_abs(agent.irm.params().values() - before - 0.1 * meta.g_eta.values()) <= 1e-15);

  const Eigen::VectorXd mid = agent.irm.params().values();
  meta.g_eta.values().setZero();
  meta.g_eta.values()[1] = 2.0;  // twice the clip norm
  CHECK(update_eta(agent, meta, cfg) == 2.0);
  CHECK((agent.irm.params().values() - mid).norm() == doctest::Approx(0.1 * 1.0).epsilon(1e-12));
}

TEST_CASE("value regression") {
  auto env = make_chain(4, 6);
  Rng rng(16);
  ValueHead head(Arch{}, 4);
  Optimizer opt(OptimizerSettings{}, 4);
  Trajectory traj;
  traj.steps.push_back(Step{env->observe(0), 0, 1, 0.0, true, 0.0});

  const std::vector<double> target{1.0};
  regress_value(head, opt, traj, target, 0.5);
  CHECK(head.value(env->observe(0)) == 0.5);

  testing::randomize(head.params().values(), 1.0, rng);
  const Eigen::VectorXd before = head.params().values();
  const std::vector<double> same{head.value(env->observe(0))};
  regress_value(head, opt, traj, same, 0.5);
  CHECK(head.params().values() == before);
}

TEST_CASE("value heads follow their own step sizes") {
  auto env = make_chain(4, 6);
  LirpgConfig cfg = plain_config(0.1, 0.9);
  cfg.eta_optimizer = OptimizerKind::sgd;
  for (double xi : {0.001, 0.01, 0.1, 1.0}) {
    cfg.xi = xi;
    CHECK_NOTHROW(cfg.validate());
  }
  cfg.xi = 0.0;
  cfg.value_coef = 0.0;
  Rng rng(17);
  AgentState agent = random_agent(*env, cfg, rng);
  const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
  const Eigen::VectorXd v1 = agent.policy_value.params().values();
  const Eigen::VectorXd v2 = agent.ex_value.params().values();
  train_value_heads(traj, agent, intrinsic_rewards(traj, agent, cfg), cfg);
  CHECK(agent.policy_value.params().values() == v1);
  CHECK(agent.ex_value.params().values() == v2);
}

TEST_CASE("live bonus adds a discounted constant to every return") {
  auto env = testing::random_mdp(4, 2, 7, 18);
  LirpgConfig cfg = plain_config(0.0, 0.9);
  cfg.mode = AgentMode::live_bonus;
  cfg.live_bonus = 0.01;
  Rng rng(18);
  AgentState agent = random_agent(*env, cfg, rng);
  const Trajectory traj = sample_trajectory(*env, agent.policy, rng);
  const auto r_in = intrinsic_rewards(traj, agent, cfg);
  const auto mixed = returns_mixed(policy_reward_trace(traj, r_in, cfg));
  const auto ex = discounted_returns(traj.extrinsic_rewards(), 0.9);
  const std::size_t T = traj.size();
  for (std::size_t t = 0; t < T; ++t) {
    const double bonus = 0.01 * (1.0 - std::pow(0.9, static_cast<double>(T - t))) / (1.0 - 0.9);
    CHECK(std::abs(mixed[t] - (ex[t] + bonus)) <= 1e-12);
  }
  CHECK(intrinsic_weight(cfg) == 0.0);
}

TEST_CASE("degenerate lirpg reproduces the extrinsic-only learner") {
  auto env = make_chain(5, 12);
  LirpgConfig base;
  base.lambda_mix = 0.0;
  base.beta = 0.0;
  for (AdvantageKind adv : {AdvantageKind::monte_carlo, AdvantageKind::baseline}) {
    base.policy_advantage = base.meta_advantage = adv;
    LirpgConfig ex = base;
    ex.mode = AgentMode::extrinsic_only;
    LirpgConfig mixed = base;
    mixed.mode = AgentMode::lirpg_mixed;
    Rng ra(21);
    Rng rb(21);
    AgentState a = AgentState::create(env->obs_dim(), 2, ex, ra);
    AgentState b = AgentState::create(env->obs_dim(), 2, mixed, rb);
    auto env_a = env->clone();
    auto env_b = env->clone();
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
      run_iteration(a, *env_a, ex, ra);
      const IterationReport rep = run_iteration(b, *env_b, mixed, rb);
      worst = std::max(worst, max_abs(a.policy.params().values() - b.policy.params().values()));
      CHECK(rep.eta_grad_norm == 0.0);
    }
    CHECK(worst <= 1e-12);
    CHECK(b.irm.params().values().isZero(0.0));
  }
}

TEST_CASE("learning on a chain beats the uniform policy") {
  auto env = make_chain(6, 20);
  const double uniform = oracle::dp_uniform_value(env->spec(), 1.0);
  for (AgentMode mode : {AgentMode::extrinsic_only, AgentMode::lirpg_mixed}) {
    LirpgConfig cfg;
    cfg.mode = mode;
    cfg.policy_advantage = cfg.meta_advantage = AdvantageKind::baseline;
    Rng rng(22);
    AgentState agent = AgentState::create(env->obs_dim(), 2, cfg, rng);
    for (int it = 0; it < 200; ++it) run_iteration(agent, *env, cfg, rng);
    CHECK(oracle::dp_policy_value(*env, agent.policy, 1.0) > uniform);
  }
}

TEST_CASE("long runs stay finite and keep intrinsic rewards bounded") {
  EnvConfig grid;
  grid.name = "gridworld";
  grid.encoding = ObsEncoding::coords;
  grid.horizon = 15;
  auto env = make_env(grid);
  LirpgConfig cfg;
  cfg.policy_arch = cfg.irm_arch = cfg.value_arch = Arch{ArchKind::mlp, {8}};
  cfg.optimizer = OptimizerKind::adam;
  cfg.alpha = 0.05;
  cfg.beta = 0.05;
  cfg.lambda_mix = 1.0;
  cfg.policy_advantage = AdvantageKind::gae;
  cfg.meta_advantage = AdvantageKind::baseline;
  Rng rng(23);
  AgentState agent = AgentState::create(env->obs_dim(), env->num_actions(), cfg, rng);
  bool finite = true;
  double max_in = 0.0;
  for (int it = 0; it < 10'000; ++it) {
    const Trajectory traj = sample_trajectory(*env->clone(), agent.policy, rng);
    for (double r : intrinsic_rewards(traj, agent, cfg)) max_in = std::max(max_in, std::abs(r));
    run_iteration(agent, *env, cfg, rng);
    finite = finite && agent.policy.params().all_finite() && agent.irm.params().all_finite() &&
             agent.policy_value.params().all_finite() && agent.ex_value.params().all_finite();
  }
  CHECK(finite);
  CHECK(max_in <= 1.0);
}
