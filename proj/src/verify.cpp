#include "lirpg/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lirpg::verify {

namespace {

using oracle::FdReport;

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

/// Running worst case of one named check.
struct Worst {
  double value = 0.0;
  std::string detail;
  bool seen = false;

  void offer(double v, const std::string& d) {
    // NaN counts as worse than anything.
    if (!seen || std::isnan(v) || v > value) {
      if (seen && std::isnan(value)) return;
      value = v;
      detail = d;
      seen = true;
    }
  }

  CheckResult result(const std::string& suite, const std::string& name, double tol) const {
    CheckResult c;
    c.suite = suite;
    c.name = name;
    c.value = value;
    c.tolerance = tol;
    c.passed = seen && !std::isnan(value) && value <= tol;
    c.detail = detail;
    return c;
  }
};

void fill_uniform_range(Eigen::VectorXd& v, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& x : v) x = u(rng);
}

Observation random_observation(const Arch& arch, int dim, Rng& rng) {
  Observation o;
  o.features = Eigen::VectorXd::Zero(dim);
  if (arch.kind == ArchKind::tabular) {
    std::uniform_int_distribution<int> pick(0, dim - 1);
    o.features[pick(rng)] = 1.0;
  } else {
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& x : o.features) x = n(rng);
  }
  return o;
}

std::string slice_of(const std::vector<Slice>& layout, Eigen::Index i) {
  for (const auto& s : layout) {
    if (i >= s.offset && i < s.offset + s.size) return s.name + "[" + std::to_string(i - s.offset) + "]";
  }
  return "?";
}

}  // namespace

std::string describe_worst(const FdReport& rep, const std::vector<Slice>& layout) {
  if (rep.worst_index < 0) return "no coordinates";
  const Eigen::Index i = rep.worst_index;
  char buf[256];
  std::snprintf(buf, sizeof buf, "worst coordinate %ld (%s): analytic %.12g, numeric %.12g, abs err %.3g",
                static_cast<long>(i), slice_of(layout, i).c_str(), rep.analytic[i], rep.numeric[i],
                rep.abs_errors[i]);
  return buf;
}

bool Report::passed() const { return failures() == 0; }

std::size_t Report::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed && !c.informational; }));
}

void Report::append(const Report& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

std::string Report::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["failures"] = failures();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e;
    e["suite"] = c.suite;
    e["name"] = c.name;
    e["passed"] = c.passed;
    // json has no inf or nan; those become null.
    e["value"] = std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr);
    e["tolerance"] = c.tolerance;
    e["detail"] = c.detail;
    e["informational"] = c.informational;
    j["checks"].push_back(std::move(e));
  }
  return j.dump(2);
}

void Report::write_text(std::ostream& os) const {
  char buf[512];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%s %-10s %-40s err=%.3e tol=%.1e", c.passed ? "PASS" : (c.informational ? "INFO" : "FAIL"), c.suite.c_str(),
                  c.name.c_str(), c.value, c.tolerance);
    os << buf;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
  }
  os << (passed() ? "all checks passed" : std::to_string(failures()) + " check(s) failed") << '\n';
}

// ---------------------------------------------------------------------------

Report gradients(const Options& opts) {
  const std::vector<Arch> archs{{ArchKind::tabular, {}}, {ArchKind::linear, {}}, {ArchKind::mlp, {8, 6}}};
  constexpr int kActions = 3;
  constexpr int kObservations = 3;
  const double eps = opts.fd_epsilon_models;
  Report out;

  for (const Arch& arch : archs) {
    const int dim = arch.kind == ArchKind::tabular ? 5 : 4;
    Worst log_pi;
    Worst pi;
    Worst entropy;
    Worst in_reward;
    Worst value;
    for (int k = 0; k < opts.model_seeds; ++k) {
      const std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(k);
      Rng rng(seed);
      PolicyModel policy(arch, dim, kActions);
      IntrinsicRewardModel irm(arch, dim, kActions);
      ValueHead head(arch, dim);
      fill_uniform_range(policy.params().values(), -1.0, 1.0, rng);
      fill_uniform_range(irm.params().values(), -1.0, 1.0, rng);
      fill_uniform_range(head.params().values(), -1.0, 1.0, rng);
      const auto theta_layout = policy.params().layout();
      const auto eta_layout = irm.params().layout();

      for (int j = 0; j < kObservations; ++j) {
        const Observation obs = random_observation(arch, dim, rng);
        const std::string where = "seed " + std::to_string(seed) + " obs " + std::to_string(j);
        for (int a = 0; a < kActions; ++a) {
          const std::string at = where + " action " + std::to_string(a) + ": ";

          Eigen::VectorXd analytic = policy.grad_log_pi(obs, a).values();
          if (opts.corrupt_coordinate && *opts.corrupt_coordinate < analytic.size()) {
            analytic[*opts.corrupt_coordinate] += opts.corrupt_amount;
          }
          FdReport r = oracle::fd_check_gradient(
              [&](const Eigen::VectorXd& t) { return policy.with_params(t).log_prob(obs, a); },
              policy.params().values(), analytic, eps);
          log_pi.offer(r.max_rel_error, at + describe_worst(r, theta_layout));

          r = oracle::fd_check_gradient([&](const Eigen::VectorXd& t) { return policy.with_params(t).prob(obs, a); },
                                        policy.params().values(), policy.grad_pi(obs, a).values(), eps);
          pi.offer(r.max_rel_error, at + describe_worst(r, theta_layout));

          r = oracle::fd_check_gradient(
              [&](const Eigen::VectorXd& e) { return irm.with_params(e).intrinsic_reward(obs, a); },
              irm.params().values(), irm.grad_intrinsic_reward(obs, a).values(), eps);
          in_reward.offer(r.max_rel_error, at + describe_worst(r, eta_layout));
        }

        FdReport r = oracle::fd_check_gradient(
            [&](const Eigen::VectorXd& t) { return policy.with_params(t).entropy(obs); }, policy.params().values(),
            policy.grad_entropy(obs).values(), eps);
        entropy.offer(r.max_rel_error, where + ": " + describe_worst(r, theta_layout));

        ValueHead probe = head;
        r = oracle::fd_check_gradient(
            [&](const Eigen::VectorXd& w) {
              probe.params().values() = w;
              return probe.value(obs);
            },
            head.params().values(), head.grad_value(obs).values(), eps);
        value.offer(r.max_rel_error, where + ": " + describe_worst(r, head.params().layout()));
      }
    }
    const std::string tag = to_string(arch);
    const double tol = opts.model_tolerance;
    out.checks.push_back(log_pi.result("gradients", "grad_log_pi/" + tag, tol));
    out.checks.push_back(pi.result("gradients", "grad_pi/" + tag, tol));
    out.checks.push_back(entropy.result("gradients", "grad_entropy/" + tag, tol));
    out.checks.push_back(in_reward.result("gradients", "grad_intrinsic_reward/" + tag, tol));
    out.checks.push_back(value.result("gradients", "grad_value/" + tag, tol));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

struct GammaCase {
  double gamma;
  bool discount_weighting;
  const char* label;
};

}  // namespace

Report estimators(const Options& opts) {
  const double tol = opts.estimator_tolerance;
  const std::vector<GammaCase> cases{{1.0, false, "gamma=1"}, {0.9, true, "gamma=0.9 discounted weighting"}};
  constexpr double kLambda = 0.1;
  constexpr double kAlpha = 0.1;

  Worst pg;
  Worst onpolicy;
  Worst identity;
  Worst offpolicy;
  Worst bandit;
  double offpolicy_grad_scale = 0.0;

  auto chain = make_chain(4, 6);
  auto one_step = make_chain(2, 1);
  Rng rng(opts.seed);

  for (const GammaCase& gc : cases) {
    LirpgConfig cfg;
    cfg.mode = AgentMode::lirpg_mixed;
    cfg.lambda_mix = kLambda;
    cfg.gamma = gc.gamma;
    cfg.discount_state_weighting = gc.discount_weighting;

    for (int d = 0; d < opts.estimator_draws; ++d) {
      const std::string where = std::string(gc.label) + " draw " + std::to_string(d);
      for (Environment* env : {static_cast<Environment*>(chain.get()), static_cast<Environment*>(one_step.get())}) {
        const bool horizon_one = env == one_step.get();
        PolicyModel policy(cfg.policy_arch, env->obs_dim(), env->spec().num_actions);
        IntrinsicRewardModel irm(cfg.irm_arch, env->obs_dim(), env->spec().num_actions);
        fill_uniform_range(policy.params().values(), -1.0, 1.0, rng);
        fill_uniform_range(irm.params().values(), -1.0, 1.0, rng);

        const auto exact = oracle::enumerate_values(*env, policy, irm, kLambda, gc.gamma);
        using oracle::EstimatorKind;
        const auto e_pg = oracle::estimator_expectation(*env, policy, policy, irm, EstimatorKind::policy_gradient, cfg);
        const auto e_on =
            oracle::estimator_expectation(*env, policy, policy, irm, EstimatorKind::onpolicy_extrinsic, cfg);
        const auto e_is_same =
            oracle::estimator_expectation(*env, policy, policy, irm, EstimatorKind::importance_sampled, cfg);

        const PolicyModel stepped =
            policy.with_params(policy.params().values() + kAlpha * exact.exact_grad_theta_mixed.values());
        const auto exact_prime = oracle::enumerate_values(*env, stepped, irm, kLambda, gc.gamma);
        const auto e_is_step =
            oracle::estimator_expectation(*env, policy, stepped, irm, EstimatorKind::importance_sampled, cfg);
        const double off_err = max_abs_diff(e_is_step.values(), exact_prime.exact_grad_theta_ex.values());

        if (horizon_one) {
          bandit.offer(off_err, where);
          continue;
        }
        pg.offer(max_abs_diff(e_pg.values(), exact.exact_grad_theta_mixed.values()), where);
        onpolicy.offer(max_abs_diff(e_on.values(), exact.exact_grad_theta_ex.values()), where);
        identity.offer(std::max(max_abs_diff(e_is_same.values(), e_on.values()),
                                max_abs_diff(e_is_same.values(), exact.exact_grad_theta_ex.values())),
                       where);
        if (off_err >= offpolicy.value) {
          offpolicy_grad_scale = exact_prime.exact_grad_theta_ex.values().cwiseAbs().maxCoeff();
        }
        offpolicy.offer(off_err, where);
      }
    }
  }

  Report out;
  out.checks.push_back(pg.result("estimators", "policy_gradient_mixed", tol));
  out.checks.push_back(onpolicy.result("estimators", "extrinsic_gradient_onpolicy", tol));
  out.checks.push_back(identity.result("estimators", "is_estimator_at_theta", tol));
  CheckResult off = offpolicy.result("estimators", "is_estimator_one_step", tol);
  off.detail += "; exact gradient max |coord| " + fmt("%.3g", offpolicy_grad_scale) +
                " (per-decision ratios keep the state distribution and future returns of theta)";
  // A property of the estimator, not of this implementation; the exact
  // size of the bias is what gets reported.
  off.informational = true;
  out.checks.push_back(std::move(off));
  out.checks.push_back(bandit.result("estimators", "is_estimator_one_step/horizon1", tol));
  return out;
}

// ---------------------------------------------------------------------------

Report bilevel(const Options& opts) {
  const std::vector<double> alphas{0.01, 0.1};
  const std::vector<double> lambdas{0.01, 0.1, 1.0};
  const std::vector<double> gammas{0.9, 0.99};
  auto env = make_chain(4, 6);
  const int A = env->spec().num_actions;
  Rng rng(opts.seed);
  Report out;

  const LirpgConfig defaults;
  for (double alpha : alphas) {
    for (double lambda : lambdas) {
      for (double gamma : gammas) {
        Worst w;
        for (int d = 0; d < opts.bilevel_draws; ++d) {
          PolicyModel policy(defaults.policy_arch, env->obs_dim(), A);
          IntrinsicRewardModel irm(defaults.irm_arch, env->obs_dim(), A);
          fill_uniform_range(policy.params().values(), -1.0, 1.0, rng);
          fill_uniform_range(irm.params().values(), -1.0, 1.0, rng);
          const FdReport r = oracle::fd_check_meta(*env, policy, irm, alpha, lambda, gamma, opts.fd_epsilon_bilevel);
          w.offer(r.max_rel_error, "draw " + std::to_string(d) + ": " + describe_worst(r, irm.params().layout()));
        }
        char name[96];
        std::snprintf(name, sizeof name, "meta_gradient_fd alpha=%g lambda=%g gamma=%g", alpha, lambda, gamma);
        out.checks.push_back(w.result("bilevel", name, opts.bilevel_tolerance));
      }
    }
  }

  // lambda = 0 must give exact zeros, both from the exact expectation and
  // from every individual trajectory.
  double worst_zero = 0.0;
  for (int d = 0; d < 3; ++d) {
    PolicyModel policy(defaults.policy_arch, env->obs_dim(), A);
    IntrinsicRewardModel irm(defaults.irm_arch, env->obs_dim(), A);
    fill_uniform_range(policy.params().values(), -1.0, 1.0, rng);
    fill_uniform_range(irm.params().values(), -1.0, 1.0, rng);
    const Eigen::VectorXd exact = oracle::exact_meta_gradient(*env, policy, irm, 0.1, 0.0, 0.99);
    worst_zero = std::max(worst_zero, exact.cwiseAbs().maxCoeff());
    LirpgConfig cfg;
    cfg.lambda_mix = 0.0;
    const ParamVector g_prime(policy.params().layout(), Eigen::VectorXd::Ones(policy.params().size()));
    const Eigen::VectorXd precond = Eigen::VectorXd::Constant(policy.params().size(), 0.1);
    for (const auto& wt : oracle::enumerate_trajectories(*env, policy)) {
      const MetaGradient m = meta_gradient(wt.traj, policy, irm, g_prime, precond, cfg);
      worst_zero = std::max(worst_zero, m.g_eta.values().cwiseAbs().maxCoeff());
    }
  }
  CheckResult zero;
  zero.suite = "bilevel";
  zero.name = "lambda_zero_exact";
  zero.value = worst_zero;
  zero.tolerance = 0.0;
  zero.passed = worst_zero == 0.0;
  zero.detail = "max |g_eta| with lambda = 0";
  out.checks.push_back(std::move(zero));
  return out;
}

Report run_suite(const std::string& suite, const Options& opts) {
  if (suite == "gradients") return gradients(opts);
  if (suite == "estimators") return estimators(opts);
  if (suite == "bilevel") return bilevel(opts);
  if (suite == "all") {
    Report r = gradients(opts);
    r.append(estimators(opts));
    r.append(bilevel(opts));
    return r;
  }
  throw std::invalid_argument("unknown suite '" + suite + "' (gradients | estimators | bilevel | all)");
}

}  // namespace lirpg::verify
