#include "lirpg/returns.hpp"

#include <cmath>
#include <stdexcept>

namespace lirpg {

void RewardTrace::validate() const {
  if (r_ex.size() != r_in.size()) throw std::invalid_argument("RewardTrace: r_ex and r_in differ in length");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("RewardTrace: gamma outside [0, 1]");
  if (!(lambda_mix >= 0.0)) throw std::invalid_argument("RewardTrace: negative lambda_mix");
}

std::vector<double> discounted_returns(std::span<const double> r, double gamma, double bootstrap) {
  std::vector<double> g(r.size());
  double acc = bootstrap;
  for (std::size_t t = r.size(); t-- > 0;) {
    acc = r[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

std::vector<double> returns_ex(const RewardTrace& trace) {
  trace.validate();
  return discounted_returns(trace.r_ex, trace.gamma);
}

std::vector<double> returns_in(const RewardTrace& trace) {
  trace.validate();
  return discounted_returns(trace.r_in, trace.gamma);
}

std::vector<double> mixed_rewards(const RewardTrace& trace) {
  trace.validate();
  std::vector<double> r(trace.size());
  for (std::size_t t = 0; t < r.size(); ++t) r[t] = trace.r_ex[t] + trace.lambda_mix * trace.r_in[t];
  return r;
}

std::vector<double> returns_mixed(const RewardTrace& trace) {
  return discounted_returns(mixed_rewards(trace), trace.gamma);
}

const char* to_string(AdvantageKind k) {
  switch (k) {
    case AdvantageKind::monte_carlo:
      return "return";
    case AdvantageKind::baseline:
      return "baseline";
    case AdvantageKind::nstep:
      return "nstep";
    case AdvantageKind::gae:
      return "gae";
  }
  return "?";
}

AdvantageKind parse_advantage(const std::string& s) {
  if (s == "return") return AdvantageKind::monte_carlo;
  if (s == "baseline") return AdvantageKind::baseline;
  if (s == "nstep") return AdvantageKind::nstep;
  if (s == "gae") return AdvantageKind::gae;
  throw std::invalid_argument("unknown advantage kind '" + s + "'");
}

namespace {

void check_values(std::span<const double> r, std::span<const double> values) {
  if (values.size() != r.size() + 1) throw std::invalid_argument("values must have length T + 1");
}

}  // namespace

std::vector<double> nstep_returns(std::span<const double> r, std::span<const double> values, double gamma, int n) {
  check_values(r, values);
  if (n < 1) throw std::invalid_argument("nstep_returns: n must be >= 1");
  const std::size_t T = r.size();
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t end = std::min(T, t + static_cast<std::size_t>(n));
    double acc = 0.0;
    double disc = 1.0;
    for (std::size_t k = t; k < end; ++k) {
      acc += disc * r[k];
      disc *= gamma;
    }
    out[t] = acc + disc * values[end];
  }
  return out;
}

AdvantageEstimate gae(std::span<const double> r, std::span<const double> values, double gamma, double lambda_gae) {
  check_values(r, values);
  AdvantageEstimate out{std::vector<double>(r.size()), AdvantageKind::gae, true};
  double acc = 0.0;
  for (std::size_t t = r.size(); t-- > 0;) {
    const double delta = r[t] + gamma * values[t + 1] - values[t];
    acc = delta + gamma * lambda_gae * acc;
    out.values[t] = acc;
  }
  return out;
}

AdvantageEstimate gae(const RewardTrace& trace, std::span<const double> values, double lambda_gae) {
  return gae(mixed_rewards(trace), values, trace.gamma, lambda_gae);
}

AdvantageEstimate compute_advantage(const AdvantageSettings& settings, std::span<const double> r,
                                    std::span<const double> values, double gamma) {
  switch (settings.kind) {
    case AdvantageKind::monte_carlo:
      return {discounted_returns(r, gamma), AdvantageKind::monte_carlo, false};
    case AdvantageKind::baseline: {
      check_values(r, values);
      auto g = discounted_returns(r, gamma, values[r.size()]);
      for (std::size_t t = 0; t < g.size(); ++t) g[t] -= values[t];
      return {std::move(g), AdvantageKind::baseline, true};
    }
    case AdvantageKind::nstep: {
      auto g = nstep_returns(r, values, gamma, settings.nstep);
      for (std::size_t t = 0; t < g.size(); ++t) g[t] -= values[t];
      return {std::move(g), AdvantageKind::nstep, true};
    }
    case AdvantageKind::gae:
      return gae(r, values, gamma, settings.gae_lambda);
  }
  throw std::logic_error("compute_advantage: unhandled kind");
}

CreditKernel credit_kernel(const AdvantageSettings& settings, double gamma) {
  switch (settings.kind) {
    case AdvantageKind::monte_carlo:
    case AdvantageKind::baseline:
      return {gamma, CreditKernel{}.window};
    case AdvantageKind::nstep:
      return {gamma, settings.nstep};
    case AdvantageKind::gae:
      return {gamma * settings.gae_lambda, CreditKernel{}.window};
  }
  throw std::logic_error("credit_kernel: unhandled kind");
}

std::vector<double> forward_credit(std::span<const double> c, const CreditKernel& kernel) {
  std::vector<double> out(c.size(), 0.0);
  if (kernel.window >= static_cast<int>(c.size())) {
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      acc = c[i] + kernel.decay * acc;
      out[i] = acc;
    }
    return out;
  }
  const auto w = static_cast<std::size_t>(kernel.window);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double acc = 0.0;
    double disc = 1.0;
    for (std::size_t k = 0; k < w && k <= i; ++k) {
      acc += disc * c[i - k];
      disc *= kernel.decay;
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace lirpg
