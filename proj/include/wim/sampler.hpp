#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wim/empirical.hpp"
#include "wim/error.hpp"
#include "wim/numeric.hpp"
#include "wim/parallel.hpp"
#include "wim/posterior.hpp"
#include "wim/rng.hpp"

namespace wim {

struct McmcConfig {
  std::size_t chains = 4;
  std::size_t iterations = 20000;
  std::size_t burn_in = 10000;
  std::size_t thin = 5;
  double target_acceptance = 0.3;
  std::uint64_t seed = 1;
  std::vector<double> initial_step;  // per coordinate; empty means 0.5 * max(1, |init|)
  unsigned workers = 0;

  void validate() const {
    if (chains < 1) throw DomainError("McmcConfig: need at least one chain");
    if (burn_in >= iterations) throw DomainError("McmcConfig: burn_in must be smaller than iterations");
    if (thin < 1) throw DomainError("McmcConfig: thin must be at least 1");
    if (!(target_acceptance > 0 && target_acceptance < 1))
      throw DomainError("McmcConfig: target acceptance must lie in (0, 1)");
  }
};

struct McmcResult {
  EmpiricalMeasure draws;
  McmcDiagnostics diagnostics;
};

namespace detail {

// Split R-hat of one coordinate; chains[c] holds that coordinate's retained draws.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  for (const auto& c : chains) {
    std::size_t h = c.size() / 2;
    if (h < 2) return detail::kNaN;
    halves.emplace_back(c.data(), h);
    halves.emplace_back(c.data() + c.size() - h, h);
  }
  std::size_t n = halves.front().size();
  std::vector<double> means, vars;
  for (auto h : halves) {
    means.push_back(numeric::mean(h));
    double sd = numeric::sample_sd(h);
    vars.push_back(sd * sd);
  }
  double w = numeric::mean(vars);
  double b_over_n = numeric::sample_sd(means);
  b_over_n *= b_over_n;
  if (!(w > 0)) return b_over_n > 0 ? detail::kInf : 1.0;
  double var_plus = (static_cast<double>(n) - 1) / static_cast<double>(n) * w + b_over_n;
  return std::sqrt(var_plus / w);
}

// Effective sample size from chain-averaged autocorrelations, truncated by Geyer's
// initial positive sequence.
inline double effective_size(const std::vector<std::vector<double>>& chains) {
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  double total = static_cast<double>(n * chains.size());
  if (n < 4) return total;
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    std::span<const double> s(c.data(), n);
    double mu = numeric::mean(s);
    double v = 0;
    for (double x : s) v += (x - mu) * (x - mu);
    means.push_back(mu);
    vars.push_back(v / static_cast<double>(n));
  }
  auto rho = [&](std::size_t lag) {
    double acc = 0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      if (!(vars[c] > 0)) continue;
      double s = 0;
      for (std::size_t t = 0; t + lag < n; ++t) s += (chains[c][t] - means[c]) * (chains[c][t + lag] - means[c]);
      acc += s / (static_cast<double>(n) * vars[c]);
    }
    return acc / static_cast<double>(chains.size());
  };
  double sum = 0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
    if (pair <= 0) break;
    sum += pair;
  }
  double tau = std::max(1.0, 2 * sum - 1);
  return total / tau;
}

}  // namespace detail

// Componentwise random-walk Metropolis. Each coordinate's proposal scale is adapted
// on the log scale by Robbins-Monro during burn-in and then frozen. Retained draws
// are pooled in chain order.
template <class LogTarget>
McmcResult run_mcmc(LogTarget&& log_target, std::span<const double> init, const McmcConfig& cfg) {
  cfg.validate();
  std::size_t d = init.size();
  if (d == 0) throw DomainError("run_mcmc: empty initial point");
  std::vector<double> x0(init.begin(), init.end());
  if (!std::isfinite(log_target(std::span<const double>(x0))))
    throw DomainError("run_mcmc: log target is not finite at the initial point");
  std::vector<double> step0 = cfg.initial_step;
  if (step0.empty())
    for (double v : x0) step0.push_back(0.5 * std::max(1.0, std::abs(v)));
  if (step0.size() != d) throw DomainError("run_mcmc: initial_step has the wrong length");

  std::size_t keep = (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  std::vector<std::vector<double>> chain_draws(cfg.chains);
  std::vector<double> acceptance(cfg.chains, 0.0);
  std::vector<std::vector<double>> final_step(cfg.chains);

  parallel_for(
      cfg.chains,
      [&](std::size_t c) {
        Rng rng = make_rng(derive_seed(cfg.seed, {0x6d636d63ULL, c}));
        std::normal_distribution<double> gauss;
        std::vector<double> x = x0;
        if (c > 0) {
          std::vector<double> y = x0;
          for (std::size_t k = 0; k < d; ++k) y[k] += 0.5 * step0[k] * gauss(rng);
          if (std::isfinite(log_target(std::span<const double>(y)))) x = y;
        }
        double lp = log_target(std::span<const double>(x));
        std::vector<double> log_step(d);
        for (std::size_t k = 0; k < d; ++k) log_step[k] = std::log(step0[k]);
        std::vector<double> out;
        out.reserve(keep * d);
        std::size_t accepted = 0, proposed = 0;
        std::vector<double> y = x;
        for (std::size_t t = 0; t < cfg.iterations; ++t) {
          bool adapting = t < cfg.burn_in;
          double gamma = std::pow(static_cast<double>(t) + 1.0, -0.6);
          for (std::size_t k = 0; k < d; ++k) {
            y[k] = x[k] + std::exp(log_step[k]) * gauss(rng);
            double lq = log_target(std::span<const double>(y));
            double log_u = std::log(uniform01(rng));
            bool acc = std::isfinite(lq) && log_u < lq - lp;
            if (acc) {
              x[k] = y[k];
              lp = lq;
            } else {
              y[k] = x[k];
            }
            if (adapting) {
              log_step[k] += gamma * ((acc ? 1.0 : 0.0) - cfg.target_acceptance);
              log_step[k] = std::clamp(log_step[k], -40.0, 40.0);
            } else {
              ++proposed;
              if (acc) ++accepted;
            }
          }
          if (!adapting && (t - cfg.burn_in) % cfg.thin == 0) out.insert(out.end(), x.begin(), x.end());
        }
        acceptance[c] = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
        final_step[c].resize(d);
        for (std::size_t k = 0; k < d; ++k) final_step[c][k] = std::exp(log_step[k]);
        chain_draws[c] = std::move(out);
      },
      cfg.workers);

  McmcDiagnostics diag;
  diag.acceptance = acceptance;
  diag.step = final_step.front();
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<std::vector<double>> coord(cfg.chains);
    for (std::size_t c = 0; c < cfg.chains; ++c)
      for (std::size_t i = k; i < chain_draws[c].size(); i += d) coord[c].push_back(chain_draws[c][i]);
    diag.rhat.push_back(cfg.chains >= 2 ? detail::split_rhat(coord) : detail::kNaN);
    diag.ess.push_back(detail::effective_size(coord));
  }
  if (std::all_of(acceptance.begin(), acceptance.end(), [](double a) { return a < 0.01; })) {
    std::string msg = "run_mcmc: all chains stuck (acceptance";
    for (double a : acceptance) msg += " " + detail::fmt(a);
    throw SamplerError(msg + ")");
  }
  std::vector<double> pooled;
  for (auto& c : chain_draws) pooled.insert(pooled.end(), c.begin(), c.end());
  return {EmpiricalMeasure(std::move(pooled), d), std::move(diag)};
}

// Posterior of a scalar model: the conjugate form when one exists, MCMC otherwise.
inline Posterior posterior_for(const BayesModel& model, const McmcConfig& cfg) {
  model.validate();
  if (model.likelihood.dim() != 1) throw DimensionError("posterior_for: scalar models only");
  if (is_conjugate(model)) return conjugate_update(model);
  auto [lo, hi] = model.likelihood.support();
  double n = static_cast<double>(model.data.size());
  double init = 0.0;
  switch (model.likelihood.kind) {
    case LikelihoodKind::PoissonIID: init = std::max(model.sum() / n, 0.5); break;
    case LikelihoodKind::BinomialCount:
      init = std::clamp(model.sum() / (n * static_cast<double>(model.likelihood.trials)), 0.05, 0.95);
      break;
    case LikelihoodKind::NormalKnownMean: init = std::max(model.sum_sq_dev(model.likelihood.mu) / n, 1e-3); break;
    default: break;
  }
  init = std::clamp(init, std::nextafter(lo, hi), std::nextafter(hi, lo));
  McmcConfig c = cfg;
  if (c.initial_step.empty())
    c.initial_step = {model.likelihood.kind == LikelihoodKind::BinomialCount ? 0.1 : 0.2 * init};
  auto res = run_mcmc([&](std::span<const double> th) { return log_posterior_unnorm(model, th[0]); },
                      std::vector<double>{init}, c);
  return Posterior::sampled(std::move(res.draws), std::move(res.diagnostics),
                            model.likelihood.name() + "|" + model.prior.describe() + "|mcmc");
}

struct SkewNormalFit {
  Posterior alpha;            // marginal of the skewness
  EmpiricalMeasure joint;     // (mu, log sigma, alpha)
};

inline SkewNormalFit fit_skew_normal(std::span<const double> data, const PriorSpec& skewness_prior,
                                     const McmcConfig& cfg) {
  if (data.size() < 3) throw DomainError("fit_skew_normal: need at least 3 observations");
  if (skewness_prior.kind() != PriorSpec::Kind::Proper && skewness_prior.kind() != PriorSpec::Kind::Custom)
    throw ImproperPosteriorError("fit_skew_normal: skewness prior " + skewness_prior.describe() +
                                 " gives an improper posterior when mu and log sigma are flat");
  BayesModel model{Likelihood::skew_normal(), skewness_prior, std::vector<double>(data.begin(), data.end())};
  model.validate();
  double mu = numeric::mean(data);
  double sd = std::max(numeric::sample_sd(data), 1e-8);
  std::vector<double> init{mu, std::log(sd), 0.0};
  McmcConfig c = cfg;
  if (c.initial_step.empty()) c.initial_step = {0.2 * sd, 0.2, 1.0};
  auto res = run_mcmc([&](std::span<const double> th) { return log_posterior_unnorm(model, th); }, init, c);
  EmpiricalMeasure alpha = res.draws.marginal(2);
  return {Posterior::sampled(std::move(alpha), res.diagnostics, "skewnormal|" + skewness_prior.describe() + "|mcmc"),
          std::move(res.draws)};
}

struct LogisticMle {
  double beta0 = 0.0;
  double beta1 = 0.0;
  int iterations = 0;
};

// Newton-Raphson for the two-parameter logistic dose-response log-likelihood.
inline LogisticMle logistic_mle(std::span<const double> doses, std::span<const long> trials,
                                std::span<const double> successes, double tol = 1e-10, int max_iter = 200) {
  if (doses.size() != trials.size() || doses.size() != successes.size() || doses.empty())
    throw DomainError("logistic_mle: doses, trials and successes must have equal, nonzero length");
  LogisticMle m;
  for (int it = 1; it <= max_iter; ++it) {
    double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
    for (std::size_t i = 0; i < doses.size(); ++i) {
      double eta = m.beta0 + m.beta1 * doses[i];
      double p = 1 / (1 + std::exp(-eta));
      double n = static_cast<double>(trials[i]);
      double r = successes[i] - n * p;
      double w = n * p * (1 - p);
      g0 += r;
      g1 += r * doses[i];
      h00 += w;
      h01 += w * doses[i];
      h11 += w * doses[i] * doses[i];
    }
    double det = h00 * h11 - h01 * h01;
    if (!(det > 1e-300) || !std::isfinite(det)) throw DivergenceError("logistic_mle: information matrix is singular");
    double d0 = (h11 * g0 - h01 * g1) / det;
    double d1 = (h00 * g1 - h01 * g0) / det;
    m.beta0 += d0;
    m.beta1 += d1;
    m.iterations = it;
    if (!std::isfinite(m.beta0) || !std::isfinite(m.beta1) || std::abs(m.beta0) > 1e8 || std::abs(m.beta1) > 1e8)
      throw DivergenceError("logistic_mle: estimates diverge (separated data?)");
    if (std::abs(d0) + std::abs(d1) < tol) return m;
  }
  throw DivergenceError("logistic_mle: no convergence within the iteration limit");
}

struct DoseScaling {
  double mean = 0.0;
  double sd = 1.0;

  double to_standard(double x) const { return (x - mean) / (2 * sd); }
  double to_original(double z) const { return mean + 2 * sd * z; }
};

// Rescales doses to mean 0 and standard deviation 1/2.
inline DoseScaling dose_scaling(std::span<const double> doses) {
  DoseScaling s{numeric::mean(doses), numeric::sample_sd(doses)};
  if (!(s.sd > 0)) throw DomainError("need at least two distinct doses");
  return s;
}

// Prior on (beta0, beta1): Cauchy(0, 10) intercept and Cauchy(0, slope_scale) slope,
// or flat on the plane when slope_scale is empty.
inline PriorSpec logistic_prior(std::optional<double> slope_scale) {
  if (!slope_scale) return PriorSpec::flat_plane();
  Distribution intercept = Distribution::cauchy(0, 10);
  Distribution slope = Distribution::cauchy(0, *slope_scale);
  return PriorSpec::custom(
      [intercept, slope](std::span<const double> th) { return intercept.log_pdf(th[0]) + slope.log_pdf(th[1]); },
      "cauchy:0:10+cauchy:0:" + detail::fmt(*slope_scale));
}

struct LogisticFit {
  Posterior joint;              // (beta0, beta1) on the standardized dose scale
  EmpiricalMeasure ld50;        // original dose scale
  std::size_t ld50_excluded = 0;
  DoseScaling scaling;
};

inline LogisticFit fit_logistic(std::span<const double> doses, std::span<const long> trials,
                                std::span<const double> successes, std::optional<double> slope_prior_scale,
                                const McmcConfig& cfg) {
  DoseScaling sc = dose_scaling(doses);
  std::vector<double> z;
  for (double x : doses) z.push_back(sc.to_standard(x));
  BayesModel model{Likelihood::logistic(z, std::vector<long>(trials.begin(), trials.end())),
                   logistic_prior(slope_prior_scale), std::vector<double>(successes.begin(), successes.end())};
  model.validate();
  std::vector<double> init{0.0, 1.0};
  try {
    auto m = logistic_mle(z, trials, successes);
    init = {m.beta0, m.beta1};
  } catch (const DivergenceError&) {
  }
  McmcConfig c = cfg;
  if (c.initial_step.empty()) c.initial_step = {0.5, 1.0};
  auto res = run_mcmc([&](std::span<const double> th) { return log_posterior_unnorm(model, th); }, init, c);

  std::vector<double> ld;
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < res.draws.size(); ++i) {
    auto th = res.draws.point(i);
    if (std::abs(th[1]) < 1e-12) {
      ++excluded;
      continue;
    }
    ld.push_back(sc.to_original(-th[0] / th[1]));
  }
  if (ld.empty()) throw SamplerError("fit_logistic: no draw has a usable slope");
  Posterior joint =
      Posterior::sampled(std::move(res.draws), std::move(res.diagnostics), "logistic|" + model.prior.describe() + "|mcmc");
  return {std::move(joint), EmpiricalMeasure::from_1d(std::move(ld)), excluded, sc};
}

}  // namespace wim
