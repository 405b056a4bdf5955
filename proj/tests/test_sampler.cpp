#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "wim/experiment.hpp"
#include "wim/sampler.hpp"

using namespace wim;

namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

double ks_to(std::vector<double> xs, const Distribution& d) {
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size()), worst = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = d.cdf(xs[i]);
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return worst;
}

McmcConfig long_run(std::uint64_t seed) {
  McmcConfig c;
  c.iterations = 60000;
  c.burn_in = 10000;
  c.thin = 5;
  c.seed = seed;
  return c;
}

// Centre of the fullest bin of a 100-bin histogram over the central 98%.
double histogram_mode(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double lo = numeric::quantile_sorted(xs, 0.01), hi = numeric::quantile_sorted(xs, 0.99);
  std::vector<int> bins(100, 0);
  for (double x : xs)
    if (x >= lo && x < hi) ++bins[static_cast<std::size_t>((x - lo) / (hi - lo) * 100)];
  auto k = std::max_element(bins.begin(), bins.end()) - bins.begin();
  return lo + (static_cast<double>(k) + 0.5) * (hi - lo) / 100;
}

}  // namespace

TEST(Sampler, StandardNormalTarget) {
  McmcConfig cfg;
  cfg.seed = 3;
  double init[] = {0.5};
  auto r = run_mcmc([](std::span<const double> x) { return -0.5 * x[0] * x[0]; }, init, cfg);
  auto xs = vec(r.draws.marginal(0).sorted());
  EXPECT_NEAR(numeric::mean(xs), 0, 0.05);
  EXPECT_NEAR(numeric::sample_sd(xs), 1, 0.05);
  ASSERT_EQ(r.diagnostics.rhat.size(), 1u);
  EXPECT_LT(r.diagnostics.rhat[0], 1.02);
  EXPECT_GE(r.diagnostics.rhat[0], 1 - 1e-3);
  for (double a : r.diagnostics.acceptance) {
    EXPECT_GT(a, 0.15);
    EXPECT_LT(a, 0.5);
  }
  EXPECT_EQ(r.draws.size(), 4u * 2000u);
}

TEST(Sampler, ConjugateOracles) {
  std::vector<BayesModel> models{
      {Likelihood::poisson(), PriorSpec::proper(Distribution::gamma(2.5, 2.5)), {3, 7, 4, 5, 6, 2, 5, 4, 8, 6}},
      {Likelihood::binomial(20), PriorSpec::proper(Distribution::beta(0.5, 0.5)), {13}},
      {Likelihood::normal_known_mean(0), PriorSpec::proper(Distribution::inverse_gamma(1, 1)),
       {0.4, -1.3, 2.2, 0.9, -0.7, 1.1, -2.0, 0.3, 1.6, -0.5}}};
  std::uint64_t seed = 40;
  for (const auto& m : models) {
    auto exact = conjugate_update(m).distribution();
    double init[] = {exact.mean()};
    McmcConfig cfg = long_run(++seed);
    cfg.initial_step = {std::sqrt(exact.variance())};
    auto r = run_mcmc([&](std::span<const double> th) { return log_posterior_unnorm(m, th[0]); }, init, cfg);
    EXPECT_LT(ks_to(vec(r.draws.marginal(0).sorted()), exact), 0.02) << exact.describe();
  }
}

TEST(Sampler, DetailedBalanceOnStepTarget) {
  const double w[] = {0.1, 0.3, 0.15, 0.25, 0.2};
  auto target = [&](std::span<const double> x) {
    if (!(x[0] >= 0 && x[0] < 5)) return -detail::kInf;
    return std::log(w[static_cast<int>(x[0])]);
  };
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.iterations = 510000;
  cfg.burn_in = 10000;
  cfg.thin = 1;
  cfg.seed = 5;
  double init[] = {2.5};
  auto r = run_mcmc(target, init, cfg);
  std::vector<double> freq(5, 0);
  auto xs = vec(r.draws.marginal(0).sorted());
  for (double x : xs) freq[static_cast<std::size_t>(x)] += 1.0 / static_cast<double>(xs.size());
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(freq[k], w[k], 0.01) << "state " << k;
}

TEST(Sampler, Errors) {
  double outside[] = {-1.0};
  auto logpos = [](std::span<const double> x) { return x[0] > 0 ? -x[0] : -detail::kInf; };
  EXPECT_THROW(run_mcmc(logpos, outside, McmcConfig{}), DomainError);

  McmcConfig bad;
  bad.burn_in = bad.iterations;
  double one[] = {1.0};
  EXPECT_THROW(run_mcmc(logpos, one, bad), DomainError);
  bad = {};
  bad.thin = 0;
  EXPECT_THROW(run_mcmc(logpos, one, bad), DomainError);

  // Only the initial point has positive density, so nothing is ever accepted.
  auto spike = [](std::span<const double> x) { return x[0] == 1.0 ? 0.0 : -detail::kInf; };
  McmcConfig small;
  small.chains = 2;
  small.iterations = 2000;
  small.burn_in = 1000;
  EXPECT_THROW(run_mcmc(spike, one, small), SamplerError);
}

TEST(Sampler, SeedDeterminism) {
  McmcConfig cfg;
  cfg.iterations = 4000;
  cfg.burn_in = 2000;
  cfg.seed = 99;
  double init[] = {0.0, 1.0};
  auto target = [](std::span<const double> x) { return -0.5 * (x[0] * x[0] + 4 * x[1] * x[1]); };
  auto a = run_mcmc(target, init, cfg);
  cfg.workers = 1;
  auto b = run_mcmc(target, init, cfg);
  ASSERT_EQ(a.draws.size(), b.draws.size());
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    ASSERT_EQ(a.draws.point(i)[0], b.draws.point(i)[0]);
    ASSERT_EQ(a.draws.point(i)[1], b.draws.point(i)[1]);
  }
}

TEST(Sampler, PosteriorForUsesConjugateFormWhenAvailable) {
  BayesModel m{Likelihood::poisson(), PriorSpec::proper(Distribution::gamma(2, 1)), {1, 2, 3}};
  auto p = posterior_for(m, McmcConfig{});
  EXPECT_TRUE(p.is_analytic());
  BayesModel t{Likelihood::poisson(), PriorSpec::proper(Distribution::student_t(3, 1, 3)), {1, 2, 3, 4, 2}};
  McmcConfig cfg;
  cfg.iterations = 6000;
  cfg.burn_in = 3000;
  auto q = posterior_for(t, cfg);
  EXPECT_FALSE(q.is_analytic());
  for (double v : q.draws().sorted()) ASSERT_GT(v, 0.0);
}

TEST(Sampler, SkewNormalPriorsAreTheStatedDensities) {
  auto priors = experiment::skewnormal_priors();
  auto find = [&](const std::string& label) {
    for (const auto& p : priors)
      if (p.label == label) return p.prior;
    throw std::runtime_error("missing prior " + label);
  };
  auto check = [&](const PriorSpec& p, const Distribution& d) {
    for (double a = -20; a <= 20; a += 0.7) EXPECT_NEAR(p.log_density(a), d.log_pdf(a), 1e-12) << a;
  };
  check(find("Bayes-Laplace"), Distribution::student_t(0, 0.5, 2));
  check(find("BTV"), Distribution::student_t(0, 0.92, 1));
  check(find("Jeffreys"), Distribution::student_t(0, std::numbers::pi * std::numbers::pi / 4, 0.5));
}

TEST(Sampler, SkewNormalFit) {
  auto data = experiment::skewnormal_data(2021);
  McmcConfig cfg;
  cfg.seed = 11;
  EXPECT_THROW(fit_skew_normal(data, PriorSpec::flat(), cfg), ImproperPosteriorError);
  auto fit = fit_skew_normal(data, PriorSpec::proper(Distribution::normal(0, std::sqrt(5.0))), cfg);
  EXPECT_EQ(fit.joint.dim(), 3u);
  double mode = histogram_mode(vec(fit.alpha.draws().sorted()));
  EXPECT_GE(mode, 2.0);
  EXPECT_LE(mode, 12.0);
  ASSERT_TRUE(fit.alpha.diagnostics().has_value());
  for (double r : fit.alpha.diagnostics()->rhat) EXPECT_LT(r, 1.1);
  std::vector<double> tiny{1, 2};
  EXPECT_THROW(fit_skew_normal(tiny, PriorSpec::proper(Distribution::normal(0, 1)), cfg), DomainError);
}

TEST(Sampler, LogisticFitOnBioassay) {
  auto fx = experiment::bioassay_fixture();
  auto sc = dose_scaling(fx.doses);
  std::vector<double> z;
  for (double x : fx.doses) z.push_back(sc.to_standard(x));
  EXPECT_NEAR(numeric::mean(z), 0, 1e-12);
  EXPECT_NEAR(numeric::sample_sd(z), 0.5, 1e-12);

  McmcConfig cfg;
  cfg.seed = 21;
  auto fit = fit_logistic(fx.doses, fx.trials, fx.deaths, std::nullopt, cfg);
  auto mle = logistic_mle(z, fx.trials, fx.deaths);
  BayesModel model{Likelihood::logistic(z, fx.trials), PriorSpec::flat_plane(), fx.deaths};
  const auto& draws = fit.joint.draws();
  ASSERT_EQ(draws.dim(), 2u);
  std::size_t best = 0;
  double best_lp = -detail::kInf;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    double lp = log_posterior_unnorm(model, draws.point(i));
    if (lp > best_lp) {
      best_lp = lp;
      best = i;
    }
  }
  EXPECT_NEAR(draws.point(best)[0], mle.beta0, 0.5);
  EXPECT_NEAR(draws.point(best)[1], mle.beta1, 0.5);

  ASSERT_EQ(fit.ld50.size() + fit.ld50_excluded, draws.size());
  auto ld = vec(fit.ld50.sorted());
  std::vector<double> expect;
  for (std::size_t i = 0; i < draws.size(); ++i)
    if (std::abs(draws.point(i)[1]) >= 1e-12) expect.push_back(sc.to_original(-draws.point(i)[0] / draws.point(i)[1]));
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(ld, expect);

  std::vector<double> same{0.1, 0.1, 0.1, 0.1};
  EXPECT_THROW(fit_logistic(same, fx.trials, fx.deaths, 2.5, cfg), DomainError);
}
