#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wim/distributions.hpp"
#include "wim/numeric.hpp"
#include "wim/posterior.hpp"
#include "wim/rng.hpp"

using namespace wim;

namespace {

// cdf of exp(log_posterior_unnorm) normalized by quadrature on [lo, hi].
struct NumericPosterior {
  const BayesModel& model;
  double lo, hi, log_shift, z;

  NumericPosterior(const BayesModel& m, double lo_, double hi_, double mode)
      : model(m), lo(lo_), hi(hi_), log_shift(log_posterior_unnorm(m, mode)) {
    z = integral(lo, hi);
  }
  double density(double t) const { return std::exp(log_posterior_unnorm(model, t) - log_shift); }
  double integral(double a, double b) const {
    return numeric::integrate([&](double t) { return density(t); }, a, b, {1e-14, 1e-12, 4000}).value;
  }
  double cdf(double t) const { return integral(lo, t) / z; }
};

}  // namespace

TEST(Posterior, ConjugateExamples) {
  BayesModel p{Likelihood::poisson(), PriorSpec::proper(Distribution::gamma(2.5, 2.5)),
               std::vector<double>(10, 5.0)};
  auto post = conjugate_update(p);
  EXPECT_EQ(post.distribution(), Distribution::gamma(52.5, 12.5));
  EXPECT_EQ(post.provenance(), "poisson|gamma:2.5:2.5|conjugate");

  BayesModel b{Likelihood::binomial(10), PriorSpec::improper_beta(0, 0), {7}};
  EXPECT_EQ(conjugate_update(b).distribution(), Distribution::beta(7, 3));

  std::vector<double> xs(10, 1.0);  // sum of squares 10 around mu = 0
  BayesModel nv{Likelihood::normal_known_mean(0), PriorSpec::jeffreys_variance(), xs};
  EXPECT_EQ(conjugate_update(nv).distribution(), Distribution::inverse_gamma(5, 5));
}

TEST(Posterior, JeffreysVarianceMatchesQuadrature) {
  std::vector<double> xs(10, 1.0);
  BayesModel nv{Likelihood::normal_known_mean(0), PriorSpec::jeffreys_variance(), xs};
  auto d = conjugate_update(nv).distribution();
  NumericPosterior num(nv, 1e-6, d.quantile(1 - 1e-13), 10.0 / 12);
  for (double u = 0.05; u < 1; u += 0.05) {
    double t = d.quantile(u);
    EXPECT_NEAR(num.cdf(t), u, 1e-6);
  }
}

TEST(Posterior, ImproperAndUnsupported) {
  BayesModel b{Likelihood::binomial(10), PriorSpec::improper_beta(0, 0), {0}};
  EXPECT_THROW(conjugate_update(b), ImproperPosteriorError);
  b.data = {10};
  EXPECT_THROW(conjugate_update(b), ImproperPosteriorError);
  BayesModel p{Likelihood::poisson(), PriorSpec::improper_gamma(0, 0), {0, 0, 0}};
  EXPECT_THROW(conjugate_update(p), ImproperPosteriorError);
  // Flat on sigma^2: shape n/2 - 1, so two observations are not enough.
  BayesModel nv{Likelihood::normal_known_mean(0), PriorSpec::flat(), {1.0, -1.0}};
  EXPECT_THROW(conjugate_update(nv), ImproperPosteriorError);
  nv.data = {1.0, -1.0, 2.0};
  EXPECT_EQ(conjugate_update(nv).distribution(), Distribution::inverse_gamma(0.5, 3));
  BayesModel t{Likelihood::poisson(), PriorSpec::proper(Distribution::student_t(0, 1, 3)), {1, 2}};
  EXPECT_THROW(conjugate_update(t), UnsupportedError);
}

TEST(Posterior, ModelValidation) {
  EXPECT_THROW((BayesModel{Likelihood::poisson(), PriorSpec::flat(), {}}.validate()), DomainError);
  EXPECT_THROW((BayesModel{Likelihood::poisson(), PriorSpec::flat(), {1.5}}.validate()), DomainError);
  EXPECT_THROW((BayesModel{Likelihood::poisson(), PriorSpec::flat(), {-1}}.validate()), DomainError);
  EXPECT_THROW((BayesModel{Likelihood::binomial(5), PriorSpec::flat(), {6}}.validate()), DomainError);
  EXPECT_THROW(Likelihood::binomial(0), DomainError);
  EXPECT_THROW(PriorSpec::improper_gamma(-1, 0), DomainError);
}

TEST(Posterior, ConjugateAgreesWithNumericNormalization) {
  Rng rng = make_rng(404);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  for (int k = 0; k < 100; ++k) {
    BayesModel m;
    int which = k % 3;
    if (which == 0) {
      m.likelihood = Likelihood::poisson();
      m.prior = PriorSpec::proper(Distribution::gamma(u(0.5, 5), u(0.2, 5)));
      m.data = Distribution::poisson(u(0.5, 20)).sample(rng, 1 + k % 15);
    } else if (which == 1) {
      long n = 1 + k % 30;
      m.likelihood = Likelihood::binomial(n);
      m.prior = PriorSpec::proper(Distribution::beta(u(0.5, 5), u(0.5, 5)));
      m.data = {Distribution::binomial(n, u(0.1, 0.9)).sample(rng)};
    } else {
      m.likelihood = Likelihood::normal_known_mean(u(-1, 1));
      m.prior = PriorSpec::proper(Distribution::inverse_gamma(u(0.5, 5), u(0.2, 5)));
      m.data = Distribution::normal(m.likelihood.mu, u(0.3, 3)).sample(rng, 3 + k % 20);
    }
    auto d = conjugate_update(m).distribution();
    auto [slo, shi] = d.support();
    double lo = std::isfinite(slo) && d.family() == Family::Beta ? 0.0 : d.quantile(1e-14);
    double hi = d.family() == Family::Beta ? 1.0 : d.quantile(1 - 1e-14);
    double mode = d.quantile(0.5);
    NumericPosterior num(m, lo, hi, mode);
    double worst = 0;
    for (int i = 1; i <= 21; ++i) {
      double t = d.quantile(i / 22.0);
      worst = std::max(worst, std::abs(num.cdf(t) - d.cdf(t)));
    }
    ASSERT_LE(worst, 1e-6) << d.describe();
  }
}

TEST(Posterior, SequentialUpdatingEqualsOneShot) {
  Rng rng = make_rng(9);
  auto x = Distribution::poisson(4).sample(rng, 7);
  auto y = Distribution::poisson(4).sample(rng, 5);
  BayesModel first{Likelihood::poisson(), PriorSpec::proper(Distribution::gamma(2, 3)), x};
  auto p1 = conjugate_update(first).distribution();
  BayesModel second{Likelihood::poisson(), PriorSpec::proper(p1), y};
  auto xy = x;
  xy.insert(xy.end(), y.begin(), y.end());
  BayesModel once{Likelihood::poisson(), PriorSpec::proper(Distribution::gamma(2, 3)), xy};
  EXPECT_EQ(conjugate_update(second).distribution(), conjugate_update(once).distribution());
  EXPECT_EQ(conjugate_extend(p1, Likelihood::poisson(), y), conjugate_update(once).distribution());

  auto nx = Distribution::normal(0, 2).sample(rng, 6), ny = Distribution::normal(0, 2).sample(rng, 4);
  BayesModel n1{Likelihood::normal_known_mean(0), PriorSpec::proper(Distribution::inverse_gamma(2, 1)), nx};
  auto q1 = conjugate_update(n1).distribution();
  auto nxy = nx;
  nxy.insert(nxy.end(), ny.begin(), ny.end());
  BayesModel n2{Likelihood::normal_known_mean(0), PriorSpec::proper(Distribution::inverse_gamma(2, 1)), nxy};
  auto q2 = conjugate_update(n2).distribution();
  auto q12 = conjugate_extend(q1, Likelihood::normal_known_mean(0), ny);
  EXPECT_NEAR(q12.param(0), q2.param(0), 1e-12);
  EXPECT_NEAR(q12.param(1), q2.param(1), 1e-12);
}

TEST(Posterior, LogPosteriorExamples) {
  BayesModel flat{Likelihood::poisson(), PriorSpec::flat(), {1, 4, 2}};
  for (double t : {0.3, 1.0, 2.5, 7.0}) {
    double th[] = {t};
    EXPECT_DOUBLE_EQ(log_posterior_unnorm(flat, t), log_likelihood(flat, th));
  }
  EXPECT_EQ(log_posterior_unnorm(flat, -1.0), -std::numeric_limits<double>::infinity());

  BayesModel lg{Likelihood::logistic({-1, 0, 1}, {5, 4, 6}), PriorSpec::flat_plane(), {1, 2, 5}};
  double zero[] = {0, 0};
  double expect = 0;
  const double n[] = {5, 4, 6}, y[] = {1, 2, 5};
  for (int i = 0; i < 3; ++i)
    expect += std::lgamma(n[i] + 1) - std::lgamma(y[i] + 1) - std::lgamma(n[i] - y[i] + 1) + n[i] * std::log(0.5);
  EXPECT_NEAR(log_posterior_unnorm(lg, zero), expect, 1e-12);

  std::vector<double> data{0.3, -1.2, 2.0, 0.7};
  BayesModel sn{Likelihood::skew_normal(), PriorSpec::flat(), data};
  double mu = 0.4, sigma = 1.7;
  double th[] = {mu, std::log(sigma), 0.0};
  double normal_ll = 0;
  for (double x : data) normal_ll += Distribution::normal(mu, sigma).log_pdf(x);
  EXPECT_NEAR(log_posterior_unnorm(sn, th), normal_ll, 1e-12);
}

TEST(Posterior, PredictiveMoments) {
  Rng rng = make_rng(2718);
  double a = 12, b = 3;
  BayesModel pm{Likelihood::poisson(), PriorSpec::flat(), {1}};
  auto post = Posterior::analytic(Distribution::gamma(a, b), "test");
  auto ys = posterior_predictive_sample(post, pm, 1000000, rng);
  // Negative binomial: mean a/b, variance a/b + a/b^2.
  double var = a / b + a / (b * b);
  EXPECT_NEAR(numeric::mean(ys), a / b, 4 * std::sqrt(var / 1e6));

  BayesModel bm{Likelihood::binomial(1), PriorSpec::flat(), {1}};
  auto bpost = Posterior::analytic(Distribution::beta(3, 5), "test");
  auto zs = posterior_predictive_sample(bpost, bm, 1000000, rng);
  double p = 3.0 / 8;
  EXPECT_NEAR(numeric::mean(zs), p, 4 * std::sqrt(p * (1 - p) / 1e6));
  for (double z : zs) ASSERT_TRUE(z == 0 || z == 1);

  EXPECT_TRUE(posterior_predictive_sample(post, pm, 0, rng).empty());
  Rng r1 = make_rng(5), r2 = make_rng(5);
  EXPECT_EQ(posterior_predictive_sample(post, pm, 50, r1), posterior_predictive_sample(post, pm, 50, r2));
}

TEST(Posterior, SampledFormNeedsEnoughDraws) {
  EXPECT_THROW(Posterior::sampled(EmpiricalMeasure::from_1d(std::vector<double>(999, 1.0)), {}, "x"), DomainError);
  auto s = Posterior::sampled(EmpiricalMeasure::from_1d(std::vector<double>(1000, 1.0)), {}, "x");
  EXPECT_FALSE(s.is_analytic());
  EXPECT_THROW(s.distribution(), UnsupportedError);
}

TEST(Posterior, PriorDescriptions) {
  EXPECT_EQ(PriorSpec::proper(Distribution::gamma(2.5, 2.5)).describe(), "gamma:2.5:2.5");
  EXPECT_EQ(PriorSpec::improper_gamma(0.5, 0).describe(), "gamma:0.5:0");
  EXPECT_EQ(PriorSpec::jeffreys_variance().describe(), "jeffreys-var");
  EXPECT_EQ(PriorSpec::improper_ig(1, 0).describe(), "ig:1:0");
  // Gamma(1, 0) is the flat prior on the positive line.
  BayesModel a{Likelihood::poisson(), PriorSpec::improper_gamma(1, 0), {3, 4}};
  BayesModel b{Likelihood::poisson(), PriorSpec::flat(), {3, 4}};
  EXPECT_EQ(conjugate_update(a).distribution(), conjugate_update(b).distribution());
}
