#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wim/distributions.hpp"
#include "wim/empirical.hpp"
#include "wim/error.hpp"
#include "wim/rng.hpp"

namespace wim {

enum class LikelihoodKind { PoissonIID, BinomialCount, NormalKnownMean, SkewNormalFull, LogisticDoseResponse };

struct Likelihood {
  LikelihoodKind kind = LikelihoodKind::PoissonIID;
  long trials = 1;                 // BinomialCount: trials behind each observed count
  double mu = 0.0;                 // NormalKnownMean: the known mean
  std::vector<double> doses;       // LogisticDoseResponse
  std::vector<long> dose_trials;   // LogisticDoseResponse

  static Likelihood poisson() { return {}; }
  static Likelihood binomial(long trials_per_obs) {
    if (trials_per_obs < 1) throw DomainError("binomial likelihood: trials must be at least 1");
    Likelihood l;
    l.kind = LikelihoodKind::BinomialCount;
    l.trials = trials_per_obs;
    return l;
  }
  static Likelihood normal_known_mean(double mean) {
    if (!std::isfinite(mean)) throw DomainError("normal likelihood: mean must be finite");
    Likelihood l;
    l.kind = LikelihoodKind::NormalKnownMean;
    l.mu = mean;
    return l;
  }
  static Likelihood skew_normal() {
    Likelihood l;
    l.kind = LikelihoodKind::SkewNormalFull;
    return l;
  }
  static Likelihood logistic(std::vector<double> doses, std::vector<long> trials) {
    if (doses.size() != trials.size() || doses.empty())
      throw DomainError("logistic likelihood: doses and trials must have equal, nonzero length");
    for (long t : trials)
      if (t < 1) throw DomainError("logistic likelihood: trials must be at least 1");
    Likelihood l;
    l.kind = LikelihoodKind::LogisticDoseResponse;
    l.doses = std::move(doses);
    l.dose_trials = std::move(trials);
    return l;
  }

  std::size_t dim() const {
    switch (kind) {
      case LikelihoodKind::SkewNormalFull: return 3;
      case LikelihoodKind::LogisticDoseResponse: return 2;
      default: return 1;
    }
  }

  // Open parameter interval for the scalar models.
  std::pair<double, double> support() const {
    switch (kind) {
      case LikelihoodKind::PoissonIID:
      case LikelihoodKind::NormalKnownMean: return {0.0, detail::kInf};
      case LikelihoodKind::BinomialCount: return {0.0, 1.0};
      default: return {-detail::kInf, detail::kInf};
    }
  }

  std::string name() const {
    switch (kind) {
      case LikelihoodKind::PoissonIID: return "poisson";
      case LikelihoodKind::BinomialCount: return "binomial";
      case LikelihoodKind::NormalKnownMean: return "normal";
      case LikelihoodKind::SkewNormalFull: return "skewnormal";
      case LikelihoodKind::LogisticDoseResponse: return "logistic";
    }
    return "?";
  }
};

class PriorSpec {
 public:
  enum class Kind { Proper, ImproperGamma, ImproperBeta, ImproperIG, Flat, JeffreysVariance, FlatPlane2D, Custom };
  using LogDensity = std::function<double(std::span<const double>)>;

  static PriorSpec proper(Distribution d) {
    PriorSpec p(Kind::Proper);
    p.dist_ = d;
    return p;
  }
  static PriorSpec improper_gamma(double a, double b) {
    if (!(a >= 0) || !(b >= 0) || !std::isfinite(a) || !std::isfinite(b))
      throw DomainError("improper gamma prior needs shape >= 0 and rate >= 0");
    PriorSpec p(Kind::ImproperGamma);
    p.a_ = a;
    p.b_ = b;
    return p;
  }
  static PriorSpec improper_beta(double a, double b) {
    if (!(a >= 0) || !(b >= 0) || !std::isfinite(a) || !std::isfinite(b))
      throw DomainError("improper beta prior needs both shapes >= 0");
    PriorSpec p(Kind::ImproperBeta);
    p.a_ = a;
    p.b_ = b;
    return p;
  }
  static PriorSpec improper_ig(double a, double b) {
    if (!std::isfinite(a) || !(b >= 0) || !std::isfinite(b))
      throw DomainError("improper inverse-gamma prior needs a finite shape and scale >= 0");
    PriorSpec p(Kind::ImproperIG);
    p.a_ = a;
    p.b_ = b;
    return p;
  }
  static PriorSpec flat() { return PriorSpec(Kind::Flat); }
  static PriorSpec jeffreys_variance() { return PriorSpec(Kind::JeffreysVariance); }
  static PriorSpec flat_plane() { return PriorSpec(Kind::FlatPlane2D); }
  static PriorSpec custom(LogDensity f, std::string name) {
    if (!f) throw DomainError("custom prior needs a log-density");
    PriorSpec p(Kind::Custom);
    p.custom_ = std::make_shared<LogDensity>(std::move(f));
    p.name_ = std::move(name);
    return p;
  }

  Kind kind() const { return kind_; }
  const Distribution& distribution() const {
    if (!dist_) throw DomainError("prior has no proper distribution");
    return *dist_;
  }
  double a() const { return a_; }
  double b() const { return b_; }

  // Log prior density (up to a constant) at a scalar or vector parameter.
  double log_density(std::span<const double> theta) const {
    double t = theta.empty() ? detail::kNaN : theta[0];
    switch (kind_) {
      case Kind::Proper: return dist_->log_pdf(t);
      case Kind::ImproperGamma:
        if (!(t > 0)) return -detail::kInf;
        return xlogy(a_ - 1, t) - b_ * t;
      case Kind::ImproperBeta:
        if (!(t > 0 && t < 1)) return -detail::kInf;
        return xlogy(a_ - 1, t) + xlogy(b_ - 1, 1 - t);
      case Kind::ImproperIG:
        if (!(t > 0)) return -detail::kInf;
        return -(a_ + 1) * std::log(t) - b_ / t;
      case Kind::JeffreysVariance:
        if (!(t > 0)) return -detail::kInf;
        return -std::log(t);
      case Kind::Flat:
      case Kind::FlatPlane2D: return 0.0;
      case Kind::Custom: return (*custom_)(theta);
    }
    return -detail::kInf;
  }
  double log_density(double theta) const { return log_density(std::span<const double>(&theta, 1)); }

  std::string describe() const {
    using detail::fmt;
    switch (kind_) {
      case Kind::Proper: {
        std::string s = family_name(dist_->family());
        for (double v : dist_->params()) s += ":" + fmt(v);
        return s;
      }
      case Kind::ImproperGamma: return "gamma:" + fmt(a_) + ":" + fmt(b_);
      case Kind::ImproperBeta: return "beta:" + fmt(a_) + ":" + fmt(b_);
      case Kind::ImproperIG: return "ig:" + fmt(a_) + ":" + fmt(b_);
      case Kind::Flat: return "flat";
      case Kind::JeffreysVariance: return "jeffreys-var";
      case Kind::FlatPlane2D: return "flat-plane";
      case Kind::Custom: return name_;
    }
    return "?";
  }

 private:
  explicit PriorSpec(Kind k) : kind_(k) {}

  static double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

  Kind kind_;
  std::optional<Distribution> dist_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::shared_ptr<LogDensity> custom_;
  std::string name_;
};

struct BayesModel {
  Likelihood likelihood;
  PriorSpec prior = PriorSpec::flat();
  std::vector<double> data;

  void validate() const {
    if (data.empty()) throw DomainError("model needs at least one observation");
    auto whole = [](double v) { return v >= 0 && std::floor(v) == v; };
    for (double v : data)
      if (!std::isfinite(v)) throw DomainError("observations must be finite");
    switch (likelihood.kind) {
      case LikelihoodKind::PoissonIID:
        for (double v : data)
          if (!whole(v)) throw DomainError("poisson observations must be nonnegative integers");
        break;
      case LikelihoodKind::BinomialCount:
        for (double v : data)
          if (!whole(v) || v > static_cast<double>(likelihood.trials))
            throw DomainError("binomial successes must be integers in [0, trials]");
        break;
      case LikelihoodKind::LogisticDoseResponse:
        if (data.size() != likelihood.doses.size())
          throw DomainError("logistic model needs one success count per dose");
        for (std::size_t i = 0; i < data.size(); ++i)
          if (!whole(data[i]) || data[i] > static_cast<double>(likelihood.dose_trials[i]))
            throw DomainError("logistic successes must be integers in [0, trials]");
        break;
      default: break;
    }
  }

  double sum() const {
    double s = 0;
    for (double v : data) s += v;
    return s;
  }
  double sum_sq_dev(double mu) const {
    double s = 0;
    for (double v : data) s += (v - mu) * (v - mu);
    return s;
  }
};

struct McmcDiagnostics {
  std::vector<double> acceptance;  // per chain, post burn-in
  std::vector<double> rhat;        // split R-hat per coordinate
  std::vector<double> ess;         // effective sample size per coordinate
  std::vector<double> step;        // final adapted proposal scale per coordinate (chain 0)
};

class Posterior {
 public:
  static Posterior analytic(Distribution d, std::string provenance) {
    Posterior p;
    p.form_ = std::move(d);
    p.provenance_ = std::move(provenance);
    return p;
  }
  static Posterior sampled(EmpiricalMeasure m, McmcDiagnostics diag, std::string provenance) {
    if (m.size() < 1000) throw DomainError("sampled posterior needs at least 1000 draws");
    Posterior p;
    p.form_ = std::move(m);
    p.diagnostics_ = std::move(diag);
    p.provenance_ = std::move(provenance);
    return p;
  }

  bool is_analytic() const { return std::holds_alternative<Distribution>(form_); }
  const Distribution& distribution() const {
    if (!is_analytic()) throw UnsupportedError("posterior is sampled, not analytic");
    return std::get<Distribution>(form_);
  }
  const EmpiricalMeasure& draws() const {
    if (is_analytic()) throw UnsupportedError("posterior is analytic, not sampled");
    return std::get<EmpiricalMeasure>(form_);
  }
  std::size_t dim() const { return is_analytic() ? 1 : draws().dim(); }
  const std::string& provenance() const { return provenance_; }
  const std::optional<McmcDiagnostics>& diagnostics() const { return diagnostics_; }

 private:
  Posterior() : form_(Distribution::normal(0, 1)) {}
  std::variant<Distribution, EmpiricalMeasure> form_;
  std::optional<McmcDiagnostics> diagnostics_;
  std::string provenance_;
};

// Conjugate hyperparameters (shape/rate for Gamma, (a,b) for Beta, shape/scale for
// the inverse gamma) that a prior represents for the given likelihood, improper
// limits included. Empty when the pair is not conjugate.
inline std::optional<std::pair<double, double>> conjugate_hyper(const Likelihood& lik, const PriorSpec& prior) {
  using K = PriorSpec::Kind;
  switch (lik.kind) {
    case LikelihoodKind::PoissonIID:
      if (prior.kind() == K::ImproperGamma) return std::pair{prior.a(), prior.b()};
      if (prior.kind() == K::Flat) return std::pair{1.0, 0.0};
      if (prior.kind() == K::Proper && prior.distribution().family() == Family::Gamma)
        return std::pair{prior.distribution().param(0), prior.distribution().param(1)};
      return std::nullopt;
    case LikelihoodKind::BinomialCount:
      if (prior.kind() == K::ImproperBeta) return std::pair{prior.a(), prior.b()};
      if (prior.kind() == K::Flat) return std::pair{1.0, 1.0};
      if (prior.kind() == K::Proper && prior.distribution().family() == Family::Beta)
        return std::pair{prior.distribution().param(0), prior.distribution().param(1)};
      return std::nullopt;
    case LikelihoodKind::NormalKnownMean:
      if (prior.kind() == K::ImproperIG) return std::pair{prior.a(), prior.b()};
      if (prior.kind() == K::JeffreysVariance) return std::pair{0.0, 0.0};
      if (prior.kind() == K::Flat) return std::pair{-1.0, 0.0};
      if (prior.kind() == K::Proper && prior.distribution().family() == Family::InverseGamma)
        return std::pair{prior.distribution().param(0), prior.distribution().param(1)};
      return std::nullopt;
    default: return std::nullopt;
  }
}

inline bool is_conjugate(const BayesModel& model) {
  return conjugate_hyper(model.likelihood, model.prior).has_value();
}

namespace detail {

// Posterior from conjugate hyperparameters and sufficient statistics.
inline Distribution conjugate_posterior(LikelihoodKind kind, double a, double b, double count, double stat,
                                        double stat2) {
  double pa = 0, pb = 0;
  Family fam = Family::Gamma;
  switch (kind) {
    case LikelihoodKind::PoissonIID:  // stat = sum of counts, count = n
      pa = a + stat;
      pb = b + count;
      fam = Family::Gamma;
      break;
    case LikelihoodKind::BinomialCount:  // stat = successes, stat2 = failures
      pa = a + stat;
      pb = b + stat2;
      fam = Family::Beta;
      break;
    case LikelihoodKind::NormalKnownMean:  // stat = sum of squared deviations
      pa = a + count / 2;
      pb = b + stat / 2;
      fam = Family::InverseGamma;
      break;
    default: throw UnsupportedError("no conjugate update for this likelihood");
  }
  if (!(pa > 0) || !(pb > 0) || !std::isfinite(pa) || !std::isfinite(pb))
    throw ImproperPosteriorError("posterior is improper (parameters " + fmt(pa) + ", " + fmt(pb) + ")");
  return Distribution::make(fam, {pa, pb});
}

}  // namespace detail

inline Posterior conjugate_update(const BayesModel& model) {
  model.validate();
  auto hyper = conjugate_hyper(model.likelihood, model.prior);
  if (!hyper)
    throw UnsupportedError("prior " + model.prior.describe() + " is not conjugate for the " +
                           model.likelihood.name() + " likelihood");
  auto [a, b] = *hyper;
  double n = static_cast<double>(model.data.size());
  Distribution d = [&] {
    switch (model.likelihood.kind) {
      case LikelihoodKind::PoissonIID:
        return detail::conjugate_posterior(model.likelihood.kind, a, b, n, model.sum(), 0);
      case LikelihoodKind::BinomialCount: {
        double s = model.sum();
        return detail::conjugate_posterior(model.likelihood.kind, a, b, n, s,
                                           n * static_cast<double>(model.likelihood.trials) - s);
      }
      default:
        return detail::conjugate_posterior(model.likelihood.kind, a, b, n, model.sum_sq_dev(model.likelihood.mu), 0);
    }
  }();
  return Posterior::analytic(d, model.likelihood.name() + "|" + model.prior.describe() + "|conjugate");
}

// Updates an analytic conjugate posterior with extra observations. Binomial extras
// are single Bernoulli trials.
inline Distribution conjugate_extend(const Distribution& post, const Likelihood& lik, std::span<const double> extra) {
  double s = 0, ss = 0;
  for (double y : extra) {
    s += y;
    ss += (y - lik.mu) * (y - lik.mu);
  }
  double m = static_cast<double>(extra.size());
  double a = post.param(0), b = post.param(1);
  switch (lik.kind) {
    case LikelihoodKind::PoissonIID: return detail::conjugate_posterior(lik.kind, a, b, m, s, 0);
    case LikelihoodKind::BinomialCount: return detail::conjugate_posterior(lik.kind, a, b, m, s, m - s);
    case LikelihoodKind::NormalKnownMean: return detail::conjugate_posterior(lik.kind, a, b, m, ss, 0);
    default: throw UnsupportedError("no conjugate update for this likelihood");
  }
}

inline double log_likelihood(const BayesModel& model, std::span<const double> theta) {
  using detail::kInf;
  const Likelihood& lik = model.likelihood;
  if (theta.size() != lik.dim()) throw DimensionError("parameter vector has the wrong dimension");
  switch (lik.kind) {
    case LikelihoodKind::PoissonIID: {
      double t = theta[0];
      if (!(t > 0) || !std::isfinite(t)) return -kInf;
      double ll = 0;
      for (double x : model.data) ll += (x == 0 ? 0.0 : x * std::log(t)) - t - std::lgamma(x + 1);
      return ll;
    }
    case LikelihoodKind::BinomialCount: {
      double t = theta[0];
      if (!(t > 0 && t < 1)) return -kInf;
      double n = static_cast<double>(lik.trials);
      double ll = 0;
      for (double x : model.data) {
        ll += std::lgamma(n + 1) - std::lgamma(x + 1) - std::lgamma(n - x + 1);
        if (x > 0) ll += x * std::log(t);
        if (n - x > 0) ll += (n - x) * std::log1p(-t);
      }
      return ll;
    }
    case LikelihoodKind::NormalKnownMean: {
      double v = theta[0];
      if (!(v > 0) || !std::isfinite(v)) return -kInf;
      double n = static_cast<double>(model.data.size());
      return -0.5 * n * std::log(2 * std::numbers::pi * v) - model.sum_sq_dev(lik.mu) / (2 * v);
    }
    case LikelihoodKind::SkewNormalFull: {
      double mu = theta[0], log_s = theta[1], alpha = theta[2];
      if (!std::isfinite(mu) || !std::isfinite(log_s) || !std::isfinite(alpha)) return -kInf;
      double s = std::exp(log_s);
      double ll = 0;
      for (double x : model.data) {
        double z = (x - mu) / s;
        ll += std::numbers::ln2 - log_s - 0.5 * z * z - detail::kLogSqrt2Pi + detail::log_norm_cdf(alpha * z);
      }
      return ll;
    }
    case LikelihoodKind::LogisticDoseResponse: {
      double b0 = theta[0], b1 = theta[1];
      if (!std::isfinite(b0) || !std::isfinite(b1)) return -kInf;
      double ll = 0;
      for (std::size_t i = 0; i < model.data.size(); ++i) {
        double n = static_cast<double>(lik.dose_trials[i]);
        double y = model.data[i];
        double eta = b0 + b1 * lik.doses[i];
        double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        ll += std::lgamma(n + 1) - std::lgamma(y + 1) - std::lgamma(n - y + 1) + y * eta - n * softplus;
      }
      return ll;
    }
  }
  return -kInf;
}

// log p(theta) + log l(x; theta). For the skew-normal model theta = (mu, log sigma,
// alpha), the prior acts on alpha and (mu, log sigma) carry a flat prior. For the
// logistic model theta = (beta0, beta1).
inline double log_posterior_unnorm(const BayesModel& model, std::span<const double> theta) {
  double lp;
  if (model.likelihood.kind == LikelihoodKind::SkewNormalFull) {
    if (theta.size() != 3) throw DimensionError("skew-normal parameter vector must have 3 entries");
    lp = model.prior.log_density(theta.subspan(2, 1));
  } else {
    if (model.likelihood.dim() == 1) {
      auto [lo, hi] = model.likelihood.support();
      if (theta.size() == 1 && !(theta[0] > lo && theta[0] < hi)) return -detail::kInf;
    }
    lp = model.prior.log_density(theta);
  }
  if (std::isnan(lp) || lp == -detail::kInf) return -detail::kInf;
  double ll = log_likelihood(model, theta);
  if (std::isnan(ll)) return -detail::kInf;
  return lp + ll;
}

inline double log_posterior_unnorm(const BayesModel& model, double theta) {
  return log_posterior_unnorm(model, std::span<const double>(&theta, 1));
}

// m draws from the posterior predictive, a fresh parameter per observation.
// Binomial draws are single Bernoulli trials.
inline std::vector<double> posterior_predictive_sample(const Posterior& post, const BayesModel& model, std::size_t m,
                                                       Rng& rng) {
  if (!post.is_analytic()) throw UnsupportedError("posterior predictive needs an analytic posterior");
  const Distribution& d = post.distribution();
  std::vector<double> out(m);
  for (auto& y : out) {
    double t = d.sample(rng);
    switch (model.likelihood.kind) {
      case LikelihoodKind::PoissonIID: y = static_cast<double>(std::poisson_distribution<long long>(t)(rng)); break;
      case LikelihoodKind::BinomialCount: y = uniform01(rng) < t ? 1.0 : 0.0; break;
      case LikelihoodKind::NormalKnownMean:
        y = model.likelihood.mu + std::sqrt(t) * std::normal_distribution<double>()(rng);
        break;
      default: throw UnsupportedError("posterior predictive is only available for conjugate models");
    }
  }
  return out;
}

}  // namespace wim
