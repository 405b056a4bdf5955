#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "wim/distributions.hpp"
#include "wim/error.hpp"
#include "wim/numeric.hpp"
#include "wim/posterior.hpp"

namespace wim {

enum class BoundsMethod { ClosedForm, Quadrature };

struct BoundsReport {
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> exact;
  BoundsMethod method = BoundsMethod::ClosedForm;
  std::string note;
};

enum class Monotone { Increasing, Decreasing, Unknown };

// rho = p2 / p1 (prior densities), stored through log rho and its derivative.
struct DensityRatio {
  std::function<double(double)> log_rho;
  std::function<double(double)> dlog_rho;
  std::pair<double, double> support{-detail::kInf, detail::kInf};
  Monotone monotone = Monotone::Unknown;

  double rho(double t) const { return std::exp(log_rho(t)); }
  double drho(double t) const { return rho(t) * dlog_rho(t); }
};

namespace detail {

inline std::pair<double, double> integration_range(const Distribution& d, double tail) {
  auto [lo, hi] = d.support();
  if (!std::isfinite(lo)) lo = d.quantile(tail);
  if (!std::isfinite(hi)) hi = d.quantile(1 - tail);
  return {lo, hi};
}

// tau(t) * pdf(t) = integral from the lower end to t of (mean - y) pdf(y) dy.
inline double stein_product_quadrature(const Distribution& d, double t) {
  double mu = d.mean();
  if (!std::isfinite(mu)) throw DomainError("Stein kernel needs a finite mean: " + d.describe());
  auto [lo, hi] = integration_range(d, 1e-15);
  numeric::QuadOptions opt{1e-14, 1e-11, 4000};
  // Both tails give the same value; the far one is the fallback when the near
  // one sits on a density singularity.
  auto left = [&] {
    return numeric::integrate_or_throw([&](double y) { return (mu - y) * d.pdf(y); }, lo, t, opt, "Stein kernel");
  };
  auto right = [&] {
    return numeric::integrate_or_throw([&](double y) { return (y - mu) * d.pdf(y); }, t, hi, opt, "Stein kernel");
  };
  try {
    return t <= mu ? left() : right();
  } catch (const IntegrationError&) {
    return t <= mu ? right() : left();
  }
}

inline std::optional<double> stein_closed_form(const Distribution& d, double t) {
  switch (d.family()) {
    case Family::Gamma: return t / d.param(1);
    case Family::Beta: return t * (1 - t) / (d.param(0) + d.param(1));
    case Family::InverseGamma:
      if (!(d.param(0) > 1)) throw DomainError("Stein kernel needs a finite mean: " + d.describe());
      return t * t / (d.param(0) - 1);
    case Family::Normal: return d.param(1) * d.param(1);
    default: return std::nullopt;
  }
}

}  // namespace detail

// Stein kernel by direct quadrature of its defining integral.
inline double stein_kernel_quadrature(const Distribution& d, double t) {
  double p = d.pdf(t);
  if (!(p > std::numeric_limits<double>::min()))
    throw EvaluationError("Stein kernel: density underflows at " + detail::fmt(t));
  return std::max(0.0, detail::stein_product_quadrature(d, t) / p);
}

inline double stein_kernel(const Distribution& d, double t) {
  auto [lo, hi] = d.support();
  if (!(t > lo && t < hi)) return 0.0;
  if (auto c = detail::stein_closed_form(d, t)) return *c;
  return stein_kernel_quadrature(d, t);
}

// Checks that (log rho)' keeps one sign on a 1001-point grid over [lo, hi].
inline Monotone check_monotone(const DensityRatio& r, double lo, double hi) {
  bool pos = false, neg = false;
  for (int i = 0; i <= 1000; ++i) {
    double t = lo + (hi - lo) * i / 1000.0;
    if (i == 0) t = lo + (hi - lo) * 1e-6;
    if (i == 1000) t = hi - (hi - lo) * 1e-6;
    double g = r.dlog_rho(t);
    if (!std::isfinite(g)) return Monotone::Unknown;
    if (g > 0) pos = true;
    if (g < 0) neg = true;
  }
  if (pos && neg) return Monotone::Unknown;
  return neg ? Monotone::Decreasing : Monotone::Increasing;
}

// Ratio of two prior densities for a scalar model. Conjugate pairs get analytic
// derivatives and an analytic monotonicity verdict; anything else uses central
// differences and no verdict.
inline DensityRatio prior_ratio(const Likelihood& lik, const PriorSpec& prior1, const PriorSpec& prior2) {
  if (lik.dim() != 1) throw DimensionError("prior_ratio needs a scalar model");
  DensityRatio r;
  r.support = lik.support();
  auto h1 = conjugate_hyper(lik, prior1);
  auto h2 = conjugate_hyper(lik, prior2);
  if (h1 && h2) {
    double da = h2->first - h1->first;
    double db = h2->second - h1->second;
    switch (lik.kind) {
      case LikelihoodKind::PoissonIID:
        r.log_rho = [=](double t) { return (da == 0 ? 0.0 : da * std::log(t)) - db * t; };
        r.dlog_rho = [=](double t) { return da / t - db; };
        break;
      case LikelihoodKind::BinomialCount:
        r.log_rho = [=](double t) {
          return (da == 0 ? 0.0 : da * std::log(t)) + (db == 0 ? 0.0 : db * std::log1p(-t));
        };
        r.dlog_rho = [=](double t) { return da / t - db / (1 - t); };
        break;
      default:
        r.log_rho = [=](double t) { return (da == 0 ? 0.0 : -da * std::log(t)) - db / t; };
        r.dlog_rho = [=](double t) { return -da / t + db / (t * t); };
        break;
    }
    if (da * db <= 0) {
      // Both terms push the same way (or one vanishes).
      double s = lik.kind == LikelihoodKind::NormalKnownMean ? (db != 0 ? db : -da) : (da != 0 ? da : -db);
      r.monotone = s >= 0 ? Monotone::Increasing : Monotone::Decreasing;
    }
    return r;
  }
  r.log_rho = [=](double t) { return prior2.log_density(t) - prior1.log_density(t); };
  r.dlog_rho = [=](double t) {
    double h = 1e-6 * std::max(1.0, std::abs(t));
    return (prior2.log_density(t + h) - prior1.log_density(t + h) - prior2.log_density(t - h) +
            prior1.log_density(t - h)) /
           (2 * h);
  };
  return r;
}

// Stein bounds: |E[tau1 rho']| / E[rho] <= W1(P1, P2) <= E[tau1 |rho'|] / E[rho], with the
// upper bound attained when rho is monotone. Expectations are under P1.
inline BoundsReport theorem1_bounds(const Distribution& p1, const DensityRatio& ratio) {
  auto [lo, hi] = detail::integration_range(p1, 1e-13);
  lo = std::max(lo, ratio.support.first);
  hi = std::min(hi, ratio.support.second);
  double ref = std::clamp(p1.mean(), lo, hi);
  if (!std::isfinite(ref)) ref = p1.quantile(0.5);
  double log_ref = ratio.log_rho(ref);
  // rho * pdf and tau * rho * pdf, formed in log space so that a ratio that blows
  // up where the posterior vanishes does not produce inf * 0.
  auto rho_p = [&](double t) { return std::exp(ratio.log_rho(t) - log_ref + p1.log_pdf(t)); };
  auto tau_rho_p = [&](double t) {
    if (auto c = detail::stein_closed_form(p1, t)) return *c * rho_p(t);
    double tp = detail::stein_product_quadrature(p1, t);
    return tp == 0.0 ? 0.0 : tp * std::exp(ratio.log_rho(t) - log_ref);
  };

  numeric::QuadOptions opt{1e-12, 1e-10, 4000};
  auto [slo, shi] = p1.support();
  bool open_lo = !std::isfinite(std::max(slo, ratio.support.first));
  bool open_hi = !std::isfinite(std::min(shi, ratio.support.second));
  auto expect = [&](auto&& f, const char* what) {
    auto piece = [&](double a, double b) {
      auto r = numeric::integrate(f, a, b, opt);
      if (!r.converged || !std::isfinite(r.value))
        throw DivergenceError(std::string("theorem1_bounds: ") + what + " is not finite");
      return r.value;
    };
    double total = piece(lo, hi);
    // rho can move mass past the truncation of p1; walk outward over open ends.
    for (int side = 0; side < 2; ++side) {
      if (!(side == 0 ? open_lo : open_hi)) continue;
      double edge = side == 0 ? lo : hi, step = hi - lo;
      for (int it = 0; it < 64; ++it) {
        double next = side == 0 ? edge - step : edge + step;
        double v = side == 0 ? piece(next, edge) : piece(edge, next);
        total += v;
        edge = next;
        step *= 2;
        if (std::abs(v) <= 1e-15 * std::abs(total)) break;
        if (it == 63) throw DivergenceError(std::string("theorem1_bounds: ") + what + " is not finite");
      }
    }
    return total;
  };
  double e_rho = expect(rho_p, "E[rho]");
  double e_signed = expect([&](double t) { return tau_rho_p(t) * ratio.dlog_rho(t); }, "E[tau rho']");
  double e_abs = expect([&](double t) { return tau_rho_p(t) * std::abs(ratio.dlog_rho(t)); }, "E[tau |rho'|]");
  if (!(e_rho > 0)) throw DivergenceError("theorem1_bounds: E[rho] is not positive");

  BoundsReport out;
  out.method = BoundsMethod::Quadrature;
  out.lower = std::abs(e_signed) / e_rho;
  out.upper = e_abs / e_rho;
  out.upper = std::max(out.upper, out.lower);
  Monotone m = ratio.monotone;
  if (m != Monotone::Unknown) {
    if (check_monotone(ratio, lo, hi) == Monotone::Unknown) {
      m = Monotone::Unknown;
      out.note = "declared monotone ratio changes sign on the grid; exact value withheld";
    }
  }
  if (m != Monotone::Unknown) out.exact = out.upper;
  return out;
}

struct PoissonExact {
  double value = 0.0;
  bool exact = false;  // the two Gamma priors have a monotone density ratio
};

// Closed-form W1 between the Gamma posteriors of two Gamma priors.
inline PoissonExact poisson_gamma_exact(double a1, double b1, double a2, double b2, double n, double sum_x) {
  if (!(n + b1 > 0) || !(n + b2 > 0)) throw DomainError("poisson_gamma_exact: n + beta must be positive");
  if (!(a1 + sum_x > 0) || !(a2 + sum_x > 0)) throw ImproperPosteriorError("poisson_gamma_exact: improper posterior");
  PoissonExact out;
  out.value = std::abs(a2 - a1 - (b2 - b1) * (a2 + sum_x) / (n + b2)) / (n + b1);
  out.exact = (a2 - a1) * (b2 - b1) <= 0;
  return out;
}

enum class BinomialVariant { BetaVsUniform, JeffreysVsUniform, HaldaneVsUniform };

inline BoundsReport binomial_bounds(BinomialVariant v, long n_trials, long x_succ, double alpha = 1.0,
                                    double beta = 1.0) {
  if (n_trials < 1 || x_succ < 0 || x_succ > n_trials) throw DomainError("binomial_bounds: need 0 <= x <= n, n >= 1");
  double n = static_cast<double>(n_trials), x = static_cast<double>(x_succ);
  BoundsReport r;
  switch (v) {
    case BinomialVariant::BetaVsUniform: {
      if (!(alpha >= 0) || !(beta >= 0)) throw DomainError("binomial_bounds: Beta parameters must be >= 0");
      double s = n + alpha + beta;
      r.lower = std::abs((x + 1) / (n + 2) * ((alpha + beta - 2) / s) - (alpha - 1) / s);
      r.upper = (std::abs(alpha - 1) + (x + alpha) / s * (std::abs(beta - 1) - std::abs(alpha - 1))) / (n + 2);
      break;
    }
    case BinomialVariant::JeffreysVsUniform:
      r.lower = std::abs(n / 2 - x) / ((n + 2) * (n + 1));
      r.upper = (std::sqrt((x + 0.5) * (n - x + 0.5) / ((n + 2) * (n + 1) * (n + 1))) +
                 std::abs((x + 0.5) / (n + 1) - 0.5)) /
                (n + 2);
      break;
    case BinomialVariant::HaldaneVsUniform:
      if (x_succ == 0 || x_succ == n_trials)
        throw ImproperPosteriorError("binomial_bounds: Haldane posterior is improper for x = 0 or x = n");
      r.lower = 2 * std::abs(n / 2 - x) / (n * (n + 2));
      r.upper = 2 / (n + 2) * (std::sqrt(x * (n - x) / (n * n * (n + 1))) + std::abs(x / n - 0.5));
      break;
  }
  return r;
}

inline BoundsReport normal_ig_bounds(double alpha, double beta, double n, double s) {
  if (!(s >= 0)) throw DomainError("normal_ig_bounds: sum of squares must be >= 0");
  double d = (n / 2 + alpha - 1) * (n / 2 - 1);
  if (!(n / 2 - 1 > 0) || !(n / 2 + alpha - 1 > 0)) throw DomainError("normal_ig_bounds: denominator is not positive");
  BoundsReport r;
  r.lower = std::abs(alpha / 2 * s - (n / 2 - 1) * beta) / d;
  r.upper = (alpha / 2 * s + n * beta / 2 + beta * (2 * alpha - 1)) / d;
  return r;
}

// Bounds for W1 between the posteriors of `prior1` (baseline) and `prior2` on the
// model's data. The printed closed forms are used when the pair matches one of
// them; everything else goes through the Stein bounds by quadrature.
inline BoundsReport bounds_for(const BayesModel& model, const PriorSpec& prior1, const PriorSpec& prior2) {
  model.validate();
  const Likelihood& lik = model.likelihood;
  if (lik.dim() != 1) throw DimensionError("bounds are available for scalar models only");
  auto h1 = conjugate_hyper(lik, prior1);
  auto h2 = conjugate_hyper(lik, prior2);
  double n = static_cast<double>(model.data.size());

  if (h1 && h2) {
    auto [a1, b1] = *h1;
    auto [a2, b2] = *h2;
    if (a1 == a2 && b1 == b2) return {};
    if (lik.kind == LikelihoodKind::PoissonIID) {
      auto pe = poisson_gamma_exact(a1, b1, a2, b2, n, model.sum());
      if (pe.exact) {
        BoundsReport r;
        r.lower = r.upper = pe.value;
        r.exact = pe.value;
        return r;
      }
    }
    if (lik.kind == LikelihoodKind::BinomialCount && model.data.size() == 1) {
      long nt = lik.trials, x = static_cast<long>(model.data[0]);
      bool uniform1 = a1 == 1 && b1 == 1, uniform2 = a2 == 1 && b2 == 1;
      if (uniform1 || uniform2) {
        double a = uniform1 ? a2 : a1, b = uniform1 ? b2 : b1;
        if (a == 0.5 && b == 0.5) return binomial_bounds(BinomialVariant::JeffreysVsUniform, nt, x);
        if (a == 0 && b == 0) return binomial_bounds(BinomialVariant::HaldaneVsUniform, nt, x);
        return binomial_bounds(BinomialVariant::BetaVsUniform, nt, x, a, b);
      }
    }
    if (lik.kind == LikelihoodKind::NormalKnownMean) {
      bool jeff1 = a1 == 0 && b1 == 0, jeff2 = a2 == 0 && b2 == 0;
      if (jeff1 || jeff2) {
        double a = jeff1 ? a2 : a1, b = jeff1 ? b2 : b1;
        return normal_ig_bounds(a, b, n, model.sum_sq_dev(lik.mu));
      }
    }
  }
  BayesModel base = model;
  base.prior = prior1;
  Posterior p1 = conjugate_update(base);
  return theorem1_bounds(p1.distribution(), prior_ratio(lik, prior1, prior2));
}

}  // namespace wim
