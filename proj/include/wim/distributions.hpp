#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "wim/error.hpp"
#include "wim/numeric.hpp"
#include "wim/rng.hpp"

namespace wim {

namespace detail {

using MathPolicy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double norm_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// log Phi(z), accurate in both tails.
inline double log_norm_cdf(double z) {
  if (z > 0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -30) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - kLogSqrt2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

inline double norm_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u, MathPolicy());
}

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace detail

enum class Family {
  Gamma,
  Beta,
  Normal,
  InverseGamma,
  StudentT,
  SkewNormal,
  Cauchy,
  Poisson,
  Binomial,
  UniformInterval
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Gamma: return "gamma";
    case Family::Beta: return "beta";
    case Family::Normal: return "normal";
    case Family::InverseGamma: return "ig";
    case Family::StudentT: return "t";
    case Family::SkewNormal: return "sn";
    case Family::Cauchy: return "cauchy";
    case Family::Poisson: return "poisson";
    case Family::Binomial: return "binomial";
    case Family::UniformInterval: return "uniform";
  }
  return "?";
}

inline std::size_t family_arity(Family f) {
  switch (f) {
    case Family::StudentT:
    case Family::SkewNormal: return 3;
    case Family::Poisson: return 1;
    default: return 2;
  }
}

// Immutable univariate distribution. Parameter conventions:
//   Gamma(shape, rate)        Beta(a, b)                 Normal(location, scale)
//   InverseGamma(shape, scale) StudentT(location, scale, df)
//   SkewNormal(location, scale, skewness)  Cauchy(location, scale)
//   Poisson(rate)             Binomial(trials, p)        UniformInterval(lo, hi)
class Distribution {
 public:
  static Distribution gamma(double shape, double rate) { return make(Family::Gamma, {shape, rate}); }
  static Distribution beta(double a, double b) { return make(Family::Beta, {a, b}); }
  static Distribution normal(double location, double scale) { return make(Family::Normal, {location, scale}); }
  static Distribution inverse_gamma(double shape, double scale) {
    return make(Family::InverseGamma, {shape, scale});
  }
  static Distribution student_t(double location, double scale, double df) {
    return make(Family::StudentT, {location, scale, df});
  }
  static Distribution skew_normal(double location, double scale, double skewness) {
    return make(Family::SkewNormal, {location, scale, skewness});
  }
  static Distribution cauchy(double location, double scale) { return make(Family::Cauchy, {location, scale}); }
  static Distribution poisson(double rate) { return make(Family::Poisson, {rate}); }
  static Distribution binomial(long trials, double p) {
    return make(Family::Binomial, {static_cast<double>(trials), p});
  }
  static Distribution uniform(double lo, double hi) { return make(Family::UniformInterval, {lo, hi}); }

  static Distribution make(Family family, std::initializer_list<double> params) {
    return make(family, std::span<const double>(params.begin(), params.size()));
  }

  static Distribution make(Family family, std::span<const double> params) {
    if (params.size() != family_arity(family))
      throw DomainError(std::string(family_name(family)) + ": expected " +
                        std::to_string(family_arity(family)) + " parameters");
    Distribution d;
    d.family_ = family;
    std::copy(params.begin(), params.end(), d.p_.begin());
    d.validate();
    return d;
  }

  Family family() const { return family_; }
  std::span<const double> params() const { return {p_.data(), family_arity(family_)}; }
  double param(std::size_t i) const { return p_[i]; }

  bool is_discrete() const { return family_ == Family::Poisson || family_ == Family::Binomial; }

  std::pair<double, double> support() const {
    using detail::kInf;
    switch (family_) {
      case Family::Gamma:
      case Family::InverseGamma:
      case Family::Poisson: return {0.0, kInf};
      case Family::Beta: return {0.0, 1.0};
      case Family::Binomial: return {0.0, p_[0]};
      case Family::UniformInterval: return {p_[0], p_[1]};
      default: return {-kInf, kInf};
    }
  }

  double log_pdf(double x) const {
    using detail::kInf;
    switch (family_) {
      case Family::Gamma: {
        double a = p_[0], b = p_[1];
        if (x < 0) return -kInf;
        if (x == 0) return a < 1 ? kInf : (a == 1 ? std::log(b) : -kInf);
        return a * std::log(b) - std::lgamma(a) + (a - 1) * std::log(x) - b * x;
      }
      case Family::Beta: {
        double a = p_[0], b = p_[1];
        if (x < 0 || x > 1) return -kInf;
        if (x == 0) return a < 1 ? kInf : (a == 1 ? -log_beta(a, b) : -kInf);
        if (x == 1) return b < 1 ? kInf : (b == 1 ? -log_beta(a, b) : -kInf);
        return (a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - log_beta(a, b);
      }
      case Family::Normal: {
        double z = (x - p_[0]) / p_[1];
        return -0.5 * z * z - detail::kLogSqrt2Pi - std::log(p_[1]);
      }
      case Family::InverseGamma: {
        double a = p_[0], b = p_[1];
        if (x <= 0) return -kInf;
        return a * std::log(b) - std::lgamma(a) - (a + 1) * std::log(x) - b / x;
      }
      case Family::StudentT: {
        double s = p_[1], nu = p_[2];
        double z = (x - p_[0]) / s;
        return std::lgamma(0.5 * (nu + 1)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi) -
               std::log(s) - 0.5 * (nu + 1) * std::log1p(z * z / nu);
      }
      case Family::SkewNormal: {
        double z = (x - p_[0]) / p_[1];
        return std::numbers::ln2 - std::log(p_[1]) - 0.5 * z * z - detail::kLogSqrt2Pi +
               detail::log_norm_cdf(p_[2] * z);
      }
      case Family::Cauchy: {
        double z = (x - p_[0]) / p_[1];
        return -std::log(std::numbers::pi * p_[1]) - std::log1p(z * z);
      }
      case Family::Poisson: {
        if (x < 0 || x != std::floor(x)) return -kInf;
        double th = p_[0];
        return x * std::log(th) - th - std::lgamma(x + 1);
      }
      case Family::Binomial: {
        double n = p_[0], p = p_[1];
        if (x < 0 || x > n || x != std::floor(x)) return -kInf;
        return std::lgamma(n + 1) - std::lgamma(x + 1) - std::lgamma(n - x + 1) + x * std::log(p) +
               (n - x) * std::log1p(-p);
      }
      case Family::UniformInterval:
        if (x < p_[0] || x > p_[1]) return -kInf;
        return -std::log(p_[1] - p_[0]);
    }
    return -kInf;
  }

  // Density for continuous families, probability mass for discrete ones.
  double pdf(double x) const {
    if (std::isnan(x)) throw DomainError("pdf: x is NaN");
    if (family_ == Family::SkewNormal) {
      double z = (x - p_[0]) / p_[1];
      return 2.0 / p_[1] * detail::norm_pdf(z) * detail::norm_cdf(p_[2] * z);
    }
    return std::exp(log_pdf(x));
  }

  double cdf(double x) const {
    if (std::isnan(x)) throw DomainError("cdf: x is NaN");
    MathPolicy_ pol;
    switch (family_) {
      case Family::Gamma:
        if (x <= 0) return 0.0;
        if (std::isinf(x)) return 1.0;
        return boost::math::gamma_p(p_[0], p_[1] * x, pol);
      case Family::Beta:
        if (x <= 0) return 0.0;
        if (x >= 1) return 1.0;
        return boost::math::ibeta(p_[0], p_[1], x, pol);
      case Family::Normal: return detail::norm_cdf((x - p_[0]) / p_[1]);
      case Family::InverseGamma:
        if (x <= 0) return 0.0;
        if (std::isinf(x)) return 1.0;
        return boost::math::gamma_q(p_[0], p_[1] / x, pol);
      case Family::StudentT: {
        boost::math::students_t_distribution<double, MathPolicy_> t(p_[2]);
        double z = (x - p_[0]) / p_[1];
        if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
        return boost::math::cdf(t, z);
      }
      case Family::SkewNormal: return skew_normal_cdf(x);
      case Family::Cauchy: return 0.5 + std::atan((x - p_[0]) / p_[1]) / std::numbers::pi;
      case Family::Poisson: {
        if (x < 0) return 0.0;
        if (std::isinf(x)) return 1.0;
        return boost::math::gamma_q(std::floor(x) + 1.0, p_[0], pol);
      }
      case Family::Binomial: {
        double n = p_[0];
        if (x < 0) return 0.0;
        double k = std::floor(x);
        if (k >= n) return 1.0;
        return boost::math::ibetac(k + 1.0, n - k, p_[1], pol);
      }
      case Family::UniformInterval:
        if (x <= p_[0]) return 0.0;
        if (x >= p_[1]) return 1.0;
        return (x - p_[0]) / (p_[1] - p_[0]);
    }
    return detail::kNaN;
  }

  // Inverse cdf on (0,1); the generalized inverse min{x : cdf(x) >= u} for
  // discrete families.
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0,1)");
    MathPolicy_ pol;
    switch (family_) {
      case Family::Gamma: return boost::math::gamma_p_inv(p_[0], u, pol) / p_[1];
      case Family::Beta: return boost::math::ibeta_inv(p_[0], p_[1], u, pol);
      case Family::Normal: return p_[0] + p_[1] * detail::norm_quantile(u);
      case Family::InverseGamma: return p_[1] / boost::math::gamma_q_inv(p_[0], u, pol);
      case Family::StudentT: {
        boost::math::students_t_distribution<double, MathPolicy_> t(p_[2]);
        return p_[0] + p_[1] * boost::math::quantile(t, u);
      }
      case Family::SkewNormal: return skew_normal_quantile(u);
      case Family::Cauchy: return p_[0] + p_[1] * std::tan(std::numbers::pi * (u - 0.5));
      case Family::Poisson:
      case Family::Binomial: return discrete_quantile(u);
      case Family::UniformInterval: return p_[0] + u * (p_[1] - p_[0]);
    }
    return detail::kNaN;
  }

  // quantile(1 - v), computed from the upper tail so that small v keeps full
  // precision.
  double upper_quantile(double v) const {
    if (!(v > 0.0 && v < 1.0)) throw DomainError("upper_quantile: v must lie in (0,1)");
    MathPolicy_ pol;
    switch (family_) {
      case Family::Gamma: return boost::math::gamma_q_inv(p_[0], v, pol) / p_[1];
      case Family::Beta: return boost::math::ibetac_inv(p_[0], p_[1], v, pol);
      case Family::Normal: return p_[0] - p_[1] * detail::norm_quantile(v);
      case Family::InverseGamma: return p_[1] / boost::math::gamma_p_inv(p_[0], v, pol);
      case Family::StudentT: {
        boost::math::students_t_distribution<double, MathPolicy_> t(p_[2]);
        return p_[0] - p_[1] * boost::math::quantile(t, v);
      }
      case Family::Cauchy: return p_[0] - p_[1] * std::tan(std::numbers::pi * (v - 0.5));
      case Family::UniformInterval: return p_[1] - v * (p_[1] - p_[0]);
      case Family::SkewNormal:
        if (v > 0.5) return quantile(1.0 - v);
        return p_[0] - p_[1] * Distribution::skew_normal(0, 1, -p_[2]).standard_lower_quantile(v);
      default: return quantile(1.0 - v);
    }
  }

  double mean() const {
    using detail::kInf;
    using detail::kNaN;
    switch (family_) {
      case Family::Gamma: return p_[0] / p_[1];
      case Family::Beta: return p_[0] / (p_[0] + p_[1]);
      case Family::Normal: return p_[0];
      case Family::InverseGamma: return p_[0] > 1 ? p_[1] / (p_[0] - 1) : kInf;
      case Family::StudentT: return p_[2] > 1 ? p_[0] : kNaN;
      case Family::SkewNormal: return p_[0] + p_[1] * skew_delta() * std::sqrt(2.0 / std::numbers::pi);
      case Family::Cauchy: return kNaN;
      case Family::Poisson: return p_[0];
      case Family::Binomial: return p_[0] * p_[1];
      case Family::UniformInterval: return 0.5 * (p_[0] + p_[1]);
    }
    return kNaN;
  }

  double variance() const {
    using detail::kInf;
    using detail::kNaN;
    switch (family_) {
      case Family::Gamma: return p_[0] / (p_[1] * p_[1]);
      case Family::Beta: {
        double s = p_[0] + p_[1];
        return p_[0] * p_[1] / (s * s * (s + 1));
      }
      case Family::Normal: return p_[1] * p_[1];
      case Family::InverseGamma:
        return p_[0] > 2 ? p_[1] * p_[1] / ((p_[0] - 1) * (p_[0] - 1) * (p_[0] - 2)) : kInf;
      case Family::StudentT:
        if (p_[2] > 2) return p_[1] * p_[1] * p_[2] / (p_[2] - 2);
        return p_[2] > 1 ? kInf : kNaN;
      case Family::SkewNormal: {
        double d = skew_delta();
        return p_[1] * p_[1] * (1 - 2 * d * d / std::numbers::pi);
      }
      case Family::Cauchy: return kNaN;
      case Family::Poisson: return p_[0];
      case Family::Binomial: return p_[0] * p_[1] * (1 - p_[1]);
      case Family::UniformInterval: return (p_[1] - p_[0]) * (p_[1] - p_[0]) / 12.0;
    }
    return kNaN;
  }

  double sample(Rng& rng) const {
    switch (family_) {
      case Family::Gamma: return std::gamma_distribution<double>(p_[0], 1.0 / p_[1])(rng);
      case Family::Beta: {
        double x = std::gamma_distribution<double>(p_[0], 1.0)(rng);
        double y = std::gamma_distribution<double>(p_[1], 1.0)(rng);
        if (x + y > 0) return x / (x + y);
        return quantile(uniform01(rng));  // both shapes tiny and both draws underflowed
      }
      case Family::Normal: return p_[0] + p_[1] * std::normal_distribution<double>()(rng);
      case Family::InverseGamma: return p_[1] / std::gamma_distribution<double>(p_[0], 1.0)(rng);
      case Family::StudentT: return p_[0] + p_[1] * std::student_t_distribution<double>(p_[2])(rng);
      case Family::SkewNormal: {
        std::normal_distribution<double> z;
        double d = skew_delta();
        double z0 = z(rng);
        double z1 = z(rng);
        return p_[0] + p_[1] * (d * std::abs(z0) + std::sqrt(1 - d * d) * z1);
      }
      case Family::Cauchy: return std::cauchy_distribution<double>(p_[0], p_[1])(rng);
      case Family::Poisson: return static_cast<double>(std::poisson_distribution<long long>(p_[0])(rng));
      case Family::Binomial:
        return static_cast<double>(
            std::binomial_distribution<long long>(static_cast<long long>(p_[0]), p_[1])(rng));
      case Family::UniformInterval: return p_[0] + uniform01(rng) * (p_[1] - p_[0]);
    }
    return detail::kNaN;
  }

  std::vector<double> sample(Rng& rng, std::size_t n) const {
    std::vector<double> out(n);
    for (auto& x : out) x = sample(rng);
    return out;
  }

  std::string describe() const {
    std::string s = family_name(family_);
    s += "(";
    for (std::size_t i = 0; i < family_arity(family_); ++i) {
      if (i) s += ",";
      s += detail::fmt(p_[i]);
    }
    return s + ")";
  }

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.family_ == b.family_ && a.p_ == b.p_;
  }

 private:
  using MathPolicy_ = detail::MathPolicy;

  Distribution() = default;

  static double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

  double skew_delta() const { return p_[2] / std::sqrt(1 + p_[2] * p_[2]); }

  void validate() const {
    auto bad = [&](const char* why) {
      throw DomainError(describe() + ": " + why);
    };
    for (std::size_t i = 0; i < family_arity(family_); ++i)
      if (!std::isfinite(p_[i])) bad("parameters must be finite");
    switch (family_) {
      case Family::Gamma:
      case Family::Beta:
      case Family::InverseGamma:
        if (!(p_[0] > 0 && p_[1] > 0)) bad("parameters must be strictly positive");
        break;
      case Family::Normal:
      case Family::Cauchy:
      case Family::SkewNormal:
        if (!(p_[1] > 0)) bad("scale must be strictly positive");
        break;
      case Family::StudentT:
        if (!(p_[1] > 0 && p_[2] > 0)) bad("scale and degrees of freedom must be strictly positive");
        break;
      case Family::Poisson:
        if (!(p_[0] > 0)) bad("rate must be strictly positive");
        break;
      case Family::Binomial:
        if (!(p_[0] >= 1 && p_[0] == std::floor(p_[0]))) bad("trials must be a positive integer");
        if (!(p_[1] > 0 && p_[1] < 1)) bad("success probability must lie in (0,1)");
        break;
      case Family::UniformInterval:
        if (!(p_[0] < p_[1])) bad("requires lo < hi");
        break;
    }
  }

  // The skew-normal cdf has no closed form; integrate the density from a point
  // 12 scales below the location, or from x to 12 scales above for the upper half.
  double skew_normal_cdf(double x) const {
    double mu = p_[0], s = p_[1];
    double lo = mu - 12 * s, hi = mu + 12 * s;
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    auto f = [this](double t) { return pdf(t); };
    numeric::QuadOptions opt{1e-14, 1e-13, 2000};
    if (x <= mu) return std::clamp(numeric::integrate(f, lo, x, opt).value, 0.0, 1.0);
    return std::clamp(1.0 - numeric::integrate(f, x, hi, opt).value, 0.0, 1.0);
  }

  double skew_normal_quantile(double u) const {
    if (u > 0.5) return p_[0] - p_[1] * Distribution::skew_normal(0, 1, -p_[2]).standard_lower_quantile(1 - u);
    return p_[0] + p_[1] * Distribution::skew_normal(0, 1, p_[2]).standard_lower_quantile(u);
  }

  // Lower-tail quantile of a standardized skew-normal, solved on the log-cdf
  // scale so that tiny u keep relative precision.
  double standard_lower_quantile(double u) const {
    double lo = -12, hi = 12;
    while (cdf(lo) > u) lo *= 2;
    double lu = std::log(u);
    return numeric::find_root([&](double z) { return std::log(cdf(z)) - lu; }, lo, hi, 1e-13, 1e-15);
  }

  double discrete_quantile(double u) const {
    double guess = std::floor(mean() + std::sqrt(variance()) * detail::norm_quantile(u));
    double upper = family_ == Family::Binomial ? p_[0] : detail::kInf;
    double k = std::clamp(guess, 0.0, upper);
    while (k < upper && cdf(k) < u) k += 1;
    while (k > 0 && cdf(k - 1) >= u) k -= 1;
    return k;
  }

  Family family_ = Family::Normal;
  std::array<double, 3> p_{};
};

// Piecewise cubic Hermite interpolation of the quantile function of a continuous
// distribution, adaptively refined until the u-error at each interval midpoint is
// below u_tol. Inverting many sorted uniforms through the table costs a lookup
// and a cubic per draw; uniforms outside the tabulated range fall back to the
// exact quantile.
class InverseCdfTable {
 public:
  explicit InverseCdfTable(Distribution d, double u_tol = 1e-11, double tail = 1e-10)
      : dist_(d), u_tol_(u_tol) {
    if (d.is_discrete()) throw UnsupportedError("InverseCdfTable: discrete distributions are not supported");
    double lo = d.quantile(tail);
    double hi = d.quantile(1.0 - tail);
    if (!(lo < hi)) {
      knots_.push_back(make_knot(lo));
      return;
    }
    constexpr int kInitial = 32;
    std::vector<Knot> init;
    for (int i = 0; i <= kInitial; ++i) {
      double t = lo + (hi - lo) * i / kInitial;
      if (i == kInitial) t = hi;
      init.push_back(make_knot(t));
    }
    knots_.push_back(init.front());
    for (std::size_t i = 0; i + 1 < init.size(); ++i) refine(init[i], init[i + 1], 0);
  }

  double operator()(double u) const {
    if (knots_.size() < 2 || u <= knots_.front().u || u >= knots_.back().u) return dist_.quantile(u);
    auto it = std::upper_bound(knots_.begin(), knots_.end(), u, [](double v, const Knot& k) { return v < k.u; });
    std::size_t j = static_cast<std::size_t>(it - knots_.begin());
    return interpolate(knots_[j - 1], knots_[j], u);
  }

  // Maps sorted uniforms to quantiles with a single forward sweep.
  std::vector<double> map_sorted(std::span<const double> sorted_u) const {
    std::vector<double> out(sorted_u.size());
    std::size_t j = 1;
    for (std::size_t i = 0; i < sorted_u.size(); ++i) {
      double u = sorted_u[i];
      if (knots_.size() < 2 || u <= knots_.front().u || u >= knots_.back().u) {
        out[i] = dist_.quantile(u);
        continue;
      }
      while (knots_[j].u <= u) ++j;
      out[i] = interpolate(knots_[j - 1], knots_[j], u);
    }
    return out;
  }

  std::size_t knot_count() const { return knots_.size(); }
  const Distribution& distribution() const { return dist_; }

 private:
  struct Knot {
    double theta, u, slope;  // slope = dtheta/du = 1/pdf
  };

  Knot make_knot(double t) const {
    double f = dist_.pdf(t);
    return {t, dist_.cdf(t), f > 0 ? 1.0 / f : detail::kInf};
  }

  static double interpolate(const Knot& a, const Knot& b, double u) {
    double h = b.u - a.u;
    if (!(h > 0)) return a.theta;
    double t = (u - a.u) / h;
    if (!std::isfinite(a.slope) || !std::isfinite(b.slope)) return a.theta + t * (b.theta - a.theta);
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * a.theta + (t3 - 2 * t2 + t) * h * a.slope + (-2 * t3 + 3 * t2) * b.theta +
           (t3 - t2) * h * b.slope;
  }

  void refine(const Knot& a, const Knot& b, int depth) {
    bool split = false;
    double width = b.theta - a.theta;
    bool can_split = depth < 60 && width > 1e-13 * std::max(1.0, std::abs(a.theta) + std::abs(b.theta));
    if (can_split) {
      if (b.u - a.u > 1.0 / 256) {
        split = true;
      } else if (b.u > a.u) {
        double um = 0.5 * (a.u + b.u);
        double tm = interpolate(a, b, um);
        split = !(tm > a.theta && tm < b.theta) || std::abs(dist_.cdf(tm) - um) > u_tol_;
      }
    }
    if (!split) {
      knots_.push_back(b);
      return;
    }
    double mid = 0.5 * (a.theta + b.theta);
    if (a.theta > 0 && b.theta > 16 * a.theta) mid = std::sqrt(a.theta * b.theta);
    Knot m = make_knot(mid);
    refine(a, m, depth + 1);
    refine(m, b, depth + 1);
  }

  Distribution dist_;
  double u_tol_;
  std::vector<Knot> knots_;
};

}  // namespace wim
