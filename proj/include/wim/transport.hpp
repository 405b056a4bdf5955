#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "wim/distributions.hpp"
#include "wim/empirical.hpp"
#include "wim/error.hpp"
#include "wim/network_simplex.hpp"
#include "wim/numeric.hpp"
#include "wim/rng.hpp"

namespace wim {

struct PlanEntry {
  std::size_t source;
  std::size_t target;
  double mass;
};

struct TransportPlan {
  std::vector<PlanEntry> pairs;
  double cost = 0.0;  // sum of mass * distance^p
};

struct OtResult {
  double distance = 0.0;
  TransportPlan plan;
};

struct SubsampledResult {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> values;
};

struct TransportOptions {
  double abs_tol = 1e-8;
  double tail = 1e-9;
  int max_intervals = 4000;
  std::size_t cell_cap = 4'000'000;
};

// Integral of |F1 - F2| over [a, b].
template <class F1, class F2>
numeric::QuadResult w1_cdf(F1&& cdf1, F2&& cdf2, double a, double b, const TransportOptions& opt = {}) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw DomainError("w1_cdf: need a finite interval a < b");
  auto r = numeric::integrate([&](double t) { return std::abs(cdf1(t) - cdf2(t)); }, a, b,
                              {opt.abs_tol, 0.0, opt.max_intervals});
  if (!r.converged || !std::isfinite(r.value)) throw IntegrationError("w1_cdf: quadrature did not converge", r.error);
  return r;
}

// W1 between two analytic distributions by the CDF integral. Infinite ends of the
// support are cut at the outermost tail quantiles; the cut is charged to the error.
inline double w1_cdf(const Distribution& d1, const Distribution& d2, double* error = nullptr,
                     const TransportOptions& opt = {}) {
  if (d1 == d2) {
    if (error) *error = 0.0;
    return 0.0;
  }
  auto [lo1, hi1] = d1.support();
  auto [lo2, hi2] = d2.support();
  double lo = std::isfinite(lo1) && std::isfinite(lo2) ? std::min(lo1, lo2)
                                                       : std::min(d1.quantile(opt.tail), d2.quantile(opt.tail));
  double hi = std::isfinite(hi1) && std::isfinite(hi2)
                  ? std::max(hi1, hi2)
                  : std::max(d1.quantile(1 - opt.tail), d2.quantile(1 - opt.tail));
  auto r = w1_cdf([&](double t) { return d1.cdf(t); }, [&](double t) { return d2.cdf(t); }, lo, hi, opt);
  bool truncated = !(std::isfinite(lo1) && std::isfinite(lo2) && std::isfinite(hi1) && std::isfinite(hi2));
  if (error) *error = r.error + (truncated ? 2 * opt.tail * (hi - lo) : 0.0);
  return r.value;
}

// (Integral over (eps, 1 - eps) of |Q1 - Q2|^p)^(1/p).
template <class Q1, class Q2>
  requires std::invocable<Q1&, double> && std::invocable<Q2&, double>
double wp_quantile(double p, Q1&& q1, Q2&& q2, const TransportOptions& opt = {}) {
  if (!(p >= 1)) throw DomainError("wp_quantile: order must be at least 1");
  auto r = numeric::integrate(
      [&](double u) {
        double d = std::abs(q1(u) - q2(u));
        return p == 1 ? d : std::pow(d, p);
      },
      opt.tail, 1 - opt.tail, {opt.abs_tol, 0.0, opt.max_intervals});
  if (!r.converged || !std::isfinite(r.value)) throw IntegrationError("wp_quantile: quadrature did not converge", r.error);
  return p == 1 ? r.value : std::pow(std::max(r.value, 0.0), 1.0 / p);
}

template <class Q1, class Q2>
  requires std::invocable<Q1&, double> && std::invocable<Q2&, double>
double w1_quantile(Q1&& q1, Q2&& q2, const TransportOptions& opt = {}) {
  return wp_quantile(1.0, std::forward<Q1>(q1), std::forward<Q2>(q2), opt);
}

// For analytic laws the integral runs in z with u = Phi(z), which smooths the
// quantile singularities at the ends of (0, 1); for z > 0 the upper-tail quantiles
// are used so that u near 1 keeps full precision.
inline double wp_quantile(double p, const Distribution& d1, const Distribution& d2, const TransportOptions& opt = {}) {
  if (!(p >= 1)) throw DomainError("wp_quantile: order must be at least 1");
  if (d1 == d2) return 0.0;
  auto pw = [p](double d) { return p == 1 ? d : std::pow(d, p); };
  numeric::QuadOptions q{opt.abs_tol / 2, 0.0, opt.max_intervals};
  double zt = -detail::norm_quantile(opt.tail);
  auto lower = numeric::integrate(
      [&](double z) {
        double u = detail::norm_cdf(z);
        return pw(std::abs(d1.quantile(u) - d2.quantile(u))) * detail::norm_pdf(z);
      },
      -zt, 0.0, q);
  auto upper = numeric::integrate(
      [&](double z) {
        double v = detail::norm_cdf(-z);
        return pw(std::abs(d1.upper_quantile(v) - d2.upper_quantile(v))) * detail::norm_pdf(z);
      },
      0.0, zt, q);
  double total = lower.value + upper.value;
  if (!lower.converged || !upper.converged || !std::isfinite(total))
    throw IntegrationError("wp_quantile: quadrature did not converge", lower.error + upper.error);
  return p == 1 ? total : std::pow(std::max(total, 0.0), 1.0 / p);
}

inline double w1_quantile(const Distribution& d1, const Distribution& d2, const TransportOptions& opt = {}) {
  return wp_quantile(1.0, d1, d2, opt);
}

// Exact W_p between two sorted samples, via the empirical quantile functions.
inline double wp_sorted_1d(double p, std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("empirical W: empty sample");
  auto pw = [p](double d) { return p == 1 ? d : std::pow(d, p); };
  double acc = 0.0;
  if (a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += pw(std::abs(a[i] - b[i]));
    acc /= static_cast<double>(a.size());
  } else {
    // Breakpoints i/n and j/m merged with integer arithmetic: compare i*m with j*n.
    std::uint64_t n = a.size(), m = b.size();
    std::uint64_t i = 0, j = 0, pos = 0, total = n * m;
    while (pos < total) {
      std::uint64_t next = std::min((i + 1) * m, (j + 1) * n);
      acc += static_cast<double>(next - pos) * pw(std::abs(a[i] - b[j]));
      pos = next;
      if ((i + 1) * m == pos) ++i;
      if ((j + 1) * n == pos) ++j;
    }
    acc /= static_cast<double>(total);
  }
  return p == 1 ? acc : std::pow(acc, 1.0 / p);
}

inline double w1_empirical_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.dim() != 1 || b.dim() != 1) throw DimensionError("w1_empirical_1d needs one-dimensional measures");
  return wp_sorted_1d(1.0, a.sorted(), b.sorted());
}

// Exact optimal transport between uniform-weight clouds with Euclidean ground cost
// raised to the power p.
inline OtResult wp_empirical(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                             const TransportOptions& opt = {}) {
  if (!(p >= 1)) throw DomainError("wp_empirical: order must be at least 1");
  if (a.dim() != b.dim()) throw DimensionError("wp_empirical: dimensions differ");
  std::size_t n = a.size(), m = b.size();
  if (n * m > opt.cell_cap)
    throw CapacityError("wp_empirical: " + std::to_string(n) + " x " + std::to_string(m) +
                        " cost matrix exceeds the cell cap of " + std::to_string(opt.cell_cap) +
                        "; use subsampled_wp");
  std::size_t d = a.dim();
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = a.point(i);
    for (std::size_t j = 0; j < m; ++j) {
      auto y = b.point(j);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
      double dist = d == 1 ? std::abs(x[0] - y[0]) : std::sqrt(s);
      cost[i * m + j] = p == 1 ? dist : (p == 2 ? s : std::pow(dist, p));
    }
  }
  std::uint64_t g = std::gcd(n, m);
  std::vector<TransportationSimplex::Flow> supply(n, static_cast<TransportationSimplex::Flow>(m / g));
  std::vector<TransportationSimplex::Flow> demand(m, static_cast<TransportationSimplex::Flow>(n / g));
  double total = static_cast<double>(n) * static_cast<double>(m / g);

  TransportationSimplex solver(supply, demand, cost);
  solver.solve();

  OtResult out;
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      auto f = solver.flow(static_cast<int>(i), static_cast<int>(j));
      if (f != 0) {
        double mass = static_cast<double>(f) / total;
        out.plan.pairs.push_back({i, j, mass});
        c += static_cast<double>(f) * cost[i * m + j];
      }
    }
  out.plan.cost = std::max(0.0, c / total);
  out.distance = p == 1 ? out.plan.cost : std::pow(out.plan.cost, 1.0 / p);
  return out;
}

// k distinct indices out of n by a partial Fisher-Yates shuffle.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    if (j >= n) j = n - 1;
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

// Mean and sd of W_p over r independent pairs of size-k subsamples.
inline SubsampledResult subsampled_wp(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p, std::size_t k,
                                      std::size_t r, Rng& rng, const TransportOptions& opt = {}) {
  if (k == 0 || r == 0) throw DomainError("subsampled_wp: k and r must be positive");
  if (k > a.size() || k > b.size()) throw DomainError("subsampled_wp: k exceeds a sample size");
  SubsampledResult out;
  out.values.reserve(r);
  for (std::size_t rep = 0; rep < r; ++rep) {
    if (k == a.size() && k == b.size()) {
      out.values.push_back(wp_empirical(p, a, b, opt).distance);
      continue;
    }
    auto ia = sample_indices(a.size(), k, rng);
    auto ib = sample_indices(b.size(), k, rng);
    out.values.push_back(wp_empirical(p, a.subset(ia), b.subset(ib), opt).distance);
  }
  out.mean = numeric::mean(out.values);
  out.sd = numeric::sample_sd(out.values);
  return out;
}

}  // namespace wim
