#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wim/error.hpp"

namespace wim::numeric {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int intervals = 0;
};

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

// Globally adaptive Gauss-Kronrod (G10/K21) on a finite interval: the interval with
// the largest error estimate is bisected until the summed estimate meets
// max(abs_tol, rel_tol * |value|) or the interval budget runs out.
template <class F>
QuadResult integrate(F&& f, double a, double b, QuadOptions opt = {}) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  QuadResult out;
  if (!(a < b)) {
    out.converged = true;
    return out;
  }
  struct Piece {
    double a, b, value, error;
  };
  auto eval = [&](double lo, double hi) {
    double err = 0.0;
    double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Piece{lo, hi, v, err};
  };
  auto by_error = [](const Piece& x, const Piece& y) { return x.error < y.error; };

  std::vector<Piece> heap;
  heap.push_back(eval(a, b));
  double total = heap.front().value;
  double total_err = heap.front().error;
  while (true) {
    double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (total_err <= target) {
      out.converged = true;
      break;
    }
    if (static_cast<int>(heap.size()) >= opt.max_intervals) break;
    std::pop_heap(heap.begin(), heap.end(), by_error);
    Piece worst = heap.back();
    double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Cannot split further; accept what we have.
      break;
    }
    heap.pop_back();
    Piece l = eval(worst.a, mid);
    Piece r = eval(mid, worst.b);
    total += l.value + r.value - worst.value;
    total_err += l.error + r.error - worst.error;
    heap.push_back(l);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(r);
    std::push_heap(heap.begin(), heap.end(), by_error);
  }
  // Re-sum to shed incremental rounding.
  std::sort(heap.begin(), heap.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
  out.value = 0.0;
  out.error = 0.0;
  for (const auto& p : heap) {
    out.value += p.value;
    out.error += p.error;
  }
  out.intervals = static_cast<int>(heap.size());
  if (!out.converged) out.converged = out.error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
  return out;
}

template <class F>
double integrate_or_throw(F&& f, double a, double b, QuadOptions opt, const char* what) {
  QuadResult r = integrate(std::forward<F>(f), a, b, opt);
  if (!r.converged || !std::isfinite(r.value)) throw IntegrationError(what, r.error);
  return r.value;
}

// Root of a function with f(lo) <= 0 <= f(hi) (or the reverse). Secant steps are
// taken inside the bracket; every third step, or whenever the secant leaves the
// bracket, a bisection step is used instead.
template <class F>
double find_root(F&& f, double lo, double hi, double ftol, double xtol = 1e-15, int max_iter = 300) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw DomainError("find_root: interval does not bracket a root");
  if (flo > 0) {
    std::swap(lo, hi);
    std::swap(flo, fhi);
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    double cand = hi - fhi * (hi - lo) / (fhi - flo);
    double left = std::min(lo, hi);
    double right = std::max(lo, hi);
    if (it % 3 == 2 || !(cand > left && cand < right)) cand = 0.5 * (lo + hi);
    x = cand;
    double fx = f(x);
    if (std::abs(fx) <= ftol) return x;
    if (fx < 0) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    if (std::abs(hi - lo) <= xtol * (1.0 + std::abs(x))) return x;
  }
  return x;
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Linear-interpolation sample quantile (R type 7) of already sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, p);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace wim::numeric
