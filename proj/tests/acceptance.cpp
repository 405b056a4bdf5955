// Acceptance run: one PASS/FAIL line per criterion, then a summary line.
#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wim/wim.hpp"

using namespace wim;
namespace ex = wim::experiment;

namespace {

constexpr std::uint64_t kRoot = 20210;

struct Digest {
  std::uint64_t h = 1469598103934665603ULL;
  void add(const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  void add(double v) { add(io::fmt17(v)); }
  void add(const std::optional<double>& v) { add(v ? io::fmt17(*v) : std::string("-")); }
};

struct Outcome {
  bool pass = false;
  std::string detail;
  std::uint64_t digest = 0;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return detail::kNaN;
  std::sort(v.begin(), v.end());
  return numeric::quantile_sorted(v, 0.5);
}

std::uint64_t digest_rows(const std::vector<io::SimRow>& rows) {
  std::ostringstream os;
  io::write_csv(os, rows);
  Digest d;
  d.add(os.str());
  return d.h;
}

double poidist(double a1, double b1, double a2, double b2, double n, double sum_x) {
  return std::abs(a2 - a1 - (b2 - b1) * (a2 + sum_x) / (n + b2)) / (n + b1);
}

// 1. Poisson grid against the closed-form distance.
Outcome poisson_exactness() {
  auto spec = ex::default_spec(ex::Kind::PoissonGrid);
  const std::size_t reps = 100;
  const double n = 10;
  Digest dg;
  std::vector<double> abs_err, rel_err;
  std::size_t failed = 0;
  for (std::size_t it = 0; it < spec.theta.size(); ++it)
    for (std::size_t rep = 0; rep < reps; ++rep) {
      Rng rng = make_rng(derive_seed(kRoot, {1, it, rep}));
      std::poisson_distribution<long> pois(spec.theta[it]);
      std::vector<double> x(10);
      for (auto& v : x) v = static_cast<double>(pois(rng));
      double sum_x = std::accumulate(x.begin(), x.end(), 0.0);
      for (std::size_t ip = 0; ip < spec.priors.size(); ++ip) {
        auto p1 = io::parse_prior(spec.priors[ip].prior1, LikelihoodKind::PoissonIID);
        auto p2 = io::parse_prior(spec.priors[ip].prior2, LikelihoodKind::PoissonIID);
        try {
          auto post1 = conjugate_update({Likelihood::poisson(), p1, x});
          auto post2 = conjugate_update({Likelihood::poisson(), p2, x});
          WimConfig cfg;
          cfg.draws = 10000;
          cfg.route = WimRoute::Empirical;
          cfg.seed = derive_seed(kRoot, {1, it, rep, ip});
          double w = wim::wim(post1, post2, cfg).wim;
          double a1 = p1.distribution().params()[0], b1 = p1.distribution().params()[1];
          double a2 = p2.distribution().params()[0], b2 = p2.distribution().params()[1];
          double truth = poidist(a1, b1, a2, b2, n, sum_x);
          abs_err.push_back(std::abs(w - truth));
          if (truth > 0) rel_err.push_back(std::abs(w - truth) / truth);
          dg.add(w);
        } catch (const std::exception&) {
          ++failed;
          dg.add("error");
        }
      }
    }
  double ma = median(abs_err), mr = median(rel_err);
  return {failed == 0 && ma <= 0.002 && mr <= 0.003,
          fmt("median |WIM - exact| = %.6f (<= 0.002), median relative error = %.4f%% (<= 0.3%%), %zu cases, %zu "
              "errors",
              ma, 100 * mr, abs_err.size(), failed),
          dg.h};
}

// 2. Binomial closed-form sandwich.
Outcome binomial_sandwich() {
  auto spec = ex::default_spec(ex::Kind::BinomialGrid);
  spec.replicates = 100;
  spec.draws = 10000;
  spec.root_seed = derive_seed(kRoot, {2});
  auto rows = ex::run_grid(spec);
  std::size_t usable = 0, inside = 0, closer = 0, improper = 0, other = 0;
  for (const auto& r : rows) {
    if (!r.error.empty() || !r.wim || !r.lower || !r.upper) {
      (r.error.find("improper") != std::string::npos ? improper : other)++;
      continue;
    }
    ++usable;
    double w = *r.wim, se = r.wim_se.value_or(0.0);
    if (*r.lower - 3 * se <= w && w <= *r.upper + 3 * se) ++inside;
    if (std::abs(w - *r.lower) < std::abs(*r.upper - w)) ++closer;
  }
  double f_in = static_cast<double>(inside) / static_cast<double>(usable);
  double f_close = static_cast<double>(closer) / static_cast<double>(usable);
  return {other == 0 && f_in >= 0.99 && f_close >= 0.80,
          fmt("inside [lower - 3SE, upper + 3SE]: %.2f%% (>= 99%%); closer to lower: %.2f%% (>= 80%%); %zu usable "
              "rows, %zu Haldane rows with x in {0, n} skipped as improper, %zu other errors",
              100 * f_in, 100 * f_close, usable, improper, other),
          digest_rows(rows)};
}

// 3. Normal model: width of the bounds relative to the WIM.
Outcome normal_near_exactness() {
  auto spec = ex::default_spec(ex::Kind::NormalGrid);
  spec.replicates = 100;
  spec.draws = 10000;
  spec.root_seed = derive_seed(kRoot, {3});
  auto rows = ex::run_grid(spec);
  std::size_t cells = spec.grid_points(), cells_ok = 0, usable = 0, inside = 0, failed = 0;
  double worst = 0;
  std::string worst_cell;
  for (std::size_t g = 0; g < cells; ++g) {
    double sum = 0;
    std::size_t k = 0;
    for (std::size_t rep = 0; rep < spec.replicates; ++rep) {
      const auto& r = rows[g * spec.replicates + rep];
      if (!r.error.empty() || !r.wim || !r.lower || !r.upper || !(*r.wim > 0)) {
        ++failed;
        continue;
      }
      ++usable;
      double w = *r.wim, se = r.wim_se.value_or(0.0);
      if (*r.lower - 3 * se <= w && w <= *r.upper + 3 * se) ++inside;
      sum += (*r.upper - *r.lower) / w;
      ++k;
    }
    double rel = k ? sum / static_cast<double>(k) : detail::kInf;
    if (rel <= 0.25) ++cells_ok;
    if (rel > worst) {
      const auto& r = rows[g * spec.replicates];
      worst = rel;
      worst_cell = fmt("%s, n=%ld, sigma^2=%g", r.prior2.c_str(), r.n, r.theta);
    }
  }
  double f_in = static_cast<double>(inside) / static_cast<double>(usable);
  return {cells_ok == cells && f_in >= 0.99 && failed == 0,
          fmt("cells with mean (upper - lower)/WIM <= 25%%: %zu/%zu (worst %.1f%% at %s); inside [lower - 3SE, upper "
              "+ 3SE]: %.2f%% (>= 99%%); %zu errors",
              cells_ok, cells, 100 * worst, worst_cell.c_str(), 100 * f_in, failed),
          digest_rows(rows)};
}

// 4. Exact OT against the permutation brute force.
Outcome ot_oracle() {
  Rng rng = make_rng(derive_seed(kRoot, {4}));
  std::normal_distribution<double> z;
  Digest dg;
  double worst = 0;
  for (int k = 0; k < 500; ++k) {
    std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 6), d = 1 + static_cast<std::size_t>(uniform01(rng) * 3);
    double p = uniform01(rng) < 0.5 ? 1.0 : 2.0;
    std::vector<double> a(n * d), b(n * d);
    for (auto& v : a) v = z(rng);
    for (auto& v : b) v = z(rng);
    double got = wp_empirical(p, EmpiricalMeasure(a, d), EmpiricalMeasure(b, d)).distance;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = detail::kInf;
    do {
      double c = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += (a[i * d + j] - b[perm[i] * d + j]) * (a[i * d + j] - b[perm[i] * d + j]);
        c += std::pow(std::sqrt(s), p);
      }
      best = std::min(best, c / static_cast<double>(n));
    } while (std::next_permutation(perm.begin(), perm.end()));
    double want = std::pow(best, 1 / p);
    worst = std::max(worst, std::abs(got - want));
    dg.add(got);
  }
  return {worst <= 1e-10, fmt("max |network simplex - brute force| = %.3g over 500 instances (<= 1e-10)", worst), dg.h};
}

// Random conjugate model with a pair of proper priors.
std::pair<BayesModel, PriorSpec> random_conjugate(int family, Rng& rng) {
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  std::size_t n = 3 + static_cast<std::size_t>(uniform01(rng) * 30);
  if (family == 0) {
    auto x = Distribution::poisson(u(0.5, 30)).sample(rng, n);
    return {{Likelihood::poisson(), PriorSpec::proper(Distribution::gamma(u(0.3, 6), u(0.3, 6))), x},
            PriorSpec::proper(Distribution::gamma(u(0.3, 6), u(0.3, 6)))};
  }
  if (family == 1) {
    long trials = 5 + static_cast<long>(uniform01(rng) * 100);
    std::vector<double> x{static_cast<double>(Distribution::binomial(trials, u(0.05, 0.95)).sample(rng, 1)[0])};
    return {{Likelihood::binomial(trials), PriorSpec::proper(Distribution::beta(u(0.3, 6), u(0.3, 6))), x},
            PriorSpec::proper(Distribution::beta(u(0.3, 6), u(0.3, 6)))};
  }
  auto x = Distribution::normal(0, std::sqrt(u(0.5, 20))).sample(rng, n + 4);
  return {{Likelihood::normal_known_mean(0), PriorSpec::proper(Distribution::inverse_gamma(u(0.5, 5), u(0.3, 6))), x},
          PriorSpec::proper(Distribution::inverse_gamma(u(0.5, 5), u(0.3, 6)))};
}

// 5. Analytic routes against each other and against the empirical route.
Outcome dual_route() {
  Rng rng = make_rng(derive_seed(kRoot, {5}));
  Digest dg;
  double worst = 0;
  std::vector<double> dev;
  for (int k = 0; k < 50; ++k) {
    auto [m1, prior2] = random_conjugate(k % 3, rng);
    BayesModel m2 = m1;
    m2.prior = prior2;
    auto post1 = conjugate_update(m1), post2 = conjugate_update(m2);
    double c = w1_cdf(post1.distribution(), post2.distribution());
    double q = w1_quantile(post1.distribution(), post2.distribution());
    WimConfig cfg;
    cfg.draws = 10000;
    cfg.route = WimRoute::Empirical;
    cfg.seed = derive_seed(kRoot, {5, static_cast<std::uint64_t>(k)});
    double e = wim::wim(post1, post2, cfg).wim;
    worst = std::max(worst, std::abs(c - q));
    dev.push_back(std::abs(e - c));
    dg.add(c);
    dg.add(q);
    dg.add(e);
  }
  double md = median(dev);
  return {worst <= 1e-6 && md <= 0.01,
          fmt("max |w1_cdf - w1_quantile| = %.3g (<= 1e-6); median |empirical - w1_cdf| = %.5f (<= 0.01) on 50 pairs",
              worst, md),
          dg.h};
}

// 6. Quadrature bounds against the printed closed forms.
Outcome theorem1_vs_closed_forms() {
  Rng rng = make_rng(derive_seed(kRoot, {6}));
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  Digest dg;
  int lower_ok = 0, upper_ok = 0, mono = 0, mono_upper_ok = 0, poisson_ok = 0, errors = 0;
  double worst_upper = 0;
  for (int k = 0; k < 100; ++k) {
    try {
      BoundsReport cf, t1;
      bool monotone = false;
      if (k % 4 == 3) {
        double a = u(0.2, 3), b = u(0, 3), n = 6 + std::floor(u(0, 55)), s = u(0.5, 200);
        cf = normal_ig_bounds(a, b, n, s);
        // A dataset of n points with sum of squares s about the known mean 0.
        std::vector<double> x(static_cast<std::size_t>(n), std::sqrt(s / n));
        auto lik = Likelihood::normal_known_mean(0);
        BayesModel m{lik, PriorSpec::jeffreys_variance(), x};
        auto prior2 = b > 0 ? PriorSpec::proper(Distribution::inverse_gamma(a, b)) : PriorSpec::improper_ig(a, 0);
        t1 = theorem1_bounds(conjugate_update(m).distribution(), prior_ratio(lik, m.prior, prior2));
        monotone = b == 0;
      } else {
        long nt = 5 + static_cast<long>(u(0, 96));
        long x = static_cast<long>(u(0, static_cast<double>(nt) + 1));
        PriorSpec prior2 = PriorSpec::flat();
        if (k % 4 == 0) {
          double a = u(0.2, 4), b = u(0.2, 4);
          cf = binomial_bounds(BinomialVariant::BetaVsUniform, nt, x, a, b);
          prior2 = PriorSpec::proper(Distribution::beta(a, b));
          monotone = (a - 1) * (b - 1) <= 0;
        } else if (k % 4 == 1) {
          cf = binomial_bounds(BinomialVariant::JeffreysVsUniform, nt, x);
          prior2 = PriorSpec::proper(Distribution::beta(0.5, 0.5));
        } else {
          x = std::clamp(x, 1L, nt - 1);
          cf = binomial_bounds(BinomialVariant::HaldaneVsUniform, nt, x);
          prior2 = PriorSpec::improper_beta(0, 0);
        }
        auto lik = Likelihood::binomial(nt);
        BayesModel m{lik, PriorSpec::proper(Distribution::beta(1, 1)), {static_cast<double>(x)}};
        t1 = theorem1_bounds(conjugate_update(m).distribution(), prior_ratio(lik, m.prior, prior2));
      }
      bool lo = std::abs(t1.lower - cf.lower) <= 1e-6, up = std::abs(t1.upper - cf.upper) <= 1e-6;
      lower_ok += lo;
      upper_ok += up;
      mono += monotone;
      mono_upper_ok += monotone && up;
      worst_upper = std::max(worst_upper, std::abs(t1.upper - cf.upper));
      dg.add(t1.lower);
      dg.add(t1.upper);
    } catch (const std::exception& e) {
      ++errors;
      dg.add(e.what());
    }
  }
  for (int k = 0; k < 100; ++k) {
    double a1 = u(0.3, 8), b1 = u(0.3, 8), a2 = u(0.3, 8), b2 = u(0.3, 8);
    if ((a2 - a1) * (b2 - b1) > 0) std::swap(b1, b2);
    auto x = Distribution::poisson(u(0.5, 40)).sample(rng, 10);
    double sum_x = std::accumulate(x.begin(), x.end(), 0.0);
    auto lik = Likelihood::poisson();
    BayesModel m{lik, PriorSpec::proper(Distribution::gamma(a1, b1)), x};
    try {
      auto t1 = theorem1_bounds(conjugate_update(m).distribution(),
                                prior_ratio(lik, m.prior, PriorSpec::proper(Distribution::gamma(a2, b2))));
      if (t1.exact && std::abs(*t1.exact - poidist(a1, b1, a2, b2, 10, sum_x)) <= 1e-6) ++poisson_ok;
      dg.add(t1.exact);
    } catch (const std::exception& e) {
      ++errors;
      dg.add(e.what());
    }
  }
  return {lower_ok == 100 && upper_ok == 100 && poisson_ok == 100 && errors == 0,
          fmt("lower within 1e-6: %d/100; upper within 1e-6: %d/100 (monotone-ratio configurations %d/%d, max upper "
              "gap %.3g); Poisson exact value within 1e-6: %d/100; %d errors",
              lower_ok, upper_ok, mono_upper_ok, mono, worst_upper, poisson_ok, errors),
          dg.h};
}

// 7. Neutrality of the Beta(1/3, 1/3) prior.
Outcome neutrality_calibration() {
  const long n = 50;
  const double a = 1.0 / 3;
  auto lik = Likelihood::binomial(n);
  auto prior = PriorSpec::proper(Distribution::beta(a, a));
  Rng rng = make_rng(derive_seed(kRoot, {7}));
  std::binomial_distribution<long> binom(n, 0.5);
  Digest dg;
  std::vector<double> vals;
  double oracle_gap = 0;
  for (int k = 0; k < 1000; ++k) {
    double x = static_cast<double>(binom(rng));
    BayesModel m{lik, prior, {x}};
    auto post = conjugate_update(m);
    double mle_v = mle(m)[0];
    double v = neutrality(post, mle_v, {0.0, 1.0}).value;
    vals.push_back(v);
    if (x > 0 && x < n) oracle_gap = std::max(oracle_gap, std::abs(v - boost::math::ibeta(x + a, n - x + a, mle_v)));
    dg.add(v);
  }
  double med = median(vals);
  BayesModel sym{lik, prior, {25.0}};
  double half = neutrality(conjugate_update(sym), 0.5, {0.0, 1.0}).value;
  dg.add(half);
  bool pass = med >= 0.48 && med <= 0.52 && std::abs(half - 0.5) <= 1e-12 && oracle_gap <= 1e-10;
  return {pass,
          fmt("median Neutrality = %.4f over 1000 replicates (in [0.48, 0.52]); symmetric posterior |N - 0.5| = %.3g "
              "(<= 1e-12); max gap to incomplete-beta oracle %.3g",
              med, std::abs(half - 0.5), oracle_gap),
          dg.h};
}

// 8. MOPESS null and sign.
Outcome mopess_properties() {
  Digest dg;
  Rng rng = make_rng(derive_seed(kRoot, {8}));
  auto x = Distribution::normal(0, 1).sample(rng, 10);
  auto ig = PriorSpec::proper(Distribution::inverse_gamma(1, 1));
  MopessOptions opt;
  opt.reps = 500;
  opt.seed = derive_seed(kRoot, {8, 0});
  auto null = mopess({Likelihood::normal_known_mean(0), ig, x}, ig, ig, opt);
  dg.add(null.mopess);
  bool null_ok = std::abs(null.mopess) <= 2 * null.se;

  BayesModel pois{Likelihood::poisson(), PriorSpec::flat(), std::vector<double>(10, 5.0)};
  auto interest = PriorSpec::proper(Distribution::gamma(1, 5));
  int positive = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    MopessOptions o;
    o.seed = derive_seed(kRoot, {8, 1, r});
    auto rep = mopess(pois, interest, PriorSpec::flat(), o);
    positive += rep.mopess > 0;
    dg.add(rep.mopess);
  }
  return {null_ok && positive >= 18,
          fmt("identical priors: MOPESS = %.3f, 2 SE = %.3f at 500 reps; Gamma(1,5) vs flat: positive in %d/20 runs "
              "(>= 18)",
              null.mopess, 2 * null.se, positive),
          dg.h};
}

// 9. Bioassay: ordering of the uniform-vs-Cauchy distances.
Outcome bioassay() {
  const double table[3][4] = {{6.115, 0.129, 6.113, 0.028}, {5.162, 0.090, 5.161, 0.017}, {3.851, 0.060, 3.850, 0.013}};
  Digest dg;
  int ordered = 0, slope_close = 0, runs_ok = 0;
  std::vector<std::vector<double>> cols(12);
  for (std::uint64_t r = 0; r < 20; ++r) {
    ex::DemoConfig cfg;
    cfg.seed = derive_seed(kRoot, {9, r});
    cfg.mcmc.seed = cfg.seed;
    cfg.wim.subsample = 1000;
    auto d = ex::run_bioassay_demo(cfg, true);
    bool ok = d.pairs.size() == 3;
    for (const auto& p : d.pairs) ok = ok && p.error.empty() && p.joint && p.beta0 && p.beta1 && p.ld50;
    if (!ok) {
      dg.add("error");
      continue;
    }
    ++runs_ok;
    auto val = [&](std::size_t i, int c) {
      const auto& p = d.pairs[i];
      return *(c == 0 ? p.joint : c == 1 ? p.beta0 : c == 2 ? p.beta1 : p.ld50);
    };
    bool ord = true, close = true;
    for (int c = 0; c < 4; ++c) ord = ord && val(0, c) > val(1, c) && val(1, c) > val(2, c);
    for (std::size_t i = 0; i < 3; ++i) {
      close = close && std::abs(val(i, 2) - val(i, 0)) <= 0.15 * val(i, 0);
      for (int c = 0; c < 4; ++c) {
        cols[i * 4 + static_cast<std::size_t>(c)].push_back(val(i, c));
        dg.add(val(i, c));
      }
    }
    ordered += ord;
    slope_close += close;
  }
  const char* names[] = {"joint", "beta0", "beta1", "LD50"};
  const char* scales[] = {"2.5", "5", "10"};
  int loose = 0;
  double worst = 0;
  std::string worst_entry;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 4; ++c) {
      double m = median(cols[i * 4 + c]);
      double rel = std::abs(m / table[i][c] - 1);
      loose += rel <= 0.5;
      if (rel > worst) {
        worst = rel;
        worst_entry = fmt("%s vs Cauchy(0,%s): %.3f against %.3f", names[c], scales[i], m, table[i][c]);
      }
    }
  return {ordered >= 18 && slope_close >= 18 && loose == 12,
          fmt("decreasing in the Cauchy scale on joint, beta0, beta1 and LD50: %d/20 runs (>= 18); beta1 within 15%% "
              "of joint: %d/20; medians within 50%% of the published table: %d/12 (worst %s, %.0f%%); %d runs completed",
              ordered, slope_close, loose, worst_entry.c_str(), 100 * worst, runs_ok),
          dg.h};
}

// 10. Skew-normal skewness priors.
Outcome skewnormal() {
  Digest dg;
  int uniform_max = 0, normal_min = 0;
  std::size_t uniform_failures = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    ex::DemoConfig cfg;
    cfg.seed = derive_seed(kRoot, {10, r});
    cfg.data_seed = derive_seed(kRoot, {10, 1, r});
    auto d = ex::run_skewnormal_demo(cfg);
    double best = -1, least = detail::kInf;
    std::size_t arg_best = 0, arg_least = 0;
    for (std::size_t k = 0; k < d.pairs.size(); ++k) {
      const auto& p = d.pairs[k];
      dg.add(p.value);
      if (!p.value) continue;
      if (*p.value > best) best = *p.value, arg_best = k;
      if (*p.value < least) least = *p.value, arg_least = k;
    }
    const auto& hi = d.pairs[arg_best];
    const auto& lo = d.pairs[arg_least];
    uniform_failures += d.fits[0] ? 0 : 1;
    uniform_max += d.fits[0] && (d.labels[hi.i] == "Uniform" || d.labels[hi.j] == "Uniform");
    normal_min += d.labels[lo.i] == "Normal" && d.labels[lo.j] == "SkewNormal";
  }

  // Bootstrap of every pair on one dataset; each resample refits all six priors.
  auto priors = ex::skewnormal_priors();
  auto data = ex::skewnormal_data(derive_seed(kRoot, {10, 2}));
  const std::size_t B = 250, k = priors.size();
  McmcConfig mc;
  mc.chains = 2;
  mc.iterations = 6000;
  mc.burn_in = 3000;
  mc.thin = 3;
  std::vector<std::vector<double>> boot(k * k);
  std::size_t improper = 0;
  Rng rng = make_rng(derive_seed(kRoot, {10, 3}));
  for (std::size_t b = 0; b < B; ++b) {
    auto res = bootstrap_resample(data, rng);
    std::vector<std::optional<SkewNormalFit>> fits(k);
    for (std::size_t i = 0; i < k; ++i) {
      McmcConfig m = mc;
      m.seed = derive_seed(kRoot, {10, 4, b, i});
      try {
        fits[i] = fit_skew_normal(res, priors[i].prior, m);
      } catch (const ImproperPosteriorError&) {
        ++improper;
      }
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        if (!fits[i] || !fits[j]) continue;
        WimConfig w;
        w.seed = derive_seed(kRoot, {10, 5, b, i, j});
        double v = wim::wim(fits[i]->alpha, fits[j]->alpha, w).wim;
        boot[i * k + j].push_back(v);
        dg.add(v);
      }
  }
  double iqr_with = -1, iqr_without = -1;
  std::size_t with_uniform_pairs = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      auto v = boot[i * k + j];
      if (v.size() < 2) continue;
      std::sort(v.begin(), v.end());
      double iqr = numeric::quantile_sorted(v, 0.75) - numeric::quantile_sorted(v, 0.25);
      if (i == 0) {
        ++with_uniform_pairs;
        iqr_with = std::max(iqr_with, iqr);
      } else {
        iqr_without = std::max(iqr_without, iqr);
      }
    }
  bool iqr_ok = with_uniform_pairs == k - 1 && iqr_with > iqr_without;
  return {uniform_max >= 18 && normal_min >= 18 && iqr_ok,
          fmt("uniform row holds the maximum: %d/20 runs (the uniform fit was improper in %zu/20); Normal vs "
              "SkewNormal is the minimum: %d/20 (>= 18); bootstrap B=250: uniform-prior pairs with an IQR %zu/%zu "
              "(improper fits %zu), largest IQR without the uniform prior %.3f",
              uniform_max, uniform_failures, normal_min, with_uniform_pairs, k - 1, improper, iqr_without),
          dg.h};
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Poisson exactness", poisson_exactness},
      {"binomial sandwich", binomial_sandwich},
      {"normal near-exactness", normal_near_exactness},
      {"OT oracle equivalence", ot_oracle},
      {"dual-route WIM agreement", dual_route},
      {"quadrature bounds vs closed forms", theorem1_vs_closed_forms},
      {"Neutrality calibration", neutrality_calibration},
      {"MOPESS null and sign", mopess_properties},
      {"bioassay reproduction", bioassay},
      {"skew-normal reproduction", skewnormal}};
  // The report also goes to a file, since ctest only shows output of failing tests.
  std::ofstream report("acceptance_report.txt");
  auto emit = [&](const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    report << line << "\n" << std::flush;
  };
  std::vector<std::uint64_t> first;
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.detail = std::string("aborted: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    first.push_back(o.digest);
    passed += o.pass;
    emit(fmt("criterion %zu (%s): %s  %s [%.0f s]", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
             o.detail.c_str(), secs));
  }
  int same = 0;
  std::string diffs;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception&) {
    }
    if (o.digest == first[i] && o.digest != 0) {
      ++same;
    } else {
      diffs += " " + std::to_string(i + 1);
    }
  }
  bool det = same == static_cast<int>(criteria.size());
  passed += det;
  emit(fmt("criterion 11 (determinism): %s  %d/%zu criterion reruns reproduce their result digest%s%s",
           det ? "PASS" : "FAIL", same, criteria.size(), diffs.empty() ? "" : "; differing:", diffs.c_str()));
  emit(fmt("summary: %d/11 criteria passed", passed));
  return 0;
}
