#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wim/bounds.hpp"
#include "wim/distributions.hpp"
#include "wim/empirical.hpp"
#include "wim/error.hpp"
#include "wim/numeric.hpp"
#include "wim/parallel.hpp"
#include "wim/posterior.hpp"
#include "wim/rng.hpp"
#include "wim/sampler.hpp"
#include "wim/transport.hpp"

namespace wim {

enum class WimRoute { Auto, Empirical };

struct WimConfig {
  std::size_t draws = 10000;
  std::uint64_t seed = 1;
  double p = 1.0;
  std::size_t splits = 10;        // half-sample splits for the Monte-Carlo standard error
  std::size_t subsample = 2000;   // d >= 2
  std::size_t repeats = 10;       // d >= 2
  WimRoute route = WimRoute::Auto;
  TransportOptions transport;
};

struct MopessReport {
  double mopess = 0.0;
  double se = 0.0;
  std::vector<int> opess;
  double q05 = 0.0;
  double q95 = 0.0;
  std::size_t L = 0;
  std::size_t reps = 0;
};

struct NeutralityResult {
  double value = 0.0;
  bool degenerate = false;  // MLE on the boundary of the parameter space
};

struct ImpactReport {
  double wim = 0.0;
  std::optional<double> wim_se;
  std::optional<double> quadrature_error;
  std::string method;
  std::optional<std::pair<NeutralityResult, NeutralityResult>> neutrality;
  std::optional<MopessReport> mopess;
  std::optional<BoundsReport> bounds;
  std::optional<double> exact_gap;  // |wim - bounds.exact|
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double mean_abs_pow(std::span<const double> x, std::span<const double> y, std::span<const std::size_t> idx,
                           double p) {
  double acc = 0;
  for (auto i : idx) {
    double d = std::abs(x[i] - y[i]);
    acc += p == 1 ? d : std::pow(d, p);
  }
  acc /= static_cast<double>(idx.size());
  return p == 1 ? acc : std::pow(acc, 1.0 / p);
}

// Empirical W_p of two analytic laws from common uniforms: the same sorted uniforms
// are pushed through both quantile functions, so the draws come out sorted and
// paired by rank.
inline ImpactReport coupled_wim(const Distribution& d1, const Distribution& d2, const WimConfig& cfg) {
  Rng rng = make_rng(derive_seed(cfg.seed, {0x77696dULL}));
  std::vector<double> u(cfg.draws);
  for (auto& v : u) v = uniform01(rng);
  std::sort(u.begin(), u.end());
  std::vector<double> x = InverseCdfTable(d1).map_sorted(u);
  std::vector<double> y = d1 == d2 ? x : InverseCdfTable(d2).map_sorted(u);
  std::vector<std::size_t> all(cfg.draws);
  std::iota(all.begin(), all.end(), std::size_t{0});
  ImpactReport r;
  r.wim = mean_abs_pow(x, y, all, cfg.p);
  std::vector<double> halves;
  for (std::size_t s = 0; s < cfg.splits; ++s) {
    auto idx = sample_indices(cfg.draws, cfg.draws / 2, rng);
    halves.push_back(mean_abs_pow(x, y, idx, cfg.p));
  }
  r.wim_se = numeric::sample_sd(halves);
  r.method = "empirical-coupled";
  r.draws = cfg.draws;
  r.seed = cfg.seed;
  return r;
}

inline std::vector<double> draw_1d(const Posterior& p, std::size_t n, Rng& rng) {
  if (!p.is_analytic()) {
    auto s = p.draws().data();
    return {s.begin(), s.end()};
  }
  InverseCdfTable table(p.distribution());
  std::vector<double> out(n);
  for (auto& v : out) v = table(uniform01(rng));
  return out;
}

}  // namespace detail

// The Wasserstein impact measure between two posteriors.
inline ImpactReport wim(const Posterior& post1, const Posterior& post2, const WimConfig& cfg = {}) {
  if (post1.dim() != post2.dim()) throw DimensionError("wim: posteriors live in different dimensions");
  if (cfg.draws < 2) throw DomainError("wim: need at least 2 draws");
  if (post1.is_analytic() && post2.is_analytic()) {
    const Distribution& d1 = post1.distribution();
    const Distribution& d2 = post2.distribution();
    if (cfg.route == WimRoute::Empirical) return detail::coupled_wim(d1, d2, cfg);
    ImpactReport r;
    double err = 0;
    r.wim = cfg.p == 1 ? w1_cdf(d1, d2, &err, cfg.transport) : wp_quantile(cfg.p, d1, d2, cfg.transport);
    r.quadrature_error = err;
    r.method = cfg.p == 1 ? "analytic-cdf" : "analytic-quantile";
    r.seed = cfg.seed;
    return r;
  }
  Rng rng = make_rng(derive_seed(cfg.seed, {0x656d70ULL}));
  ImpactReport r;
  r.seed = cfg.seed;
  if (post1.dim() == 1) {
    auto a = EmpiricalMeasure::from_1d(detail::draw_1d(post1, cfg.draws, rng));
    auto b = EmpiricalMeasure::from_1d(detail::draw_1d(post2, cfg.draws, rng));
    r.wim = wp_sorted_1d(cfg.p, a.sorted(), b.sorted());
    std::vector<double> halves;
    for (std::size_t s = 0; s < cfg.splits; ++s) {
      auto ia = sample_indices(a.size(), a.size() / 2, rng);
      auto ib = sample_indices(b.size(), b.size() / 2, rng);
      auto sa = a.subset(ia);
      auto sb = b.subset(ib);
      halves.push_back(wp_sorted_1d(cfg.p, sa.sorted(), sb.sorted()));
    }
    r.wim_se = numeric::sample_sd(halves);
    r.method = "empirical-1d";
    r.draws = std::min(a.size(), b.size());
    return r;
  }
  const EmpiricalMeasure& a = post1.draws();
  const EmpiricalMeasure& b = post2.draws();
  if (a.size() * b.size() <= cfg.transport.cell_cap) {
    r.wim = wp_empirical(cfg.p, a, b, cfg.transport).distance;
    r.method = "empirical-ot";
    r.draws = std::min(a.size(), b.size());
    return r;
  }
  std::size_t k = std::min({cfg.subsample, a.size(), b.size()});
  auto s = subsampled_wp(a, b, cfg.p, k, cfg.repeats, rng, cfg.transport);
  r.wim = s.mean;
  r.wim_se = s.sd / std::sqrt(static_cast<double>(cfg.repeats));
  r.method = "empirical-ot-subsampled";
  r.draws = k;
  return r;
}

// Maximum likelihood estimate of the model parameter(s).
inline std::vector<double> mle(const BayesModel& model) {
  model.validate();
  const auto& lik = model.likelihood;
  double n = static_cast<double>(model.data.size());
  switch (lik.kind) {
    case LikelihoodKind::PoissonIID: return {model.sum() / n};
    case LikelihoodKind::BinomialCount: return {model.sum() / (n * static_cast<double>(lik.trials))};
    case LikelihoodKind::NormalKnownMean: return {model.sum_sq_dev(lik.mu) / n};
    case LikelihoodKind::LogisticDoseResponse: {
      auto m = logistic_mle(lik.doses, lik.dose_trials, model.data);
      return {m.beta0, m.beta1};
    }
    case LikelihoodKind::SkewNormalFull:
      throw UnsupportedError("mle: the skew-normal skewness estimate can diverge; not supported");
  }
  throw UnsupportedError("mle: unknown likelihood");
}

// Posterior mass strictly below the MLE.
inline NeutralityResult neutrality(const Posterior& post, double mle_value,
                                   std::pair<double, double> parameter_space = {-detail::kInf, detail::kInf}) {
  if (!std::isfinite(mle_value)) throw DomainError("neutrality: MLE must be finite");
  NeutralityResult r;
  r.degenerate = mle_value <= parameter_space.first || mle_value >= parameter_space.second;
  if (post.is_analytic()) {
    r.value = std::clamp(post.distribution().cdf(mle_value), 0.0, 1.0);
    return r;
  }
  if (post.dim() != 1) throw DimensionError("neutrality needs a scalar posterior");
  auto s = post.draws().sorted();
  auto it = std::lower_bound(s.begin(), s.end(), mle_value);
  r.value = static_cast<double>(it - s.begin()) / static_cast<double>(s.size());
  return r;
}

struct MopessOptions {
  std::size_t L = 0;      // 0 means 2n
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  TransportOptions transport{1e-8, 1e-9, 4000, 4'000'000};
  unsigned workers = 0;
};

// Signed OPESS of one replicate given its two predictive streams.
inline int opess_from_streams(const Distribution& post_int, const Distribution& post_base, const Likelihood& lik,
                              std::span<const double> s1, std::span<const double> s2,
                              const TransportOptions& topt) {
  std::size_t L = s1.size();
  double best = detail::kInf;
  int arg = 0;
  for (std::size_t m = 1; m <= L; ++m) {
    Distribution base_aug = conjugate_extend(post_base, lik, s1.subspan(0, m));
    double w1 = wp_quantile(2.0, post_int, base_aug, topt);
    if (w1 < best) {
      best = w1;
      arg = static_cast<int>(m);
    }
    Distribution int_aug = conjugate_extend(post_int, lik, s2.subspan(0, m));
    double w2 = wp_quantile(2.0, post_base, int_aug, topt);
    if (w2 < best) {
      best = w2;
      arg = -static_cast<int>(m);
    }
  }
  return arg;
}

inline MopessReport mopess(const BayesModel& model, const PriorSpec& prior_interest, const PriorSpec& prior_base,
                           const MopessOptions& opt = {}) {
  model.validate();
  BayesModel mi = model, mb = model;
  mi.prior = prior_interest;
  mb.prior = prior_base;
  Posterior post_int = conjugate_update(mi);
  Posterior post_base = conjugate_update(mb);
  std::size_t L = opt.L ? opt.L : 2 * model.data.size();
  if (opt.reps < 1) throw DomainError("mopess: reps must be at least 1");
  MopessReport r;
  r.L = L;
  r.reps = opt.reps;
  r.opess.assign(opt.reps, 0);
  parallel_for(
      opt.reps,
      [&](std::size_t rep) {
        Rng rng = make_rng(derive_seed(opt.seed, {0x6f70657373ULL, rep}));
        auto s1 = posterior_predictive_sample(post_int, mi, L, rng);
        auto s2 = posterior_predictive_sample(post_int, mi, L, rng);
        try {
          r.opess[rep] = opess_from_streams(post_int.distribution(), post_base.distribution(), model.likelihood, s1,
                                            s2, opt.transport);
        } catch (const ImproperPosteriorError& e) {
          throw ImproperPosteriorError("mopess replicate " + std::to_string(rep) + ": " + e.what());
        }
      },
      opt.workers);
  std::vector<double> v(r.opess.begin(), r.opess.end());
  r.mopess = numeric::mean(v);
  r.se = numeric::sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
  std::sort(v.begin(), v.end());
  r.q05 = numeric::quantile_sorted(v, 0.05);
  r.q95 = numeric::quantile_sorted(v, 0.95);
  return r;
}

struct BootstrapReport {
  std::vector<double> values;        // one per usable resample, in resample order
  std::vector<std::size_t> flagged;  // resamples excluded for an improper posterior
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

inline std::vector<double> bootstrap_resample(std::span<const double> data, Rng& rng) {
  std::vector<double> out(data.size());
  for (auto& v : out) {
    auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(data.size()));
    v = data[std::min(j, data.size() - 1)];
  }
  return out;
}

// Nonparametric bootstrap of any WIM computation. `wim_of` receives the resample
// and a seed owned by that resample. With `identity_first` resample 0 is the data
// itself.
inline BootstrapReport bootstrap_wim(std::span<const double> data, std::size_t B, std::uint64_t seed,
                                     const std::function<double(std::span<const double>, std::uint64_t)>& wim_of,
                                     unsigned workers = 0, bool identity_first = false) {
  if (B < 1) throw DomainError("bootstrap: B must be at least 1");
  if (data.size() < 2) throw DomainError("bootstrap: need at least 2 observations");
  std::vector<double> vals(B, detail::kNaN);
  std::vector<char> bad(B, 0);
  parallel_for(
      B,
      [&](std::size_t b) {
        Rng rng = make_rng(derive_seed(seed, {0x626f6f74ULL, b}));
        auto res = identity_first && b == 0 ? std::vector<double>(data.begin(), data.end())
                                            : bootstrap_resample(data, rng);
        try {
          vals[b] = wim_of(res, derive_seed(seed, {0x77696dULL, b}));
        } catch (const ImproperPosteriorError&) {
          bad[b] = 1;
        }
      },
      workers);
  BootstrapReport r;
  for (std::size_t b = 0; b < B; ++b) {
    if (bad[b])
      r.flagged.push_back(b);
    else
      r.values.push_back(vals[b]);
  }
  if (r.values.empty()) return r;
  std::vector<double> s = r.values;
  std::sort(s.begin(), s.end());
  r.median = numeric::quantile_sorted(s, 0.5);
  r.q025 = numeric::quantile_sorted(s, 0.025);
  r.q975 = numeric::quantile_sorted(s, 0.975);
  r.q25 = numeric::quantile_sorted(s, 0.25);
  r.q75 = numeric::quantile_sorted(s, 0.75);
  return r;
}

// Bootstrap for a conjugate model: both posteriors rebuilt on each resample.
inline BootstrapReport bootstrap_wim(const BayesModel& model, const PriorSpec& prior1, const PriorSpec& prior2,
                                     std::size_t B, std::uint64_t seed, const WimConfig& cfg = {},
                                     unsigned workers = 0, bool identity_first = false) {
  model.validate();
  return bootstrap_wim(
      model.data, B, seed,
      [&](std::span<const double> res, std::uint64_t s) {
        BayesModel m1 = model, m2 = model;
        m1.data.assign(res.begin(), res.end());
        m2.data = m1.data;
        m1.prior = prior1;
        m2.prior = prior2;
        WimConfig c = cfg;
        c.seed = s;
        return wim(conjugate_update(m1), conjugate_update(m2), c).wim;
      },
      workers, identity_first);
}

}  // namespace wim
