#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wim/bounds.hpp"
#include "wim/distributions.hpp"
#include "wim/error.hpp"
#include "wim/impact.hpp"
#include "wim/io.hpp"
#include "wim/parallel.hpp"
#include "wim/posterior.hpp"
#include "wim/rng.hpp"
#include "wim/sampler.hpp"

namespace wim::experiment {

enum class Kind { PoissonGrid, BinomialGrid, NormalGrid, SkewNormalDemo, BioassayDemo, MopessGrid };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::PoissonGrid: return "poisson-grid";
    case Kind::BinomialGrid: return "binomial-grid";
    case Kind::NormalGrid: return "normal-grid";
    case Kind::SkewNormalDemo: return "skewnormal-demo";
    case Kind::BioassayDemo: return "bioassay-demo";
    case Kind::MopessGrid: return "mopess-grid";
  }
  return "?";
}

inline Kind parse_kind(const std::string& s) {
  static const std::pair<const char*, Kind> names[] = {
      {"poisson-grid", Kind::PoissonGrid},       {"PoissonGrid", Kind::PoissonGrid},
      {"binomial-grid", Kind::BinomialGrid},     {"BinomialGrid", Kind::BinomialGrid},
      {"normal-grid", Kind::NormalGrid},         {"NormalGrid", Kind::NormalGrid},
      {"skewnormal-demo", Kind::SkewNormalDemo}, {"SkewNormalDemo", Kind::SkewNormalDemo},
      {"bioassay-demo", Kind::BioassayDemo},     {"BioassayDemo", Kind::BioassayDemo},
      {"mopess-grid", Kind::MopessGrid},         {"MopessGrid", Kind::MopessGrid}};
  for (auto& [n, k] : names)
    if (s == n) return k;
  throw ParseError("unknown experiment '" + s + "'");
}

inline LikelihoodKind parse_model(const std::string& s) {
  if (s == "poisson") return LikelihoodKind::PoissonIID;
  if (s == "binomial") return LikelihoodKind::BinomialCount;
  if (s == "normal") return LikelihoodKind::NormalKnownMean;
  throw ParseError("unknown model '" + s + "' (expected poisson, binomial or normal)");
}

struct PriorPair {
  std::string prior1;  // baseline
  std::string prior2;
};

struct Spec {
  Kind experiment = Kind::PoissonGrid;
  std::vector<double> theta;
  std::vector<long> n;
  std::vector<PriorPair> priors;
  std::string model = "poisson";  // mopess-grid only; the other grids fix their model
  double mu = 0.0;                // normal grid: known mean
  std::size_t replicates = 100;
  std::size_t draws = 5000;
  std::uint64_t root_seed = 1;
  std::string output;
  WimRoute route = WimRoute::Empirical;
  std::size_t mopess_reps = 100;
  std::size_t mopess_L = 0;
  unsigned workers = 0;

  LikelihoodKind likelihood_kind() const {
    switch (experiment) {
      case Kind::PoissonGrid: return LikelihoodKind::PoissonIID;
      case Kind::BinomialGrid: return LikelihoodKind::BinomialCount;
      case Kind::NormalGrid: return LikelihoodKind::NormalKnownMean;
      case Kind::MopessGrid: return parse_model(model);
      case Kind::SkewNormalDemo: return LikelihoodKind::SkewNormalFull;
      case Kind::BioassayDemo: return LikelihoodKind::LogisticDoseResponse;
    }
    return LikelihoodKind::PoissonIID;
  }

  bool is_grid() const { return experiment != Kind::SkewNormalDemo && experiment != Kind::BioassayDemo; }

  void validate() const {
    if (replicates < 1) throw DomainError("spec: replicates must be at least 1");
    if (draws < 2) throw DomainError("spec: draws must be at least 2");
    if (!is_grid()) return;
    auto lk = likelihood_kind();
    if (theta.empty() || n.empty() || priors.empty()) throw DomainError("spec: theta, n and priors must be non-empty");
    for (double t : theta) {
      bool ok = std::isfinite(t) && t > 0 && (lk != LikelihoodKind::BinomialCount || t < 1);
      if (!ok) throw DomainError("spec: theta " + detail::fmt(t) + " is outside the model's parameter space");
    }
    for (long v : n)
      if (v < 1) throw DomainError("spec: n must be at least 1");
    if (!std::isfinite(mu)) throw DomainError("spec: mu must be finite");
    if (experiment == Kind::MopessGrid && mopess_reps < 1) throw DomainError("spec: mopess reps must be at least 1");
    for (const auto& p : priors) {
      io::parse_prior(p.prior1, lk);
      io::parse_prior(p.prior2, lk);
    }
  }

  std::size_t grid_points() const { return theta.size() * n.size() * priors.size(); }
};

// Default grids, before desk or full scaling of replicates and draws.
inline Spec default_spec(Kind k) {
  Spec s;
  s.experiment = k;
  switch (k) {
    case Kind::PoissonGrid: {
      s.theta = {1, 5, 20, 50};
      s.n = {10};
      const double grid[] = {0.5, 1, 2.5, 5, 10};
      for (double a : grid)
        for (double b : grid)
          if (!(a == 2.5 && b == 2.5))
            s.priors.push_back({"gamma:2.5:2.5", "gamma:" + detail::fmt(a) + ":" + detail::fmt(b)});
      break;
    }
    case Kind::BinomialGrid:
      for (int i = 1; i <= 19; ++i) s.theta.push_back(i * 0.05);
      s.n = {10, 50, 100, 200};
      s.priors = {{"beta:1:1", "beta:0.333333333333333333:0.333333333333333333"},
                  {"beta:1:1", "jeffreys"},
                  {"beta:1:1", "haldane"}};
      break;
    case Kind::NormalGrid:
      s.theta = {0.5, 1, 10, 100};
      s.n = {10, 50};
      s.priors = {{"jeffreys-var", "ig:1:0"},
                  {"jeffreys-var", "ig:1:1"},
                  {"jeffreys-var", "ig:0.5:0.5"},
                  {"jeffreys-var", "ig:0.333333333333333333:0.333333333333333333"}};
      break;
    case Kind::MopessGrid:
      s.model = "poisson";
      s.theta = {5};
      s.n = {10};
      s.priors = {{"flat", "gamma:1:5"}, {"flat", "gamma:5:1"}, {"flat", "flat"}};
      s.replicates = 20;
      break;
    default: break;
  }
  return s;
}

inline Spec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("experiment spec must be a JSON object");
  static const char* known[] = {"experiment", "theta", "n",       "priors",      "model",    "mu",     "replicates",
                                "draws",      "root_seed", "output", "route",   "mopess_reps", "mopess_L", "workers"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) ==
        std::end(known))
      throw ParseError("experiment spec: unknown key '" + it.key() + "'");
  if (!j.contains("experiment")) throw ParseError("experiment spec: 'experiment' is required");
  try {
    Spec s = default_spec(parse_kind(j.at("experiment").get<std::string>()));
    if (j.contains("theta")) s.theta = j.at("theta").get<std::vector<double>>();
    if (j.contains("n")) s.n = j.at("n").get<std::vector<long>>();
    if (j.contains("priors")) {
      s.priors.clear();
      for (const auto& p : j.at("priors")) {
        auto v = p.get<std::vector<std::string>>();
        if (v.size() != 2) throw ParseError("experiment spec: each prior pair needs exactly two entries");
        s.priors.push_back({v[0], v[1]});
      }
    }
    if (j.contains("model")) s.model = j.at("model").get<std::string>();
    if (j.contains("mu")) s.mu = j.at("mu").get<double>();
    auto count = [&](const char* key, std::size_t& out) {
      if (!j.contains(key)) return;
      auto v = j.at(key).get<long long>();
      if (v < 0) throw DomainError(std::string("spec: ") + key + " must be nonnegative");
      out = static_cast<std::size_t>(v);
    };
    count("replicates", s.replicates);
    count("draws", s.draws);
    count("mopess_reps", s.mopess_reps);
    count("mopess_L", s.mopess_L);
    if (j.contains("root_seed")) s.root_seed = j.at("root_seed").get<std::uint64_t>();
    if (j.contains("output")) s.output = j.at("output").get<std::string>();
    if (j.contains("workers")) s.workers = j.at("workers").get<unsigned>();
    if (j.contains("route")) {
      auto r = j.at("route").get<std::string>();
      if (r == "auto")
        s.route = WimRoute::Auto;
      else if (r == "empirical")
        s.route = WimRoute::Empirical;
      else
        throw ParseError("experiment spec: route must be 'auto' or 'empirical'");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment spec: ") + e.what());
  }
}

inline nlohmann::json spec_to_json(const Spec& s) {
  nlohmann::json pr = nlohmann::json::array();
  for (const auto& p : s.priors) pr.push_back({p.prior1, p.prior2});
  return {{"experiment", kind_name(s.experiment)},
          {"theta", s.theta},
          {"n", s.n},
          {"priors", pr},
          {"model", s.model},
          {"mu", s.mu},
          {"replicates", s.replicates},
          {"draws", s.draws},
          {"root_seed", s.root_seed},
          {"output", s.output},
          {"route", s.route == WimRoute::Auto ? "auto" : "empirical"},
          {"mopess_reps", s.mopess_reps},
          {"mopess_L", s.mopess_L},
          {"workers", s.workers}};
}

// Data for one replicate: n iid observations, or a single count for the binomial grid.
inline BayesModel simulate_model(LikelihoodKind lk, double theta, long n, double mu, Rng& rng) {
  BayesModel m;
  switch (lk) {
    case LikelihoodKind::PoissonIID:
      m.likelihood = Likelihood::poisson();
      m.data = Distribution::poisson(theta).sample(rng, static_cast<std::size_t>(n));
      break;
    case LikelihoodKind::BinomialCount:
      m.likelihood = Likelihood::binomial(n);
      m.data = {Distribution::binomial(n, theta).sample(rng)};
      break;
    case LikelihoodKind::NormalKnownMean:
      m.likelihood = Likelihood::normal_known_mean(mu);
      m.data = Distribution::normal(mu, std::sqrt(theta)).sample(rng, static_cast<std::size_t>(n));
      break;
    default: throw UnsupportedError("simulate_model: grids need a conjugate scalar model");
  }
  return m;
}

inline std::pair<double, double> parameter_space(LikelihoodKind lk) {
  Likelihood l;
  l.kind = lk;
  return l.support();
}

inline std::uint64_t row_seed(std::uint64_t root, std::size_t grid_index, std::size_t replicate) {
  return derive_seed(root, {grid_index, replicate});
}

// One replicate of a grid point. Failures end up in the error column.
inline io::SimRow run_replicate(const Spec& spec, double theta, long n, const PriorPair& pp, std::size_t grid_index,
                                std::size_t rep, std::uint64_t data_seed) {
  io::SimRow row;
  row.experiment = kind_name(spec.experiment);
  row.theta = theta;
  row.n = n;
  row.prior1 = pp.prior1;
  row.prior2 = pp.prior2;
  row.replicate = rep;
  row.seed = row_seed(spec.root_seed, grid_index, rep);
  try {
    LikelihoodKind lk = spec.likelihood_kind();
    PriorSpec p1 = io::parse_prior(pp.prior1, lk);
    PriorSpec p2 = io::parse_prior(pp.prior2, lk);
    Rng data_rng = make_rng(data_seed);
    BayesModel model = simulate_model(lk, theta, n, spec.mu, data_rng);
    BayesModel m1 = model, m2 = model;
    m1.prior = p1;
    m2.prior = p2;
    Posterior post1 = conjugate_update(m1);
    Posterior post2 = conjugate_update(m2);

    double theta_hat = mle(model)[0];
    auto space = parameter_space(lk);
    row.neutrality1 = neutrality(post1, theta_hat, space).value;
    row.neutrality2 = neutrality(post2, theta_hat, space).value;

    WimConfig cfg;
    cfg.draws = spec.draws;
    cfg.seed = derive_seed(row.seed, {0x77696dULL});
    cfg.route = spec.route;
    auto rep_wim = wim(post1, post2, cfg);
    row.wim = rep_wim.wim;
    row.wim_se = rep_wim.wim_se;

    if (spec.experiment == Kind::MopessGrid) {
      MopessOptions mo;
      mo.reps = spec.mopess_reps;
      mo.L = spec.mopess_L;
      mo.seed = derive_seed(row.seed, {0x6d6f70ULL});
      mo.workers = 1;
      row.mopess = mopess(model, p2, p1, mo).mopess;
    }

    try {
      auto b = bounds_for(model, p1, p2);
      row.lower = b.lower;
      row.upper = b.upper;
      row.exact = b.exact;
    } catch (const std::exception& e) {
      row.error = std::string("bounds: ") + e.what();
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

// All (grid point, replicate) rows in index order: theta outermost, then n, then
// the prior pair, then the replicate. Prior pairs at the same (theta, n, replicate)
// see the same dataset.
inline std::vector<io::SimRow> run_grid(const Spec& spec) {
  spec.validate();
  if (!spec.is_grid()) throw DomainError("run_grid: " + std::string(kind_name(spec.experiment)) + " is not a grid");
  std::size_t G = spec.grid_points(), R = spec.replicates;
  std::vector<io::SimRow> rows(G * R);
  std::size_t np = spec.priors.size(), nn = spec.n.size();
  parallel_for(
      G * R,
      [&](std::size_t i) {
        std::size_t g = i / R, rep = i % R;
        std::size_t it = g / (nn * np), in = (g / np) % nn, ip = g % np;
        std::uint64_t data_seed = derive_seed(spec.root_seed, {0x64617461ULL, it, in, rep});
        rows[i] = run_replicate(spec, spec.theta[it], spec.n[in], spec.priors[ip], g, rep, data_seed);
      },
      spec.workers);
  return rows;
}

struct PairEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  std::optional<double> value;
  std::optional<double> se;
  std::string error;
};

struct NamedPrior {
  std::string label;
  PriorSpec prior;
};

// Skewness priors: flat, Jeffreys, Bayes-Laplace, BTV(1,1), Normal(0, 5) and
// SkewNormal(0, 5, 2); the latter two are parametrised by variance 5.
inline std::vector<NamedPrior> skewnormal_priors() {
  const double pi = 3.14159265358979323846;
  return {{"Uniform", PriorSpec::flat()},
          {"Jeffreys", PriorSpec::proper(Distribution::student_t(0, pi * pi / 4, 0.5))},
          {"Bayes-Laplace", PriorSpec::proper(Distribution::student_t(0, 0.5, 2))},
          {"BTV", PriorSpec::proper(Distribution::student_t(0, 0.92, 1))},
          {"Normal", PriorSpec::proper(Distribution::normal(0, std::sqrt(5.0)))},
          {"SkewNormal", PriorSpec::proper(Distribution::skew_normal(0, std::sqrt(5.0), 2))}};
}

inline std::vector<double> skewnormal_data(std::uint64_t data_seed, std::size_t n = 50) {
  Rng rng = make_rng(derive_seed(data_seed, {0x736e64617461ULL}));
  return Distribution::skew_normal(0, 1, 5).sample(rng, n);
}

struct DemoConfig {
  std::uint64_t seed = 1;
  std::uint64_t data_seed = 2021;
  McmcConfig mcmc;
  WimConfig wim;
};

struct SkewNormalDemo {
  std::vector<std::string> labels;
  std::vector<double> data;
  std::vector<std::optional<SkewNormalFit>> fits;
  std::vector<std::string> fit_errors;
  std::vector<PairEntry> pairs;  // upper triangle, row-major
};

inline SkewNormalDemo run_skewnormal_demo(const DemoConfig& cfg) {
  SkewNormalDemo out;
  auto priors = skewnormal_priors();
  out.data = skewnormal_data(cfg.data_seed);
  std::size_t k = priors.size();
  out.fits.resize(k);
  out.fit_errors.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.labels.push_back(priors[i].label);
    McmcConfig mc = cfg.mcmc;
    mc.seed = derive_seed(cfg.seed, {0x666974ULL, i});
    try {
      out.fits[i] = fit_skew_normal(out.data, priors[i].prior, mc);
    } catch (const NumericError& e) {
      out.fit_errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      PairEntry e{i, j, std::nullopt, std::nullopt, ""};
      if (!out.fits[i] || !out.fits[j]) {
        e.error = !out.fits[i] ? out.fit_errors[i] : out.fit_errors[j];
      } else {
        WimConfig wc = cfg.wim;
        wc.seed = derive_seed(cfg.seed, {0x77696dULL, i, j});
        try {
          auto r = wim(out.fits[i]->alpha, out.fits[j]->alpha, wc);
          e.value = r.wim;
          e.se = r.wim_se;
        } catch (const NumericError& ex) {
          e.error = ex.what();
        }
      }
      out.pairs.push_back(std::move(e));
    }
  return out;
}

struct BioassayData {
  std::vector<double> doses;
  std::vector<long> trials;
  std::vector<double> deaths;
};

// Log-dose bioassay: four dose groups of five animals.
inline BioassayData bioassay_fixture() { return {{-0.86, -0.30, -0.05, 0.73}, {5, 5, 5, 5}, {0, 1, 3, 5}}; }

struct BioassaySetting {
  std::string label;
  std::optional<double> slope_scale;  // empty: flat on the plane
};

inline std::vector<BioassaySetting> bioassay_settings() {
  return {{"Uniform", std::nullopt}, {"Cauchy(0,2.5)", 2.5}, {"Cauchy(0,5)", 5.0}, {"Cauchy(0,10)", 10.0}};
}

struct BioassayEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  std::optional<double> joint, beta0, beta1, ld50;
  std::string error;
};

struct BioassayDemo {
  std::vector<std::string> labels;
  std::vector<std::optional<LogisticFit>> fits;
  std::vector<std::string> fit_errors;
  std::vector<BioassayEntry> pairs;  // upper triangle, row-major
};

inline BioassayDemo run_bioassay_demo(const DemoConfig& cfg, bool uniform_pairs_only = false) {
  BioassayDemo out;
  auto data = bioassay_fixture();
  auto settings = bioassay_settings();
  std::size_t k = settings.size();
  out.fits.resize(k);
  out.fit_errors.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.labels.push_back(settings[i].label);
    McmcConfig mc = cfg.mcmc;
    mc.seed = derive_seed(cfg.seed, {0x666974ULL, i});
    try {
      out.fits[i] = fit_logistic(data.doses, data.trials, data.deaths, settings[i].slope_scale, mc);
    } catch (const NumericError& e) {
      out.fit_errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      if (uniform_pairs_only && i != 0) continue;
      BioassayEntry e;
      e.i = i;
      e.j = j;
      if (!out.fits[i] || !out.fits[j]) {
        e.error = !out.fits[i] ? out.fit_errors[i] : out.fit_errors[j];
        out.pairs.push_back(std::move(e));
        continue;
      }
      const auto& a = *out.fits[i];
      const auto& b = *out.fits[j];
      WimConfig wc = cfg.wim;
      try {
        wc.seed = derive_seed(cfg.seed, {0x6a6f696eULL, i, j});
        e.joint = wim(a.joint, b.joint, wc).wim;
        auto marginal = [&](const Posterior& p, std::size_t c) {
          return Posterior::sampled(p.draws().marginal(c), *p.diagnostics(), p.provenance());
        };
        wc.seed = derive_seed(cfg.seed, {0x623030ULL, i, j});
        e.beta0 = wim(marginal(a.joint, 0), marginal(b.joint, 0), wc).wim;
        wc.seed = derive_seed(cfg.seed, {0x623031ULL, i, j});
        e.beta1 = wim(marginal(a.joint, 1), marginal(b.joint, 1), wc).wim;
        e.ld50 = w1_empirical_1d(a.ld50, b.ld50);
      } catch (const NumericError& ex) {
        e.error = ex.what();
      }
      out.pairs.push_back(std::move(e));
    }
  return out;
}

inline io::Table to_table(const SkewNormalDemo& d) {
  io::Table t;
  t.header = {"prior1", "prior2", "wim", "wim_se", "error"};
  for (const auto& p : d.pairs)
    t.rows.push_back({d.labels[p.i], d.labels[p.j], p.value ? io::fmt17(*p.value) : "",
                      p.se ? io::fmt17(*p.se) : "", p.error});
  return t;
}

inline io::Table to_table(const BioassayDemo& d) {
  io::Table t;
  t.header = {"prior1", "prior2", "joint", "beta0", "beta1", "ld50", "error"};
  auto f = [](const std::optional<double>& v) { return v ? io::fmt17(*v) : std::string(); };
  for (const auto& p : d.pairs)
    t.rows.push_back({d.labels[p.i], d.labels[p.j], f(p.joint), f(p.beta0), f(p.beta1), f(p.ld50), p.error});
  return t;
}

// Posterior cloud of one fit as a table (one row per draw).
inline io::Table cloud_table(const EmpiricalMeasure& m, std::vector<std::string> header) {
  io::Table t;
  t.header = std::move(header);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row;
    for (double v : m.point(i)) row.push_back(io::fmt17(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace wim::experiment
