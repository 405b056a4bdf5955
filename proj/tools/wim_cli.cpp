#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wim/wim.hpp"

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct Common {
  std::uint64_t seed = 1;
  long long draws = -1;
  long long replicates = -1;
  std::string out;
  std::string format = "csv";
  bool paper_scale = false;
};

struct ModelArgs {
  std::string model = "poisson";
  long trials = 1;
  double mu = 0.0;
  std::string data;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "root seed");
  app->add_option("--draws", c.draws, "posterior draws");
  app->add_option("--replicates", c.replicates, "replicates per grid point");
  app->add_option("--out", c.out, "output path");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_flag("--paper-scale", c.paper_scale, "1000 replicates and 10000 draws unless given explicitly");
}

void add_model(CLI::App* app, ModelArgs& m, bool data_required) {
  app->add_option("--model", m.model, "poisson, binomial, normal or skewnormal")
      ->check(CLI::IsMember({"poisson", "binomial", "normal", "skewnormal"}));
  app->add_option("--trials", m.trials, "binomial: trials behind each count");
  app->add_option("--mu", m.mu, "normal: known mean");
  auto* o = app->add_option("--data", m.data, "dataset file, one observation per line");
  if (data_required) o->required();
}

std::size_t draws_of(const Common& c, std::size_t desk) {
  if (c.draws >= 0) return static_cast<std::size_t>(c.draws);
  return c.paper_scale ? 10000 : desk;
}

wim::LikelihoodKind kind_of(const ModelArgs& m) {
  if (m.model == "binomial") return wim::LikelihoodKind::BinomialCount;
  if (m.model == "normal") return wim::LikelihoodKind::NormalKnownMean;
  if (m.model == "skewnormal") return wim::LikelihoodKind::SkewNormalFull;
  return wim::LikelihoodKind::PoissonIID;
}

wim::Likelihood likelihood_of(const ModelArgs& m) {
  switch (kind_of(m)) {
    case wim::LikelihoodKind::BinomialCount: return wim::Likelihood::binomial(m.trials);
    case wim::LikelihoodKind::NormalKnownMean: return wim::Likelihood::normal_known_mean(m.mu);
    case wim::LikelihoodKind::SkewNormalFull: return wim::Likelihood::skew_normal();
    default: return wim::Likelihood::poisson();
  }
}

std::vector<double> load_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wim::ParseError("cannot read dataset '" + path + "'");
  try {
    return wim::io::read_dataset(in);
  } catch (const wim::ParseError& e) {
    throw wim::ParseError(path + ": " + e.what());
  }
}

wim::BayesModel model_of(const ModelArgs& m, std::vector<double> data) {
  wim::BayesModel model{likelihood_of(m), wim::PriorSpec::flat(), std::move(data)};
  model.validate();
  return model;
}

wim::McmcConfig mcmc_config(std::uint64_t seed, bool paper_scale) {
  wim::McmcConfig c;
  c.seed = seed;
  if (paper_scale) {
    c.iterations = 100000;
    c.burn_in = 50000;
  }
  return c;
}

std::string cell(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return wim::io::fmt17(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw wim::ParseError("cannot write '" + path + "'");
  f << text;
}

// A flat report: JSON object, or a one-row CSV with the keys as header.
std::string render(const ojson& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  std::ostringstream os;
  wim::io::Table t;
  std::vector<std::string> row;
  for (auto it = report.begin(); it != report.end(); ++it) {
    t.header.push_back(it.key());
    row.push_back(cell(it.value()));
  }
  t.rows.push_back(std::move(row));
  t.write(os);
  return os.str();
}

std::string render(const wim::io::Table& t, const std::string& format) {
  if (format == "json") {
    ojson arr = ojson::array();
    for (const auto& r : t.rows) {
      ojson o;
      for (std::size_t i = 0; i < t.header.size(); ++i) o[t.header[i]] = r[i];
      arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
  }
  std::ostringstream os;
  t.write(os);
  return os.str();
}

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

void emit_report(const ojson& report, const Common& c) {
  std::cout << render(report, c.format);
  if (!c.out.empty()) write_text(c.out, report.dump(2) + "\n");
}

void add_bounds(ojson& r, const wim::BoundsReport& b) {
  r["lower"] = b.lower;
  r["upper"] = b.upper;
  r["exact"] = opt(b.exact);
  r["bounds_method"] = b.method == wim::BoundsMethod::ClosedForm ? "closed-form" : "quadrature";
  r["bounds_note"] = b.note;
}

int cmd_compare(const ModelArgs& ma, const std::string& s1, const std::string& s2, const std::string& route, double p,
                const Common& c) {
  auto kind = kind_of(ma);
  wim::PriorSpec p1 = wim::io::parse_prior(s1, kind);
  wim::PriorSpec p2 = wim::io::parse_prior(s2, kind);
  auto data = load_data(ma.data);
  wim::WimConfig cfg;
  cfg.draws = draws_of(c, 10000);
  cfg.seed = wim::derive_seed(c.seed, {0x77696dULL});
  cfg.p = p;
  cfg.route = route == "empirical" ? wim::WimRoute::Empirical : wim::WimRoute::Auto;

  ojson r;
  r["model"] = ma.model;
  r["prior1"] = p1.describe();
  r["prior2"] = p2.describe();
  r["n"] = data.size();
  if (kind == wim::LikelihoodKind::SkewNormalFull) {
    auto f1 = wim::fit_skew_normal(data, p1, mcmc_config(wim::derive_seed(c.seed, {1}), c.paper_scale));
    auto f2 = wim::fit_skew_normal(data, p2, mcmc_config(wim::derive_seed(c.seed, {2}), c.paper_scale));
    auto rep = wim::wim(f1.alpha, f2.alpha, cfg);
    r["wim"] = rep.wim;
    r["wim_se"] = opt(rep.wim_se);
    r["method"] = rep.method;
    r["provenance1"] = f1.alpha.provenance();
    r["provenance2"] = f2.alpha.provenance();
  } else {
    wim::BayesModel m1 = model_of(ma, data), m2 = m1;
    m1.prior = p1;
    m2.prior = p2;
    auto mc = mcmc_config(wim::derive_seed(c.seed, {0x6d636d63ULL}), c.paper_scale);
    auto post1 = wim::posterior_for(m1, mc);
    mc.seed = wim::derive_seed(c.seed, {0x6d636d64ULL});
    auto post2 = wim::posterior_for(m2, mc);
    auto rep = wim::wim(post1, post2, cfg);
    r["wim"] = rep.wim;
    r["wim_se"] = opt(rep.wim_se);
    r["quadrature_error"] = opt(rep.quadrature_error);
    r["method"] = rep.method;
    r["provenance1"] = post1.provenance();
    r["provenance2"] = post2.provenance();
    try {
      double theta_hat = wim::mle(m1)[0];
      auto space = m1.likelihood.support();
      r["mle"] = theta_hat;
      r["neutrality1"] = wim::neutrality(post1, theta_hat, space).value;
      r["neutrality2"] = wim::neutrality(post2, theta_hat, space).value;
    } catch (const std::exception& e) {
      r["neutrality_error"] = e.what();
    }
    try {
      add_bounds(r, wim::bounds_for(m1, p1, p2));
    } catch (const std::exception& e) {
      r["bounds_error"] = e.what();
    }
  }
  r["draws"] = cfg.draws;
  r["seed"] = c.seed;
  emit_report(r, c);
  return kExitOk;
}

int cmd_bounds(const ModelArgs& ma, const std::string& s1, const std::string& s2, std::optional<long> n,
               std::optional<double> sum, std::optional<long> x, std::optional<double> S, const Common& c) {
  auto kind = kind_of(ma);
  if (kind == wim::LikelihoodKind::SkewNormalFull) throw wim::DomainError("bounds: scalar conjugate models only");
  wim::PriorSpec p1 = wim::io::parse_prior(s1, kind);
  wim::PriorSpec p2 = wim::io::parse_prior(s2, kind);
  ModelArgs m = ma;
  std::vector<double> data;
  if (!ma.data.empty()) {
    data = load_data(ma.data);
  } else if (kind == wim::LikelihoodKind::BinomialCount) {
    if (!n || !x) throw wim::DomainError("bounds: binomial needs --n (trials) and --x (successes)");
    m.trials = *n;
    data = {static_cast<double>(*x)};
  } else {
    if (!n || *n < 1) throw wim::DomainError("bounds: need --n >= 1 or --data");
    if (kind == wim::LikelihoodKind::PoissonIID) {
      if (!sum || *sum < 0 || std::floor(*sum) != *sum) throw wim::DomainError("bounds: poisson needs an integer --sum >= 0");
      auto total = static_cast<long long>(*sum);
      data.assign(static_cast<std::size_t>(*n), 0.0);
      for (long i = 0; i < *n; ++i)
        data[static_cast<std::size_t>(i)] = static_cast<double>(total / *n + (i < total % *n ? 1 : 0));
    } else {
      if (!S || *S < 0) throw wim::DomainError("bounds: normal needs --S >= 0 (sum of squared deviations)");
      data.assign(static_cast<std::size_t>(*n), ma.mu + std::sqrt(*S / static_cast<double>(*n)));
    }
  }
  auto model = model_of(m, std::move(data));
  auto b = wim::bounds_for(model, p1, p2);
  ojson r;
  r["model"] = ma.model;
  r["prior1"] = p1.describe();
  r["prior2"] = p2.describe();
  add_bounds(r, b);
  emit_report(r, c);
  return kExitOk;
}

int cmd_neutrality(const ModelArgs& ma, const std::string& sp, const Common& c) {
  auto kind = kind_of(ma);
  wim::PriorSpec prior = wim::io::parse_prior(sp, kind);
  auto model = model_of(ma, load_data(ma.data));
  model.prior = prior;
  auto post = wim::posterior_for(model, mcmc_config(wim::derive_seed(c.seed, {0x6d636d63ULL}), c.paper_scale));
  double theta_hat = wim::mle(model)[0];
  auto res = wim::neutrality(post, theta_hat, model.likelihood.support());
  ojson r;
  r["model"] = ma.model;
  r["prior"] = prior.describe();
  r["mle"] = theta_hat;
  r["neutrality"] = res.value;
  r["degenerate"] = res.degenerate;
  r["provenance"] = post.provenance();
  r["seed"] = c.seed;
  emit_report(r, c);
  return kExitOk;
}

int cmd_mopess(const ModelArgs& ma, const std::string& si, const std::string& sb, long long reps, long long L,
               const Common& c) {
  auto kind = kind_of(ma);
  if (reps < 1) throw wim::DomainError("mopess: --reps must be at least 1");
  if (L < 0) throw wim::DomainError("mopess: --L must be nonnegative");
  wim::PriorSpec pi = wim::io::parse_prior(si, kind);
  wim::PriorSpec pb = wim::io::parse_prior(sb, kind);
  auto model = model_of(ma, load_data(ma.data));
  wim::MopessOptions o;
  o.reps = static_cast<std::size_t>(reps);
  o.L = static_cast<std::size_t>(L);
  o.seed = c.seed;
  auto m = wim::mopess(model, pi, pb, o);
  ojson r;
  r["model"] = ma.model;
  r["interest"] = pi.describe();
  r["base"] = pb.describe();
  r["mopess"] = m.mopess;
  r["se"] = m.se;
  r["q05"] = m.q05;
  r["q95"] = m.q95;
  r["L"] = m.L;
  r["reps"] = m.reps;
  r["seed"] = c.seed;
  emit_report(r, c);
  return kExitOk;
}

wim::experiment::DemoConfig demo_config(const Common& c, std::uint64_t data_seed, bool skewnormal) {
  wim::experiment::DemoConfig d;
  d.seed = c.seed;
  d.data_seed = data_seed;
  d.mcmc = mcmc_config(c.seed, c.paper_scale && skewnormal);
  d.wim.draws = draws_of(c, 10000);
  return d;
}

// Demo output: the pairwise table, plus one posterior cloud per prior when --out
// names a prefix.
int run_demo(wim::experiment::Kind kind, const Common& c, std::uint64_t data_seed) {
  namespace ex = wim::experiment;
  wim::io::Table table;
  std::vector<std::pair<std::string, wim::io::Table>> clouds;
  std::vector<std::string> errors;
  if (kind == ex::Kind::SkewNormalDemo) {
    auto d = ex::run_skewnormal_demo(demo_config(c, data_seed, true));
    table = ex::to_table(d);
    for (std::size_t i = 0; i < d.fits.size(); ++i) {
      if (d.fits[i])
        clouds.emplace_back(d.labels[i], ex::cloud_table(d.fits[i]->joint, {"mu", "log_sigma", "alpha"}));
      else
        errors.push_back(d.labels[i] + ": " + d.fit_errors[i]);
    }
  } else {
    auto d = ex::run_bioassay_demo(demo_config(c, data_seed, false));
    table = ex::to_table(d);
    for (std::size_t i = 0; i < d.fits.size(); ++i) {
      if (d.fits[i]) {
        auto t = ex::cloud_table(d.fits[i]->joint.draws(), {"beta0", "beta1"});
        clouds.emplace_back(d.labels[i], std::move(t));
      } else {
        errors.push_back(d.labels[i] + ": " + d.fit_errors[i]);
      }
    }
  }
  for (const auto& e : errors) std::cerr << "warning: " << e << "\n";
  std::string ext = c.format == "json" ? ".json" : ".csv";
  if (c.out.empty()) {
    std::cout << render(table, c.format);
    return kExitOk;
  }
  write_text(c.out + "_pairs" + ext, render(table, c.format));
  for (const auto& [label, t] : clouds) {
    std::string name;
    for (char ch : label) name += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
    write_text(c.out + "_" + name + ext, render(t, c.format));
  }
  std::cout << render(table, "csv");
  return kExitOk;
}

int cmd_simulate(const std::string& path, const Common& c, std::uint64_t data_seed, bool seed_given) {
  namespace ex = wim::experiment;
  std::ifstream in(path);
  if (!in) throw wim::ParseError("cannot read spec '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw wim::ParseError(path + ": " + e.what());
  }
  ex::Spec s = ex::spec_from_json(j);
  if (c.paper_scale) {
    if (!j.contains("replicates")) s.replicates = 1000;
    if (!j.contains("draws")) s.draws = 10000;
  }
  if (c.replicates >= 0) s.replicates = static_cast<std::size_t>(c.replicates);
  if (c.draws >= 0) s.draws = static_cast<std::size_t>(c.draws);
  if (seed_given) s.root_seed = c.seed;
  if (!c.out.empty()) s.output = c.out;
  s.validate();
  if (!s.is_grid()) {
    Common dc = c;
    dc.seed = s.root_seed;
    dc.out = s.output;
    return run_demo(s.experiment, dc, data_seed);
  }
  auto rows = ex::run_grid(s);
  std::string text;
  if (c.format == "json") {
    ojson arr = ojson::array();
    for (const auto& r : rows) {
      ojson o;
      auto f = wim::io::to_fields(r);
      for (std::size_t i = 0; i < f.size(); ++i) o[wim::io::sim_columns()[i]] = f[i];
      arr.push_back(std::move(o));
    }
    text = arr.dump(2) + "\n";
  } else {
    std::ostringstream os;
    wim::io::write_csv(os, rows);
    text = os.str();
  }
  write_text(s.output, text);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  if (!s.output.empty())
    std::cerr << rows.size() << " rows written to " << s.output << " (" << failed << " with errors)\n";
  return kExitOk;
}

int cmd_bootstrap(const ModelArgs& ma, const std::string& s1, const std::string& s2, long long B,
                  bool identity_first, const Common& c) {
  if (B < 1) throw wim::DomainError("bootstrap: B must be at least 1");
  auto kind = kind_of(ma);
  wim::PriorSpec p1 = wim::io::parse_prior(s1, kind);
  wim::PriorSpec p2 = wim::io::parse_prior(s2, kind);
  auto data = load_data(ma.data);
  wim::WimConfig cfg;
  cfg.draws = draws_of(c, 10000);
  wim::BootstrapReport rep;
  if (kind == wim::LikelihoodKind::SkewNormalFull) {
    wim::McmcConfig mc;
    mc.chains = 2;
    mc.iterations = 6000;
    mc.burn_in = 3000;
    mc.thin = 3;
    rep = wim::bootstrap_wim(
        data, static_cast<std::size_t>(B), c.seed,
        [&](std::span<const double> res, std::uint64_t s) {
          wim::McmcConfig m1 = mc, m2 = mc;
          m1.seed = wim::derive_seed(s, {1});
          m2.seed = wim::derive_seed(s, {2});
          auto f1 = wim::fit_skew_normal(res, p1, m1);
          auto f2 = wim::fit_skew_normal(res, p2, m2);
          wim::WimConfig w = cfg;
          w.seed = s;
          return wim::wim(f1.alpha, f2.alpha, w).wim;
        },
        0, identity_first);
  } else {
    auto model = model_of(ma, data);
    rep = wim::bootstrap_wim(model, p1, p2, static_cast<std::size_t>(B), c.seed, cfg, 0, identity_first);
  }
  wim::io::Table t;
  t.header = {"resample", "wim", "error"};
  std::size_t vi = 0, fi = 0;
  for (std::size_t b = 0; b < static_cast<std::size_t>(B); ++b) {
    if (fi < rep.flagged.size() && rep.flagged[fi] == b) {
      t.rows.push_back({std::to_string(b), "", "improper posterior"});
      ++fi;
    } else {
      t.rows.push_back({std::to_string(b), wim::io::fmt17(rep.values[vi++]), ""});
    }
  }
  std::ostringstream summary;
  summary << "# B=" << B << " usable=" << rep.values.size() << " flagged=" << rep.flagged.size()
          << " median=" << wim::io::fmt17(rep.median) << " q025=" << wim::io::fmt17(rep.q025)
          << " q25=" << wim::io::fmt17(rep.q25) << " q75=" << wim::io::fmt17(rep.q75)
          << " q975=" << wim::io::fmt17(rep.q975) << " iqr=" << wim::io::fmt17(rep.q75 - rep.q25) << "\n";
  write_text(c.out, render(t, c.format));
  (c.out.empty() ? std::cerr : std::cout) << summary.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein impact of priors on posteriors"};
  app.require_subcommand(1);

  Common common;
  ModelArgs model;
  std::string prior1, prior2, prior, interest, base, route = "auto", spec_path, demo_name;
  double order = 1.0;
  std::optional<long> n, x;
  std::optional<double> sum, S;
  long long reps = 100, L = 0, B = 250;
  std::uint64_t data_seed = 2021;
  bool identity_first = false;

  auto* compare = app.add_subcommand("compare", "WIM between the posteriors of two priors on a dataset");
  add_common(compare, common);
  add_model(compare, model, true);
  compare->add_option("--prior1", prior1, "baseline prior")->required();
  compare->add_option("--prior2", prior2, "second prior")->required();
  compare->add_option("--route", route, "auto or empirical")->check(CLI::IsMember({"auto", "empirical"}));
  compare->add_option("--order", order, "Wasserstein order p >= 1");

  auto* bounds = app.add_subcommand("bounds", "lower and upper bounds on the WIM");
  add_common(bounds, common);
  add_model(bounds, model, false);
  bounds->add_option("--prior1", prior1, "baseline prior")->required();
  bounds->add_option("--prior2", prior2, "second prior")->required();
  bounds->add_option("--n", n, "sample size (binomial: trials)");
  bounds->add_option("--sum", sum, "poisson: sum of the observations");
  bounds->add_option("--x", x, "binomial: successes");
  bounds->add_option("--S", S, "normal: sum of squared deviations from the mean");

  auto* neut = app.add_subcommand("neutrality", "posterior mass below the MLE");
  add_common(neut, common);
  add_model(neut, model, true);
  neut->add_option("--prior", prior, "prior")->required();

  auto* mop = app.add_subcommand("mopess", "mean observed prior effective sample size");
  add_common(mop, common);
  add_model(mop, model, true);
  mop->add_option("--interest", interest, "prior of interest")->required();
  mop->add_option("--base", base, "baseline prior")->required();
  mop->add_option("--reps", reps, "replicates");
  mop->add_option("--L", L, "largest augmentation (0: twice the sample size)");

  auto* sim = app.add_subcommand("simulate", "run an experiment spec (JSON) and write CSV");
  add_common(sim, common);
  sim->add_option("spec", spec_path, "experiment spec file")->required();
  sim->add_option("--data-seed", data_seed, "skewnormal demo: dataset seed");

  auto* boot = app.add_subcommand("bootstrap", "bootstrap distribution of the WIM");
  add_common(boot, common);
  add_model(boot, model, true);
  boot->add_option("--prior1", prior1, "baseline prior")->required();
  boot->add_option("--prior2", prior2, "second prior")->required();
  boot->add_option("--B", B, "bootstrap resamples");
  boot->add_flag("--identity-first", identity_first, "resample 0 is the data itself");

  auto* demo = app.add_subcommand("demo", "skewnormal or bioassay demonstration");
  add_common(demo, common);
  demo->add_option("name", demo_name, "skewnormal or bioassay")
      ->required()
      ->check(CLI::IsMember({"skewnormal", "bioassay"}));
  demo->add_option("--data-seed", data_seed, "skewnormal: dataset seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*compare) return cmd_compare(model, prior1, prior2, route, order, common);
    if (*bounds) return cmd_bounds(model, prior1, prior2, n, sum, x, S, common);
    if (*neut) return cmd_neutrality(model, prior, common);
    if (*mop) return cmd_mopess(model, interest, base, reps, L, common);
    if (*sim) return cmd_simulate(spec_path, common, data_seed, sim->count("--seed") > 0);
    if (*boot) return cmd_bootstrap(model, prior1, prior2, B, identity_first, common);
    if (*demo)
      return run_demo(demo_name == "skewnormal" ? wim::experiment::Kind::SkewNormalDemo
                                                : wim::experiment::Kind::BioassayDemo,
                      common, data_seed);
  } catch (const wim::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}
