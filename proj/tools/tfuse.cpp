// tfuse: command-line front end for the fusion samplers, clustering samplers,
// fused-lasso solver and the replication harness.
//
// Exit codes: 0 success, 2 bad flags or configuration, 3 unreadable input or
// unwritable output, 4 numeric failure or aborted run.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "tfuse/io.hpp"
#include "tfuse/tfuse.hpp"
#include "tfuse/version.hpp"

namespace {

using namespace tfuse;
using cli::json;
using cli::Kind;
using cli::Registry;

enum Exit { kOk = 0, kUsage = 2, kInput = 3, kRuntime = 4 };

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  Registry reg;
  std::string config_path;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> flag_text;  // key -> raw flag value
  std::map<std::string, CLI::Option*> flag_opts;
  std::map<std::string, bool> switches;  // key -> boolean flag seen
  bool verbose = false;

  void option(const std::string& flag, const std::string& key) {
    flag_opts[key] = app->add_option(flag, flag_text[key], reg.describe(key));
  }
  void toggle(const std::string& flag, const std::string& key) {
    switches[key] = false;
    flag_opts[key] = app->add_flag(flag, switches[key], reg.describe(key));
  }

  /// Defaults < --config document < --set pairs < dedicated flags.
  void resolve() {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw InputError("cannot open config file '" + config_path + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + config_path + "': " + e.what());
      }
      reg.merge(doc);
    }
    for (const auto& a : assignments) reg.set_assignment(a);
    for (const auto& [key, opt] : flag_opts) {
      if (opt->count() == 0) continue;
      if (switches.count(key))
        reg.set_text(key, "true");
      else
        reg.set_text(key, flag_text[key]);
    }
  }
};

void add_common(Command& c) {
  c.reg.add("io.output", Kind::Text, "", "output CSV path (a .json provenance sidecar is written next to it)");
  c.app->add_option("--config", c.config_path, "JSON document of dotted or nested config keys");
  c.app->add_option("--set", c.assignments, "override a config key, key=value (repeatable)");
  c.app->add_flag("--verbose,-v", c.verbose, "progress messages on stdout");
}

void add_sampler_keys(Registry& reg) {
  reg.add("sampler.iters", Kind::Count, 2000, "Gibbs iterations");
  reg.add("sampler.burnin", Kind::Count, 1000, "burn-in iterations discarded");
  reg.add("sampler.thin", Kind::Count, 1, "keep every k-th post-burn-in draw");
  reg.add("sampler.seed", Kind::Count, 0, "random seed");
}

void add_sampler_flags(Command& c) {
  c.option("--iters", "sampler.iters");
  c.option("--burnin", "sampler.burnin");
  c.option("--thin", "sampler.thin");
  c.option("--seed", "sampler.seed");
}

void add_t_keys(Registry& reg) {
  const THyper d;
  reg.add("prior.t.a_t", Kind::Real, d.a_t, "inverse-gamma shape of the difference scales");
  reg.add("prior.t.b_t", Kind::Real, d.b_t, "inverse-gamma rate of the difference scales");
}

void add_noise_keys(Registry& reg) {
  const THyper d;
  reg.add("prior.a_sigma", Kind::Real, d.a_sigma, "inverse-gamma shape of sigma^2");
  reg.add("prior.b_sigma", Kind::Real, d.b_sigma, "inverse-gamma rate of sigma^2");
  reg.add("prior.lambda1", Kind::Real, d.lambda1, "prior variance factor of the first coordinate");
}

void add_t_flags(Command& c) {
  c.option("--a-t", "prior.t.a_t");
  c.option("--b-t", "prior.t.b_t");
}

void add_noise_flags(Command& c) {
  c.option("--a-sigma", "prior.a_sigma");
  c.option("--b-sigma", "prior.b_sigma");
  c.option("--lambda1", "prior.lambda1");
}

THyper t_hyper(const Registry& reg) {
  THyper h;
  h.a_t = reg.real("prior.t.a_t");
  h.b_t = reg.real("prior.t.b_t");
  h.a_sigma = reg.real("prior.a_sigma");
  h.b_sigma = reg.real("prior.b_sigma");
  h.lambda1 = reg.real("prior.lambda1");
  h.validate();
  return h;
}

LaplaceHyper laplace_hyper(const Registry& reg, std::size_t n) {
  LaplaceHyper h = LaplaceHyper::for_size(n);
  if (auto l = reg.maybe_real("prior.laplace.lambda")) h.lambda = *l;
  h.a_sigma = reg.real("prior.a_sigma");
  h.b_sigma = reg.real("prior.b_sigma");
  h.lambda1 = reg.real("prior.lambda1");
  h.validate();
  return h;
}

DPHyper dp_hyper(const Registry& reg) {
  DPHyper h;
  h.base_var = reg.real("prior.dp.base_var");
  h.concentration = reg.real("prior.dp.alpha");
  h.a_sigma = reg.real("prior.a_sigma");
  h.b_sigma = reg.real("prior.b_sigma");
  h.validate();
  return h;
}

SamplerConfig sampler_config(const Registry& reg) {
  SamplerConfig c;
  c.iterations = reg.count("sampler.iters");
  c.burnin = reg.count("sampler.burnin");
  c.thin = reg.count("sampler.thin");
  c.seed = reg.count("sampler.seed");
  c.validate();
  return c;
}

std::string output_path(const Registry& reg) {
  if (!reg.present("io.output")) throw ConfigError("--output is required");
  return reg.text("io.output");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write output file '" + path + "'");
  out << content;
  out.close();
  if (!out) throw InputError("failed writing output file '" + path + "'");
}

void write_sidecar(const Command& c, const std::string& output, const json& results) {
  json doc;
  doc["tool"] = "tfuse";
  doc["version"] = kVersion;
  doc["command"] = c.name;
  doc["config"] = c.reg.resolved();
  doc["results"] = results;
  write_file(output + ".json", doc.dump(2) + "\n");
}

std::string summary_csv(const DrawMatrix<double>& theta, std::span<const double> sigma2) {
  std::ostringstream out;
  write_summary_csv(out, summarize_columns(theta, default_summary_quantiles()), summarize_scalar(sigma2));
  return out.str();
}

void maybe_save_draws(const Registry& reg, const DrawMatrix<double>& theta, std::span<const double> sigma2) {
  if (!reg.present("io.draws")) return;
  std::ostringstream out;
  write_draws_csv(out, theta, sigma2);
  write_file(reg.text("io.draws"), out.str());
}

/// Point-estimate metrics against a known truth; statistics undefined for
/// the truth's block structure are reported as null.
json truth_metrics(const DrawMatrix<double>& theta, std::span<const double> sigma2, std::span<const double> truth,
                   const std::optional<PriorSpec>& prior, bool clustered) {
  json m;
  const PosteriorErrors pe = posterior_errors(theta, truth);
  m["l2"] = pe.l2;
  m["l1"] = pe.l1;
  m["pmsl2"] = pe.post_mean_sq_l2;
  const auto mean = posterior_mean(theta);
  const Adjacency true_adj = adjacency_true(truth);
  auto guarded = [](auto f) -> json {
    try {
      return f();
    } catch (const UndefinedStatistic&) {
      return nullptr;
    }
  };
  m["W"] = guarded([&] { return w_statistic(mean, true_adj); });
  if (clustered)
    m["B_tilde"] = guarded([&] { return b_tilde_statistic(mean, true_adj); });
  else
    m["B"] = guarded([&] { return b_statistic(mean, true_adj); });
  m["R"] = prior ? json(r_statistic(adjacency_bayes(mean, posterior_sigma(sigma2), *prior, truth.size()), true_adj))
                 : json(nullptr);
  return m;
}

// fit ------------------------------------------------------------------------

void setup_fit(Command& c) {
  c.reg.add("io.input", Kind::Text, "", "input CSV: one column y, optional second column truth");
  c.reg.add("io.draws", Kind::Text, "", "also write every retained draw to this CSV");
  c.reg.add("fit.prior", Kind::Text, "t", "fusion prior: t or laplace");
  c.reg.add("fit.tune_scale", Kind::Flag, false, "set b_t from the n-dependent scale rule before sampling");
  c.reg.add("prior.laplace.lambda", Kind::Real, nullptr, "Laplace rate (default sqrt(2 log n))");
  add_sampler_keys(c.reg);
  add_t_keys(c.reg);
  add_noise_keys(c.reg);
  add_common(c);
  c.option("--input,-i", "io.input");
  c.option("--output,-o", "io.output");
  c.option("--save-draws", "io.draws");
  c.option("--prior", "fit.prior");
  c.toggle("--tune-scale", "fit.tune_scale");
  c.option("--lambda", "prior.laplace.lambda");
  add_sampler_flags(c);
  add_t_flags(c);
  add_noise_flags(c);
}

int run_fit(Command& c) {
  const std::string output = output_path(c.reg);
  const std::string prior_name = c.reg.text("fit.prior");
  if (prior_name != "t" && prior_name != "laplace")
    throw ConfigError("--prior must be t or laplace, got '" + prior_name + "'");
  if (!c.reg.present("io.input")) throw ConfigError("--input is required");
  const SamplerConfig cfg = sampler_config(c.reg);
  const Dataset data = ingest_csv(c.reg.text("io.input"));
  json results;
  results["n"] = data.size();

  PriorSpec prior;
  if (prior_name == "t") {
    THyper h = t_hyper(c.reg);
    if (c.reg.flag("fit.tune_scale")) {
      const TuneResult tr = solve_tune_scale(data.size(), h.df());
      h.b_t = tr.b_t;
      c.reg.set_text("prior.t.b_t", format_double(tr.b_t));
      std::cerr << "tune-scale: n=" << data.size() << " df=" << format_short(h.df())
                << " s=" << format_double(tr.scale) << " b_t=" << format_double(tr.b_t) << '\n';
      results["tuned_scale"] = tr.scale;
      results["tuned_b_t"] = tr.b_t;
    }
    prior = h;
  } else {
    const LaplaceHyper h = laplace_hyper(c.reg, data.size());
    results["laplace_lambda"] = h.lambda;
    prior = h;
  }
  if (c.verbose) std::cout << "fit: n=" << data.size() << " prior=" << prior_name << " iterations=" << cfg.iterations << std::endl;
  const PosteriorDraws draws = run_fusion_sampler(data, prior, cfg);
  if (data.has_truth()) results["metrics"] = truth_metrics(draws.theta, draws.sigma2, data.truth(), prior, false);
  results["sigma_hat"] = posterior_sigma(draws.sigma2);

  write_file(output, summary_csv(draws.theta, draws.sigma2));
  maybe_save_draws(c.reg, draws.theta, draws.sigma2);
  write_sidecar(c, output, results);
  if (c.verbose) std::cout << "fit: wrote " << output << std::endl;
  return kOk;
}

// cluster --------------------------------------------------------------------

void setup_cluster(Command& c) {
  c.reg.add("io.input", Kind::Text, "", "input CSV: one column y, optional second column truth");
  c.reg.add("io.draws", Kind::Text, "", "also write every retained draw to this CSV");
  c.reg.add("io.partition", Kind::Text, "", "DP modal partition CSV (default: <output>.partition.csv)");
  c.reg.add("cluster.method", Kind::Text, "adaptive", "fixed-rank, adaptive or dp");
  c.reg.add("cluster.r_period", Kind::Count, 20, "iterations between rank updates (adaptive)");
  c.reg.add("cluster.r_start", Kind::Count, nullptr, "iteration after which rank updates begin (default: burn-in)");
  const DPHyper dp;
  c.reg.add("prior.dp.alpha", Kind::Real, dp.concentration, "DP concentration");
  c.reg.add("prior.dp.base_var", Kind::Real, dp.base_var, "variance of the normal base measure");
  add_sampler_keys(c.reg);
  add_t_keys(c.reg);
  add_noise_keys(c.reg);
  add_common(c);
  c.option("--input,-i", "io.input");
  c.option("--output,-o", "io.output");
  c.option("--save-draws", "io.draws");
  c.option("--partition", "io.partition");
  c.option("--method", "cluster.method");
  c.option("--r-period", "cluster.r_period");
  c.option("--r-start", "cluster.r_start");
  c.option("--alpha", "prior.dp.alpha");
  c.option("--base-var", "prior.dp.base_var");
  add_sampler_flags(c);
  add_t_flags(c);
  add_noise_flags(c);
}

int run_cluster(Command& c) {
  const std::string output = output_path(c.reg);
  const std::string method = c.reg.text("cluster.method");
  if (method != "fixed-rank" && method != "adaptive" && method != "dp")
    throw ConfigError("--method must be fixed-rank, adaptive or dp, got '" + method + "'");
  if (!c.reg.present("io.input")) throw ConfigError("--input is required");
  const SamplerConfig cfg = sampler_config(c.reg);
  const Dataset data = ingest_csv(c.reg.text("io.input"));
  json results;
  results["n"] = data.size();
  if (c.verbose) std::cout << "cluster: n=" << data.size() << " method=" << method << std::endl;

  ClusterDraws draws;
  std::optional<PriorSpec> threshold_prior;
  if (method == "dp") {
    draws = dp_mixture_run(data, dp_hyper(c.reg), cfg);
  } else {
    const THyper h = t_hyper(c.reg);
    threshold_prior = h;
    if (method == "fixed-rank") {
      draws = fixed_rank_run(data, h, cfg);
    } else {
      const std::size_t period = c.reg.count("cluster.r_period");
      if (period == 0) throw ConfigError("cluster.r_period must be positive");
      std::optional<std::size_t> start;
      if (auto s = c.reg.maybe_count("cluster.r_start")) start = *s;
      draws = adaptive_cluster_run(data, h, cfg, period, start);
    }
    results["rank_updates"] = draws.rank_updates;
  }
  if (data.has_truth())
    results["metrics"] = truth_metrics(draws.theta, draws.sigma2, data.truth(), threshold_prior, true);
  results["sigma_hat"] = posterior_sigma(draws.sigma2);

  std::string partition_csv;
  std::string partition_path;
  if (draws.assignments) {
    const ModalPartition p = modal_partition(*draws.assignments);
    std::ostringstream out;
    write_partition_csv(out, p);
    partition_csv = out.str();
    partition_path = c.reg.present("io.partition") ? c.reg.text("io.partition") : output + ".partition.csv";
    results["modal_clusters"] = *std::max_element(p.labels.begin(), p.labels.end());
    results["modal_draw"] = p.draw;
  }

  write_file(output, summary_csv(draws.theta, draws.sigma2));
  if (!partition_path.empty()) write_file(partition_path, partition_csv);
  maybe_save_draws(c.reg, draws.theta, draws.sigma2);
  write_sidecar(c, output, results);
  return kOk;
}

// fused-lasso ----------------------------------------------------------------

void add_cv_keys(Registry& reg) {
  reg.add("cv.folds", Kind::Count, 5, "cross-validation folds (index mod folds)");
  reg.add("cv.grid_lo", Kind::Real, 1e-2, "smallest lambda of the log grid");
  reg.add("cv.grid_hi", Kind::Real, 10.0, "largest lambda of the log grid");
  reg.add("cv.grid_count", Kind::Count, 30, "number of grid points");
}

std::vector<double> cv_grid(const Registry& reg) {
  return log_grid(reg.real("cv.grid_lo"), reg.real("cv.grid_hi"), reg.count("cv.grid_count"));
}

void setup_fused(Command& c) {
  c.reg.add("io.input", Kind::Text, "", "input CSV: one column y, optional second column truth");
  c.reg.add("fused.lambda", Kind::Real, nullptr, "fixed penalty");
  c.reg.add("fused.cv", Kind::Flag, false, "choose the penalty by cross-validation");
  c.reg.add("fused.sorted", Kind::Flag, false, "fuse along the ascending order of y");
  add_cv_keys(c.reg);
  add_common(c);
  c.option("--input,-i", "io.input");
  c.option("--output,-o", "io.output");
  c.option("--lambda", "fused.lambda");
  c.toggle("--cv", "fused.cv");
  c.toggle("--sorted", "fused.sorted");
  c.option("--folds", "cv.folds");
  c.option("--grid-lo", "cv.grid_lo");
  c.option("--grid-hi", "cv.grid_hi");
  c.option("--grid-count", "cv.grid_count");
}

int run_fused(Command& c) {
  const std::string output = output_path(c.reg);
  const bool use_cv = c.reg.flag("fused.cv");
  if (use_cv == c.reg.present("fused.lambda")) throw ConfigError("give exactly one of --lambda and --cv");
  if (!c.reg.present("io.input")) throw ConfigError("--input is required");
  const Dataset data = ingest_csv(c.reg.text("io.input"));
  const bool sorted = c.reg.flag("fused.sorted");
  double lambda = 0.0;
  json results;
  if (use_cv) {
    RngStream rng(0);
    std::vector<double> y(data.y().begin(), data.y().end());
    if (sorted) y = pilot_rank(data.y()).apply(data.y());
    lambda = cv_select_lambda(y, cv_grid(c.reg), c.reg.count("cv.folds"), rng);
    results["cv_error"] = cv_error(y, lambda, c.reg.count("cv.folds"));
  } else {
    lambda = c.reg.real("fused.lambda");
    if (!(lambda >= 0.0)) throw ConfigError("--lambda must be >= 0");
  }
  const FusedLassoFit fit = sorted ? sorted_fusion_fit(data.y(), lambda) : fused_lasso_1d(data.y(), lambda);
  results["lambda"] = lambda;
  results["blocks"] = fit.block_boundaries.size() + 1;
  results["objective"] = fused_lasso_objective(data.y(), fit.theta_hat, lambda);
  if (data.has_truth()) {
    const PointErrors pe = point_errors(fit.theta_hat, data.truth());
    results["l2"] = pe.l2;
    results["l1"] = pe.l1;
  }
  std::ostringstream out;
  out << "index,y,theta_hat\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out << i + 1 << ',' << format_double(data.y()[i]) << ',' << format_double(fit.theta_hat[i]) << '\n';
  write_file(output, out.str());
  write_sidecar(c, output, results);
  return kOk;
}

// simulate -------------------------------------------------------------------

void setup_simulate(Command& c) {
  c.reg.add("sim.table", Kind::Count, 1, "1: consecutive blocks, fusion methods; 2: iid labels, clustering methods");
  c.reg.add("sim.reps", Kind::Count, 100, "replications");
  c.reg.add("sim.seed", Kind::Count, 0, "master seed");
  c.reg.add("sim.methods", Kind::Text, "", "comma-separated method tags (default: the table's methods)");
  c.reg.add("sim.n", Kind::Count, 100, "observations per replication");
  c.reg.add("sim.sigma_star", Kind::Real, 0.5, "noise standard deviation");
  c.reg.add("sim.q_tilde", Kind::Real, 0.10, "quantile of the between-cluster gaps for B_tilde");
  c.reg.add("prior.laplace.lambda", Kind::Real, nullptr, "Laplace rate (default sqrt(2 log n))");
  const DPHyper dp;
  c.reg.add("prior.dp.alpha", Kind::Real, dp.concentration, "DP concentration");
  c.reg.add("prior.dp.base_var", Kind::Real, dp.base_var, "variance of the normal base measure");
  c.reg.add("cluster.r_period", Kind::Count, 20, "iterations between rank updates (adaptive)");
  c.reg.add("cluster.r_start", Kind::Count, nullptr, "iteration after which rank updates begin (default: burn-in)");
  add_sampler_keys(c.reg);
  add_t_keys(c.reg);
  add_noise_keys(c.reg);
  add_cv_keys(c.reg);
  add_common(c);
  c.option("--output,-o", "io.output");
  c.option("--table", "sim.table");
  c.option("--reps", "sim.reps");
  c.option("--seed", "sim.seed");
  c.option("--methods", "sim.methods");
  c.option("--n", "sim.n");
  c.option("--iters", "sampler.iters");
  c.option("--burnin", "sampler.burnin");
  add_t_flags(c);
}

std::size_t env_threads() {
  const char* env = std::getenv("TFUSE_THREADS");
  if (!env || !*env) return 0;
  std::size_t v = 0;
  const std::string_view s(env);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("TFUSE_THREADS must be a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

int run_simulate(Command& c) {
  const std::string output = output_path(c.reg);
  const std::uint64_t table = c.reg.count("sim.table");
  if (table != 1 && table != 2) throw ConfigError("--table must be 1 or 2");
  const std::size_t reps = c.reg.count("sim.reps");
  if (reps == 0) throw ConfigError("--reps must be positive");
  ReplicationPlan plan = table == 1 ? fusion_table_plan(reps, c.reg.count("sim.seed"))
                                    : cluster_table_plan(reps, c.reg.count("sim.seed"));
  if (c.reg.present("sim.methods")) {
    plan.methods.clear();
    std::stringstream list(c.reg.text("sim.methods"));
    std::string tag;
    while (std::getline(list, tag, ','))
      if (!tag.empty()) plan.methods.insert(tag);
  }
  plan.scenario.n = c.reg.count("sim.n");
  plan.scenario.sigma_star = c.reg.real("sim.sigma_star");
  plan.q_tilde = c.reg.real("sim.q_tilde");
  plan.settings.t = t_hyper(c.reg);
  if (c.reg.present("prior.laplace.lambda")) plan.settings.laplace = laplace_hyper(c.reg, plan.scenario.n);
  plan.settings.dp = dp_hyper(c.reg);
  plan.settings.sampler = sampler_config(c.reg);
  plan.settings.r_period = c.reg.count("cluster.r_period");
  if (plan.settings.r_period == 0) throw ConfigError("cluster.r_period must be positive");
  if (auto s = c.reg.maybe_count("cluster.r_start")) plan.settings.r_start = *s;
  plan.settings.cv_grid = cv_grid(c.reg);
  plan.settings.cv_folds = c.reg.count("cv.folds");
  plan.threads = env_threads();  // 0 = hardware concurrency
  if (c.verbose)
    std::cout << "simulate: table " << table << ", " << reps << " replications, " << plan.threads << " threads"
              << std::endl;

  const AggregateTable result = run_replications(plan);
  std::ostringstream out;
  write_simulate_csv(out, result);
  json results;
  results["failures"] = json::array();
  for (const auto& f : result.failures)
    results["failures"].push_back(
        {{"replication", f.replication}, {"method", f.method}, {"stream_id", f.stream_id}, {"message", f.message}});
  for (const auto& row : result.rows) results["successes"][row.method] = row.successes;
  write_file(output, out.str());
  write_sidecar(c, output, results);
  if (c.verbose) std::cout << "simulate: wrote " << output << std::endl;
  return kOk;
}

// prior-curve ----------------------------------------------------------------

void setup_curve(Command& c) {
  c.reg.add("curve.prior", Kind::Text, "t", "t or laplace");
  c.reg.add("curve.scale", Kind::Real, nullptr, "t scale s; sets b_t = a_t s^2");
  c.reg.add("curve.lambda", Kind::Real, 1.0, "Laplace rate");
  c.reg.add("curve.prev", Kind::Real, -1.0, "left neighbour theta_{i-1}");
  c.reg.add("curve.next", Kind::Real, 1.0, "right neighbour theta_{i+1}");
  c.reg.add("curve.sigma", Kind::Real, 1.0, "noise scale sigma");
  c.reg.add("curve.grid", Kind::Text, "-3:3:601", "grid lo:hi:steps");
  add_t_keys(c.reg);
  add_common(c);
  c.option("--output,-o", "io.output");
  c.option("--prior", "curve.prior");
  c.option("--scale", "curve.scale");
  c.option("--lambda", "curve.lambda");
  c.option("--prev", "curve.prev");
  c.option("--next", "curve.next");
  c.option("--sigma", "curve.sigma");
  c.option("--grid", "curve.grid");
  add_t_flags(c);
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto cells = [&] {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    return parts;
  }();
  if (cells.size() != 3) throw ConfigError("--grid expects lo:hi:steps, got '" + spec + "'");
  const auto lo = parse_double(cells[0]);
  const auto hi = parse_double(cells[1]);
  std::size_t steps = 0;
  const auto res = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), steps);
  if (!lo || !hi || res.ec != std::errc() || res.ptr != cells[2].data() + cells[2].size())
    throw ConfigError("--grid expects lo:hi:steps, got '" + spec + "'");
  if (steps == 0) throw ConfigError("--grid: empty grid");
  if (!(*hi >= *lo)) throw ConfigError("--grid: hi must be >= lo");
  std::vector<double> grid(steps);
  for (std::size_t g = 0; g < steps; ++g)
    grid[g] = steps == 1 ? *lo : *lo + (*hi - *lo) * static_cast<double>(g) / static_cast<double>(steps - 1);
  return grid;
}

int run_curve(Command& c) {
  const std::string output = output_path(c.reg);
  const std::string prior_name = c.reg.text("curve.prior");
  const std::vector<double> grid = parse_grid(c.reg.text("curve.grid"));
  PriorSpec prior;
  json results;
  if (prior_name == "t") {
    THyper h;
    h.a_t = c.reg.real("prior.t.a_t");
    h.b_t = c.reg.real("prior.t.b_t");
    if (auto s = c.reg.maybe_real("curve.scale")) {
      if (!(*s > 0.0)) throw ConfigError("--scale must be positive");
      h.b_t = h.a_t * *s * *s;
    }
    h.validate();
    results["scale"] = h.scale();
    results["b_t"] = h.b_t;
    prior = h;
  } else if (prior_name == "laplace") {
    LaplaceHyper h;
    h.lambda = c.reg.real("curve.lambda");
    h.validate();
    prior = h;
  } else {
    throw ConfigError("--prior must be t or laplace, got '" + prior_name + "'");
  }
  const auto values =
      conditional_neg_log_prior(grid, c.reg.real("curve.prev"), c.reg.real("curve.next"), c.reg.real("curve.sigma"), prior);
  std::ostringstream out;
  write_curve_csv(out, grid, values);
  write_file(output, out.str());
  write_sidecar(c, output, results);
  return kOk;
}

// tune-scale -----------------------------------------------------------------

void setup_tune(Command& c) {
  c.reg.add("tune.n", Kind::Count, nullptr, "number of observations");
  c.reg.add("tune.df", Kind::Real, THyper{}.df(), "degrees of freedom 2 a_t");
  add_common(c);
  c.option("--output,-o", "io.output");
  c.option("--n", "tune.n");
  c.option("--df", "tune.df");
}

int run_tune(Command& c) {
  const std::string output = output_path(c.reg);
  if (!c.reg.present("tune.n")) throw ConfigError("--n is required");
  const std::size_t n = c.reg.count("tune.n");
  const double df = c.reg.real("tune.df");
  const TuneResult tr = solve_tune_scale(n, df);
  std::ostringstream out;
  out << "n,df,scale,b_t\n" << n << ',' << format_double(df) << ',' << format_double(tr.scale) << ','
      << format_double(tr.b_t) << '\n';
  write_file(output, out.str());
  write_sidecar(c, output, {{"scale", tr.scale}, {"b_t", tr.b_t}});
  return kOk;
}

// ----------------------------------------------------------------------------

int dispatch(Command& c) {
  c.resolve();
  if (c.name == "fit") return run_fit(c);
  if (c.name == "cluster") return run_cluster(c);
  if (c.name == "fused-lasso") return run_fused(c);
  if (c.name == "simulate") return run_simulate(c);
  if (c.name == "prior-curve") return run_curve(c);
  return run_tune(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian t-fusion and clustering samplers, fused lasso and simulation tables"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 bad flags or configuration, 3 unreadable input or unwritable output, "
             "4 numeric failure or aborted simulation.\nEnvironment: TFUSE_THREADS caps parallel replications.");

  struct Spec {
    const char* name;
    const char* help;
    void (*setup)(Command&);
  };
  const Spec specs[] = {
      {"fit", "t or Laplace fusion sampler on an ordered sequence", setup_fit},
      {"cluster", "rank-based t clustering or DP mixture", setup_cluster},
      {"fused-lasso", "exact 1-D fused lasso, fixed or cross-validated penalty", setup_fused},
      {"simulate", "replicated comparison table", setup_simulate},
      {"prior-curve", "conditional negative log prior of theta_i between two neighbours", setup_curve},
      {"tune-scale", "t scale and b_t for a sequence length", setup_tune},
  };
  std::vector<std::unique_ptr<Command>> commands;
  for (const auto& s : specs) {
    auto c = std::make_unique<Command>();
    c->name = s.name;
    c->app = app.add_subcommand(s.name, s.help);
    s.setup(*c);
    commands.push_back(std::move(c));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  Command* active = nullptr;
  for (auto& c : commands)
    if (c->app->parsed()) active = c.get();
  try {
    return dispatch(*active);
  } catch (const ConfigError& e) {
    std::cerr << "tfuse " << active->name << ": " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "tfuse " << active->name << ": " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "tfuse " << active->name << ": " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "tfuse " << active->name << ": " << e.what() << '\n';
    return kRuntime;
  }
}
