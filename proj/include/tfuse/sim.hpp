#pragma once

// Scenario generators and the replication engine behind the fusion and
// clustering comparison tables.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tfuse/cluster_gibbs.hpp"
#include "tfuse/distributions.hpp"
#include "tfuse/error.hpp"
#include "tfuse/freq_solvers.hpp"
#include "tfuse/fusion_gibbs.hpp"
#include "tfuse/metrics.hpp"
#include "tfuse/model.hpp"
#include "tfuse/rng.hpp"

namespace tfuse {

enum class ScenarioKind { FusionBlocks, ClusterLabels };

struct Scenario {
  ScenarioKind kind = ScenarioKind::FusionBlocks;
  std::size_t n = 100;
  double sigma_star = 0.5;
  std::vector<double> levels{0.0, 2.0, 4.0};
  std::vector<double> block_prob{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  void validate() const {
    if (n < 2) throw ConfigError("Scenario: n must be at least 2");
    if (levels.empty()) throw ConfigError("Scenario: levels must be non-empty");
    if (!(sigma_star >= 0.0)) throw ConfigError("Scenario: sigma_star must be >= 0");
    if (kind == ScenarioKind::FusionBlocks) {
      if (block_prob.size() != levels.size()) throw ConfigError("Scenario: block_prob must match levels");
      const double total = std::accumulate(block_prob.begin(), block_prob.end(), 0.0);
      if (std::abs(total - 1.0) > 1e-9) throw ConfigError("Scenario: block_prob must sum to 1");
      for (double p : block_prob)
        if (!(p >= 0.0)) throw ConfigError("Scenario: block_prob entries must be >= 0");
    }
  }
};

inline std::vector<std::size_t> sample_multinomial(std::size_t trials, std::span<const double> prob,
                                                   RngStream& rng) {
  std::vector<std::size_t> counts(prob.size(), 0);
  for (std::size_t t = 0; t < trials; ++t) {
    double u = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < prob.size() && u >= prob[k]) u -= prob[k++];
    counts[k]++;
  }
  return counts;
}

/// Consecutive blocks with multinomial sizes at the given levels plus
/// N(0, sigma_star^2) noise. Empty blocks simply vanish.
inline Dataset gen_fusion_scenario(const Scenario& sc, RngStream& rng) {
  if (sc.kind != ScenarioKind::FusionBlocks) throw ConfigError("gen_fusion_scenario: wrong scenario kind");
  sc.validate();
  const auto sizes = sample_multinomial(sc.n, sc.block_prob, rng);
  std::vector<double> truth;
  truth.reserve(sc.n);
  for (std::size_t k = 0; k < sizes.size(); ++k) truth.insert(truth.end(), sizes[k], sc.levels[k]);
  std::vector<double> y(sc.n);
  for (std::size_t i = 0; i < sc.n; ++i) y[i] = truth[i] + sc.sigma_star * sample_standard_normal(rng);
  return Dataset(std::move(y), std::move(truth));
}

/// iid uniform level per index plus noise.
inline Dataset gen_cluster_scenario(const Scenario& sc, RngStream& rng) {
  if (sc.kind != ScenarioKind::ClusterLabels) throw ConfigError("gen_cluster_scenario: wrong scenario kind");
  sc.validate();
  const std::size_t k = sc.levels.size();
  std::vector<double> truth(sc.n);
  for (double& v : truth) {
    const auto label = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)), k - 1);
    v = sc.levels[label];
  }
  std::vector<double> y(sc.n);
  for (std::size_t i = 0; i < sc.n; ++i) y[i] = truth[i] + sc.sigma_star * sample_standard_normal(rng);
  return Dataset(std::move(y), std::move(truth));
}

inline Dataset generate(const Scenario& sc, RngStream& rng) {
  return sc.kind == ScenarioKind::FusionBlocks ? gen_fusion_scenario(sc, rng) : gen_cluster_scenario(sc, rng);
}

namespace method {
inline constexpr const char* kTFusion = "t-fusion";
inline constexpr const char* kLaplaceFusion = "laplace-fusion";
inline constexpr const char* kL1Fusion = "l1-fusion";
inline constexpr const char* kTAdaptive = "t-adaptive";
inline constexpr const char* kTFixedRank = "t-fixed-rank";
inline constexpr const char* kDP = "dp";
inline constexpr const char* kL1Sorted = "l1-sorted";

inline const std::set<std::string>& all() {
  static const std::set<std::string> tags{kTFusion, kLaplaceFusion, kL1Fusion, kTAdaptive,
                                          kTFixedRank, kDP, kL1Sorted};
  return tags;
}
}  // namespace method

struct MethodSettings {
  THyper t;
  std::optional<LaplaceHyper> laplace;  // defaults to LaplaceHyper::for_size(n)
  DPHyper dp;
  SamplerConfig sampler;
  std::size_t r_period = 20;
  std::optional<std::size_t> r_start;
  std::vector<double> cv_grid = log_grid(1e-2, 10.0, 30);
  std::size_t cv_folds = 5;
};

struct ReplicationPlan {
  Scenario scenario;
  std::set<std::string> methods;
  std::size_t reps = 100;
  std::uint64_t master_seed = 0;
  MethodSettings settings;
  std::size_t threads = 1;  // 0 = hardware concurrency
  double q_tilde = 0.10;

  void validate() const {
    scenario.validate();
    if (reps < 1) throw ConfigError("ReplicationPlan: reps must be >= 1");
    if (methods.empty()) throw ConfigError("ReplicationPlan: no methods");
    for (const auto& m : methods)
      if (!method::all().contains(m)) throw ConfigError("ReplicationPlan: unknown method '" + m + "'");
    settings.sampler.validate();
  }
};

/// Runs one method on one dataset and evaluates it against the truth.
/// B is the minimum between-block gap for consecutive-block scenarios and the
/// lower q_tilde quantile for cluster scenarios.
inline MetricReport evaluate_method(const std::string& tag, const Dataset& data, const MethodSettings& settings,
                                    ScenarioKind kind, std::uint64_t seed, std::uint64_t stream_id,
                                    double q_tilde = 0.10) {
  const auto truth = data.truth();
  const Adjacency true_adj = adjacency_true(truth);
  SamplerConfig cfg = settings.sampler;
  cfg.seed = seed;
  cfg.stream_id = stream_id;

  auto block_stats = [&](std::span<const double> theta_hat, MetricReport& rep) {
    rep.w = w_statistic(theta_hat, true_adj);
    rep.b = kind == ScenarioKind::FusionBlocks ? b_statistic(theta_hat, true_adj)
                                               : b_tilde_statistic(theta_hat, true_adj, q_tilde);
  };
  auto bayes = [&](const DrawMatrix<double>& theta, std::span<const double> sigma2,
                   std::optional<PriorSpec> threshold_prior) {
    MetricReport rep;
    const PosteriorErrors pe = posterior_errors(theta, truth);
    rep.l2_error = pe.l2;
    rep.l1_error = pe.l1;
    rep.post_mean_sq_l2 = pe.post_mean_sq_l2;
    const auto mean = posterior_mean(theta);
    block_stats(mean, rep);
    if (threshold_prior)
      rep.r = r_statistic(adjacency_bayes(mean, posterior_sigma(sigma2), *threshold_prior, data.size()), true_adj);
    return rep;
  };
  auto frequentist = [&](const FusedLassoFit& fit) {
    MetricReport rep;
    const PointErrors pe = point_errors(fit.theta_hat, truth);
    rep.l2_error = pe.l2;
    rep.l1_error = pe.l1;
    block_stats(fit.theta_hat, rep);
    rep.r = r_statistic(adjacency_true(fit.theta_hat), true_adj);
    return rep;
  };

  if (tag == method::kTFusion) {
    const auto draws = run_fusion_sampler(data, settings.t, cfg);
    return bayes(draws.theta, draws.sigma2, PriorSpec{settings.t});
  }
  if (tag == method::kLaplaceFusion) {
    const LaplaceHyper lh = settings.laplace.value_or(LaplaceHyper::for_size(data.size()));
    const auto draws = run_fusion_sampler(data, lh, cfg);
    return bayes(draws.theta, draws.sigma2, PriorSpec{lh});
  }
  if (tag == method::kTAdaptive || tag == method::kTFixedRank) {
    const std::size_t period = tag == method::kTAdaptive ? settings.r_period : kNeverUpdate;
    const auto draws = adaptive_cluster_run(data, settings.t, cfg, period, settings.r_start);
    return bayes(draws.theta, draws.sigma2, PriorSpec{settings.t});
  }
  if (tag == method::kDP) {
    const auto draws = dp_mixture_run(data, settings.dp, cfg);
    return bayes(draws.theta, draws.sigma2, std::nullopt);
  }
  RngStream cv_rng(seed, stream_id);
  if (tag == method::kL1Fusion) {
    const double lambda = cv_select_lambda(data.y(), settings.cv_grid, settings.cv_folds, cv_rng);
    return frequentist(fused_lasso_1d(data.y(), lambda));
  }
  if (tag == method::kL1Sorted) {
    const Permutation r = pilot_rank(data.y());
    const auto sorted = r.apply(data.y());
    const double lambda = cv_select_lambda(sorted, settings.cv_grid, settings.cv_folds, cv_rng);
    return frequentist(sorted_fusion_fit(data.y(), lambda));
  }
  throw ConfigError("unknown method '" + tag + "'");
}

/// Mean and standard error (sample SD / sqrt(count)) of one metric; absent
/// when undefined for the method or when fewer than two values exist.
struct Stat {
  std::optional<double> mean;
  std::optional<double> se;
};

inline Stat aggregate(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  const double m = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.mean = m;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    s.se = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

struct AggregateRow {
  std::string method;
  Stat l2, l1, pmsl2, w, b, r;
  std::size_t successes = 0;
};

struct FailureRecord {
  std::size_t replication;
  std::string method;
  std::uint64_t seed;
  std::uint64_t stream_id;
  std::string message;
};

struct AggregateTable {
  std::vector<AggregateRow> rows;  // sorted by method tag
  std::vector<FailureRecord> failures;
  std::map<std::string, std::vector<std::optional<MetricReport>>> per_rep;
  bool b_tilde = false;

  const AggregateRow& row(const std::string& method) const {
    for (const auto& r : rows)
      if (r.method == method) return r;
    throw ConfigError("AggregateTable: no row for method '" + method + "'");
  }
};

inline std::size_t resolve_threads(std::size_t requested) {
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

/// Generates every replication's data on its own stream, runs each requested
/// method on a stream derived from (method, replication), and reduces in
/// replication order. The result does not depend on the thread count.
inline AggregateTable run_replications(const ReplicationPlan& plan) {
  plan.validate();
  const std::vector<std::string> methods(plan.methods.begin(), plan.methods.end());
  const std::size_t reps = plan.reps;

  struct Outcome {
    std::optional<MetricReport> report;
    std::string error;
  };
  std::vector<std::vector<Outcome>> outcomes(reps, std::vector<Outcome>(methods.size()));
  std::vector<std::exception_ptr> fatal(reps);

  auto work = [&](std::size_t k) {
    try {
      RngStream data_rng(plan.master_seed, derive_stream_id("data", k));
      const Dataset data = generate(plan.scenario, data_rng);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        try {
          outcomes[k][m].report = evaluate_method(methods[m], data, plan.settings, plan.scenario.kind,
                                                  plan.master_seed, derive_stream_id(methods[m], k), plan.q_tilde);
        } catch (const Error& e) {
          outcomes[k][m].error = e.what();
        }
      }
    } catch (...) {
      fatal[k] = std::current_exception();
    }
  };

  const std::size_t threads = std::min(resolve_threads(plan.threads), reps);
  if (threads <= 1) {
    for (std::size_t k = 0; k < reps; ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t k = next.fetch_add(1); k < reps; k = next.fetch_add(1)) work(k);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& e : fatal)
    if (e) std::rethrow_exception(e);

  AggregateTable table;
  table.b_tilde = plan.scenario.kind == ScenarioKind::ClusterLabels;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    AggregateRow row;
    row.method = methods[m];
    std::vector<double> l2, l1, pm, w, b, r;
    auto& raw = table.per_rep[methods[m]];
    for (std::size_t k = 0; k < reps; ++k) {
      const Outcome& o = outcomes[k][m];
      raw.push_back(o.report);
      if (!o.report) {
        table.failures.push_back({k, methods[m], plan.master_seed, derive_stream_id(methods[m], k), o.error});
        continue;
      }
      ++row.successes;
      l2.push_back(o.report->l2_error);
      l1.push_back(o.report->l1_error);
      if (o.report->post_mean_sq_l2) pm.push_back(*o.report->post_mean_sq_l2);
      w.push_back(o.report->w);
      b.push_back(o.report->b);
      if (o.report->r) r.push_back(*o.report->r);
    }
    row.l2 = aggregate(l2);
    row.l1 = aggregate(l1);
    row.pmsl2 = aggregate(pm);
    row.w = aggregate(w);
    row.b = aggregate(b);
    row.r = aggregate(r);
    table.rows.push_back(std::move(row));
  }
  const double total = static_cast<double>(reps * methods.size());
  if (static_cast<double>(table.failures.size()) >= 0.1 * total)
    throw AbortedRun("simulation aborted: " + std::to_string(table.failures.size()) + " of " +
                     std::to_string(reps * methods.size()) + " method runs failed; first: " +
                     table.failures.front().method + " replication " +
                     std::to_string(table.failures.front().replication) + ": " + table.failures.front().message);
  return table;
}

/// n = 100, sigma* = 0.5, three consecutive blocks at 0/2/4 with
/// multinomial(1/3) sizes; t, Laplace and L1 fusion.
inline ReplicationPlan fusion_table_plan(std::size_t reps, std::uint64_t seed) {
  ReplicationPlan plan;
  plan.scenario = Scenario{};
  plan.methods = {method::kTFusion, method::kLaplaceFusion, method::kL1Fusion};
  plan.reps = reps;
  plan.master_seed = seed;
  return plan;
}

/// n = 100, sigma* = 0.5, iid labels at 0/2/4; adaptive and fixed-rank t,
/// DP mixture and sorted L1 fusion.
inline ReplicationPlan cluster_table_plan(std::size_t reps, std::uint64_t seed) {
  ReplicationPlan plan;
  plan.scenario = Scenario{ScenarioKind::ClusterLabels, 100, 0.5, {0.0, 2.0, 4.0}, {}};
  plan.methods = {method::kTAdaptive, method::kTFixedRank, method::kDP, method::kL1Sorted};
  plan.reps = reps;
  plan.master_seed = seed;
  return plan;
}

}  // namespace tfuse
