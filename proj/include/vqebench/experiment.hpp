/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once
#pragma once

// Experiment driver: instance generation, the job queue, resume, and the
// analysis tables.
//
// Directory layout:
//   config.txt                 canonical config (see config.hpp)
//   instances/                 one record per (size, instance)
//   initial_points/            one record per (size, instance, run)
//   trajectories/              one CSV per job
//   manifest.json              job accounting, config echo, versions
//   summary.json               headline numbers per size
//   tables/                    analysis CSVs, one per figure analog
//
// Table columns:
//   fig2_vqe.csv               size, iteration, n_evals, mean_alpha, sem_alpha,
//                              success, success_low, success_high, reference
//   fig3_vqe_vs_sampling.csv,
//   fig4_vqe_vs_greedy.csv     size, iteration, mean_diff, sem, prob_better,
//                              wilson_low, wilson_high
//   fig4_vqe_vs_best_classical.csv
//                              the same plus baseline, the classical algorithm
//                              with the higher mean alpha at that checkpoint
//   fig5a_max_advantage_sampling.csv,
//   fig5b_max_advantage_best_classical.csv
//                              size, iteration, max_mean_diff, sem, n_evals
//   fig6_correlation_sampling.csv,
//   fig6_correlation_greedy.csv
//                              size, bin_low, bin_high, count, x_mean, x_std,
//                              y_mean, y_std (x: final VQE alpha of a run,
//                              y: final alpha of the other algorithm, same run)
//
// iteration is the 1-based checkpoint; mean_diff is VQE minus the other
// algorithm; prob_better is the fraction of runs where the VQE is strictly
// better, with its Wilson interval at the configured level.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>
#include <openssl/opensslv.h>

#include "vqebench/circuit.hpp"
#include "vqebench/config.hpp"
#include "vqebench/error.hpp"
#include "vqebench/goemans_williamson.hpp"
#include "vqebench/graph.hpp"
#include "vqebench/maxcut.hpp"
#include "vqebench/mps.hpp"
#include "vqebench/persistence.hpp"
#include "vqebench/rng.hpp"
#include "vqebench/solvers.hpp"
#include "vqebench/stats.hpp"

namespace vqebench {

inline constexpr const char *kVersion = "0.1.0";

/// Normalizer failures tolerated per instance before giving up. Each retry
/// redraws the graph from a fresh stream.
inline constexpr int kMaxGwAttempts = 10;

struct JobKey {
  int size = 0;
  int instance = 0;
  int run = 0;
  Algorithm algorithm = Algorithm::vqe;

  auto tie() const { return std::tie(size, instance, run, algorithm); }
  friend bool operator<(const JobKey &a, const JobKey &b) {
    return a.tie() < b.tie();
  }
  friend bool operator==(const JobKey &a, const JobKey &b) {
    return a.tie() == b.tie();
  }
};

struct JobFailure {
  JobKey key;
  std::string code;
  std::string message;
};

struct GwRetry {
  int size = 0;
  int instance = 0;
  int attempt = 0; // failed attempt
  std::string message;
};

struct ExperimentReport {
  std::size_t jobs_total = 0;
  std::size_t jobs_run = 0;
  std::size_t jobs_skipped = 0; // already on disk
  std::size_t instances_generated = 0;
  std::size_t instances_loaded = 0;
  std::vector<JobFailure> failures;
  std::vector<GwRetry> gw_retries;

  bool ok() const { return failures.empty(); }
};

struct RunOptions {
  bool instances_only = false;
  /// Progress lines; called from worker threads under a lock.
  std::function<void(const std::string &)> progress;
};

namespace detail {

inline fs::path instance_path(const fs::path &dir, int size, int i) {
  return dir / "instances" / instance_file(size, i);
}
inline fs::path initial_point_path(const fs::path &dir, int size, int i,
                                   int r) {
  return dir / "initial_points" / initial_point_file(size, i, r);
}
inline fs::path trajectory_path(const fs::path &dir, const JobKey &k) {
  return dir / "trajectories" /
         trajectory_file(k.size, k.instance, k.run, k.algorithm);
}

inline std::string attempt_purpose(std::string_view base, int attempt) {
  std::string p(base);
  if (attempt > 0)
    p += "#" + std::to_string(attempt);
  return p;
}

// Runs body(k) for k in [0, count) on `workers` threads. Order of execution
// never influences results because every job owns its random streams.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)> &body) {
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                            count);
  if (n_threads <= 1) {
    for (std::size_t k = 0; k < count; ++k)
      body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++)
        body(k);
    });
  for (auto &th : pool)
    th.join();
}

inline nlohmann::ordered_json config_json(const ExperimentConfig &c,
                                          bool with_runtime = true) {
  nlohmann::ordered_json j;
  j["sizes"] = c.sizes;
  j["n_instances"] = c.n_instances;
  j["n_runs"] = c.n_runs;
  j["n_shots"] = c.n_shots;
  j["n_iter"] = c.n_iter;
  j["gamma"] = c.gamma;
  j["master_seed"] = c.master_seed;
  j["exact_limit"] = c.exact_limit;
  j["gw_roundings"] = c.gw_roundings;
  j["rho_begin"] = c.rho_begin;
  j["rho_end"] = c.rho_end;
  std::vector<std::string> algs;
  for (auto a : c.algorithms)
    algs.emplace_back(to_string(a));
  j["algorithms"] = algs;
  j["n_bins"] = c.n_bins;
  j["bin_low"] = c.bin_low;
  j["bin_high"] = c.bin_high;
  j["confidence"] = c.confidence;
  if (with_runtime) {
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
  }
  return j;
}

inline nlohmann::ordered_json versions_json() {
  nlohmann::ordered_json j;
  j["vqebench"] = kVersion;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
               std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["boost"] = std::to_string(BOOST_VERSION / 100000) + "." +
               std::to_string(BOOST_VERSION / 100 % 1000) + "." +
               std::to_string(BOOST_VERSION % 100);
  j["openssl"] = OPENSSL_VERSION_TEXT;
  j["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
  j["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = "gcc " __VERSION__;
#endif
  return j;
}

inline void write_manifest(const fs::path &dir, const ExperimentConfig &c,
                           const ExperimentReport &r, std::string_view phase) {
  nlohmann::ordered_json j;
  j["tool"] = "vqebench";
  j["phase"] = phase;
  j["status"] = r.ok() ? "ok" : "partial";
  j["config_hash"] = config_hash(c);
  j["config"] = config_json(c);
  j["versions"] = versions_json();
  j["jobs_total"] = r.jobs_total;
  j["jobs_run"] = r.jobs_run;
  j["jobs_skipped"] = r.jobs_skipped;
  j["instances_generated"] = r.instances_generated;
  j["instances_loaded"] = r.instances_loaded;
  auto failed = nlohmann::ordered_json::array();
  for (const auto &f : r.failures) {
    nlohmann::ordered_json e;
    e["size"] = f.key.size;
    e["instance"] = f.key.instance;
    e["run"] = f.key.run;
    e["algorithm"] = to_string(f.key.algorithm);
    e["error"] = f.code;
    e["message"] = f.message;
    failed.push_back(e);
  }
  j["failed"] = failed;
  auto retries = nlohmann::ordered_json::array();
  for (const auto &g : r.gw_retries) {
    nlohmann::ordered_json e;
    e["size"] = g.size;
    e["instance"] = g.instance;
    e["attempt"] = g.attempt;
    e["message"] = g.message;
    retries.push_back(e);
  }
  j["gw_retries"] = retries;
  write_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

// The config stored in a directory must agree with the one being run.
inline void check_or_write_config(const fs::path &dir,
                                  const ExperimentConfig &c) {
  const auto path = dir / "config.txt";
  if (fs::exists(path)) {
    const auto stored = parse_config(read_file(path));
    if (config_hash(stored) != config_hash(c))
      fail(ErrorCode::BadConfig,
           dir.string() + " holds an experiment with a different config (" +
               config_hash(stored) + " vs " + config_hash(c) + ")");
  }
  write_atomic(path, to_text(c, true));
}

} // namespace detail

/// Generates one instance: a random cubic graph on size + 1 nodes, its GW
/// normalizer and, within exact_limit, its exact optimum. A normalizer that
/// fails to converge causes a redraw from the stream of the next attempt.
inline StoredInstance generate_instance(const ExperimentConfig &c, int size,
                                        int instance,
                                        std::vector<GwRetry> *retries = nullptr) {
  for (int attempt = 0; attempt < kMaxGwAttempts; ++attempt) {
    const auto graph_label = stream_label(
        size, instance, 0, "instance", detail::attempt_purpose("graph", attempt));
    auto graph_rng = derive_stream(c.master_seed, graph_label);
    auto graph = generate_cubic_graph(size + 1, graph_rng);
    auto gw_rng = derive_stream(
        c.master_seed, stream_label(size, instance, 0, "instance",
                                    detail::attempt_purpose("gw", attempt)));
    GwOptions gw_opts;
    gw_opts.roundings = c.gw_roundings;
    GwResult gw;
    try {
      gw = gw_normalizer(graph, gw_rng, gw_opts);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::ConvergenceFailure)
        throw;
      if (retries)
        retries->push_back({size, instance, attempt, e.what()});
      continue;
    }
    StoredInstance s;
    s.attempt = attempt;
    s.instance.graph = std::move(graph);
    s.instance.gw_value = gw.value;
    s.instance.gw_assignment = gw.assignment;
    s.instance.size_label = size;
    s.instance.instance_id = instance;
    s.instance.seed = derive_key(c.master_seed, graph_label);
    if (size <= c.exact_limit) {
      auto sol = exact_optimum(s.instance.graph, {c.exact_limit});
      sol.normalized_value = sol.value / s.instance.gw_value;
      s.optimum = sol;
    }
    return s;
  }
  detail::fail(ErrorCode::ConvergenceFailure,
               "GW normalizer failed " + std::to_string(kMaxGwAttempts) +
                   " times for size " + std::to_string(size) + " instance " +
                   std::to_string(instance));
}

/// Initial point of run r, shared by the VQE and the greedy algorithm.
inline InitialPoint generate_initial_point(const ExperimentConfig &c, int size,
                                           int instance, int run) {
  auto rng = derive_stream(c.master_seed,
                           stream_label(size, instance, run, "shared", "init"));
  return draw_initial_point(size, rng);
}

/// One job. The trajectory is returned with an exact reference when the
/// instance has one and `pending` otherwise.
inline StoredTrajectory run_job(const ExperimentConfig &c,
                                const StoredInstance &inst,
                                const InitialPoint &init, const JobKey &key) {
  const auto label = stream_label(key.size, key.instance, key.run,
                                  to_string(key.algorithm), "shots");
  auto rng = derive_stream(c.master_seed, label);
  const auto budget = c.budget();
  RunTrajectory traj;
  switch (key.algorithm) {
  case Algorithm::vqe: {
    VqeOptions opts;
    opts.gamma = c.gamma;
    opts.rho_begin = c.rho_begin;
    opts.rho_end = c.rho_end;
    traj = run_vqe(inst.instance, build_layout(key.size), init, budget, rng,
                   opts);
    break;
  }
  case Algorithm::sampling:
    traj = run_sampling(inst.instance, budget, rng);
    break;
  case Algorithm::greedy:
    traj = run_greedy(inst.instance, build_layout(key.size), init, budget, rng);
    break;
  }
  traj.instance_id = key.instance;
  traj.run_id = key.run;
  StoredTrajectory s;
  s.trajectory = std::move(traj);
  s.size = key.size;
  s.label = label;
  s.seed = derive_key(c.master_seed, label);
  s.config_hash = config_hash(c);
  if (auto opt = inst.normalized_optimum()) {
    s.reference = "exact";
    s.reference_value = *opt;
  }
  return s;
}

/// All jobs of a config in canonical order.
inline std::vector<JobKey> enumerate_jobs(const ExperimentConfig &c) {
  std::vector<JobKey> jobs;
  for (int size : c.sizes)
    for (int i = 0; i < c.n_instances; ++i)
      for (int r = 0; r < c.n_runs; ++r)
        for (auto a : c.algorithms)
          jobs.push_back({size, i, r, a});
  return jobs;
}

/// Rewrites the trajectories of every instance without an exact optimum
/// against the best value any job found on it (reference=best_known).
inline void finalize_references(const fs::path &dir,
                                const ExperimentConfig &c) {
  for (int size : c.sizes) {
    if (size <= c.exact_limit)
      continue;
    for (int i = 0; i < c.n_instances; ++i) {
      std::vector<std::pair<fs::path, StoredTrajectory>> found;
      for (int r = 0; r < c.n_runs; ++r)
        for (auto a : c.algorithms) {
          const auto p = detail::trajectory_path(dir, {size, i, r, a});
          if (fs::exists(p))
            found.emplace_back(p, parse_trajectory(read_file(p)));
        }
      if (found.empty())
        continue;
      double best = -std::numeric_limits<double>::infinity();
      for (const auto &[p, t] : found)
        best = std::max(best, t.trajectory.best_value);
      for (auto &[p, t] : found) {
        if (t.reference == "best_known" && t.reference_value == best)
          continue;
        t.reference = "best_known";
        t.reference_value = best;
        write_atomic(p, format_trajectory(t));
      }
    }
  }
}

/// Runs (or resumes) an experiment in c.output_dir. Jobs whose trajectory
/// file exists are skipped. Failed jobs are listed in the report and the
/// manifest; they do not stop the others.
inline ExperimentReport run_experiment(const ExperimentConfig &c,
                                       const RunOptions &options = {}) {
  validate(c);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  detail::check_or_write_config(dir, c);

  ExperimentReport report;
  std::mutex mu;
  auto say = [&](const std::string &m) {
    if (options.progress) {
      std::lock_guard lock(mu);
      options.progress(m);
    }
  };

  // Instances and initial points.
  std::vector<std::pair<int, int>> inst_keys;
  for (int size : c.sizes)
    for (int i = 0; i < c.n_instances; ++i)
      inst_keys.emplace_back(size, i);
  std::vector<StoredInstance> instances(inst_keys.size());
  std::vector<std::string> inst_errors(inst_keys.size());
  detail::parallel_for(inst_keys.size(), c.workers, [&](std::size_t k) {
    const auto [size, i] = inst_keys[k];
    const auto path = detail::instance_path(dir, size, i);
    try {
      if (fs::exists(path)) {
        instances[k] = parse_instance(read_file(path));
        std::lock_guard lock(mu);
        ++report.instances_loaded;
      } else {
        std::vector<GwRetry> retries;
        instances[k] = generate_instance(c, size, i, &retries);
        write_atomic(path, format_instance(instances[k]));
        std::lock_guard lock(mu);
        ++report.instances_generated;
        report.gw_retries.insert(report.gw_retries.end(), retries.begin(),
                                 retries.end());
      }
      for (int r = 0; r < c.n_runs; ++r) {
        const auto ip = detail::initial_point_path(dir, size, i, r);
        if (!fs::exists(ip))
          write_atomic(ip, format_initial_point(
                               generate_initial_point(c, size, i, r)));
      }
      say("instance size=" + std::to_string(size) + " id=" +
          std::to_string(i) + " ready");
    } catch (const std::exception &e) {
      inst_errors[k] = e.what();
    }
  });
  std::sort(report.gw_retries.begin(), report.gw_retries.end(),
            [](const GwRetry &a, const GwRetry &b) {
              return std::tie(a.size, a.instance, a.attempt) <
                     std::tie(b.size, b.instance, b.attempt);
            });

  const auto jobs = enumerate_jobs(c);
  report.jobs_total = jobs.size();
  auto instance_index = [&](int size, int i) {
    const auto it = std::find(inst_keys.begin(), inst_keys.end(),
                              std::make_pair(size, i));
    return static_cast<std::size_t>(it - inst_keys.begin());
  };

  if (options.instances_only) {
    for (std::size_t k = 0; k < inst_keys.size(); ++k)
      if (!inst_errors[k].empty())
        for (auto a : c.algorithms)
          report.failures.push_back(
              {{inst_keys[k].first, inst_keys[k].second, 0, a},
               "InstanceFailure", inst_errors[k]});
    detail::write_manifest(dir, c, report, "generate");
    return report;
  }
  detail::write_manifest(dir, c, report, "instances");

  std::vector<std::optional<JobFailure>> failures(jobs.size());
  detail::parallel_for(jobs.size(), c.workers, [&](std::size_t k) {
    const auto &key = jobs[k];
    const auto path = detail::trajectory_path(dir, key);
    if (fs::exists(path)) {
      std::lock_guard lock(mu);
      ++report.jobs_skipped;
      return;
    }
    const auto ik = instance_index(key.size, key.instance);
    if (!inst_errors[ik].empty()) {
      failures[k] = JobFailure{key, "InstanceFailure", inst_errors[ik]};
      return;
    }
    try {
      const auto init = parse_initial_point(read_file(
          detail::initial_point_path(dir, key.size, key.instance, key.run)));
      const auto traj = run_job(c, instances[ik], init, key);
      write_atomic(path, format_trajectory(traj));
      {
        std::lock_guard lock(mu);
        ++report.jobs_run;
      }
      say(traj.label + " best=" + format_double(traj.trajectory.best_value));
    } catch (const Error &e) {
      failures[k] = JobFailure{key, std::string(to_string(e.code())), e.what()};
    } catch (const std::exception &e) {
      failures[k] = JobFailure{key, "Unexpected", e.what()};
    }
  });
  for (auto &f : failures)
    if (f)
      report.failures.push_back(std::move(*f));

  finalize_references(dir, c);
  detail::write_manifest(dir, c, report, "run");
  return report;
}

// ---------------------------------------------------------------------------
// Analysis

/// Comparison of the VQE against one baseline over all paired runs.
struct Comparison {
  DifferenceCurve difference;
  std::vector<Proportion> prob_better;
  /// Per checkpoint, the algorithm compared against (fixed unless this is
  /// the best-classical comparison).
  std::vector<Algorithm> baseline;
  MaxAdvantage peak;
};

struct SizeAnalysis {
  int size = 0;
  std::string reference; // exact | best_known
  int n_shots = 0;
  std::size_t n_checkpoints = 0;
  std::size_t n_pairs = 0;
  /// alpha[a][p][i]: ratio of algorithm a on run p (instances, then runs) at
  /// checkpoint i.
  std::map<Algorithm, std::vector<std::vector<double>>> alpha;
  /// Mean alpha and SEM per checkpoint, per algorithm.
  std::map<Algorithm, std::vector<MeanSem>> mean_alpha;
  /// Fraction of runs at the reference per checkpoint, per algorithm.
  std::map<Algorithm, std::vector<Proportion>> success;
  std::optional<Comparison> vs_sampling;
  std::optional<Comparison> vs_greedy;
  std::optional<Comparison> vs_best_classical;
  std::vector<CorrelationBin> correlation_sampling;
  std::vector<CorrelationBin> correlation_greedy;
};

struct ExperimentAnalysis {
  ExperimentConfig config;
  std::vector<SizeAnalysis> sizes;

  const SizeAnalysis &at(int size) const {
    for (const auto &s : sizes)
      if (s.size == size)
        return s;
    detail::fail(ErrorCode::IncompleteExperiment,
                 "size " + std::to_string(size) + " not in the experiment");
  }
};

namespace detail {

inline Comparison compare(const std::vector<std::vector<double>> &vqe,
                          const std::vector<std::vector<double>> &other,
                          Algorithm baseline, int n_shots, double confidence) {
  Comparison cmp;
  cmp.difference = difference_curve(vqe, other);
  const std::size_t len = cmp.difference.size();
  std::vector<double> a(vqe.size()), b(vqe.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t p = 0; p < vqe.size(); ++p) {
      a[p] = vqe[p][i];
      b[p] = other[p][i];
    }
    cmp.prob_better.push_back(prob_better(a, b, confidence));
  }
  cmp.baseline.assign(len, baseline);
  cmp.peak = max_advantage(cmp.difference, n_shots);
  return cmp;
}

} // namespace detail

/// Loads a finished experiment directory and computes every statistic the
/// tables report. Throws IncompleteExperiment when a job is missing or a
/// reference is still pending.
inline ExperimentAnalysis analyze_experiment(const fs::path &dir) {
  const auto cfg_path = dir / "config.txt";
  if (!fs::exists(cfg_path))
    detail::fail(ErrorCode::IncompleteExperiment,
                 dir.string() + " has no config.txt");
  ExperimentAnalysis out;
  out.config = parse_config(read_file(cfg_path));
  const auto &c = out.config;

  std::size_t missing = 0;
  std::string first_missing;
  for (int size : c.sizes) {
    SizeAnalysis sa;
    sa.size = size;
    sa.n_shots = c.n_shots;
    std::map<Algorithm, std::vector<std::vector<double>>> best;
    std::vector<double> ref_per_pair;
    for (int i = 0; i < c.n_instances; ++i)
      for (int r = 0; r < c.n_runs; ++r) {
        double ref = 0.0;
        for (auto a : c.algorithms) {
          const auto p = detail::trajectory_path(dir, {size, i, r, a});
          if (!fs::exists(p)) {
            if (missing++ == 0)
              first_missing = p.string();
            continue;
          }
          const auto t = parse_trajectory(read_file(p));
          if (t.reference == "pending" || !(t.reference_value > 0.0))
            detail::fail(ErrorCode::IncompleteExperiment,
                         p.string() + " has no reference value");
          sa.reference = t.reference;
          ref = t.reference_value;
          std::vector<double> values;
          for (const auto &cp : t.trajectory.checkpoints)
            values.push_back(cp.best_value);
          sa.alpha[a].push_back(approximation_ratio(t.trajectory, ref));
          best[a].push_back(std::move(values));
        }
        ref_per_pair.push_back(ref);
      }
    if (missing)
      continue;
    sa.n_pairs = ref_per_pair.size();
    sa.n_checkpoints = sa.alpha.begin()->second.front().size();
    for (const auto &[a, rows] : sa.alpha)
      for (const auto &row : rows)
        if (row.size() != sa.n_checkpoints)
          detail::fail(ErrorCode::IncompleteExperiment,
                       "trajectories of size " + std::to_string(size) +
                           " differ in length");

    std::vector<double> column(sa.n_pairs);
    for (const auto &[a, rows] : sa.alpha) {
      for (std::size_t i = 0; i < sa.n_checkpoints; ++i) {
        long long hits = 0;
        for (std::size_t p = 0; p < sa.n_pairs; ++p) {
          column[p] = rows[p][i];
          if (best[a][p][i] >= ref_per_pair[p] - kSuccessTolerance)
            ++hits;
        }
        if (sa.n_pairs >= 2)
          sa.mean_alpha[a].push_back(mean_sem(column));
        else
          sa.mean_alpha[a].push_back({column[0], 0.0});
        sa.success[a].push_back(proportion(
            hits, static_cast<long long>(sa.n_pairs), c.confidence));
      }
    }

    const bool have_vqe = c.runs(Algorithm::vqe) && sa.n_pairs >= 2;
    auto final_column = [&](Algorithm a) {
      std::vector<double> v;
      for (const auto &row : sa.alpha.at(a))
        v.push_back(row.back());
      return v;
    };
    if (have_vqe && c.runs(Algorithm::sampling)) {
      sa.vs_sampling =
          detail::compare(sa.alpha[Algorithm::vqe], sa.alpha[Algorithm::sampling],
                          Algorithm::sampling, c.n_shots, c.confidence);
      sa.correlation_sampling = binned_correlation(
          final_column(Algorithm::vqe), final_column(Algorithm::sampling),
          c.n_bins, c.bin_low, c.bin_high);
    }
    if (have_vqe && c.runs(Algorithm::greedy)) {
      sa.vs_greedy =
          detail::compare(sa.alpha[Algorithm::vqe], sa.alpha[Algorithm::greedy],
                          Algorithm::greedy, c.n_shots, c.confidence);
      sa.correlation_greedy = binned_correlation(
          final_column(Algorithm::vqe), final_column(Algorithm::greedy),
          c.n_bins, c.bin_low, c.bin_high);
    }
    if (sa.vs_sampling && sa.vs_greedy) {
      // At each checkpoint, compare against whichever classical algorithm
      // has the higher mean alpha there (sampling on ties).
      std::vector<std::vector<double>> best_classical(
          sa.n_pairs, std::vector<double>(sa.n_checkpoints));
      std::vector<Algorithm> pick(sa.n_checkpoints);
      const auto &ms = sa.mean_alpha[Algorithm::sampling];
      const auto &mg = sa.mean_alpha[Algorithm::greedy];
      for (std::size_t i = 0; i < sa.n_checkpoints; ++i) {
        pick[i] = mg[i].mean > ms[i].mean ? Algorithm::greedy
                                          : Algorithm::sampling;
        for (std::size_t p = 0; p < sa.n_pairs; ++p)
          best_classical[p][i] = sa.alpha[pick[i]][p][i];
      }
      auto cmp = detail::compare(sa.alpha[Algorithm::vqe], best_classical,
                                 Algorithm::sampling, c.n_shots, c.confidence);
      cmp.baseline = std::move(pick);
      sa.vs_best_classical = std::move(cmp);
    }
    out.sizes.push_back(std::move(sa));
  }
  if (missing)
    detail::fail(ErrorCode::IncompleteExperiment,
                 std::to_string(missing) + " trajectories missing, first " +
                     first_missing);
  return out;
}

namespace detail {

inline std::string csv_comparison(const ExperimentAnalysis &an,
                                  std::optional<Comparison> SizeAnalysis::*which,
                                  bool with_baseline) {
  std::ostringstream o;
  o << "size,iteration,mean_diff,sem,prob_better,wilson_low,wilson_high";
  if (with_baseline)
    o << ",baseline";
  o << "\n";
  for (const auto &sa : an.sizes) {
    const auto &cmp = sa.*which;
    if (!cmp)
      continue;
    for (std::size_t i = 0; i < cmp->difference.size(); ++i) {
      const auto &pb = cmp->prob_better[i];
      o << sa.size << "," << i + 1 << ","
        << format_double(cmp->difference.mean[i]) << ","
        << format_double(cmp->difference.sem[i]) << ","
        << format_double(pb.point) << "," << format_double(pb.low) << ","
        << format_double(pb.high);
      if (with_baseline)
        o << "," << to_string(cmp->baseline[i]);
      o << "\n";
    }
  }
  return o.str();
}

inline std::string csv_max_advantage(const ExperimentAnalysis &an,
                                     std::optional<Comparison> SizeAnalysis::*which) {
  std::ostringstream o;
  o << "size,iteration,max_mean_diff,sem,n_evals\n";
  for (const auto &sa : an.sizes) {
    const auto &cmp = sa.*which;
    if (!cmp)
      continue;
    o << sa.size << "," << cmp->peak.iteration << ","
      << format_double(cmp->peak.mean_difference) << ","
      << format_double(cmp->peak.sem) << "," << cmp->peak.n_evals << "\n";
  }
  return o.str();
}

inline std::string
csv_correlation(const ExperimentAnalysis &an,
                std::vector<CorrelationBin> SizeAnalysis::*which) {
  std::ostringstream o;
  o << "size,bin_low,bin_high,count,x_mean,x_std,y_mean,y_std\n";
  for (const auto &sa : an.sizes)
    for (const auto &b : sa.*which)
      o << sa.size << "," << format_double(b.lo) << "," << format_double(b.hi)
        << "," << b.count << "," << format_double(b.x_mean) << ","
        << format_double(b.x_std) << "," << format_double(b.y_mean) << ","
        << format_double(b.y_std) << "\n";
  return o.str();
}

} // namespace detail

/// Writes tables/*.csv and summary.json; returns the analysis.
inline ExperimentAnalysis emit_tables(const fs::path &dir) {
  auto an = analyze_experiment(dir);
  const auto tables = dir / "tables";

  std::ostringstream fig2;
  fig2 << "size,iteration,n_evals,mean_alpha,sem_alpha,success,success_low,"
          "success_high,reference\n";
  for (const auto &sa : an.sizes) {
    if (!sa.mean_alpha.count(Algorithm::vqe))
      continue;
    const auto &m = sa.mean_alpha.at(Algorithm::vqe);
    const auto &s = sa.success.at(Algorithm::vqe);
    for (std::size_t i = 0; i < m.size(); ++i)
      fig2 << sa.size << "," << i + 1 << ","
           << static_cast<long long>(i + 1) * sa.n_shots << ","
           << format_double(m[i].mean) << "," << format_double(m[i].sem) << ","
           << format_double(s[i].point) << "," << format_double(s[i].low)
           << "," << format_double(s[i].high) << "," << sa.reference << "\n";
  }
  write_atomic(tables / "fig2_vqe.csv", fig2.str());
  write_atomic(tables / "fig3_vqe_vs_sampling.csv",
               detail::csv_comparison(an, &SizeAnalysis::vs_sampling, false));
  write_atomic(tables / "fig4_vqe_vs_greedy.csv",
               detail::csv_comparison(an, &SizeAnalysis::vs_greedy, false));
  write_atomic(
      tables / "fig4_vqe_vs_best_classical.csv",
      detail::csv_comparison(an, &SizeAnalysis::vs_best_classical, true));
  write_atomic(tables / "fig5a_max_advantage_sampling.csv",
               detail::csv_max_advantage(an, &SizeAnalysis::vs_sampling));
  write_atomic(
      tables / "fig5b_max_advantage_best_classical.csv",
      detail::csv_max_advantage(an, &SizeAnalysis::vs_best_classical));
  write_atomic(
      tables / "fig6_correlation_sampling.csv",
      detail::csv_correlation(an, &SizeAnalysis::correlation_sampling));
  write_atomic(tables / "fig6_correlation_greedy.csv",
               detail::csv_correlation(an, &SizeAnalysis::correlation_greedy));

  nlohmann::ordered_json j;
  j["config_hash"] = config_hash(an.config);
  // Runtime keys left out so the summary depends on results only.
  j["config"] = detail::config_json(an.config, false);
  j["versions"] = detail::versions_json();
  auto sizes = nlohmann::ordered_json::array();
  for (const auto &sa : an.sizes) {
    nlohmann::ordered_json e;
    e["size"] = sa.size;
    e["reference"] = sa.reference;
    e["runs"] = sa.n_pairs;
    e["checkpoints"] = sa.n_checkpoints;
    nlohmann::ordered_json fin;
    for (const auto &[a, m] : sa.mean_alpha) {
      nlohmann::ordered_json f;
      f["mean_alpha"] = m.back().mean;
      f["sem_alpha"] = m.back().sem;
      const auto &s = sa.success.at(a).back();
      f["success"] = s.point;
      f["success_low"] = s.low;
      f["success_high"] = s.high;
      fin[std::string(to_string(a))] = f;
    }
    e["final"] = fin;
    auto peak = [](const std::optional<Comparison> &cmp) {
      nlohmann::ordered_json p;
      if (!cmp)
        return p;
      p["iteration"] = cmp->peak.iteration;
      p["max_mean_diff"] = cmp->peak.mean_difference;
      p["sem"] = cmp->peak.sem;
      p["n_evals"] = cmp->peak.n_evals;
      p["final_mean_diff"] = cmp->difference.mean.back();
      return p;
    };
    e["vqe_vs_sampling"] = peak(sa.vs_sampling);
    e["vqe_vs_greedy"] = peak(sa.vs_greedy);
    e["vqe_vs_best_classical"] = peak(sa.vs_best_classical);
    sizes.push_back(e);
  }
  j["sizes"] = sizes;
  write_atomic(dir / "summary.json", j.dump(2) + "\n");
  return an;
}

} // namespace vqebench
