/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <filesystem>
#include <map>
#include <string>

#include <gtest/gtest.h>

#include "vqebench/experiment.hpp"

using namespace vqebench;

namespace {

fs::path fresh_dir(const std::string &name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("vqebench_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_config(const fs::path &dir) {
  ExperimentConfig c;
  c.sizes = {11};
  c.n_instances = 2;
  c.n_runs = 2;
  c.n_shots = 50;
  c.n_iter = 40;
  c.output_dir = dir.string();
  return c;
}

// Every regular file below dir, keyed by relative path, except the manifest
// (it counts skipped jobs, so it legitimately differs after a resume).
std::map<std::string, std::string> snapshot(const fs::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file())
      continue;
    const auto rel = fs::relative(e.path(), dir).string();
    if (rel == "manifest.json" || rel == "config.txt")
      continue;
    out[rel] = read_file(e.path());
  }
  return out;
}

std::size_t count_files(const fs::path &dir) {
  std::size_t n = 0;
  for (const auto &e : fs::directory_iterator(dir))
    n += e.is_regular_file();
  return n;
}

} // namespace

TEST(Config, ParsesKeysCommentsAndLists) {
  const auto c = parse_config("# comment\n"
                              "sizes = 11, 21\n"
                              "n_runs = 3   # trailing\n"
                              "gamma = 0.25\n"
                              "algorithms = greedy,vqe\n");
  EXPECT_EQ(c.sizes, (std::vector<int>{11, 21}));
  EXPECT_EQ(c.n_runs, 3);
  EXPECT_DOUBLE_EQ(c.gamma, 0.25);
  EXPECT_EQ(c.algorithms,
            (std::vector<Algorithm>{Algorithm::greedy, Algorithm::vqe}));
  EXPECT_EQ(c.n_instances, 25);
}

TEST(Config, UnknownKeyAndBadValuesFail) {
  auto code = [](const std::string &text) {
    try {
      parse_config(text);
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::IoError; // sentinel: no throw
  };
  EXPECT_EQ(code("n_sots = 10\n"), ErrorCode::BadConfig);
  EXPECT_EQ(code("sizes = 12\n"), ErrorCode::BadConfig);  // 13 nodes
  EXPECT_EQ(code("gamma = 0\n"), ErrorCode::BadConfig);
  EXPECT_EQ(code("gamma = 1.5\n"), ErrorCode::BadConfig);
  EXPECT_EQ(code("n_runs = -1\n"), ErrorCode::BadConfig);
  EXPECT_EQ(code("n_runs = 2x\n"), ErrorCode::BadConfig);
  EXPECT_EQ(code("algorithms = vqe, annealing\n"), ErrorCode::BadConfig);
  EXPECT_EQ(code("just words\n"), ErrorCode::BadConfig);
}

TEST(Config, TextRoundTripAndHashIgnoresRuntimeKeys) {
  ExperimentConfig c;
  c.sizes = {5, 9};
  c.gamma = 0.3;
  c.rho_end = 1e-5;
  c.workers = 4;
  const auto back = parse_config(to_text(c));
  EXPECT_EQ(to_text(back), to_text(c));
  auto d = c;
  d.workers = 1;
  d.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(c), config_hash(d));
  d.master_seed = 2;
  EXPECT_NE(config_hash(c), config_hash(d));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Persistence, InstanceRoundTrip) {
  ExperimentConfig c;
  const auto s = generate_instance(c, 11, 3);
  ASSERT_TRUE(s.optimum.has_value());
  const auto back = parse_instance(format_instance(s));
  EXPECT_EQ(back.instance.graph, s.instance.graph);
  EXPECT_EQ(back.instance.gw_value, s.instance.gw_value);
  EXPECT_EQ(back.instance.gw_assignment, s.instance.gw_assignment);
  EXPECT_EQ(back.instance.seed, s.instance.seed);
  EXPECT_EQ(back.instance.instance_id, 3);
  EXPECT_EQ(back.instance.size_label, 11);
  ASSERT_TRUE(back.optimum.has_value());
  EXPECT_EQ(back.optimum->value, s.optimum->value);
  EXPECT_EQ(back.optimum->assignment, s.optimum->assignment);
  EXPECT_EQ(format_instance(back), format_instance(s));
}

TEST(Persistence, InitialPointRoundTripIsBitExact) {
  ExperimentConfig c;
  const auto p = generate_initial_point(c, 21, 1, 4);
  const auto back = parse_initial_point(format_initial_point(p));
  EXPECT_EQ(back.seed, p.seed);
  ASSERT_EQ(back.params.size(), 42u);
  for (std::size_t k = 0; k < p.params.size(); ++k)
    EXPECT_EQ(back.params.values()[k], p.params.values()[k]);
}

TEST(Persistence, TrajectoryRoundTrip) {
  ExperimentConfig c = small_config("unused");
  const auto inst = generate_instance(c, 11, 0);
  const auto init = generate_initial_point(c, 11, 0, 1);
  const auto t = run_job(c, inst, init, {11, 0, 1, Algorithm::greedy});
  const auto back = parse_trajectory(format_trajectory(t));
  EXPECT_EQ(back.label, t.label);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_EQ(back.config_hash, t.config_hash);
  EXPECT_EQ(back.reference, "exact");
  EXPECT_EQ(back.size, 11);
  EXPECT_EQ(back.trajectory.run_id, 1);
  EXPECT_EQ(back.trajectory.algorithm, Algorithm::greedy);
  EXPECT_EQ(back.trajectory.n_shots, 50);
  EXPECT_EQ(back.trajectory.best_assignment, t.trajectory.best_assignment);
  ASSERT_EQ(back.trajectory.checkpoints.size(),
            t.trajectory.checkpoints.size());
  for (std::size_t i = 0; i < t.trajectory.checkpoints.size(); ++i) {
    EXPECT_EQ(back.trajectory.checkpoints[i].n_evals,
              t.trajectory.checkpoints[i].n_evals);
    EXPECT_EQ(back.trajectory.checkpoints[i].best_value,
              t.trajectory.checkpoints[i].best_value);
  }
  EXPECT_EQ(format_trajectory(back), format_trajectory(t));
}

TEST(Persistence, MalformedRecordsFail) {
  EXPECT_THROW(parse_instance("not an instance"), Error);
  EXPECT_THROW(parse_trajectory("# label=x\nwrong,header\n"), Error);
  EXPECT_THROW(parse_initial_point("angles 1 2"), Error);
}

TEST(Experiment, CountingContract) {
  const auto dir = fresh_dir("count");
  const auto c = small_config(dir);
  const auto report = run_experiment(c);
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report.jobs_total, 12u);
  EXPECT_EQ(report.jobs_run, 12u);
  EXPECT_EQ(enumerate_jobs(c).size(), 12u);
  EXPECT_EQ(count_files(dir / "instances"), 2u);
  EXPECT_EQ(count_files(dir / "initial_points"), 4u);
  EXPECT_EQ(count_files(dir / "trajectories"), 12u);
  emit_tables(dir);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_EQ(count_files(dir / "tables"), 8u);
}

TEST(Experiment, TrajectoriesAreSelfDescribing) {
  const auto dir = fresh_dir("selfdesc");
  const auto c = small_config(dir);
  ASSERT_TRUE(run_experiment(c).ok());
  for (const auto &key : enumerate_jobs(c)) {
    const auto t = parse_trajectory(read_file(
        dir / "trajectories" /
        trajectory_file(key.size, key.instance, key.run, key.algorithm)));
    EXPECT_EQ(t.label, stream_label(key.size, key.instance, key.run,
                                    to_string(key.algorithm), "shots"));
    EXPECT_EQ(t.seed, derive_key(c.master_seed, t.label));
    EXPECT_EQ(t.config_hash, config_hash(c));
    EXPECT_EQ(t.reference, "exact");
    EXPECT_EQ(t.trajectory.checkpoints.size(), 40u);
    EXPECT_EQ(t.trajectory.evaluations, 2000);
  }
}

TEST(Experiment, RerunIsByteIdenticalAndSkipsEverything) {
  const auto a = fresh_dir("rerun_a"), b = fresh_dir("rerun_b");
  ASSERT_TRUE(run_experiment(small_config(a)).ok());
  emit_tables(a);
  const auto first = snapshot(a);

  const auto again = run_experiment(small_config(a));
  EXPECT_EQ(again.jobs_run, 0u);
  EXPECT_EQ(again.jobs_skipped, 12u);
  emit_tables(a);
  EXPECT_EQ(snapshot(a), first);

  ASSERT_TRUE(run_experiment(small_config(b)).ok());
  emit_tables(b);
  EXPECT_EQ(snapshot(b), first);
}

TEST(Experiment, ResumeRerunsOnlyTheMissingJob) {
  const auto dir = fresh_dir("resume");
  const auto c = small_config(dir);
  ASSERT_TRUE(run_experiment(c).ok());
  const auto before = snapshot(dir);
  const auto victim =
      dir / "trajectories" / trajectory_file(11, 1, 0, Algorithm::vqe);
  fs::remove(victim);
  EXPECT_THROW(analyze_experiment(dir), Error);
  const auto report = run_experiment(c);
  EXPECT_EQ(report.jobs_run, 1u);
  EXPECT_EQ(report.jobs_skipped, 11u);
  EXPECT_EQ(report.instances_loaded, 2u);
  EXPECT_EQ(snapshot(dir), before);
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  const auto a = fresh_dir("workers_1"), b = fresh_dir("workers_3");
  auto ca = small_config(a);
  auto cb = small_config(b);
  ca.sizes = cb.sizes = {5, 7};
  cb.workers = 3;
  ASSERT_TRUE(run_experiment(ca).ok());
  ASSERT_TRUE(run_experiment(cb).ok());
  emit_tables(a);
  emit_tables(b);
  EXPECT_EQ(snapshot(a), snapshot(b));
}

TEST(Experiment, EmptyOrIncompleteDirectoryIsRejected) {
  const auto dir = fresh_dir("empty");
  fs::create_directories(dir);
  try {
    emit_tables(dir);
    FAIL() << "no throw";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteExperiment);
  }
  const auto c = small_config(dir);
  run_experiment(c, {.instances_only = true});
  EXPECT_EQ(count_files(dir / "instances"), 2u);
  try {
    analyze_experiment(dir);
    FAIL() << "no throw";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteExperiment);
  }
}

TEST(Experiment, DifferentConfigInSameDirectoryIsRejected) {
  const auto dir = fresh_dir("clash");
  auto c = small_config(dir);
  ASSERT_TRUE(run_experiment(c).ok());
  c.master_seed = 7;
  EXPECT_THROW(run_experiment(c), Error);
  c.master_seed = 1;
  c.workers = 2; // runtime keys may change
  EXPECT_NO_THROW(run_experiment(c));
}

TEST(Experiment, BestKnownReferenceAboveExactLimit) {
  const auto dir = fresh_dir("best_known");
  auto c = small_config(dir);
  c.exact_limit = 5;
  ASSERT_TRUE(run_experiment(c).ok());
  for (int i = 0; i < c.n_instances; ++i) {
    double top = 0.0, ref = -1.0;
    for (int r = 0; r < c.n_runs; ++r)
      for (auto a : c.algorithms) {
        const auto t = parse_trajectory(read_file(
            dir / "trajectories" / trajectory_file(11, i, r, a)));
        EXPECT_EQ(t.reference, "best_known");
        if (ref < 0)
          ref = t.reference_value;
        EXPECT_EQ(t.reference_value, ref);
        top = std::max(top, t.trajectory.best_value);
      }
    EXPECT_EQ(ref, top);
  }
  const auto an = analyze_experiment(dir);
  EXPECT_EQ(an.at(11).reference, "best_known");
  for (const auto &[a, rows] : an.at(11).alpha)
    for (const auto &row : rows)
      EXPECT_LE(row.back(), 1.0);
}

TEST(Experiment, TableSchemas) {
  const auto dir = fresh_dir("schemas");
  ASSERT_TRUE(run_experiment(small_config(dir)).ok());
  emit_tables(dir);
  auto header = [&](const std::string &name) {
    const auto text = read_file(dir / "tables" / name);
    return text.substr(0, text.find('\n'));
  };
  EXPECT_EQ(header("fig2_vqe.csv"),
            "size,iteration,n_evals,mean_alpha,sem_alpha,success,success_low,"
            "success_high,reference");
  EXPECT_EQ(header("fig3_vqe_vs_sampling.csv"),
            "size,iteration,mean_diff,sem,prob_better,wilson_low,wilson_high");
  EXPECT_EQ(header("fig4_vqe_vs_greedy.csv"),
            "size,iteration,mean_diff,sem,prob_better,wilson_low,wilson_high");
  EXPECT_EQ(header("fig4_vqe_vs_best_classical.csv"),
            "size,iteration,mean_diff,sem,prob_better,wilson_low,wilson_high,"
            "baseline");
  EXPECT_EQ(header("fig5a_max_advantage_sampling.csv"),
            "size,iteration,max_mean_diff,sem,n_evals");
  EXPECT_EQ(header("fig6_correlation_greedy.csv"),
            "size,bin_low,bin_high,count,x_mean,x_std,y_mean,y_std");
  // One row per size in the max-advantage tables.
  const auto fig5 = read_file(dir / "tables/fig5b_max_advantage_best_classical.csv");
  EXPECT_EQ(std::count(fig5.begin(), fig5.end(), '\n'), 2);
  // One row per checkpoint in the curves.
  const auto fig3 = read_file(dir / "tables/fig3_vqe_vs_sampling.csv");
  EXPECT_EQ(std::count(fig3.begin(), fig3.end(), '\n'), 41);
}

TEST(Experiment, VqeAndGreedyStartFromTheStoredInitialPoint) {
  const auto dir = fresh_dir("shared_init");
  const auto c = small_config(dir);
  ASSERT_TRUE(run_experiment(c).ok());
  const auto inst = parse_instance(read_file(dir / "instances" / instance_file(11, 0)));
  const auto init = parse_initial_point(
      read_file(dir / "initial_points" / initial_point_file(11, 0, 1)));
  const auto fresh = generate_initial_point(c, 11, 0, 1);
  for (std::size_t k = 0; k < init.params.size(); ++k)
    EXPECT_EQ(init.params.values()[k], fresh.params.values()[k]);
  for (auto a : {Algorithm::vqe, Algorithm::greedy}) {
    const auto stored = read_file(dir / "trajectories" / trajectory_file(11, 0, 1, a));
    EXPECT_EQ(format_trajectory(run_job(c, inst, init, {11, 0, 1, a})), stored);
  }
}
