/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/

// vqebench command line.
//
//   vqebench generate    --config FILE [overrides]   instances only
//   vqebench run         --config FILE [overrides]   full experiment (resumes)
//   vqebench analyze     --dir DIR                   tables and summary
//   vqebench solve-exact --instance FILE             exact optimum of a record
//
// Every config key is also a flag (--n_instances 5, --sizes 11,21, ...) and
// overrides the file. On failure the exit code is nonzero and a JSON error
// manifest goes to stderr (and to <dir>/error.json when a directory is known).

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vqebench/vqebench.hpp"

namespace {

using namespace vqebench;

const char *const kConfigKeys[] = {
    "sizes",        "n_instances", "n_runs",    "n_shots",    "n_iter",
    "gamma",        "master_seed", "exact_limit", "gw_roundings", "rho_begin",
    "rho_end",      "algorithms",  "n_bins",    "bin_low",    "bin_high",
    "confidence",   "output_dir",  "workers"};

struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;
};

void add_config_flags(CLI::App *cmd, ConfigFlags &flags) {
  cmd->add_option("-c,--config", flags.file, "config file");
  for (const char *key : kConfigKeys)
    cmd->add_option(std::string("--") + key, flags.values[key],
                    std::string("override ") + key);
}

ExperimentConfig resolve(const ConfigFlags &flags, const CLI::App *cmd) {
  ExperimentConfig c;
  if (!flags.file.empty())
    c = load_config(flags.file);
  for (const auto &[key, value] : flags.values)
    if (cmd->count("--" + key) > 0)
      set_option(c, key, value);
  validate(c);
  return c;
}

int report_error(const std::string &code, const std::string &message,
                 const std::string &dir, int exit_code) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["error"] = code;
  j["message"] = message;
  const auto text = j.dump(2) + "\n";
  std::cerr << text;
  if (!dir.empty()) {
    try {
      write_atomic(fs::path(dir) / "error.json", text);
    } catch (...) {
      // The manifest on stderr is enough.
    }
  }
  return exit_code;
}

int print_report(const ExperimentReport &r, const std::string &dir) {
  nlohmann::ordered_json j;
  j["status"] = r.ok() ? "ok" : "partial";
  j["dir"] = dir;
  j["jobs_total"] = r.jobs_total;
  j["jobs_run"] = r.jobs_run;
  j["jobs_skipped"] = r.jobs_skipped;
  j["jobs_failed"] = r.failures.size();
  j["instances_generated"] = r.instances_generated;
  j["gw_retries"] = r.gw_retries.size();
  std::cout << j.dump(2) << "\n";
  if (r.ok()) {
    std::error_code ec;
    fs::remove(fs::path(dir) / "error.json", ec);
    return 0;
  }
  return report_error("PartialFailure",
                      std::to_string(r.failures.size()) +
                          " jobs failed; see manifest.json",
                      dir, 3);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"vqebench: VQE versus sampling and greedy search on Max-Cut"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress lines");

  ConfigFlags gen_flags, run_flags;
  auto *gen = app.add_subcommand("generate", "generate instances only");
  add_config_flags(gen, gen_flags);
  auto *run = app.add_subcommand("run", "run or resume a full experiment");
  add_config_flags(run, run_flags);

  std::string analyze_dir;
  auto *analyze = app.add_subcommand("analyze", "emit tables and summary");
  analyze->add_option("-d,--dir", analyze_dir, "experiment directory")
      ->required();

  std::string instance_path;
  int exact_limit = 32;
  auto *solve = app.add_subcommand("solve-exact",
                                   "exact optimum of one instance record");
  solve->add_option("-i,--instance", instance_path, "instance file")
      ->required();
  solve->add_option("--exact_limit", exact_limit, "enumeration size limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0)
      return app.exit(e);
    return report_error("UsageError", e.what(), "", 2);
  }

  std::string dir;
  try {
    RunOptions opts;
    if (!quiet)
      opts.progress = [](const std::string &m) { std::cerr << m << "\n"; };
    if (*gen || *run) {
      const auto &flags = *gen ? gen_flags : run_flags;
      const auto c = resolve(flags, *gen ? gen : run);
      dir = c.output_dir;
      opts.instances_only = static_cast<bool>(*gen);
      const auto report = run_experiment(c, opts);
      if (*run && report.ok())
        emit_tables(dir);
      return print_report(report, dir);
    }
    if (*analyze) {
      dir = analyze_dir;
      const auto an = emit_tables(dir);
      nlohmann::ordered_json j;
      j["status"] = "ok";
      j["dir"] = dir;
      j["sizes"] = an.sizes.size();
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*solve) {
      const auto s = parse_instance(read_file(instance_path));
      const auto sol = exact_optimum(s.instance.graph, {exact_limit});
      nlohmann::ordered_json j;
      j["status"] = "ok";
      j["size"] = s.instance.graph.variable_count();
      j["value"] = sol.value;
      j["normalized_value"] = sol.value / s.instance.gw_value;
      j["gw_value"] = s.instance.gw_value;
      j["assignment"] = sol.assignment.to_string();
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const Error &e) {
    return report_error(std::string(to_string(e.code())), e.what(), dir, 1);
  } catch (const std::exception &e) {
    return report_error("Unexpected", e.what(), dir, 1);
  }
  return 0;
}
