/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

// Text formats of an experiment directory.
//
// Instance record (instances/size<N>_inst<i>.txt):
//   vqebench-instance 1
//   node_count <n>
//   size <N>
//   instance_id <i>
//   seed <graph stream key>
//   attempt <generation attempt, 0 unless the normalizer failed before>
//   gw_value <cut>
//   gw_assignment <bits, variable 0 first>
//   optimum <cut> <bits>            (only when solved exactly)
//   edges <m>
//   <i> <j> <w>                     (m lines, 1-based nodes, i > j)
//
// Initial point (initial_points/size<N>_inst<i>_run<r>.txt):
//   seed <stream key>
//   <theta_0> ... one angle per line, 2N lines
//
// Trajectory (trajectories/size<N>_inst<i>_run<r>_<alg>.csv): `#` lines with
// key=value metadata (label, seed, config_hash, reference, reference_value,
// n_shots, stopped_at, evaluations, best_assignment), then the columns
// checkpoint,n_evals,best_value,alpha. best_value is the best normalized
// objective after n_evals evaluations, alpha its ratio to the reference.
//
// All reals use 17 significant digits.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vqebench/config.hpp"
#include "vqebench/error.hpp"
#include "vqebench/maxcut.hpp"
#include "vqebench/solvers.hpp"

namespace vqebench {

namespace fs = std::filesystem;

/// Writes through a temporary file and a rename, so readers never see a
/// partial file.
inline void write_atomic(const fs::path &path, const std::string &content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      detail::fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush())
      detail::fail(ErrorCode::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    detail::fail(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Instance plus its exact optimum when one was computed.
struct StoredInstance {
  MaxCutInstance instance;
  std::optional<ExactSolution> optimum;
  int attempt = 0;

  /// Normalized optimum O(x*), or nullopt.
  std::optional<double> normalized_optimum() const {
    if (!optimum)
      return std::nullopt;
    return optimum->value / instance.gw_value;
  }
};

inline std::string instance_file(int size, int instance) {
  return "size" + std::to_string(size) + "_inst" + std::to_string(instance) +
         ".txt";
}

inline std::string initial_point_file(int size, int instance, int run) {
  return "size" + std::to_string(size) + "_inst" + std::to_string(instance) +
         "_run" + std::to_string(run) + ".txt";
}

inline std::string trajectory_file(int size, int instance, int run,
                                   Algorithm alg) {
  return "size" + std::to_string(size) + "_inst" + std::to_string(instance) +
         "_run" + std::to_string(run) + "_" + std::string(to_string(alg)) +
         ".csv";
}

inline std::string format_instance(const StoredInstance &s) {
  const auto &inst = s.instance;
  std::ostringstream o;
  o << "vqebench-instance 1\n"
    << "node_count " << inst.graph.node_count() << "\n"
    << "size " << inst.size_label << "\n"
    << "instance_id " << inst.instance_id << "\n"
    << "seed " << inst.seed << "\n"
    << "attempt " << s.attempt << "\n"
    << "gw_value " << format_double(inst.gw_value) << "\n"
    << "gw_assignment " << inst.gw_assignment.to_string() << "\n";
  if (s.optimum)
    o << "optimum " << format_double(s.optimum->value) << " "
      << s.optimum->assignment.to_string() << "\n";
  o << "edges " << inst.graph.edges().size() << "\n";
  for (const auto &e : inst.graph.edges())
    o << e.hi + 1 << " " << e.lo + 1 << " " << format_double(e.weight) << "\n";
  return o.str();
}

inline StoredInstance parse_instance(const std::string &text) {
  std::istringstream in(text);
  auto bad = [](const std::string &m) -> void {
    detail::fail(ErrorCode::ParseError, "instance record: " + m);
  };
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "vqebench-instance" || version != 1)
    bad("missing header");
  StoredInstance s;
  int node_count = 0;
  std::size_t edge_count = 0;
  std::string gw_bits;
  while (in >> key) {
    if (key == "node_count") {
      in >> node_count;
    } else if (key == "size") {
      in >> s.instance.size_label;
    } else if (key == "instance_id") {
      in >> s.instance.instance_id;
    } else if (key == "seed") {
      in >> s.instance.seed;
    } else if (key == "attempt") {
      in >> s.attempt;
    } else if (key == "gw_value") {
      std::string v;
      in >> v;
      s.instance.gw_value = std::stod(v);
    } else if (key == "gw_assignment") {
      in >> gw_bits;
    } else if (key == "optimum") {
      std::string v, bits;
      in >> v >> bits;
      ExactSolution sol;
      sol.value = std::stod(v);
      sol.assignment = Assignment::from_string(bits);
      s.optimum = sol;
    } else if (key == "edges") {
      in >> edge_count;
      break;
    } else {
      bad("unknown key '" + key + "'");
    }
    if (!in)
      bad("bad value for '" + key + "'");
  }
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < edge_count; ++k) {
    int i = 0, j = 0;
    std::string w;
    if (!(in >> i >> j >> w))
      bad("truncated edge list");
    edges.push_back({i - 1, j - 1, std::stod(w)});
  }
  if (node_count < 2)
    bad("bad node_count");
  s.instance.graph = WeightedGraph(node_count, std::move(edges));
  s.instance.gw_assignment = Assignment::from_string(gw_bits);
  if (s.optimum) {
    s.optimum->normalized_value = s.optimum->value / s.instance.gw_value;
  }
  return s;
}

inline std::string format_initial_point(const InitialPoint &p) {
  std::ostringstream o;
  o << "seed " << p.seed << "\n";
  for (double v : p.params.values())
    o << format_double(v) << "\n";
  return o.str();
}

inline InitialPoint parse_initial_point(const std::string &text) {
  std::istringstream in(text);
  std::string key;
  InitialPoint p;
  if (!(in >> key >> p.seed) || key != "seed")
    detail::fail(ErrorCode::ParseError, "initial point: missing seed");
  std::vector<double> v;
  std::string tok;
  while (in >> tok)
    v.push_back(std::stod(tok));
  p.params = ParamVector(v);
  return p;
}

/// Trajectory plus the metadata stored with it.
struct StoredTrajectory {
  RunTrajectory trajectory;
  int size = 0;
  std::string label;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string reference = "pending"; // exact | best_known | pending
  double reference_value = 0.0;
};

inline std::string format_trajectory(const StoredTrajectory &s) {
  const auto &t = s.trajectory;
  std::ostringstream o;
  o << "# label=" << s.label << "\n"
    << "# seed=" << s.seed << "\n"
    << "# config_hash=" << s.config_hash << "\n"
    << "# reference=" << s.reference << "\n"
    << "# reference_value=" << format_double(s.reference_value) << "\n"
    << "# n_shots=" << t.n_shots << "\n"
    << "# stopped_at=" << t.stopped_at << "\n"
    << "# evaluations=" << t.evaluations << "\n"
    << "# best_assignment=" << t.best_assignment.to_string() << "\n"
    << "checkpoint,n_evals,best_value,alpha\n";
  const bool have_ref = s.reference != "pending" && s.reference_value > 0.0;
  for (std::size_t i = 0; i < t.checkpoints.size(); ++i) {
    const auto &c = t.checkpoints[i];
    o << i + 1 << "," << c.n_evals << "," << format_double(c.best_value) << ",";
    if (have_ref)
      o << format_double(c.best_value / s.reference_value);
    o << "\n";
  }
  return o.str();
}

inline StoredTrajectory parse_trajectory(const std::string &text) {
  StoredTrajectory s;
  auto &t = s.trajectory;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  std::map<std::string, std::string> meta;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos)
        meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (!header) {
      if (line != "checkpoint,n_evals,best_value,alpha")
        detail::fail(ErrorCode::ParseError, "trajectory: bad column header");
      header = true;
      continue;
    }
    if (line.empty())
      continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != 4)
      detail::fail(ErrorCode::ParseError, "trajectory: bad row '" + line + "'");
    Checkpoint c;
    c.n_evals = std::stoll(cols[1]);
    c.best_value = std::stod(cols[2]);
    c.improved = t.checkpoints.empty() ||
                 c.best_value > t.checkpoints.back().best_value;
    t.checkpoints.push_back(c);
  }
  if (!header)
    detail::fail(ErrorCode::ParseError, "trajectory: no column header");
  s.label = meta["label"];
  s.seed = std::stoull(meta.count("seed") ? meta["seed"] : "0");
  s.config_hash = meta["config_hash"];
  s.reference = meta.count("reference") ? meta["reference"] : "pending";
  s.reference_value = std::stod(
      meta.count("reference_value") ? meta["reference_value"] : "0");
  t.stopped_at = std::stoi(meta.count("stopped_at") ? meta["stopped_at"] : "0");
  t.evaluations = std::stoll(meta.count("evaluations") ? meta["evaluations"] : "0");
  t.best_assignment = Assignment::from_string(meta["best_assignment"]);
  t.best_value = t.checkpoints.empty() ? 0.0 : t.checkpoints.back().best_value;
  // The label carries the identifiers.
  for (const auto &part : detail::split(s.label, '/')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      continue;
    const auto k = part.substr(0, eq), v = part.substr(eq + 1);
    if (k == "size")
      s.size = std::stoi(v);
    else if (k == "instance")
      t.instance_id = std::stoi(v);
    else if (k == "run")
      t.run_id = std::stoi(v);
    else if (k == "alg")
      t.algorithm = parse_algorithm(v);
  }
  t.n_shots = std::stoi(meta.count("n_shots") ? meta["n_shots"] : "0");
  return s;
}

} // namespace vqebench
