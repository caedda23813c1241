/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vqebench/circuit.hpp"
#include "vqebench/cobyla.hpp"
#include "vqebench/error.hpp"
#include "vqebench/maxcut.hpp"
#include "vqebench/mps.hpp"
#include "vqebench/rng.hpp"

namespace vqebench {

enum class Algorithm { vqe, sampling, greedy };

constexpr std::string_view to_string(Algorithm a) {
  switch (a) {
  case Algorithm::vqe: return "vqe";
  case Algorithm::sampling: return "sampling";
  case Algorithm::greedy: return "greedy";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "vqe") return Algorithm::vqe;
  if (s == "sampling") return Algorithm::sampling;
  if (s == "greedy") return Algorithm::greedy;
  detail::fail(ErrorCode::ParseError, "unknown algorithm '" + std::string(s) + "'");
}

/// Evaluation budget: n_iter rounds of n_shots objective evaluations.
struct Budget {
  int n_shots = 1000;
  int n_iter = 1000;
  long long n_evals() const { return static_cast<long long>(n_shots) * n_iter; }
};

struct Checkpoint {
  long long n_evals = 0; // evaluations consumed when the checkpoint was taken
  double best_value = 0.0; // best normalized objective so far
  bool improved = false;   // best value rose since the previous checkpoint
};

struct RunTrajectory {
  Algorithm algorithm = Algorithm::vqe;
  int instance_id = 0;
  int run_id = 0;
  int n_shots = 0;
  std::vector<Checkpoint> checkpoints;
  Assignment best_assignment;
  double best_value = -std::numeric_limits<double>::infinity();
  long long evaluations = 0;
  /// 1-based checkpoint after which the optimizer had stopped and the
  /// remaining checkpoints were flat-extended; 0 if it ran the full budget.
  int stopped_at = 0;
};

struct InitialPoint {
  ParamVector params;
  std::uint64_t seed = 0;
};

/// Conditional value at risk for maximisation: mean of the ceil(gamma * n)
/// largest values. At gamma = 1 this is the plain sample mean, summed in
/// input order.
inline double cvar_cost(std::span<const double> values, double gamma) {
  if (values.empty())
    detail::fail(ErrorCode::EmptySample, "CVaR of an empty sample");
  if (!(gamma > 0.0 && gamma <= 1.0))
    detail::fail(ErrorCode::BadGamma, "gamma must lie in (0, 1]");
  const std::size_t n = values.size();
  // The tolerance stops products like 0.3 * 10 = 3.0000000000000004 from
  // rounding up to an extra element.
  auto k = static_cast<std::size_t>(
      std::ceil(gamma * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  double sum = 0.0;
  if (k == n) {
    for (double v : values)
      sum += v;
    return sum / static_cast<double>(n);
  }
  std::vector<double> scratch(values.begin(), values.end());
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end(),
                   std::greater<>());
  const double threshold = scratch[k - 1];
  std::size_t above = 0;
  for (double v : values)
    if (v > threshold) {
      sum += v;
      ++above;
    }
  sum += static_cast<double>(k - above) * threshold;
  return sum / static_cast<double>(k);
}

inline double mean_cost(std::span<const double> values) {
  if (values.empty())
    detail::fail(ErrorCode::EmptySample, "mean of an empty sample");
  double sum = 0.0;
  for (double v : values)
    sum += v;
  return sum / static_cast<double>(values.size());
}

inline InitialPoint draw_initial_point(int n_qubits, RandomStream &rng) {
  if (n_qubits < 1)
    detail::fail(ErrorCode::IndexOutOfRange, "need at least one qubit");
  std::vector<double> theta(2 * static_cast<std::size_t>(n_qubits));
  for (auto &t : theta)
    t = rng.uniform(0.0, kTwoPi);
  return {ParamVector(theta), rng.key()};
}

namespace detail {

// Running maximum with a checkpoint every `spacing` evaluations.
class BestTracker {
public:
  BestTracker(RunTrajectory &traj, long long budget, int spacing, int n_vars)
      : traj_(traj), budget_(budget), spacing_(spacing), n_vars_(n_vars) {
    traj_.n_shots = spacing;
    traj_.checkpoints.reserve(static_cast<std::size_t>(budget / spacing) + 1);
  }

  bool exhausted() const { return traj_.evaluations >= budget_; }
  long long remaining() const { return budget_ - traj_.evaluations; }

  void observe(double value, std::uint64_t bits) {
    ++traj_.evaluations;
    if (value > traj_.best_value) {
      traj_.best_value = value;
      best_bits_ = bits;
      improved_ = true;
    }
    if (traj_.evaluations % spacing_ == 0)
      checkpoint();
  }

  void checkpoint() {
    traj_.checkpoints.push_back({traj_.evaluations, traj_.best_value, improved_});
    improved_ = false;
  }

  void finish() {
    if (traj_.evaluations % spacing_ != 0)
      checkpoint();
    traj_.best_assignment = Assignment(n_vars_, best_bits_);
  }

private:
  RunTrajectory &traj_;
  long long budget_;
  int spacing_;
  int n_vars_;
  std::uint64_t best_bits_ = 0;
  bool improved_ = false;
};

inline void check_budget(const Budget &b) {
  if (b.n_shots < 1 || b.n_iter < 1)
    fail(ErrorCode::BadConfig, "budget counts must be positive");
}

inline void check_layout(const MaxCutInstance &inst, const CircuitLayout &l) {
  if (l.n_qubits != inst.graph.variable_count())
    fail(ErrorCode::LengthMismatch,
         "layout has " + std::to_string(l.n_qubits) + " qubits, instance " +
             std::to_string(inst.graph.variable_count()) + " variables");
}

} // namespace detail

enum class CostKind { cvar, mean };

struct VqeOptions {
  double gamma = 0.1;
  CostKind cost = CostKind::cvar;
  double rho_begin = 1.0;
  double rho_end = 1e-4;
  /// Called after every tell with the told point and cost.
  std::function<void(std::span<const double>, double)> on_tell;
};

/// CVaR-VQE: each iteration samples n_shots bitstrings at the current
/// angles, tracks the best normalized objective, and feeds the negated CVaR
/// to the optimizer, which proposes the next angles. If the optimizer stops
/// before n_iter iterations the remaining checkpoints repeat the final best
/// value.
inline RunTrajectory run_vqe(const MaxCutInstance &instance,
                             const CircuitLayout &layout,
                             const InitialPoint &init, const Budget &budget,
                             RandomStream &rng, AskTellOptimizer &optimizer,
                             const VqeOptions &options = {}) {
  detail::check_budget(budget);
  detail::check_layout(instance, layout);
  if (!(options.gamma > 0.0 && options.gamma <= 1.0))
    detail::fail(ErrorCode::BadGamma, "gamma must lie in (0, 1]");
  if (static_cast<int>(init.params.size()) != layout.param_count)
    detail::fail(ErrorCode::ParamLengthMismatch, "initial point length");

  RunTrajectory traj;
  traj.algorithm = Algorithm::vqe;
  traj.instance_id = instance.instance_id;
  const CutEvaluator cut(instance.graph);
  detail::BestTracker tracker(traj, budget.n_evals(), budget.n_shots,
                              layout.n_qubits);
  std::vector<double> values(budget.n_shots);

  for (int iter = 0; iter < budget.n_iter; ++iter) {
    if (!optimizer.running()) {
      if (traj.stopped_at == 0)
        traj.stopped_at = iter;
      tracker.checkpoint();
      continue;
    }
    const auto asked = optimizer.ask();
    const std::vector<double> theta(asked.begin(), asked.end());
    const auto state = apply_circuit(layout, ParamVector(theta));
    for (int shot = 0; shot < budget.n_shots; ++shot) {
      const std::uint64_t bits = state.draw(rng);
      values[shot] = cut(bits) / instance.gw_value;
      tracker.observe(values[shot], bits);
    }
    const double cost = options.cost == CostKind::cvar
                            ? cvar_cost(values, options.gamma)
                            : mean_cost(values);
    optimizer.tell(theta, -cost);
    if (options.on_tell)
      options.on_tell(theta, -cost);
  }
  tracker.finish();
  return traj;
}

inline RunTrajectory run_vqe(const MaxCutInstance &instance,
                             const CircuitLayout &layout,
                             const InitialPoint &init, const Budget &budget,
                             RandomStream &rng, const VqeOptions &options = {}) {
  CobylaSession cobyla(init.params.values(), options.rho_begin,
                       options.rho_end);
  return run_vqe(instance, layout, init, budget, rng, cobyla, options);
}

/// Uniform sampling of bitstrings with replacement.
inline RunTrajectory run_sampling(const MaxCutInstance &instance,
                                  const Budget &budget, RandomStream &rng) {
  detail::check_budget(budget);
  RunTrajectory traj;
  traj.algorithm = Algorithm::sampling;
  traj.instance_id = instance.instance_id;
  const int n = instance.graph.variable_count();
  const CutEvaluator cut(instance.graph);
  const std::uint64_t mask = Assignment::mask(n);
  detail::BestTracker tracker(traj, budget.n_evals(), budget.n_shots, n);
  while (!tracker.exhausted()) {
    const std::uint64_t bits = rng() & mask;
    tracker.observe(cut(bits) / instance.gw_value, bits);
  }
  tracker.finish();
  return traj;
}

struct GreedyEvent {
  enum class Kind {
    start,           // fresh state drawn from the start source
    repeated_start,  // drawn state was visited before; redraw
    accept,          // best strictly improving flip taken
    local_optimum,   // no strictly improving flip; redraw
    revisit,         // accepted state was visited before; redraw
  };
  Kind kind;
  Assignment state;
  double raw_value;
};

using GreedyObserver = std::function<void(const GreedyEvent &)>;

/// Flips must improve the reduced objective by more than this to be accepted.
inline constexpr double kImprovementTolerance = 1e-12;

/// Steepest-ascent single-flip local search with restarts.
///
/// Each start drawn from `next_start` costs one evaluation; each sweep over
/// the N single flips costs N evaluations. The best strictly improving flip
/// is accepted (lowest variable index on ties). A local optimum, or reaching
/// a state already accepted earlier in the run, triggers a fresh start.
template <class StartSource>
RunTrajectory run_greedy_from(const MaxCutInstance &instance,
                              const Budget &budget, StartSource &&next_start,
                              const GreedyObserver &observer = {}) {
  detail::check_budget(budget);
  RunTrajectory traj;
  traj.algorithm = Algorithm::greedy;
  traj.instance_id = instance.instance_id;
  const auto &graph = instance.graph;
  const int n = graph.variable_count();
  const CutEvaluator cut(graph);
  detail::BestTracker tracker(traj, budget.n_evals(), budget.n_shots, n);

  // Neighbour table in variable-bit coordinates (node k <-> bit k of the
  // full mask, node 0 fixed to 0).
  std::vector<std::vector<Neighbor>> adj(graph.node_count());
  for (int v = 0; v < graph.node_count(); ++v)
    adj[v].assign(graph.neighbors(v).begin(), graph.neighbors(v).end());
  auto delta = [&](std::uint64_t bits, int var) {
    const std::uint64_t full = bits << 1;
    const int node = var + 1;
    const std::uint64_t own = (full >> node) & 1U;
    double d = 0.0;
    for (const auto &nb : adj[node])
      d += (((full >> nb.node) & 1U) == own) ? nb.weight : -nb.weight;
    return d;
  };
  auto emit = [&](GreedyEvent::Kind kind, std::uint64_t bits, double raw) {
    if (observer)
      observer(GreedyEvent{kind, Assignment(n, bits), raw});
  };

  std::unordered_set<std::uint64_t> visited;
  bool active = false;
  std::uint64_t current = 0;
  double current_raw = 0.0;
  while (!tracker.exhausted()) {
    if (!active) {
      current = next_start() & Assignment::mask(n);
      current_raw = cut(current);
      tracker.observe(current_raw / instance.gw_value, current);
      emit(GreedyEvent::Kind::start, current, current_raw);
      if (!visited.insert(current).second) {
        emit(GreedyEvent::Kind::repeated_start, current, current_raw);
        continue;
      }
      active = true;
      continue;
    }

    double best_delta = -std::numeric_limits<double>::infinity();
    int best_var = -1;
    bool complete = true;
    for (int var = 0; var < n; ++var) {
      if (tracker.exhausted()) {
        complete = false;
        break;
      }
      const double d = delta(current, var);
      tracker.observe((current_raw + d) / instance.gw_value,
                      current ^ (std::uint64_t{1} << var));
      if (d > best_delta) {
        best_delta = d;
        best_var = var;
      }
    }
    if (!complete)
      break;

    if (best_delta > kImprovementTolerance) {
      current ^= std::uint64_t{1} << best_var;
      current_raw = cut(current);
      emit(GreedyEvent::Kind::accept, current, current_raw);
      if (!visited.insert(current).second) {
        emit(GreedyEvent::Kind::revisit, current, current_raw);
        active = false;
      }
    } else {
      emit(GreedyEvent::Kind::local_optimum, current, current_raw);
      active = false;
    }
  }
  tracker.finish();
  return traj;
}

/// Greedy search whose starts are single shots of the ansatz at the initial
/// angles shared with the VQE run.
inline RunTrajectory run_greedy(const MaxCutInstance &instance,
                                const CircuitLayout &layout,
                                const InitialPoint &init, const Budget &budget,
                                RandomStream &rng,
                                const GreedyObserver &observer = {}) {
  detail::check_layout(instance, layout);
  const auto state = apply_circuit(layout, init.params);
  return run_greedy_from(
      instance, budget, [&] { return state.draw(rng); }, observer);
}

} // namespace vqebench
