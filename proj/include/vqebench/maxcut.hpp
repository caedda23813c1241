/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vqebench/error.hpp"
#include "vqebench/graph.hpp"

namespace vqebench {

/// Largest supported variable count; node 0 plus the variables must fit in a
/// 64-bit mask.
inline constexpr int kMaxVariables = 63;

/// Binary assignment of the N reduced variables (node 0 is implicitly 0).
///
/// Variable v is stored in bit v. The string form lists variable 0 first, so
/// for circuit samples qubit 0 is the leftmost (most significant) character.
class Assignment {
public:
  Assignment() = default;

  explicit Assignment(int size, std::uint64_t bits = 0) : size_(size) {
    if (size < 0 || size > kMaxVariables)
      detail::fail(ErrorCode::LengthMismatch,
                   "assignment size " + std::to_string(size) +
                       " outside [0, " + std::to_string(kMaxVariables) + "]");
    bits_ = bits & mask(size);
  }

  static Assignment from_string(std::string_view s) {
    Assignment a(static_cast<int>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
        a.bits_ |= std::uint64_t{1} << i;
      else if (s[i] != '0')
        detail::fail(ErrorCode::ParseError,
                     "bitstring contains '" + std::string(1, s[i]) + "'");
    }
    return a;
  }

  static Assignment from_bits(std::span<const int> bits) {
    Assignment a(static_cast<int>(bits.size()));
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i])
        a.bits_ |= std::uint64_t{1} << i;
    return a;
  }

  int size() const noexcept { return size_; }
  std::uint64_t bits() const noexcept { return bits_; }
  bool operator[](int i) const noexcept { return (bits_ >> i) & 1U; }

  Assignment flipped(int i) const {
    if (i < 0 || i >= size_)
      detail::fail(ErrorCode::IndexOutOfRange,
                   "variable " + std::to_string(i) + " of " +
                       std::to_string(size_));
    Assignment a = *this;
    a.bits_ ^= std::uint64_t{1} << i;
    return a;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (int i = 0; i < size_; ++i)
      if ((*this)[i])
        s[i] = '1';
    return s;
  }

  friend bool operator==(const Assignment &, const Assignment &) = default;

  static constexpr std::uint64_t mask(int size) noexcept {
    return size >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << size) - 1;
  }

private:
  std::uint64_t bits_ = 0;
  int size_ = 0;
};

/// Cut weight for a labelling of all nodes (node 0 included).
inline double raw_objective(const WeightedGraph &graph,
                            std::span<const int> full_assignment) {
  if (static_cast<int>(full_assignment.size()) != graph.node_count())
    detail::fail(ErrorCode::LengthMismatch,
                 "full assignment has " +
                     std::to_string(full_assignment.size()) + " labels for " +
                     std::to_string(graph.node_count()) + " nodes");
  double total = 0.0;
  for (const auto &e : graph.edges()) {
    const int xi = full_assignment[e.hi], xj = full_assignment[e.lo];
    total += e.weight * (xi * (1 - xj) + xj * (1 - xi));
  }
  return total;
}

namespace detail {
inline void check_size(const WeightedGraph &graph, const Assignment &x) {
  if (x.size() != graph.variable_count())
    fail(ErrorCode::LengthMismatch,
         "assignment has " + std::to_string(x.size()) + " variables, graph " +
             std::to_string(graph.variable_count()));
}
} // namespace detail

/// Cut weight with node 0 fixed to label 0.
inline double reduced_objective(const WeightedGraph &graph,
                                const Assignment &x) {
  detail::check_size(graph, x);
  const std::uint64_t full = x.bits() << 1;
  double total = 0.0;
  for (const auto &e : graph.edges())
    if (((full >> e.hi) ^ (full >> e.lo)) & 1U)
      total += e.weight;
  return total;
}

/// Change of the reduced objective when variable `var` is flipped.
/// Touches only the neighbours of the corresponding node.
inline double flip_delta(const WeightedGraph &graph, const Assignment &x,
                         int var) {
  detail::check_size(graph, x);
  if (var < 0 || var >= x.size())
    detail::fail(ErrorCode::IndexOutOfRange,
                 "variable " + std::to_string(var) + " of " +
                     std::to_string(x.size()));
  const std::uint64_t full = x.bits() << 1;
  const int node = var + 1;
  const unsigned own = (full >> node) & 1U;
  double delta = 0.0;
  for (const auto &nb : graph.neighbors(node)) {
    if (((full >> nb.node) & 1U) == own)
      delta += nb.weight;
    else
      delta -= nb.weight;
  }
  return delta;
}

/// Flat edge table for hot loops over raw 64-bit variable masks.
class CutEvaluator {
public:
  explicit CutEvaluator(const WeightedGraph &graph)
      : variables_(graph.variable_count()) {
    for (const auto &e : graph.edges())
      edges_.push_back({e.hi, e.lo, e.weight});
  }

  double operator()(std::uint64_t variable_bits) const noexcept {
    const std::uint64_t full = variable_bits << 1;
    double total = 0.0;
    for (const auto &e : edges_)
      total += ((full >> e.hi) ^ (full >> e.lo)) & 1U ? e.weight : 0.0;
    return total;
  }

  int variable_count() const noexcept { return variables_; }

private:
  struct PackedEdge {
    int hi;
    int lo;
    double weight;
  };
  int variables_;
  std::vector<PackedEdge> edges_;
};

struct ExactSolution {
  Assignment assignment;
  double value = 0.0;            // reduced objective at the argmax
  double normalized_value = 0.0; // value / gw_value, when a normalizer is known
};

struct ExactOptions {
  int size_limit = 32;
};

/// Exhaustive maximisation over all 2^N assignments in reflected Gray-code
/// order, one flip_delta per step. The first maximiser in Gray-code order is
/// returned on ties.
inline ExactSolution exact_optimum(const WeightedGraph &graph,
                                   ExactOptions options = {}) {
  const int n = graph.variable_count();
  if (n > options.size_limit || n > kMaxVariables)
    detail::fail(ErrorCode::SizeLimitExceeded,
                 std::to_string(n) + " variables exceed the enumeration limit " +
                     std::to_string(options.size_limit));

  // Per-node neighbour table, 3-regular or not.
  std::vector<std::vector<Neighbor>> adj(graph.node_count());
  for (int v = 0; v < graph.node_count(); ++v)
    adj[v].assign(graph.neighbors(v).begin(), graph.neighbors(v).end());

  std::uint64_t full = 0;
  double value = 0.0;
  double best = 0.0;
  std::uint64_t best_full = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int node = std::countr_zero(k) + 1;
    const std::uint64_t own = (full >> node) & 1U;
    double delta = 0.0;
    for (const auto &nb : adj[node])
      delta += (((full >> nb.node) & 1U) == own) ? nb.weight : -nb.weight;
    full ^= std::uint64_t{1} << node;
    value += delta;
    if (value > best) {
      best = value;
      best_full = full;
    }
  }
  ExactSolution sol;
  sol.assignment = Assignment(n, best_full >> 1);
  // Re-evaluate to remove drift accumulated along the walk.
  sol.value = reduced_objective(graph, sol.assignment);
  sol.normalized_value = sol.value;
  return sol;
}

/// A benchmark unit: graph plus its GW normalization constant.
struct MaxCutInstance {
  WeightedGraph graph;
  double gw_value = 1.0;
  Assignment gw_assignment;
  int size_label = 0;
  int instance_id = 0;
  std::uint64_t seed = 0;

  double normalized(const Assignment &x) const {
    return reduced_objective(graph, x) / gw_value;
  }
};

} // namespace vqebench

template <> struct std::hash<vqebench::Assignment> {
  std::size_t operator()(const vqebench::Assignment &a) const noexcept {
    return std::hash<std::uint64_t>{}(a.bits() ^
                                      (std::uint64_t(a.size()) << 58));
  }
};
