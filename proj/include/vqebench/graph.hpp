/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vqebench/error.hpp"
#include "vqebench/rng.hpp"

namespace vqebench {

/// Undirected weighted edge. Node indices are 0-based internally with
/// `lo < hi`; the 1-based file convention (i, j) with j < i maps to
/// (hi + 1, lo + 1).
struct Edge {
  int hi;
  int lo;
  double weight;

  friend bool operator==(const Edge &, const Edge &) = default;
};

struct Neighbor {
  int node;
  double weight;
};

/// Simple undirected graph with weights in (0, 1].
///
/// Node 0 plays the role of the node whose label is fixed to 0 by the
/// symmetry reduction; every other node k carries the binary variable k - 1.
class WeightedGraph {
public:
  WeightedGraph() = default;

  WeightedGraph(int node_count, std::vector<Edge> edges)
      : node_count_(node_count), edges_(std::move(edges)) {
    if (node_count_ < 2)
      detail::fail(ErrorCode::InvalidGraph, "graph needs at least two nodes");
    std::set<std::pair<int, int>> seen;
    for (auto &e : edges_) {
      if (e.hi < e.lo)
        std::swap(e.hi, e.lo);
      if (e.lo < 0 || e.hi >= node_count_)
        detail::fail(ErrorCode::InvalidGraph, "edge endpoint out of range");
      if (e.lo == e.hi)
        detail::fail(ErrorCode::InvalidGraph, "self-loop");
      if (!(e.weight > 0.0 && e.weight <= 1.0))
        detail::fail(ErrorCode::InvalidGraph, "edge weight outside (0, 1]");
      if (!seen.emplace(e.hi, e.lo).second)
        detail::fail(ErrorCode::InvalidGraph, "parallel edge");
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge &a, const Edge &b) {
      return std::pair(a.hi, a.lo) < std::pair(b.hi, b.lo);
    });
    adjacency_.assign(node_count_, {});
    for (const auto &e : edges_) {
      adjacency_[e.hi].push_back({e.lo, e.weight});
      adjacency_[e.lo].push_back({e.hi, e.weight});
    }
  }

  int node_count() const noexcept { return node_count_; }
  /// Number of binary variables after fixing node 0.
  int variable_count() const noexcept { return node_count_ - 1; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(int node) const {
    return adjacency_.at(node);
  }
  int degree(int node) const {
    return static_cast<int>(adjacency_.at(node).size());
  }

  bool is_regular(int d) const {
    return std::all_of(adjacency_.begin(), adjacency_.end(),
                       [d](const auto &a) { return int(a.size()) == d; });
  }

  bool is_connected() const {
    if (node_count_ == 0)
      return true;
    std::vector<char> mark(node_count_, 0);
    std::vector<int> stack{0};
    mark[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto &nb : adjacency_[u])
        if (!mark[nb.node]) {
          mark[nb.node] = 1;
          ++reached;
          stack.push_back(nb.node);
        }
    }
    return reached == node_count_;
  }

  double total_weight() const {
    double s = 0.0;
    for (const auto &e : edges_)
      s += e.weight;
    return s;
  }

  friend bool operator==(const WeightedGraph &a, const WeightedGraph &b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct GeneratorOptions {
  int max_attempts = 100000;
};

/// Random connected simple 3-regular graph with i.i.d. weights on (0, 1].
///
/// Uniform stub pairing; any outcome with a self-loop, a repeated edge or more
/// than one component is rejected and the pairing redrawn. Weights are drawn
/// after acceptance as 1 - u, u uniform on [0, 1), in sorted edge order.
inline WeightedGraph generate_cubic_graph(int n_nodes, RandomStream &rng,
                                          GeneratorOptions options = {}) {
  if (n_nodes % 2 != 0)
    detail::fail(ErrorCode::OddNodeCount,
                 "3-regular graph needs an even node count, got " +
                     std::to_string(n_nodes));
  if (n_nodes < 4)
    detail::fail(ErrorCode::InvalidGraph,
                 "3-regular graph needs at least 4 nodes");

  constexpr int kDegree = 3;
  std::vector<int> stubs(static_cast<std::size_t>(n_nodes) * kDegree);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    for (std::size_t k = 0; k < stubs.size(); ++k)
      stubs[k] = static_cast<int>(k / kDegree);
    for (std::size_t k = stubs.size() - 1; k > 0; --k)
      std::swap(stubs[k], stubs[rng.below(k + 1)]);

    std::set<std::pair<int, int>> pairs;
    bool simple = true;
    for (std::size_t k = 0; k < stubs.size() && simple; k += 2) {
      int a = stubs[k], b = stubs[k + 1];
      if (a == b || !pairs.emplace(std::max(a, b), std::min(a, b)).second)
        simple = false;
    }
    if (!simple)
      continue;

    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto &[hi, lo] : pairs)
      edges.push_back({hi, lo, 1.0});
    WeightedGraph shape(n_nodes, edges);
    if (!shape.is_connected())
      continue;

    for (auto &e : edges)
      e.weight = 1.0 - rng.uniform01();
    return WeightedGraph(n_nodes, std::move(edges));
  }
  detail::fail(ErrorCode::GenerationExhausted,
               "no simple connected pairing after " +
                   std::to_string(options.max_attempts) + " attempts");
}

} // namespace vqebench
