/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "vqebench/error.hpp"
#include "vqebench/maxcut.hpp"
#include "vqebench/rng.hpp"

namespace vqebench {

struct GwOptions {
  int roundings = 50;
  double gradient_tolerance = 1e-6;
  int max_iterations = 5000;
  /// Sphere dimension; 0 selects ceil(sqrt(2 * node_count)).
  int rank = 0;
};

struct GwResult {
  double value = 0.0;    // best rounded cut, reduced objective
  Assignment assignment; // its assignment (node 0 on side 0)
  double sdp_value = 0.0; // relaxation objective at the stationary point
  double gradient_norm = 0.0;
  int iterations = 0;
};

namespace detail {

// Sum over edges of w_e <v_hi, v_lo>; the relaxation maximises
// (W - this) / 2, so we minimise this.
inline double correlation_energy(const WeightedGraph &g,
                                 const Eigen::MatrixXd &v) {
  double s = 0.0;
  for (const auto &e : g.edges())
    s += e.weight * v.row(e.hi).dot(v.row(e.lo));
  return s;
}

inline Eigen::MatrixXd riemannian_gradient(const WeightedGraph &g,
                                           const Eigen::MatrixXd &v) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  for (const auto &e : g.edges()) {
    grad.row(e.hi) += e.weight * v.row(e.lo);
    grad.row(e.lo) += e.weight * v.row(e.hi);
  }
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    grad.row(i) -= grad.row(i).dot(v.row(i)) * v.row(i);
  return grad;
}

inline Eigen::MatrixXd retract(const Eigen::MatrixXd &v,
                               const Eigen::MatrixXd &direction, double step) {
  Eigen::MatrixXd out = v - step * direction;
  out.rowwise().normalize();
  return out;
}

} // namespace detail

/// Goemans-Williamson normalizer.
///
/// The Max-Cut SDP is solved in Burer-Monteiro form: one unit vector per node
/// on the sphere S^{k-1}, Riemannian gradient descent on the correlation
/// energy with Armijo backtracking until the gradient norm falls below the
/// tolerance. The factor is then rounded with `roundings` random hyperplanes
/// and the best cut is kept.
inline GwResult gw_normalizer(const WeightedGraph &graph, RandomStream &rng,
                              GwOptions options = {}) {
  const int n = graph.node_count();
  const int k = options.rank > 0
                    ? options.rank
                    : static_cast<int>(std::ceil(std::sqrt(2.0 * n)));

  Eigen::MatrixXd v(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      v(i, j) = rng.normal();
  v.rowwise().normalize();

  double energy = detail::correlation_energy(graph, v);
  Eigen::MatrixXd grad = detail::riemannian_gradient(graph, v);
  Eigen::MatrixXd prev_v, prev_grad;
  double step = 1.0;
  GwResult result;
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double gnorm2 = grad.squaredNorm();
    result.gradient_norm = std::sqrt(gnorm2);
    result.iterations = it;
    if (result.gradient_norm < options.gradient_tolerance) {
      converged = true;
      break;
    }
    // Barzilai-Borwein trial step, then Armijo backtracking from it.
    if (it > 0) {
      const Eigen::MatrixXd s = v - prev_v;
      const Eigen::MatrixXd y = grad - prev_grad;
      const double sy = std::abs((s.array() * y.array()).sum());
      step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * step;
    }
    for (;;) {
      Eigen::MatrixXd trial = detail::retract(v, grad, step);
      const double trial_energy = detail::correlation_energy(graph, trial);
      if (trial_energy <= energy - 1e-4 * step * gnorm2) {
        prev_v = std::move(v);
        prev_grad = std::move(grad);
        v = std::move(trial);
        energy = trial_energy;
        grad = detail::riemannian_gradient(graph, v);
        break;
      }
      step *= 0.5;
      if (step < 1e-20)
        detail::fail(ErrorCode::ConvergenceFailure,
                     "line search stalled at gradient norm " +
                         std::to_string(result.gradient_norm));
    }
  }
  if (!converged)
    detail::fail(ErrorCode::ConvergenceFailure,
                 "gradient norm " + std::to_string(result.gradient_norm) +
                     " after " + std::to_string(options.max_iterations) +
                     " iterations");

  result.sdp_value = 0.5 * (graph.total_weight() - energy);

  const int vars = graph.variable_count();
  Eigen::VectorXd normal(k);
  bool have = false;
  for (int r = 0; r < options.roundings; ++r) {
    for (int j = 0; j < k; ++j)
      normal(j) = rng.normal();
    const Eigen::VectorXd side = v * normal;
    const bool pivot = side(0) >= 0.0;
    std::uint64_t bits = 0;
    for (int var = 0; var < vars; ++var)
      if ((side(var + 1) >= 0.0) != pivot)
        bits |= std::uint64_t{1} << var;
    Assignment x(vars, bits);
    const double cut = reduced_objective(graph, x);
    if (!have || cut > result.value) {
      result.value = cut;
      result.assignment = x;
      have = true;
    }
  }
  if (!(result.value > 0.0))
    detail::fail(ErrorCode::ConvergenceFailure,
                 "hyperplane rounding produced an empty cut");
  return result;
}

} // namespace vqebench
