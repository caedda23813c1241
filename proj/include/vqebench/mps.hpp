/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vqebench/circuit.hpp"
#include "vqebench/error.hpp"
#include "vqebench/maxcut.hpp"
#include "vqebench/rng.hpp"

namespace vqebench {

/// Bond dimension bound for one brickwork layer of CNOTs.
inline constexpr int kMaxBondDimension = 4;

/// Singular values at or below this are treated as exact zeros when
/// factorising two-site blocks.
inline constexpr double kSingularValueCutoff = 1e-12;

/// Real matrix product state of the ansatz output.
///
/// Site q holds two (left x right) matrices, one per basis value of qubit q.
/// After construction the state is right-canonical: for every site,
/// sum_s A[s] * A[s]^T is the identity on the left bond. This makes the
/// left-to-right conditional marginals local, which is what `draw` uses.
class MpsCircuitState {
public:
  struct Site {
    std::array<Eigen::MatrixXd, 2> m;
    int left() const { return static_cast<int>(m[0].rows()); }
    int right() const { return static_cast<int>(m[0].cols()); }
  };

  int n_qubits() const noexcept { return static_cast<int>(sites_.size()); }
  const Site &site(int q) const { return sites_.at(q); }

  /// Largest bond dimension that appeared at any point of the construction.
  int max_bond_dimension() const noexcept { return max_bond_; }
  /// Norm of the state after all gates and before the final rescaling.
  double norm_before_normalization() const noexcept { return raw_norm_; }

  /// Amplitude <x|psi> by contraction against a product basis state.
  double amplitude(const Assignment &x) const {
    if (x.size() != n_qubits())
      detail::fail(ErrorCode::LengthMismatch,
                   "bitstring has " + std::to_string(x.size()) +
                       " bits, state has " + std::to_string(n_qubits()));
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (int q = 0; q < n_qubits(); ++q)
      v = v * sites_[q].m[x[q] ? 1 : 0];
    return v(0);
  }

  double exact_probability(const Assignment &x) const {
    const double a = amplitude(x);
    return a * a;
  }

  /// One perfect sample, qubit q in bit q.
  std::uint64_t draw(RandomStream &rng) const {
    std::array<double, kMaxBondDimension> v{1.0};
    std::array<double, kMaxBondDimension> w0{}, w1{};
    int dim = 1;
    std::uint64_t bits = 0;
    for (int q = 0; q < n_qubits(); ++q) {
      const auto &site = sites_[q];
      const int right = site.right();
      const double *a0 = site.m[0].data();
      const double *a1 = site.m[1].data();
      double p0 = 0.0, p1 = 0.0;
      for (int r = 0; r < right; ++r) {
        double s0 = 0.0, s1 = 0.0;
        for (int l = 0; l < dim; ++l) {
          s0 += v[l] * a0[r * dim + l];
          s1 += v[l] * a1[r * dim + l];
        }
        w0[r] = s0;
        w1[r] = s1;
        p0 += s0 * s0;
        p1 += s1 * s1;
      }
      const bool one = rng.uniform01() * (p0 + p1) >= p0;
      const auto &w = one ? w1 : w0;
      const double scale = 1.0 / std::sqrt(one ? p1 : p0);
      for (int r = 0; r < right; ++r)
        v[r] = w[r] * scale;
      dim = right;
      if (one)
        bits |= std::uint64_t{1} << q;
    }
    return bits;
  }

  std::vector<Assignment> sample(int n_shots, RandomStream &rng) const {
    std::vector<Assignment> shots;
    shots.reserve(n_shots);
    for (int k = 0; k < n_shots; ++k)
      shots.emplace_back(n_qubits(), draw(rng));
    return shots;
  }

private:
  friend MpsCircuitState apply_circuit(const CircuitLayout &,
                                       const ParamVector &);

  void apply_rotation(int q, double theta) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    auto &site = sites_[q];
    Eigen::MatrixXd zero = c * site.m[0] - s * site.m[1];
    Eigen::MatrixXd one = s * site.m[0] + c * site.m[1];
    site.m[0] = std::move(zero);
    site.m[1] = std::move(one);
  }

  void apply_cnot(const Cnot &gate) {
    auto &a = sites_[gate.control];
    auto &b = sites_[gate.target];
    const int dl = a.left(), dr = b.right();
    Eigen::MatrixXd theta(2 * dl, 2 * dr);
    for (int sc = 0; sc < 2; ++sc)
      for (int st = 0; st < 2; ++st)
        theta.block(sc * dl, st * dr, dl, dr) = a.m[sc] * b.m[st ^ sc];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(theta, Eigen::ComputeThinU |
                                                     Eigen::ComputeThinV);
    const auto &sigma = svd.singularValues();
    int chi = 0;
    while (chi < sigma.size() && sigma(chi) > kSingularValueCutoff)
      ++chi;
    chi = std::max(chi, 1);
    if (chi > kMaxBondDimension)
      detail::fail(ErrorCode::BondDimensionExceeded,
                   "bond dimension " + std::to_string(chi) + " exceeds " +
                       std::to_string(kMaxBondDimension));
    max_bond_ = std::max(max_bond_, chi);

    const Eigen::MatrixXd u = svd.matrixU().leftCols(chi);
    const Eigen::MatrixXd sv =
        sigma.head(chi).asDiagonal() * svd.matrixV().leftCols(chi).transpose();
    for (int s = 0; s < 2; ++s) {
      a.m[s] = u.block(s * dl, 0, dl, chi);
      b.m[s] = sv.block(0, s * dr, chi, dr);
    }
  }

  void right_canonicalize() {
    for (int q = n_qubits() - 1; q > 0; --q) {
      auto &site = sites_[q];
      const int dl = site.left(), dr = site.right();
      Eigen::MatrixXd mt(2 * dr, dl);
      mt.topRows(dr) = site.m[0].transpose();
      mt.bottomRows(dr) = site.m[1].transpose();
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(mt);
      const int p = std::min(2 * dr, dl);
      const Eigen::MatrixXd qthin =
          qr.householderQ() * Eigen::MatrixXd::Identity(2 * dr, p);
      const Eigen::MatrixXd rt =
          qr.matrixQR().topRows(p).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
      site.m[0] = qthin.topRows(dr).transpose();
      site.m[1] = qthin.bottomRows(dr).transpose();
      auto &prev = sites_[q - 1];
      prev.m[0] = prev.m[0] * rt;
      prev.m[1] = prev.m[1] * rt;
      max_bond_ = std::max(max_bond_, p);
    }
    auto &first = sites_.front();
    raw_norm_ =
        std::sqrt(first.m[0].squaredNorm() + first.m[1].squaredNorm());
    first.m[0] /= raw_norm_;
    first.m[1] /= raw_norm_;
  }

  std::vector<Site> sites_;
  int max_bond_ = 1;
  double raw_norm_ = 1.0;
};

/// Prepares the ansatz state for the given angles, starting from |0...0>.
/// CNOTs are applied as exact two-site updates; no truncation occurs.
inline MpsCircuitState apply_circuit(const CircuitLayout &layout,
                                     const ParamVector &params) {
  if (static_cast<int>(params.size()) != layout.param_count)
    detail::fail(ErrorCode::ParamLengthMismatch,
                 std::to_string(params.size()) + " parameters for a layout of " +
                     std::to_string(layout.param_count));
  const int n = layout.n_qubits;
  MpsCircuitState state;
  state.sites_.resize(n);
  for (int q = 0; q < n; ++q) {
    auto &site = state.sites_[q];
    site.m[0] = Eigen::MatrixXd::Constant(1, 1, std::cos(0.5 * params[q]));
    site.m[1] = Eigen::MatrixXd::Constant(1, 1, std::sin(0.5 * params[q]));
  }
  for (const auto &gate : layout.even_layer)
    state.apply_cnot(gate);
  for (const auto &gate : layout.odd_layer)
    state.apply_cnot(gate);
  for (int q = 0; q < n; ++q)
    state.apply_rotation(q, params[n + q]);
  state.right_canonicalize();
  return state;
}

} // namespace vqebench
