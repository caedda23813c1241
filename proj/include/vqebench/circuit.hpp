/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vqebench/error.hpp"

namespace vqebench {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0)
    r += kTwoPi;
  if (r >= kTwoPi)
    r = 0.0;
  return r;
}

struct Cnot {
  int control;
  int target;
  friend bool operator==(const Cnot &, const Cnot &) = default;
};

/// Single-layer hardware-efficient ansatz: RY on every qubit (parameters
/// 0..N-1), CNOTs on (0,1), (2,3), ..., CNOTs on (1,2), (3,4), ..., RY on every
/// qubit (parameters N..2N-1), then measurement of all qubits.
struct CircuitLayout {
  int n_qubits = 0;
  int param_count = 0;
  std::vector<Cnot> even_layer;
  std::vector<Cnot> odd_layer;
};

inline CircuitLayout build_layout(int n_qubits) {
  if (n_qubits < 1)
    detail::fail(ErrorCode::IndexOutOfRange, "circuit needs at least 1 qubit");
  CircuitLayout layout;
  layout.n_qubits = n_qubits;
  layout.param_count = 2 * n_qubits;
  for (int q = 0; q + 1 < n_qubits; q += 2)
    layout.even_layer.push_back({q, q + 1});
  for (int q = 1; q + 1 < n_qubits; q += 2)
    layout.odd_layer.push_back({q, q + 1});
  return layout;
}

/// Rotation angles, each reduced into [0, 2*pi).
class ParamVector {
public:
  ParamVector() = default;
  explicit ParamVector(std::span<const double> raw)
      : values_(raw.begin(), raw.end()) {
    for (auto &v : values_)
      v = wrap_angle(v);
  }
  ParamVector(std::initializer_list<double> raw)
      : ParamVector(std::span<const double>(raw.begin(), raw.size())) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const ParamVector &, const ParamVector &) = default;

private:
  std::vector<double> values_;
};

} // namespace vqebench
