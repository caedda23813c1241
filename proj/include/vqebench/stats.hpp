/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "vqebench/error.hpp"
#include "vqebench/solvers.hpp"

namespace vqebench {

/// Normalized objective values closer than this count as equal to the
/// reference optimum.
inline constexpr double kSuccessTolerance = 1e-9;

/// Lower edge of the default correlation window (GW worst-case guarantee).
inline constexpr double kGwGuarantee = 0.87856;

/// Best-so-far values divided by the reference optimum (both normalized the
/// same way).
inline std::vector<double> approximation_ratio(const RunTrajectory &traj,
                                               double reference) {
  if (!(reference > 0.0))
    detail::fail(ErrorCode::ZeroReference, "reference optimum must be > 0");
  std::vector<double> alpha;
  alpha.reserve(traj.checkpoints.size());
  for (const auto &c : traj.checkpoints)
    alpha.push_back(c.best_value / reference);
  return alpha;
}

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
};

/// Sample mean and standard error with the n-1 variance denominator.
inline MeanSem mean_sem(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2)
    detail::fail(ErrorCode::TooFewValues, "mean_sem needs at least 2 values");
  double sum = 0.0;
  for (double v : values)
    sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct Proportion {
  double point = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for k successes in n trials at a two-sided level.
inline Interval wilson_interval(long long successes, long long trials,
                                double confidence = 0.95) {
  if (trials < 1 || successes < 0 || successes > trials)
    detail::fail(ErrorCode::BadCounts,
                 "need 0 <= successes <= trials and trials >= 1");
  if (!(confidence > 0.0 && confidence < 1.0))
    detail::fail(ErrorCode::BadCounts, "confidence must lie in (0, 1)");
  const boost::math::normal standard;
  const double z = boost::math::quantile(standard, 0.5 + 0.5 * confidence);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // The closed form hits the boundary exactly only in exact arithmetic.
  if (successes == 0)
    out.low = 0.0;
  if (successes == trials)
    out.high = 1.0;
  return out;
}

inline Proportion proportion(long long successes, long long trials,
                             double confidence = 0.95) {
  const auto ci = wilson_interval(successes, trials, confidence);
  return {static_cast<double>(successes) / static_cast<double>(trials), ci.low,
          ci.high};
}

/// Fraction of pairs where a is strictly better than b.
inline Proportion prob_better(std::span<const double> alpha_a,
                              std::span<const double> alpha_b,
                              double confidence = 0.95) {
  if (alpha_a.size() != alpha_b.size())
    detail::fail(ErrorCode::LengthMismatch, "prob_better needs paired values");
  if (alpha_a.empty())
    detail::fail(ErrorCode::TooFewValues, "prob_better of no pairs");
  long long wins = 0;
  for (std::size_t i = 0; i < alpha_a.size(); ++i)
    if (alpha_a[i] > alpha_b[i])
      ++wins;
  return proportion(wins, static_cast<long long>(alpha_a.size()), confidence);
}

/// Fraction of runs whose best value reached the optimum.
inline Proportion success_probability(std::span<const double> best_values,
                                      double optimum,
                                      double confidence = 0.95) {
  if (!(optimum > 0.0) || !std::isfinite(optimum))
    detail::fail(ErrorCode::NoExactReference, "no exact optimum available");
  if (best_values.empty())
    detail::fail(ErrorCode::TooFewValues, "success probability of no runs");
  long long hits = 0;
  for (double v : best_values)
    if (v >= optimum - kSuccessTolerance)
      ++hits;
  return proportion(hits, static_cast<long long>(best_values.size()),
                    confidence);
}

inline Proportion success_probability(std::span<const RunTrajectory> runs,
                                      double optimum,
                                      double confidence = 0.95) {
  std::vector<double> best;
  best.reserve(runs.size());
  for (const auto &r : runs)
    best.push_back(r.best_value);
  return success_probability(best, optimum, confidence);
}

/// Per-checkpoint mean and SEM over pairs.
struct DifferenceCurve {
  std::vector<double> mean;
  std::vector<double> sem;
  std::size_t pairs = 0;

  std::size_t size() const noexcept { return mean.size(); }
  friend bool operator==(const DifferenceCurve &,
                         const DifferenceCurve &) = default;
};

/// curves_a[p][i] - curves_b[p][i], summarised over pairs p at each
/// checkpoint i.
inline DifferenceCurve
difference_curve(const std::vector<std::vector<double>> &curves_a,
                 const std::vector<std::vector<double>> &curves_b) {
  if (curves_a.size() != curves_b.size())
    detail::fail(ErrorCode::LengthMismatch, "unpaired difference curves");
  if (curves_a.size() < 2)
    detail::fail(ErrorCode::TooFewValues, "difference curve needs 2 pairs");
  const std::size_t len = curves_a.front().size();
  for (std::size_t p = 0; p < curves_a.size(); ++p)
    if (curves_a[p].size() != len || curves_b[p].size() != len)
      detail::fail(ErrorCode::LengthMismatch, "curves differ in length");
  DifferenceCurve out;
  out.pairs = curves_a.size();
  out.mean.resize(len);
  out.sem.resize(len);
  std::vector<double> diff(curves_a.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t p = 0; p < curves_a.size(); ++p)
      diff[p] = curves_a[p][i] - curves_b[p][i];
    const auto ms = mean_sem(diff);
    out.mean[i] = ms.mean;
    out.sem[i] = ms.sem;
  }
  return out;
}

struct MaxAdvantage {
  int iteration = 0; // 1-based checkpoint
  double mean_difference = 0.0;
  double sem = 0.0;
  long long n_evals = 0;
};

/// Checkpoint with the largest mean difference; the earliest one on ties.
inline MaxAdvantage max_advantage(const DifferenceCurve &curve, int n_shots) {
  if (curve.size() == 0)
    detail::fail(ErrorCode::EmptySummary, "max_advantage of an empty curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve.mean[i] > curve.mean[best])
      best = i;
  const int iteration = static_cast<int>(best) + 1;
  return {iteration, curve.mean[best], curve.sem[best],
          static_cast<long long>(iteration) * n_shots};
}

struct CorrelationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double x_mean = 0.0;
  double x_std = 0.0;
  double y_mean = 0.0;
  double y_std = 0.0;
};

/// Equal-width bins over [lo, hi] in x. Bins are half-open except the last,
/// which also takes x == hi. Pairs outside the window are dropped and empty
/// bins are omitted. A bin holding one pair reports zero spread.
inline std::vector<CorrelationBin>
binned_correlation(std::span<const double> x, std::span<const double> y,
                   int n_bins = 12, double lo = kGwGuarantee, double hi = 1.0) {
  if (x.size() != y.size())
    detail::fail(ErrorCode::LengthMismatch, "binned_correlation needs pairs");
  if (n_bins < 1 || !(hi > lo))
    detail::fail(ErrorCode::EmptyRange, "need n_bins >= 1 and hi > lo");
  const double width = (hi - lo) / n_bins;
  std::vector<std::vector<std::size_t>> members(n_bins);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lo && x[i] <= hi))
      continue;
    int b = static_cast<int>(std::floor((x[i] - lo) / width));
    b = std::min(b, n_bins - 1);
    // Guard the floor against edge rounding so [edge_b, edge_b+1) holds.
    while (b > 0 && x[i] < lo + b * width)
      --b;
    while (b + 1 < n_bins && x[i] >= lo + (b + 1) * width)
      ++b;
    members[b].push_back(i);
  }
  auto spread = [](const std::vector<std::size_t> &idx,
                   std::span<const double> v, double &mean, double &sd) {
    double s = 0.0;
    for (auto i : idx)
      s += v[i];
    mean = s / static_cast<double>(idx.size());
    if (idx.size() < 2) {
      sd = 0.0;
      return;
    }
    double ss = 0.0;
    for (auto i : idx)
      ss += (v[i] - mean) * (v[i] - mean);
    sd = std::sqrt(ss / static_cast<double>(idx.size() - 1));
  };
  std::vector<CorrelationBin> out;
  for (int b = 0; b < n_bins; ++b) {
    if (members[b].empty())
      continue;
    CorrelationBin bin;
    bin.lo = lo + b * width;
    bin.hi = b + 1 == n_bins ? hi : lo + (b + 1) * width;
    bin.count = members[b].size();
    spread(members[b], x, bin.x_mean, bin.x_std);
    spread(members[b], y, bin.y_mean, bin.y_std);
    out.push_back(bin);
  }
  return out;
}

} // namespace vqebench
