/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vqebench/error.hpp"

namespace vqebench {

/// Derivative-free minimiser driven by its caller: `ask` hands out the next
/// point to evaluate, `tell` reports its cost. Exactly one tell must follow
/// each ask.
class AskTellOptimizer {
public:
  virtual ~AskTellOptimizer() = default;
  virtual std::span<const double> ask() = 0;
  virtual void tell(std::span<const double> x, double cost) = 0;
  virtual bool running() const = 0;
  virtual std::span<const double> best_point() const = 0;
  virtual double best_cost() const = 0;
  virtual int evaluations() const = 0;
};

enum class CobylaStatus {
  running,
  converged,       // trust radius reached rho_end
  max_evaluations, // evaluation cap set at construction reached
  rounding_failure,
  nan_step,
};

/// Powell's COBYLA for the unconstrained case, as an ask-tell session.
///
/// The iteration follows the original cobylb/trstlp control flow exactly
/// (same simplex bookkeeping, acceptability tests, trust-region step and
/// radius schedule), so for a given cost sequence the proposed points match
/// the reference implementation up to floating-point reassociation. Without
/// constraints the merit penalty stays zero and the trust-region subproblem
/// reduces to a steepest-descent step of length rho on the linear model.
class CobylaSession final : public AskTellOptimizer {
public:
  CobylaSession(std::span<const double> x0, double rho_begin = 1.0,
                double rho_end = 1e-4, int max_evaluations = 0)
      : n_(static_cast<int>(x0.size())), rho_(rho_begin), rho_end_(rho_end),
        max_evaluations_(max_evaluations), x_(x0.begin(), x0.end()),
        sim_(static_cast<std::size_t>(n_) * (n_ + 1), 0.0),
        simi_(static_cast<std::size_t>(n_) * n_, 0.0), datmat_(n_ + 1, 0.0),
        a_(n_, 0.0), vsig_(n_, 0.0), veta_(n_, 0.0), sigbar_(n_, 0.0),
        dx_(n_, 0.0) {
    if (!(rho_begin > rho_end && rho_end > 0.0))
      detail::fail(ErrorCode::BadRadii, "need rho_begin > rho_end > 0");
    if (n_ < 1)
      detail::fail(ErrorCode::LengthMismatch, "empty starting point");
    const double inv = 1.0 / rho_;
    for (int i = 0; i < n_; ++i) {
      sim(i, n_) = x_[i];
      sim(i, i) = rho_;
      simi(i, i) = inv;
    }
    jdrop_ = n_;
    ibrnch_ = 0;
    request_evaluation();
  }

  std::span<const double> ask() override {
    if (status_ != CobylaStatus::running)
      detail::fail(ErrorCode::SessionConverged, "optimizer has stopped");
    if (awaiting_tell_)
      detail::fail(ErrorCode::MismatchedTell, "ask repeated without tell");
    awaiting_tell_ = true;
    return x_;
  }

  void tell(std::span<const double> x, double cost) override {
    if (!awaiting_tell_)
      detail::fail(ErrorCode::MismatchedTell, "tell without a pending ask");
    if (x.size() != x_.size() || !std::equal(x.begin(), x.end(), x_.begin()))
      detail::fail(ErrorCode::MismatchedTell,
                   "told point differs from the last ask");
    awaiting_tell_ = false;
    ++nfvals_;
    after_evaluation(cost);
  }

  bool running() const override { return status_ == CobylaStatus::running; }
  CobylaStatus status() const noexcept { return status_; }
  std::span<const double> best_point() const override { return best_; }
  double best_cost() const override { return best_cost_; }
  int evaluations() const override { return nfvals_; }
  double rho() const noexcept { return rho_; }
  int dimension() const noexcept { return n_; }

private:
  enum class Label { select_pole, trust_step, next_radius };

  static constexpr double kAlpha = 0.25;
  static constexpr double kBeta = 2.1;
  static constexpr double kGamma = 0.5;
  static constexpr double kDelta = 1.1;

  // Column-major n x (n+1); column n is the pole (best vertex), columns
  // 0..n-1 hold displacements from the pole to the other vertices.
  double &sim(int i, int j) { return sim_[std::size_t(j) * n_ + i]; }
  double &simi(int i, int j) { return simi_[std::size_t(j) * n_ + i]; }

  void request_evaluation() {
    if (max_evaluations_ > 0 && nfvals_ >= max_evaluations_) {
      finish(CobylaStatus::max_evaluations);
      return;
    }
    best_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i)
      best_[i] = sim(i, n_);
    best_cost_ = nfvals_ > 0 ? datmat_[n_] : best_cost_;
  }

  void finish(CobylaStatus status) {
    status_ = status;
    best_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i)
      best_[i] = sim(i, n_);
    best_cost_ = datmat_[n_];
  }

  void after_evaluation(double f) {
    if (ibrnch_ == 1) {
      evaluate_trial(f);
      return;
    }
    datmat_[jdrop_] = f;
    if (nfvals_ <= n_ + 1) {
      // Building the initial simplex.
      if (jdrop_ < n_) {
        if (datmat_[n_] <= f) {
          x_[jdrop_] = sim(jdrop_, n_);
        } else {
          sim(jdrop_, n_) = x_[jdrop_];
          datmat_[jdrop_] = datmat_[n_];
          datmat_[n_] = f;
          for (int k = 0; k <= jdrop_; ++k) {
            sim(jdrop_, k) = -rho_;
            double temp = 0.0;
            for (int i = k; i <= jdrop_; ++i)
              temp -= simi(i, k);
            simi(jdrop_, k) = temp;
          }
        }
      }
      if (nfvals_ <= n_) {
        jdrop_ = nfvals_ - 1;
        x_[jdrop_] += rho_;
        request_evaluation();
        return;
      }
    }
    ibrnch_ = 1;
    advance(Label::select_pole);
  }

  // Reached after evaluating a trust-region trial point.
  void evaluate_trial(double f) {
    double trured = datmat_[n_] - f;
    if (f == datmat_[n_]) {
      prerem_ = 0.0;
      trured = 0.0;
    }
    double ratio = trured <= 0.0 ? 1.0 : 0.0;
    int jdrop = -1;
    for (int j = 0; j < n_; ++j) {
      double temp = 0.0;
      for (int i = 0; i < n_; ++i)
        temp += simi(j, i) * dx_[i];
      temp = std::abs(temp);
      if (temp > ratio) {
        jdrop = j;
        ratio = temp;
      }
      sigbar_[j] = temp * vsig_[j];
    }

    double edgmax = kDelta * rho_;
    int l = -1;
    for (int j = 0; j < n_; ++j) {
      if (sigbar_[j] >= parsig_ || sigbar_[j] >= vsig_[j]) {
        double temp = veta_[j];
        if (trured > 0.0) {
          temp = 0.0;
          for (int i = 0; i < n_; ++i) {
            const double d = dx_[i] - sim(i, j);
            temp += d * d;
          }
          temp = std::sqrt(temp);
        }
        if (temp > edgmax) {
          l = j;
          edgmax = temp;
        }
      }
    }
    if (l >= 0)
      jdrop = l;
    if (jdrop < 0) {
      advance(Label::next_radius);
      return;
    }

    replace_vertex(jdrop);
    datmat_[jdrop] = f;

    if (trured > 0.0 && trured >= 0.1 * prerem_)
      advance(Label::select_pole);
    else
      advance(Label::next_radius);
  }

  // Put dx_ into column jdrop of SIM and update its inverse.
  void replace_vertex(int jdrop) {
    double temp = 0.0;
    for (int i = 0; i < n_; ++i) {
      sim(i, jdrop) = dx_[i];
      temp += simi(jdrop, i) * dx_[i];
    }
    for (int i = 0; i < n_; ++i)
      simi(jdrop, i) /= temp;
    for (int j = 0; j < n_; ++j) {
      if (j == jdrop)
        continue;
      temp = 0.0;
      for (int i = 0; i < n_; ++i)
        temp += simi(j, i) * dx_[i];
      for (int i = 0; i < n_; ++i)
        simi(j, i) -= temp * simi(jdrop, i);
    }
  }

  void advance(Label label) {
    for (;;) {
      switch (label) {
      case Label::select_pole: {
        double phimin = datmat_[n_];
        int nbest = n_;
        for (int j = 0; j < n_; ++j)
          if (datmat_[j] < phimin) {
            nbest = j;
            phimin = datmat_[j];
          }
        if (nbest < n_) {
          std::swap(datmat_[n_], datmat_[nbest]);
          for (int i = 0; i < n_; ++i) {
            const double temp = sim(i, nbest);
            sim(i, nbest) = 0.0;
            sim(i, n_) += temp;
            double tempa = 0.0;
            for (int k = 0; k < n_; ++k) {
              sim(i, k) -= temp;
              tempa -= simi(k, i);
            }
            simi(nbest, i) = tempa;
          }
        }

        double error = 0.0;
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) {
            double temp = i == j ? -1.0 : 0.0;
            for (int k = 0; k < n_; ++k)
              temp += simi(i, k) * sim(k, j);
            error = std::max(error, std::abs(temp));
          }
        if (error > 0.1) {
          finish(CobylaStatus::rounding_failure);
          return;
        }

        // Minus the gradient of the linear interpolant.
        const double con = -datmat_[n_];
        for (int i = 0; i < n_; ++i) {
          double temp = 0.0;
          for (int j = 0; j < n_; ++j)
            temp += (datmat_[j] + con) * simi(j, i);
          a_[i] = -temp;
        }

        iflag_ = 1;
        parsig_ = kAlpha * rho_;
        const double pareta = kBeta * rho_;
        for (int j = 0; j < n_; ++j) {
          double wsig = 0.0, weta = 0.0;
          for (int i = 0; i < n_; ++i) {
            wsig += simi(j, i) * simi(j, i);
            weta += sim(i, j) * sim(i, j);
          }
          vsig_[j] = 1.0 / std::sqrt(wsig);
          veta_[j] = std::sqrt(weta);
          if (vsig_[j] < parsig_ || veta_[j] > pareta)
            iflag_ = 0;
        }

        if (ibrnch_ == 1 || iflag_ == 1) {
          label = Label::trust_step;
          continue;
        }

        // Geometry step: replace the vertex that spoils acceptability.
        int jdrop = -1;
        double temp = pareta;
        for (int j = 0; j < n_; ++j)
          if (veta_[j] > temp) {
            jdrop = j;
            temp = veta_[j];
          }
        if (jdrop < 0)
          for (int j = 0; j < n_; ++j)
            if (vsig_[j] < temp) {
              jdrop = j;
              temp = vsig_[j];
            }

        temp = kGamma * rho_ * vsig_[jdrop];
        for (int i = 0; i < n_; ++i)
          dx_[i] = temp * simi(jdrop, i);
        double sum = 0.0;
        for (int i = 0; i < n_; ++i)
          sum += a_[i] * dx_[i];
        const double dxsign = (0.0 > sum + sum) ? -1.0 : 1.0;
        for (int i = 0; i < n_; ++i)
          dx_[i] *= dxsign;
        replace_vertex(jdrop);
        for (int j = 0; j < n_; ++j)
          x_[j] = sim(j, n_) + dx_[j];
        jdrop_ = jdrop;
        request_evaluation();
        return;
      }

      case Label::trust_step: {
        ifull_ = trust_region_step();
        for (double d : dx_)
          if (d != d) {
            finish(CobylaStatus::nan_step);
            return;
          }
        if (ifull_ == 0) {
          double temp = 0.0;
          for (double d : dx_)
            temp += d * d;
          if (temp < 0.25 * rho_ * rho_) {
            ibrnch_ = 1;
            label = Label::next_radius;
            continue;
          }
        }
        double sum = 0.0;
        for (int i = 0; i < n_; ++i)
          sum -= a_[i] * dx_[i];
        prerem_ = 0.0 * 0.0 - sum;
        for (int i = 0; i < n_; ++i)
          x_[i] = sim(i, n_) + dx_[i];
        ibrnch_ = 1;
        request_evaluation();
        return;
      }

      case Label::next_radius: {
        if (iflag_ == 0) {
          ibrnch_ = 0;
          label = Label::select_pole;
          continue;
        }
        if (rho_ > rho_end_) {
          rho_ *= 0.5;
          if (rho_ <= 1.5 * rho_end_)
            rho_ = rho_end_;
          label = Label::select_pole;
          continue;
        }
        finish(CobylaStatus::converged);
        return;
      }
      }
    }
  }

  // trstlp with no constraints: the only active "constraint" is the
  // objective, so the step runs from 0 along a_ to the trust-region
  // boundary. The Givens sweep and rounding guards follow the reference so
  // that the step direction agrees to the last bits. Returns IFULL.
  int trust_region_step() {
    std::vector<double> z(static_cast<std::size_t>(n_) * n_, 0.0);
    auto zz = [&](int i, int k) -> double & {
      return z[std::size_t(k) * n_ + i];
    };
    for (int i = 0; i < n_; ++i) {
      zz(i, i) = 1.0;
      dx_[i] = 0.0;
    }

    double tot = 0.0;
    for (int k = n_ - 1; k >= 0; --k) {
      double sp = 0.0, spabs = 0.0;
      for (int i = 0; i < n_; ++i) {
        const double temp = zz(i, k) * a_[i];
        sp += temp;
        spabs += std::abs(temp);
      }
      const double acca = spabs + 0.1 * std::abs(sp);
      const double accb = spabs + 0.2 * std::abs(sp);
      if (spabs >= acca || acca >= accb)
        sp = 0.0;
      if (tot == 0.0) {
        tot = sp;
      } else {
        const int kp = k + 1;
        const double temp = std::sqrt(sp * sp + tot * tot);
        const double alpha = sp / temp;
        const double beta = tot / temp;
        tot = temp;
        for (int i = 0; i < n_; ++i) {
          const double t = alpha * zz(i, k) + beta * zz(i, kp);
          zz(i, kp) = alpha * zz(i, kp) - beta * zz(i, k);
          zz(i, k) = t;
        }
      }
    }
    // A vanishing model gradient leaves no direction to move in.
    if (tot == 0.0)
      return 0;

    std::vector<double> sdirn(n_);
    const double recip = 1.0 / tot;
    for (int i = 0; i < n_; ++i)
      sdirn[i] = recip * zz(i, 0);

    double dd = rho_ * rho_, sd = 0.0, ss = 0.0;
    for (int i = 0; i < n_; ++i)
      ss += sdirn[i] * sdirn[i];
    double temp = std::sqrt(ss * dd);
    if (std::abs(sd) >= 1.0e-6 * temp)
      temp = std::sqrt(ss * dd + sd * sd);
    const double step = dd / (temp + sd);
    for (int i = 0; i < n_; ++i)
      dx_[i] = 0.0 * dx_[i] + 1.0 * (dx_[i] + step * sdirn[i]);
    return 1;
  }

  int n_;
  double rho_;
  double rho_end_;
  int max_evaluations_;
  std::vector<double> x_;
  std::vector<double> sim_;
  std::vector<double> simi_;
  std::vector<double> datmat_;
  std::vector<double> a_;
  std::vector<double> vsig_;
  std::vector<double> veta_;
  std::vector<double> sigbar_;
  std::vector<double> dx_;
  std::vector<double> best_;
  double best_cost_ = 0.0;
  double parsig_ = 0.0;
  double prerem_ = 0.0;
  int iflag_ = 1;
  int ifull_ = 0;
  int ibrnch_ = 0;
  int jdrop_ = 0;
  int nfvals_ = 0;
  bool awaiting_tell_ = false;
  CobylaStatus status_ = CobylaStatus::running;
};

} // namespace vqebench
