// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "invopt/model.hpp"

namespace invopt {

enum class UpdateRule { MWU, OGD, Implicit };
enum class Schedule { Constant, InvSqrt };

const char* to_string(UpdateRule rule);

struct StepRecord {
  int t = 0;
  Vector theta;  // estimate used in round t
  double loss = 0.0;
  double eta = 0.0;
};

struct OnlineState {
  Vector theta;
  int t = 0;
  Schedule schedule = Schedule::InvSqrt;
  double eta0 = 1.0;
  /// Multiplies every step size (set from the region diameter by run_stream).
  double eta_scale = 1.0;
  double cumulative_loss = 0.0;
  bool keep_history = false;
  std::vector<StepRecord> history;

  /// Step size of round t (1-based).
  double eta(int t) const;
};

/// θ − η θ ⊙ g and θ − η g with g = s(x̂ − x*) the ASO subgradient; for a
/// max-sense forward g = x* − x̂.
Vector mwu_update(const Vector& theta, double eta, const Vector& gradient);
Vector ogd_update(const Vector& theta, double eta, const Vector& gradient);

/// One round: solve the forward at θ_t, record the ASO loss, update and
/// project onto Θ. Throws ForwardUnbounded.
OnlineState step_mwu(const OnlineState& state, const Vector& x_hat,
                     const LinearForwardModel& model, const ParameterSpace& space,
                     const SolverSettings& settings = {});
OnlineState step_ogd(const OnlineState& state, const Vector& x_hat,
                     const LinearForwardModel& model, const ParameterSpace& space,
                     const SolverSettings& settings = {});

/// Proximal step argmin ‖θ − θ_t‖² + η_t ‖x̂ − x*(θ)‖ for a strictly convex
/// quadratic forward. Never worse than staying at θ_t. Throws
/// UnsupportedObjective.
OnlineState step_implicit(const OnlineState& state, const Vector& x_hat,
                          const ConvexForwardModel& model, const ParameterSpace& space,
                          const SolverSettings& settings = {});

/// Proximal objective used by step_implicit.
double implicit_objective(const Vector& theta, const Vector& theta_t, double eta,
                          const Vector& x_hat, const ConvexForwardModel& model);

struct OnlineOptions {
  UpdateRule rule = UpdateRule::OGD;
  Schedule schedule = Schedule::InvSqrt;
  double eta0 = 1.0;
  /// Step-size scale; default 1/diameter of the first forward region.
  std::optional<double> eta_scale;
  /// Starting point; default the projection of the uniform vector onto Θ.
  std::optional<Vector> theta0;
  bool keep_history = true;
  /// Rounds at which average regret is reported (the last round always is).
  std::vector<int> checkpoints;
};

struct StreamResult {
  OnlineState state;
  Vector losses;                // ℓ_t(θ_t)
  std::vector<int> checkpoint;  // T values
  std::vector<double> regret;   // average regret at each checkpoint
  /// 1 when the batch minimum is exact (linear streams), 0 when it is a
  /// search-based bound (implicit rule).
  bool batch_exact = true;
};

/// Algorithm loop over a linear stream (MWU or OGD, ASO loss).
StreamResult run_stream(const LinearDataset& stream, const ParameterSpace& space,
                        const OnlineOptions& options, const SolverSettings& settings = {});

/// Implicit rule over a stream of strictly convex quadratic forwards
/// (distance loss).
StreamResult run_stream(const ConvexDataset& stream, const ParameterSpace& space,
                        const OnlineOptions& options, const SolverSettings& settings = {});

}  // namespace invopt
