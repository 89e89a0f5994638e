// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "invopt/model.hpp"

namespace invopt {

enum class LossKind { ASO, RSO, Distance, VI, KKT };

const char* to_string(LossKind kind);

struct LossSpec {
  LossKind kind = LossKind::ASO;
  /// Distance: optimal-set relaxation, x ∈ X with sθᵀx ≤ opt + ε.
  double epsilon = 0.0;
  /// Distance: norm of x̂ − x (1, 2 or ∞).
  double distance_p = 2.0;
  /// KKT: norm of the complementarity residual (1 or ∞).
  double kkt_p = 1.0;
};

enum class RiskKind { Expected, CVaR, VaR };

struct RiskSpec {
  RiskKind kind = RiskKind::Expected;
  /// α for CVaR, χ for VaR; ignored for Expected.
  double level = 1.0;
  /// Loss upper bound used by the VaR MILP (default chosen automatically).
  std::optional<double> bigM;
};

/// Loss of θ at one observation for a linear forward. Zero iff x̂ is optimal
/// (RSO: iff the objective ratio is 1). Throws UnsupportedCombination,
/// NormalizationRequired or ForwardUnbounded.
double eval_loss(const LossSpec& loss, const Vector& theta, const Vector& x_hat,
                 const LinearForwardModel& model, const SolverSettings& settings = {});

/// VI and KKT losses for a convex forward with θ-affine gradient.
double eval_loss(const LossSpec& loss, const Vector& theta, const Vector& x_hat,
                 const ConvexForwardModel& model, const SolverSettings& settings = {});

/// Expected: weighted mean. CVaR(α): inf_τ τ + E[(ℓ − τ)₊]/α, exact by
/// sorting. VaR(χ): lower empirical χ-quantile. Empty weights mean uniform.
double aggregate_risk(const Vector& losses, const std::vector<double>& weights,
                      const RiskSpec& risk);

struct DataDrivenOptions {
  /// Allow Θ to contain θ = 0 (otherwise ASO throws NormalizationRequired).
  bool allow_zero_theta = false;
  /// Distance estimator: optimal-set relaxation and net spacing.
  double epsilon = 0.0;
  double delta = 0.05;
  /// Aggregation used by the net search of the distance estimator.
  RiskSpec risk;
  /// KKT complementarity norm (1 or ∞).
  double kkt_p = 1.0;
  /// Worker threads for net sweeps (results do not depend on it).
  int threads = 1;
};

/// Absolute sub-optimality: LP over (θ, λᵢ) minimizing Σ wᵢ |sθᵀx̂ᵢ − bᵢᵀλᵢ|.
/// A shared region uses one λ. per_obs_loss holds the LP terms and
/// vectors["eval_loss"] the re-evaluated losses.
EstimationResult estimate_aso(const LinearDataset& data, const ParameterSpace& space,
                              const DataDrivenOptions& options = {},
                              const SolverSettings& settings = {});

/// Relative sub-optimality with the normalization bᵢᵀλᵢ = 1. Requires
/// every bᵢ > 0 (NormalizationRequired otherwise).
EstimationResult estimate_rso(const LinearDataset& data, const ParameterSpace& space,
                              const DataDrivenOptions& options = {},
                              const SolverSettings& settings = {});

/// Distance to the optimal set. Shared region: search over facets of the
/// region. Otherwise a δ-net over Θ evaluated with options.risk.
/// diagnostics hold "net_size", "epsilon" and "delta". Throws EmptyNet.
EstimationResult estimate_distance(const LinearDataset& data, const ParameterSpace& space,
                                   const DataDrivenOptions& options = {},
                                   const SolverSettings& settings = {});

/// Variational-inequality loss via the dual reformulation.
EstimationResult estimate_vi(const ConvexDataset& data, const ParameterSpace& space,
                             const DataDrivenOptions& options = {},
                             const SolverSettings& settings = {});

/// KKT-violation loss: min Σ wᵢ [‖∇f − Aᵀλᵢ‖₁ + ‖λᵢ ⊙ (Ax̂ᵢ − b)‖_p].
EstimationResult estimate_kkt(const ConvexDataset& data, const ParameterSpace& space,
                              const DataDrivenOptions& options = {},
                              const SolverSettings& settings = {});

/// Value-at-risk of the p-norm distance loss (p ∈ {1, ∞}): min τ with at
/// least ⌈Nχ⌉ observations within τ. vectors["selected"] holds the π
/// indicators. Throws BigMViolation.
EstimationResult estimate_var(const LinearDataset& data, const ParameterSpace& space,
                              double chi, double distance_p = 1.0,
                              std::optional<double> bigM = std::nullopt,
                              const DataDrivenOptions& options = {},
                              const SolverSettings& settings = {});

/// Convex view of a continuous linear forward (Basis form for max sense).
ConvexForwardModel to_convex(const LinearForwardModel& model);

}  // namespace invopt
