// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>

#include "invopt/model.hpp"

namespace invopt {

/// Which optimality certificate ties θ to the observation.
enum class DualityMode {
  ComplementarySlackness,  // (A x̂ − b)ᵀλ = 0
  StrongDuality,           // θᵀx̂ = bᵀλ
};

/// Inverse LP for the cost vector: θ replaces c and x̂ must become optimal.
/// Throws ObservationInfeasible or InverseInfeasible.
EstimationResult estimate_lp_objective(const LinearForwardModel& model, const Vector& x_hat,
                                       const ParameterSpace& space, DualityMode mode,
                                       const SolverSettings& settings = {});

/// Joint cost and right-hand-side estimation as a big-M MILP. `space` is over
/// the stacked vector (θ, ψ) of length n + m, with ψ indexing the rows of the
/// canonical (all ≥) model. Throws InverseInfeasible or BigMViolation.
EstimationResult estimate_lp_joint(const LinearForwardModel& model, const Vector& x_hat,
                                   const ParameterSpace& space,
                                   std::optional<double> bigM = std::nullopt,
                                   const SolverSettings& settings = {});

/// Replaces a single row of the canonical constraint matrix by the nearest
/// row (in the p-norm, p ∈ {1, ∞}) that makes x̂ optimal for the fixed cost.
/// `theta` holds the new row, `matrix` the full perturbed matrix, and
/// diagnostics["row"] its index. Throws NoCandidateFacet.
EstimationResult estimate_constraint_matrix(const LinearForwardModel& model,
                                            const Vector& x_hat, double norm_p = 1.0,
                                            const SolverSettings& settings = {});

enum class AdjustMode { Both, MatrixOnly, RhsOnly };

struct FeasibilityOptions {
  double norm_p = 1.0;
  AdjustMode adjust = AdjustMode::Both;
  /// Optional extra constraints over the stacked vector (row-major Φ, ψ);
  /// leave dim = 0 for none.
  ParameterSpace space;
};

/// Nearest (Φ, ψ) to the prior (model.A, model.b) with Φ x̂ ≥ ψ. x̂ becomes
/// optimal once the implicit row cᵀx ≥ cᵀx̂ is appended; `matrix` and
/// vectors["rhs"] hold the augmented system. Throws InverseInfeasible.
EstimationResult estimate_constraints_feasibility(const LinearForwardModel& model,
                                                  const Vector& x_hat,
                                                  const FeasibilityOptions& options = {},
                                                  const SolverSettings& settings = {});

/// Cutting-plane inverse for integer forwards: alternate a master LP over
/// Θ with forward MILP solves that generate cuts. Throws InverseInfeasible or
/// IterationLimit.
EstimationResult estimate_milp_cutting_plane(const LinearForwardModel& model,
                                             const Vector& x_hat, const ParameterSpace& space,
                                             std::size_t max_cuts = 1000,
                                             const SolverSettings& settings = {});

/// Rewards θ(s, a) (in mdp.reward_space) making `policy` optimal; values v
/// are returned in vectors["values"]. Throws InverseInfeasible.
EstimationResult estimate_mdp_rewards(const MDPModel& mdp, const Policy& policy,
                                      const SolverSettings& settings = {});

/// θ ∈ Θ of minimal h whose forward optimal value equals ẑ. Throws
/// TargetUnattainable with details["min_gap"].
EstimationResult estimate_inverse_optimal_value(const LinearForwardModel& model, double z_hat,
                                                const ParameterSpace& space,
                                                std::optional<double> bigM = std::nullopt,
                                                const SolverSettings& settings = {});

/// θ ∈ Θ and a completion x* of the fixed components with x* optimal under
/// θ; x* is returned in vectors["x"]. Throws CompletionInfeasible,
/// InverseInfeasible or BigMViolation.
EstimationResult estimate_partial_lp(const LinearForwardModel& model,
                                     const std::map<int, double>& fixed_components,
                                     const ParameterSpace& space,
                                     std::optional<double> bigM = std::nullopt,
                                     const SolverSettings& settings = {});

/// KKT inverse for a convex forward whose gradient is affine in θ. Throws
/// ObservationInfeasible, UnsupportedObjective or InverseInfeasible.
EstimationResult estimate_convex_objective_kkt(const ConvexForwardModel& model,
                                               const Vector& x_hat,
                                               const ParameterSpace& space,
                                               const SolverSettings& settings = {});

}  // namespace invopt
