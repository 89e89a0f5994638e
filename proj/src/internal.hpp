// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the estimator translation units.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "invopt/lp.hpp"
#include "invopt/model.hpp"
#include "invopt/space.hpp"

namespace invopt::detail {

/// Canonical ≥ constraints of a linear model plus the objective sign.
struct Canon {
  Matrix A;
  Vector b;
  double s = 1.0;
};
Canon canon(const LinearForwardModel& model);

/// Largest violation of Ax ≥ b at x (0 when feasible).
double max_violation(const Matrix& A, const Vector& b, const Vector& x);

void add_dense_row(LinearProgram& lp, int first, const Eigen::RowVectorXd& row,
                   RowSense sense, double rhs);

/// Adds rows Σ_i A_ij λ_i − scale·(J θ)_j = rhs_j, j = 1..n.
void add_stationarity(LinearProgram& lp, const Matrix& A, int lambda0, const Matrix& J,
                      int theta0, const Vector& rhs);

/// Tightens a piece so sign-constrained basis weights stay nonnegative.
SpacePiece with_objective_signs(SpacePiece piece, const ObjectiveSpec& obj);

/// Solves `fn` on every piece of Θ; returns the best by objective (ties to
/// the lowest piece). nullopt when no piece produced a result.
std::optional<EstimationResult> best_over_pieces(
    const ParameterSpace& space,
    const std::function<std::optional<EstimationResult>(const SpacePiece&)>& fn);

/// Outcome of a big-M driven MILP with automatic retries.
struct BigMRun {
  SolveReport report;
  double M = 0.0;
  int retries = 0;
};

/// `solve(M)` returns the MILP report and whether some gated quantity came
/// within 1e-6 of M. Explicit M: a single attempt; if infeasible, a probe
/// with 10⁷ decides between BigMViolation and `infeasible_code`. Default:
/// M = 10⁴ with up to three ×10 retries.
BigMRun run_with_bigm(std::optional<double> bigM,
                      const std::function<std::pair<SolveReport, bool>(double)>& solve,
                      ErrorCode infeasible_code, const char* what);

/// s·(θᵀx̂) − min over the forward (LP or MILP); +∞ when the forward fails.
double forward_gap(const LinearForwardModel& model, const Vector& theta, const Vector& x_hat,
                   const SolverSettings& settings);

/// Adds weight·‖x_vars − center‖_p (p ∈ {1, ∞}) to the objective through
/// epigraph variables.
void add_norm_cost(LinearProgram& lp, const std::vector<int>& vars, const Vector& center,
                   double p, double weight = 1.0);

double weighted_mean(const Vector& values, const std::vector<double>& weights);

/// Weights of a dataset's observations.
template <typename D>
std::vector<double> weights_of(const D& data) {
  std::vector<double> w;
  for (const Observation& o : data.observations) w.push_back(o.weight);
  return w;
}

/// Rescales a direction onto Θ's normalization (positive scaling only) and
/// returns it when the result lies in Θ.
std::optional<Vector> normalize_direction(const Vector& v, const ParameterSpace& space);

/// Finite δ-net of Θ: an angular grid on the normalization sphere for
/// dim ≤ 3, a lattice over the bounding box otherwise, projected onto Θ and
/// deduplicated. Throws EmptyNet when δ is invalid or Θ is unbounded.
std::vector<Vector> theta_net(const ParameterSpace& space, double delta);

/// Runs fn(i) for i in [0, count) on up to `threads` workers; exceptions are
/// rethrown in index order.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace invopt::detail
