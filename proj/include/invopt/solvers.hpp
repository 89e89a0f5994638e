// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>

#include "invopt/lp.hpp"
#include "invopt/model.hpp"

namespace invopt {

/// Builds the LP min s·cᵀx over the rows of `model` with free variables.
/// Integer flags are copied when `keep_integers` is set.
LinearProgram to_linear_program(const LinearForwardModel& model, bool keep_integers);

/// Continuous solve. Duals follow the model's own sense, so that
/// cᵀx* = bᵀλ* at optimality and λ ≥ 0 on ≥ rows of a min model (≤ rows of a
/// max model). Integrality flags are ignored.
SolveReport solve_lp(const LinearForwardModel& model, const SolverSettings& settings = {});

/// Branch and bound on the integer-flagged variables.
SolveReport solve_milp(const LinearForwardModel& model, const SolverSettings& settings = {});

/// Smooth convex function for the conditional gradient solver.
struct SmoothFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  /// When set, f is quadratic and this returns dᵀ∇²f d, enabling an exact
  /// line search. Otherwise the step is found by bisection on the
  /// directional derivative.
  std::function<double(const Vector&)> curvature;
};

/// Away-step Frank–Wolfe over the polytope described by `region`
/// (its costs are ignored). `complementarity` in the report holds the final
/// Frank–Wolfe gap.
SolveReport frank_wolfe(const LinearProgram& region, const SmoothFunction& f,
                        double tol, std::size_t max_iter,
                        const SolverSettings& settings = {});

/// min f(x, θ) over {A x ≥ b} by conditional gradient.
SolveReport solve_convex(const ConvexForwardModel& model, const Vector& theta,
                         double tol, std::size_t max_iter,
                         const SolverSettings& settings = {});
SolveReport solve_convex(const ConvexForwardModel& model, const Vector& theta,
                         const SolverSettings& settings = {});

/// Lawson–Hanson nonnegative least squares: argmin ‖Cu − d‖ over u ≥ 0.
Vector nnls(const Matrix& C, const Vector& d);

/// Euclidean projection of `p` onto {x : Gx ≥ h, Ex = f}, computed exactly
/// through the least-distance dual. Returns nullopt when the set is empty.
std::optional<Vector> project_polyhedron(const Vector& p, const Matrix& G,
                                         const Vector& h, const Matrix& E,
                                         const Vector& f);

/// argmin ½xᵀQx + qᵀx over {Gx ≥ h, Ex = f} for Q positive definite.
std::optional<Vector> solve_strict_qp(const Matrix& Q, const Vector& q,
                                      const Matrix& G, const Vector& h,
                                      const Matrix& E, const Vector& f);

}  // namespace invopt
