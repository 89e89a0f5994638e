// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "invopt/model.hpp"

// Brute-force reference implementations. They are deliberately simple and
// exponential; use them on desk-scale instances only.
namespace invopt::testing {

/// Basic feasible points of {Ax ≥ b, lower ≤ x ≤ upper} (bounds optional,
/// infinite entries ignored), deduplicated at 1e-8. n ≤ 8 and at most 12
/// rows in A; throws TooLarge otherwise.
std::vector<Vector> enumerate_vertices(const Matrix& A, const Vector& b,
                                       const Vector& lower = {},
                                       const Vector& upper = {});

struct OptimalSet {
  std::vector<Vector> points;
  double value = 0.0;
};

/// X_opt(θ) restricted to vertices (continuous models) or to all integer
/// points (pure integer models, at most 2¹⁵ lattice points). Objective
/// sense follows `model`; θ replaces model.c. The feasible region must be
/// bounded.
OptimalSet brute_force_optimal_set(const LinearForwardModel& model, const Vector& theta,
                                   double tol = 1e-9);

/// All feasible points of a pure-integer model inside its bounding box.
std::vector<Vector> enumerate_integer_points(const LinearForwardModel& model);

struct InverseCheck {
  bool ok = false;
  double gap = 0.0;        // objective excess of x̂ over the forward optimum
  double violation = 0.0;  // largest constraint violation of x̂
};

/// x̂ ∈ X_opt(θ) iff x̂ is feasible and its objective is within `tol` of the
/// forward optimum.
InverseCheck verify_inverse_feasible(const LinearForwardModel& model, const Vector& theta,
                                     const Vector& x_hat, double tol = 1e-6);
/// Convex version: gap is the first-order bound ∇f(x̂)ᵀx̂ − min ∇f(x̂)ᵀx.
InverseCheck verify_inverse_feasible(const ConvexForwardModel& model, const Vector& theta,
                                     const Vector& x_hat, double tol = 1e-6);

struct MDPSolution {
  Vector values;
  Policy policy;
  std::size_t iterations = 0;
};

/// Value iteration to sup-norm change ≤ 1e-10; greedy actions break ties by
/// lowest index.
MDPSolution mdp_value_iteration(const MDPModel& mdp, const Vector& theta);

/// Exact value of a fixed policy, (I − γP_π)⁻¹ r_π.
Vector policy_value(const MDPModel& mdp, const Vector& theta, const Policy& policy);

/// Grid points of Θ at spacing r (dim ≤ 3). Normalized spaces are gridded on
/// their spheres; otherwise the box must be finite.
std::vector<Vector> theta_grid(const ParameterSpace& space, double r);

struct GridMin {
  Vector theta;
  double value = 0.0;
  std::size_t points = 0;
};

/// Exhaustive minimum of `risk` over theta_grid(space, r).
GridMin grid_min_loss(const std::function<double(const Vector&)>& risk,
                      const ParameterSpace& space, double r);

}  // namespace invopt::testing
