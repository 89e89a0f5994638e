// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "invopt/common.hpp"

namespace invopt {

enum class Sense { Minimize, Maximize };
enum class ConstraintSense { GreaterEqual, LessEqual, Equal };

/// min/max cᵀx subject to rows of A x (sense) b.
///
/// The canonical form used by every estimator is min cᵀx, A x ≥ b with free
/// variables; nonnegativity is expressed as explicit rows. Canonicalize
/// before handing a model to an estimator.
struct LinearForwardModel {
  Vector c;
  Matrix A;
  Vector b;
  std::vector<ConstraintSense> row_sense;  // empty means all ≥
  std::vector<bool> integer;               // empty means all continuous
  Sense sense = Sense::Minimize;

  int num_vars() const { return static_cast<int>(A.cols()); }
  int num_rows() const { return static_cast<int>(A.rows()); }
  bool has_integers() const;
  bool is_canonical() const;
  /// +1 for min, −1 for max: the canonical cost is `sign() * c`.
  double sign() const { return sense == Sense::Minimize ? 1.0 : -1.0; }
};

/// One additive term coef·x_var^power of a Basis function.
struct PowerTerm {
  int var = 0;
  double coef = 1.0;
  double power = 1.0;
};

/// Convex scalar function f_b(x) = Σ coef·x_var^power (power ≥ 1; powers
/// other than 1 require the variable to stay nonnegative).
struct BasisFunction {
  std::vector<PowerTerm> terms;
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

/// f(x) = θᵀx.
struct LinearObjective {};

/// f(x) = ½xᵀΦx + ψᵀx − θᵀx; θ enters only the linear term.
struct QuadraticObjective {
  Matrix Phi;
  Vector psi;
};

/// f(x) = offsetᵀx + Σ_b θ_b f_b(x). Convexity needs θ_b ≥ 0 for each
/// nonlinear basis; `nonnegative[b]` records the declared sign rule.
struct BasisObjective {
  Vector offset;
  std::vector<BasisFunction> bases;
  std::vector<bool> nonnegative;
};

/// Objective family whose gradient is affine in the parameter:
/// ∇f(x, θ) = g0(x) + J(x) θ.
struct ObjectiveSpec {
  std::variant<LinearObjective, QuadraticObjective, BasisObjective> form;

  int num_params(int n) const;
  double value(const Vector& x, const Vector& theta) const;
  Vector gradient(const Vector& x, const Vector& theta) const;
  /// Returns (J, g0) with ∇f(x, θ) = g0 + J θ.
  std::pair<Matrix, Vector> gradient_affine(const Vector& x, int n) const;
  bool is_linear() const { return std::holds_alternative<LinearObjective>(form); }
  /// Throws DimensionMismatch or InvalidArgument on malformed data (for
  /// instance a Φ that is not symmetric PSD).
  void validate(int n) const;
};

/// min f(x, θ) subject to A x ≥ b.
struct ConvexForwardModel {
  ObjectiveSpec objective;
  Matrix A;
  Vector b;

  int num_vars() const { return static_cast<int>(A.cols()); }
  void validate() const;
};

enum class Normalization { None, L1Sphere, LInfSphere, FixedComponent };
enum class ObjectiveMode { NormToPrior, LinearCost, Zero };

/// The parameter set Θ together with the inverse objective h(θ).
struct ParameterSpace {
  int dim = 0;
  Matrix G;  // Gθ ≥ h
  Vector h;
  Matrix E;  // Eθ = f
  Vector f;
  Vector lower;  // box; empty means unbounded
  Vector upper;
  Normalization normalization = Normalization::None;
  int fixed_index = 0;
  double fixed_value = 1.0;
  std::optional<Vector> prior;
  ObjectiveMode mode = ObjectiveMode::Zero;
  double norm_p = 1.0;  // 1 or ∞ for NormToPrior
  Vector cost;          // for LinearCost

  static ParameterSpace free(int dim);
  static ParameterSpace nonnegative(int dim);
  /// {θ ≥ 0, Σθ = 1}.
  static ParameterSpace simplex(int dim);

  ParameterSpace& with_prior(const Vector& p, double norm = 1.0);
  ParameterSpace& with_bounds(const Vector& lo, const Vector& hi);

  double lower_bound(int i) const { return lower.size() ? lower[i] : -kInf; }
  double upper_bound(int i) const { return upper.size() ? upper[i] : kInf; }
  /// h(θ) for the configured objective mode.
  double objective(const Vector& theta) const;
  void validate() const;
};

/// One convex piece of Θ: the base constraints plus extra rows produced by
/// the normalization rule.
struct SpacePiece {
  std::vector<std::pair<Vector, double>> ge;  // aᵀθ ≥ r
  std::vector<std::pair<Vector, double>> eq;  // aᵀθ = r
  Vector lower, upper;                       // tightened box
};

/// Expands the normalization into convex pieces (order is deterministic;
/// pieces excluded by the box are dropped).
std::vector<SpacePiece> expand_pieces(const ParameterSpace& space);

struct Observation {
  Vector x;
  int instance = 0;
  double weight = 1.0;
};

template <typename Model>
struct Dataset {
  std::vector<Observation> observations;
  std::vector<Model> models;
  bool shared_region = false;

  int size() const { return static_cast<int>(observations.size()); }
  const Model& model_for(const Observation& o) const { return models.at(o.instance); }
  void validate() const;
};

extern template struct Dataset<LinearForwardModel>;
extern template struct Dataset<ConvexForwardModel>;

using LinearDataset = Dataset<LinearForwardModel>;
using ConvexDataset = Dataset<ConvexForwardModel>;

/// Finite MDP with rewards θ(s, a) stored state-major (index s·|A| + a).
struct MDPModel {
  int num_states = 0;
  int num_actions = 0;
  // transition[a](s, s') = p(s' | s, a)
  std::vector<Matrix> transition;
  double gamma = 0.9;
  ParameterSpace reward_space;

  int index(int s, int a) const { return s * num_actions + a; }
  void validate() const;
};

using Policy = std::vector<int>;

enum class EstimateStatus { Optimal, Infeasible, IterationLimit, Degenerate };

const char* to_string(EstimateStatus status);

struct EstimationResult {
  Vector theta;
  double objective = 0.0;
  Vector per_obs_loss;
  std::vector<Vector> duals;
  EstimateStatus status = EstimateStatus::Optimal;
  std::map<std::string, double> diagnostics;
  // Estimator-specific extras (recovered rhs, completed x, values v, ...).
  std::map<std::string, Vector> vectors;
  std::optional<Matrix> matrix;
};

/// Returns an equivalent min-sense, all-≥ model. Equalities become two
/// opposite rows. Idempotent on canonical models.
LinearForwardModel canonicalize(const LinearForwardModel& model);
void validate_model(const LinearForwardModel& model);

/// Human-readable list of violated constraints of Θ; empty iff θ ∈ Θ
/// within `tol`.
std::vector<std::string> validate_parameter(const Vector& theta,
                                            const ParameterSpace& space,
                                            double tol = 1e-8);

/// Componentwise bound rows for 0 ≤ x ≤ u, appended to (A, b) in ≥ form.
void append_box_rows(Matrix& A, Vector& b, const Vector& lo, const Vector& hi);

}  // namespace invopt
