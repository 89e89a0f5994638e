// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "invopt/lp.hpp"
#include "invopt/model.hpp"

namespace invopt {

/// Adds θ variables for one piece of Θ (bounds, Gθ ≥ h, Eθ = f and the
/// piece rows). Returns the index of θ₀.
int add_theta(LinearProgram& lp, const ParameterSpace& space, const SpacePiece& piece,
              VarKind kind = VarKind::Continuous);

/// Adds `scale`·h(θ) to the objective, introducing epigraph variables for
/// norm objectives.
void add_space_objective(LinearProgram& lp, int theta0, const ParameterSpace& space,
                         double scale = 1.0);

/// All constraints of one piece as {Gθ ≥ h, Eθ = f}, box bounds included.
struct PieceSystem {
  Matrix G;
  Vector h;
  Matrix E;
  Vector f;
};
PieceSystem piece_system(const ParameterSpace& space, const SpacePiece& piece);

/// True when Θ is exactly {θ ≥ 0, Σθ = 1}.
bool is_unit_simplex(const ParameterSpace& space);

/// Euclidean projection onto {θ ≥ 0, Σθ = radius} by sorting.
Vector project_simplex(const Vector& v, double radius = 1.0);

/// Euclidean projection onto Θ (nearest point over all pieces; ties to the
/// lowest piece). Returns nullopt when Θ is empty.
std::optional<Vector> project_onto_space(const Vector& p, const ParameterSpace& space);

}  // namespace invopt
