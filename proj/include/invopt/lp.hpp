// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "invopt/common.hpp"

namespace invopt {

enum class RowSense { GreaterEqual, LessEqual, Equal };
enum class VarKind { Continuous, Integer };
enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus status);

/// Primal/dual solution returned by the embedded solvers.
///
/// For LPs, `dual[i]` is the multiplier of row i in the convention of a
/// minimization problem: nonnegative for ≥ rows, nonpositive for ≤ rows.
/// For conditional gradient solves `complementarity` holds the final
/// Frank–Wolfe gap and `dual` is empty.
struct SolveReport {
  Vector primal;
  Vector dual;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;
  std::size_t iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// A small algebraic modeling layer over the dense simplex.
///
/// Variables carry bounds (possibly infinite), a cost and an integrality
/// flag; rows are sparse term lists with a sense and right-hand side. The
/// objective is always minimized.
class LinearProgram {
 public:
  using Term = std::pair<int, double>;

  int add_variable(double lower = 0.0, double upper = kInf, double cost = 0.0,
                   VarKind kind = VarKind::Continuous);
  /// Adds `count` identical variables and returns the index of the first.
  int add_variables(int count, double lower = 0.0, double upper = kInf,
                    double cost = 0.0, VarKind kind = VarKind::Continuous);
  int add_row(std::vector<Term> terms, RowSense sense, double rhs);

  void set_cost(int var, double cost) { cost_[var] = cost; }
  void add_cost(int var, double cost) { cost_[var] += cost; }
  void set_bounds(int var, double lower, double upper);
  void set_objective_offset(double offset) { offset_ = offset; }

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  double lower(int var) const { return lower_[var]; }
  double upper(int var) const { return upper_[var]; }
  double cost(int var) const { return cost_[var]; }
  VarKind kind(int var) const { return kind_[var]; }
  const std::vector<Term>& row(int i) const { return rows_[i]; }
  RowSense sense(int i) const { return sense_[i]; }
  double rhs(int i) const { return rhs_[i]; }
  double objective_offset() const { return offset_; }
  bool has_integers() const;

  /// Solves the continuous relaxation (integrality flags ignored).
  SolveReport solve(const SolverSettings& settings = {}) const;

 private:
  std::vector<double> lower_, upper_, cost_;
  std::vector<VarKind> kind_;
  std::vector<std::vector<Term>> rows_;
  std::vector<RowSense> sense_;
  std::vector<double> rhs_;
  double offset_ = 0.0;
};

/// Branch and bound over the integer-flagged variables of `lp`: depth-first,
/// branching on the most fractional variable.
SolveReport solve_mip(const LinearProgram& lp, const SolverSettings& settings = {});

/// Solves min cᵀx s.t. Ax = b, x ≥ 0 with a two-phase revised simplex.
/// Exposed for testing; `dual` holds the equality multipliers.
SolveReport simplex_standard_form(const Matrix& A, const Vector& b,
                                  const Vector& c,
                                  const SolverSettings& settings = {});

}  // namespace invopt
