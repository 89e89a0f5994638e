// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace invopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Error categories raised by the library. Each maps to a stable string used
/// in reports and CLI output.
enum class ErrorCode {
  DimensionMismatch,
  ObservationInfeasible,
  InverseInfeasible,
  BigMViolation,
  NoCandidateFacet,
  IterationLimit,
  TargetUnattainable,
  CompletionInfeasible,
  UnsupportedCombination,
  NormalizationRequired,
  EmptyNet,
  UnsupportedObjective,
  ForwardUnbounded,
  TooLarge,
  DegenerateRange,
  InfeasiblePaths,
  DecompositionInfeasible,
  InfeasibleTheta,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Exception carrying an ErrorCode plus optional numeric diagnostics (for
/// example the minimal gap reported with TargetUnattainable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::map<std::string, double> details = {});

  ErrorCode code() const { return code_; }
  const std::map<std::string, double>& details() const { return details_; }

 private:
  ErrorCode code_;
  std::map<std::string, double> details_;
};

/// Tolerances and limits shared by the embedded solvers.
struct SolverSettings {
  double lp_tol = 1e-9;
  std::size_t lp_max_iter = 100000;
  std::size_t refactor_every = 50;
  std::size_t milp_node_cap = 100000;
  double int_tol = 1e-6;
  double fw_tol = 1e-8;
  std::size_t fw_max_iter = 20000;
  // Rows with slack at or below this value count as active at a point.
  double activity_tol = 1e-7;
};

}  // namespace invopt
