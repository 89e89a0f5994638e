// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "invopt/model.hpp"

namespace invopt {

/// Directed graph; arcs are (tail, head) pairs over nodes 0..num_nodes−1.
struct Network {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> arcs;

  int num_arcs() const { return static_cast<int>(arcs.size()); }
  /// Node-arc incidence: +1 at the tail, −1 at the head.
  Matrix incidence() const;
  void validate() const;
};

struct PathNetwork {
  Network network;
  int source = 0;
  int sink = 0;

  /// Flow balance right-hand side (+1 at the source, −1 at the sink).
  Vector balance() const;
  /// min θᵀx s.t. flow balance, 0 ≤ x ≤ 1.
  LinearForwardModel shortest_path_model(const Vector& theta) const;
  /// True when x is a 0/1 arc vector satisfying flow balance.
  bool is_path(const Vector& x, double tol = 1e-9) const;
  /// Arc vector of a node sequence; throws InfeasiblePaths on a missing arc.
  Vector path_from_nodes(const std::vector<int>& nodes) const;
};

enum class PathwayVariant { L1, Squared };

struct PathwayOptions {
  PathwayVariant variant = PathwayVariant::L1;
  /// Adds Aθ = 0. Off by default: on an acyclic network it forces θ = 0,
  /// which contradicts ‖θ‖∞ = 1.
  bool zero_incidence = false;
  double fw_tol = 1e-9;
};

struct PathwayResult {
  Vector theta_stage1;
  Vector theta;  // after the second stage
  Vector lambda;
  Vector eps_clinical;
  Vector eps_survived;
  Vector eps_died;
  double stage1_objective = 0.0;
  double stage2_objective = 0.0;
  int facet = -1;
  /// Largest change of a clinical gap between the stages (should be ~0).
  double clinical_drift = 0.0;
};

/// Two-stage arc-cost estimation over the facets of ‖θ‖∞ = 1. Throws
/// InfeasiblePaths when a path violates flow balance.
PathwayResult estimate_pathway_costs(const PathNetwork& net, const std::vector<Vector>& clinical,
                                     const std::vector<Vector>& survived,
                                     const std::vector<Vector>& died,
                                     const PathwayOptions& options = {},
                                     const SolverSettings& settings = {});

enum class OmegaFormula { Prose, Displayed };

/// Maximum cost of a source–sink walk with exactly `steps` arcs (−∞ when none).
double max_cost_walk(const PathNetwork& net, const Vector& theta, int steps);

/// ω(x̂) = 1 − (θᵀx̂ − θᵀx*)/(M(x̂) − θᵀx*) clipped to [0, 1] (Prose), or the
/// alternative denominator M(x̂) − θᵀx̂ (Displayed). Throws DegenerateRange.
double concordance_omega(const Vector& theta, const Vector& x_hat, const PathNetwork& net,
                         OmegaFormula formula = OmegaFormula::Prose,
                         const SolverSettings& settings = {});

struct ODPair {
  int origin = 0;
  int destination = 0;
  double demand = 0.0;
};

/// Link costs t_a = c_a g(x_a/m_a, θ) with g(u, θ) = 1 + Σ_k θ_k u^k.
struct TrafficInstance {
  Network network;
  Vector free_flow;  // c
  Vector capacity;   // m
  std::vector<ODPair> demands;
  int degree = 1;

  void validate() const;
  Vector link_costs(const Vector& flows, const Vector& theta) const;
};

/// Beckmann potential over variables (aggregate flows, per-OD flows).
ConvexForwardModel traffic_forward(const TrafficInstance& inst);

/// Wardrop equilibrium aggregate link flows at θ.
Vector equilibrium_flows(const TrafficInstance& inst, const Vector& theta,
                         const SolverSettings& settings = {});

struct TrafficCalibration {
  Vector theta;
  double objective = 0.0;
  Vector gaps;  // per-period VI gap at θ
};

/// VI-based calibration with θ ≥ 0 and ridge κ Σ δ_k θ_k² (δ_k = 1 unless
/// given). κ = 0 is an LP; κ > 0 uses conditional gradient. Throws
/// DecompositionInfeasible.
TrafficCalibration calibrate_traffic(const TrafficInstance& inst,
                                     const std::vector<Vector>& observed_flows, double kappa,
                                     const std::vector<double>& delta = {},
                                     const SolverSettings& settings = {});

enum class InstanceKind { LP, Knapsack, Path, Traffic };

const char* to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(const std::string& s);

struct GeneratorOptions {
  int size = 3;            // variables (LP, knapsack), layers (path), unused (traffic)
  int observations = 5;
  double noise = 0.0;      // σ: pull toward a random feasible point
};

struct GeneratedInstance {
  InstanceKind kind = InstanceKind::LP;
  LinearDataset data;
  ParameterSpace space;
  Vector theta_true;
  std::optional<PathNetwork> path;
  std::optional<TrafficInstance> traffic;
  std::vector<Vector> traffic_flows;
};

/// Synthetic instance with planted θ_true; identical for identical seeds.
GeneratedInstance generate_instance(InstanceKind kind, std::uint64_t seed,
                                    const GeneratorOptions& options = {});

}  // namespace invopt
