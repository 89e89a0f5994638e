// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "invopt/apps.hpp"
#include "invopt/solvers.hpp"
#include "invopt/space.hpp"

namespace invopt {

Matrix Network::incidence() const {
  Matrix A = Matrix::Zero(num_nodes, num_arcs());
  for (int a = 0; a < num_arcs(); ++a) {
    A(arcs[a].first, a) += 1.0;
    A(arcs[a].second, a) -= 1.0;
  }
  return A;
}

void Network::validate() const {
  if (num_nodes <= 0) throw Error(ErrorCode::InvalidArgument, "network needs nodes");
  for (const auto& [u, v] : arcs)
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes || u == v)
      throw Error(ErrorCode::InvalidArgument, "arc endpoints must be distinct existing nodes");
}

Vector PathNetwork::balance() const {
  Vector b = Vector::Zero(network.num_nodes);
  b[source] += 1.0;
  b[sink] -= 1.0;
  return b;
}

LinearForwardModel PathNetwork::shortest_path_model(const Vector& theta) const {
  const int n = network.num_arcs();
  const Matrix A = network.incidence();
  LinearForwardModel m;
  m.c = theta;
  m.A.resize(A.rows() + 2 * n, n);
  m.A << A, Matrix::Identity(n, n), Matrix::Identity(n, n);
  m.b.resize(A.rows() + 2 * n);
  m.b << balance(), Vector::Zero(n), Vector::Ones(n);
  m.row_sense.assign(A.rows(), ConstraintSense::Equal);
  m.row_sense.insert(m.row_sense.end(), n, ConstraintSense::GreaterEqual);
  m.row_sense.insert(m.row_sense.end(), n, ConstraintSense::LessEqual);
  return m;
}

bool PathNetwork::is_path(const Vector& x, double tol) const {
  if (x.size() != network.num_arcs()) return false;
  for (int a = 0; a < x.size(); ++a)
    if (std::abs(x[a]) > tol && std::abs(x[a] - 1.0) > tol) return false;
  return (network.incidence() * x - balance()).cwiseAbs().maxCoeff() <= tol;
}

Vector PathNetwork::path_from_nodes(const std::vector<int>& nodes) const {
  Vector x = Vector::Zero(network.num_arcs());
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const auto it = std::find(network.arcs.begin(), network.arcs.end(),
                              std::make_pair(nodes[k], nodes[k + 1]));
    if (it == network.arcs.end())
      throw Error(ErrorCode::InfeasiblePaths, "node sequence uses a missing arc");
    x[static_cast<int>(it - network.arcs.begin())] += 1.0;
  }
  return x;
}

namespace {

void check_paths(const PathNetwork& net, const std::vector<Vector>& paths, const char* what) {
  for (const Vector& x : paths)
    if (!net.is_path(x, 1e-7))
      throw Error(ErrorCode::InfeasiblePaths, std::string(what) + " path violates flow balance");
}

// Duality system shared by both stages: θ on one facet, λ free with
// λ_sink = 0, Aᵀλ ≤ θ. Returns (θ₀, λ₀).
std::pair<int, int> add_duality_system(LinearProgram& lp, const PathNetwork& net,
                                       const ParameterSpace& space, const SpacePiece& piece) {
  const int t0 = add_theta(lp, space, piece);
  const int l0 = lp.add_variables(net.network.num_nodes, -kInf, kInf);
  lp.set_bounds(l0 + net.sink, 0.0, 0.0);
  for (int a = 0; a < net.network.num_arcs(); ++a) {
    const auto [u, v] = net.network.arcs[a];
    lp.add_row({{l0 + u, 1.0}, {l0 + v, -1.0}, {t0 + a, -1.0}}, RowSense::LessEqual, 0.0);
  }
  return {t0, l0};
}

// ε = θᵀx̂ − (λ_s − λ_t) as a new variable (or fixed to `fixed`).
int add_gap(LinearProgram& lp, const PathNetwork& net, int t0, int l0, const Vector& x,
            double cost, std::optional<double> fixed = std::nullopt) {
  const int e = fixed ? -1 : lp.add_variable(-kInf, kInf, cost);
  std::vector<LinearProgram::Term> t;
  for (int a = 0; a < x.size(); ++a)
    if (x[a] != 0.0) t.emplace_back(t0 + a, x[a]);
  t.emplace_back(l0 + net.source, -1.0);
  if (net.sink != net.source) t.emplace_back(l0 + net.sink, 1.0);
  if (fixed) {
    lp.add_row(std::move(t), RowSense::Equal, *fixed);
  } else {
    t.emplace_back(e, -1.0);
    lp.add_row(std::move(t), RowSense::Equal, 0.0);
  }
  return e;
}

}  // namespace

PathwayResult estimate_pathway_costs(const PathNetwork& net, const std::vector<Vector>& clinical,
                                     const std::vector<Vector>& survived,
                                     const std::vector<Vector>& died,
                                     const PathwayOptions& options,
                                     const SolverSettings& settings) {
  net.network.validate();
  if (clinical.empty()) throw Error(ErrorCode::InfeasiblePaths, "at least one clinical path is required");
  check_paths(net, clinical, "clinical");
  check_paths(net, survived, "survived");
  check_paths(net, died, "died");
  const int n = net.network.num_arcs();
  const int N = static_cast<int>(clinical.size());

  ParameterSpace space = ParameterSpace::free(n);
  space.normalization = Normalization::LInfSphere;
  space.mode = ObjectiveMode::Zero;
  if (options.zero_incidence) {
    space.E = net.network.incidence();
    space.f = Vector::Zero(net.network.num_nodes);
  }
  const std::vector<SpacePiece> pieces = expand_pieces(space);

  PathwayResult res;
  res.stage1_objective = kInf;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    LinearProgram lp;
    const auto [t0, l0] = add_duality_system(lp, net, space, pieces[k]);
    std::vector<int> e(N);
    for (int r = 0; r < N; ++r) e[r] = add_gap(lp, net, t0, l0, clinical[r], 1.0);
    SolveReport rep;
    double value = 0.0;
    if (options.variant == PathwayVariant::L1) {
      rep = lp.solve(settings);
      if (!rep.optimal()) continue;
      value = rep.objective;
    } else {
      SmoothFunction f;
      f.value = [&](const Vector& z) {
        double s = 0.0;
        for (int v : e) s += z[v] * z[v];
        return s;
      };
      f.gradient = [&](const Vector& z) {
        Vector g = Vector::Zero(z.size());
        for (int v : e) g[v] = 2.0 * z[v];
        return g;
      };
      f.curvature = [&](const Vector& d) {
        double s = 0.0;
        for (int v : e) s += 2.0 * d[v] * d[v];
        return s;
      };
      rep = frank_wolfe(lp, f, options.fw_tol, settings.fw_max_iter, settings);
      if (!rep.optimal() && rep.status != SolveStatus::IterationLimit) continue;
      value = f.value(rep.primal);
    }
    if (value < res.stage1_objective - 1e-9 * std::max(1.0, std::abs(value))) {
      res.stage1_objective = value;
      res.facet = static_cast<int>(k);
      res.theta_stage1 = rep.primal.segment(t0, n);
      res.lambda = rep.primal.segment(l0, net.network.num_nodes);
      res.eps_clinical.resize(N);
      for (int r = 0; r < N; ++r) res.eps_clinical[r] = rep.primal[e[r]];
    }
  }
  if (res.facet < 0) throw Error(ErrorCode::InfeasiblePaths, "no arc costs on ‖θ‖∞ = 1 are feasible");

  // Stage 2: keep the clinical gaps, separate survivors from deaths.
  const int S = static_cast<int>(survived.size());
  const int D = static_cast<int>(died.size());
  const double ws = S > 0 ? static_cast<double>(D) / S : 0.0;
  res.theta = res.theta_stage1;
  res.eps_survived = Vector::Zero(S);
  res.eps_died = Vector::Zero(D);
  res.stage2_objective = kInf;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    LinearProgram lp;
    const auto [t0, l0] = add_duality_system(lp, net, space, pieces[k]);
    for (int r = 0; r < N; ++r) add_gap(lp, net, t0, l0, clinical[r], 0.0, res.eps_clinical[r]);
    std::vector<int> es(S), ed(D);
    for (int j = 0; j < S; ++j) es[j] = add_gap(lp, net, t0, l0, survived[j], ws);
    for (int j = 0; j < D; ++j) ed[j] = add_gap(lp, net, t0, l0, died[j], -1.0);
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) continue;
    if (rep.objective < res.stage2_objective - 1e-9 * std::max(1.0, std::abs(rep.objective))) {
      res.stage2_objective = rep.objective;
      res.theta = rep.primal.segment(t0, n);
      res.lambda = rep.primal.segment(l0, net.network.num_nodes);
      for (int j = 0; j < S; ++j) res.eps_survived[j] = rep.primal[es[j]];
      for (int j = 0; j < D; ++j) res.eps_died[j] = rep.primal[ed[j]];
    }
  }
  if (!std::isfinite(res.stage2_objective))
    throw Error(ErrorCode::InfeasiblePaths, "second stage lost feasibility");
  const double dual_value = res.lambda[net.source] - res.lambda[net.sink];
  for (int r = 0; r < N; ++r)
    res.clinical_drift = std::max(
        res.clinical_drift, std::abs(res.theta.dot(clinical[r]) - dual_value - res.eps_clinical[r]));
  return res;
}

double max_cost_walk(const PathNetwork& net, const Vector& theta, int steps) {
  const int V = net.network.num_nodes;
  Vector cur = Vector::Constant(V, -kInf);
  cur[net.source] = 0.0;
  for (int s = 0; s < steps; ++s) {
    Vector next = Vector::Constant(V, -kInf);
    for (int a = 0; a < net.network.num_arcs(); ++a) {
      const auto [u, v] = net.network.arcs[a];
      if (cur[u] > -kInf) next[v] = std::max(next[v], cur[u] + theta[a]);
    }
    cur = std::move(next);
  }
  return cur[net.sink];
}

double concordance_omega(const Vector& theta, const Vector& x_hat, const PathNetwork& net,
                         OmegaFormula formula, const SolverSettings& settings) {
  if (theta.size() != net.network.num_arcs() || x_hat.size() != net.network.num_arcs())
    throw Error(ErrorCode::DimensionMismatch, "θ and x̂ need one entry per arc");
  if (!net.is_path(x_hat, 1e-7))
    throw Error(ErrorCode::InfeasiblePaths, "pathway violates flow balance");
  const SolveReport sp = solve_lp(net.shortest_path_model(theta), settings);
  if (!sp.optimal()) throw Error(ErrorCode::InfeasiblePaths, "no source–sink path exists");
  const double shortest = sp.objective;
  const double cost = theta.dot(x_hat);
  const int steps = static_cast<int>(std::lround(x_hat.sum()));
  const double M = max_cost_walk(net, theta, steps);
  const double denom = formula == OmegaFormula::Prose ? M - shortest : M - cost;
  if (!std::isfinite(M) || denom <= 1e-9)
    throw Error(ErrorCode::DegenerateRange, "longest walk and reference cost coincide",
                {{"denominator", std::isfinite(M) ? denom : 0.0}});
  const double omega = 1.0 - (cost - shortest) / denom;
  return std::clamp(omega, 0.0, 1.0);
}

}  // namespace invopt
