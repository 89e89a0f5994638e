// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "invopt/apps.hpp"
#include "invopt/solvers.hpp"

namespace invopt {

const char* to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::LP: return "lp";
    case InstanceKind::Knapsack: return "knapsack";
    case InstanceKind::Path: return "path";
    case InstanceKind::Traffic: return "traffic";
  }
  return "unknown";
}

InstanceKind instance_kind_from_string(const std::string& s) {
  if (s == "lp") return InstanceKind::LP;
  if (s == "knapsack") return InstanceKind::Knapsack;
  if (s == "path") return InstanceKind::Path;
  if (s == "traffic") return InstanceKind::Traffic;
  throw Error(ErrorCode::InvalidArgument, "unknown instance kind '" + s + "'");
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Planted facet: θ_trueᵀx ≥ 1 inside 0 ≤ x ≤ U plus random rows that keep
// every observation and the box center feasible.
GeneratedInstance make_lp(Rng& rng, const GeneratorOptions& opt) {
  const int n = std::max(2, opt.size);
  const int N = std::max(1, opt.observations);
  GeneratedInstance g;
  g.kind = InstanceKind::LP;
  Vector theta(n);
  for (int j = 0; j < n; ++j) theta[j] = uniform(rng, 0.2, 1.0);
  theta /= theta.sum();
  g.theta_true = theta;
  const double U = 2.0 / theta.minCoeff();

  std::exponential_distribution<double> expo(1.0);
  std::vector<Vector> facet(N);
  for (int k = 0; k < N; ++k) {
    Vector w(n);
    for (int j = 0; j < n; ++j) w[j] = expo(rng);
    w /= w.sum();
    facet[k] = w.cwiseQuotient(theta);
  }
  const Vector center = Vector::Constant(n, 0.5 * U);
  const int extra = 2;
  Matrix A(2 * n + 1 + extra, n);
  Vector b(A.rows());
  A.topRows(n) = Matrix::Identity(n, n);
  b.head(n).setZero();
  A.middleRows(n, n) = -Matrix::Identity(n, n);
  b.segment(n, n).setConstant(-U);
  A.row(2 * n) = theta.transpose();
  b[2 * n] = 1.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < extra; ++r) {
    Eigen::RowVectorXd a(n);
    for (int j = 0; j < n; ++j) a[j] = normal(rng);
    double lo = a.dot(center);
    for (const Vector& p : facet) lo = std::min(lo, a.dot(p));
    lo = std::min(lo, a.sum() * U);
    A.row(2 * n + 1 + r) = a;
    b[2 * n + 1 + r] = lo - 0.1;
  }
  LinearForwardModel m;
  m.c = theta;
  m.A = A;
  m.b = b;
  g.data.models.push_back(m);
  g.data.shared_region = true;

  for (int k = 0; k < N; ++k) {
    Vector x = facet[k];
    if (opt.noise > 0.0) {
      Vector q = center;
      for (int attempt = 0; attempt < 100; ++attempt) {
        Vector cand(n);
        for (int j = 0; j < n; ++j) cand[j] = center[j] + 0.25 * U * uniform(rng, -1.0, 1.0);
        if ((A * cand - b).minCoeff() >= 0.0) {
          q = cand;
          break;
        }
      }
      x = (1.0 - opt.noise) * x + opt.noise * q;
    }
    g.data.observations.push_back({x, 0, 1.0});
  }
  g.space = ParameterSpace::simplex(n);
  return g;
}

// 0/1 knapsack instances (max sense) with varying capacity; each
// observation is the exact optimum under θ_true.
GeneratedInstance make_knapsack(Rng& rng, const GeneratorOptions& opt) {
  const int n = std::clamp(opt.size, 1, 12);
  const int N = std::max(1, opt.observations);
  GeneratedInstance g;
  g.kind = InstanceKind::Knapsack;
  std::uniform_int_distribution<int> wd(1, 9);
  Vector weight(n), theta(n);
  for (int j = 0; j < n; ++j) {
    weight[j] = wd(rng);
    theta[j] = std::round(uniform(rng, 1.0, 10.0));
  }
  g.theta_true = theta;
  for (int k = 0; k < N; ++k) {
    const double cap = std::floor(weight.sum() * uniform(rng, 0.3, 0.7));
    LinearForwardModel m;
    m.sense = Sense::Maximize;
    m.c = theta;
    m.A.resize(1 + 2 * n, n);
    m.b.resize(1 + 2 * n);
    m.A.row(0) = weight.transpose();
    m.b[0] = cap;
    m.A.middleRows(1, n) = Matrix::Identity(n, n);
    m.b.segment(1, n).setZero();
    m.A.bottomRows(n) = Matrix::Identity(n, n);
    m.b.tail(n).setOnes();
    m.row_sense.assign(1, ConstraintSense::LessEqual);
    m.row_sense.insert(m.row_sense.end(), n, ConstraintSense::GreaterEqual);
    m.row_sense.insert(m.row_sense.end(), n, ConstraintSense::LessEqual);
    m.integer.assign(n, true);
    const SolveReport rep = solve_milp(m, {});
    Vector x = rep.primal.array().round().matrix();
    g.data.models.push_back(std::move(m));
    g.data.observations.push_back({x, k, 1.0});
  }
  g.space = ParameterSpace::nonnegative(n);
  g.space.with_prior(Vector::Ones(n));
  return g;
}

// Layered DAG with two nodes per layer; the observation is the shortest
// path under θ_true (scaled to ‖θ‖∞ = 1).
GeneratedInstance make_path(Rng& rng, const GeneratorOptions& opt) {
  const int L = std::max(1, opt.size);
  const int width = 2;
  PathNetwork pn;
  pn.network.num_nodes = 2 + L * width;
  pn.source = 0;
  pn.sink = pn.network.num_nodes - 1;
  auto node = [&](int layer, int k) { return 1 + layer * width + k; };
  for (int k = 0; k < width; ++k) pn.network.arcs.emplace_back(pn.source, node(0, k));
  for (int l = 0; l + 1 < L; ++l)
    for (int i = 0; i < width; ++i)
      for (int k = 0; k < width; ++k) pn.network.arcs.emplace_back(node(l, i), node(l + 1, k));
  for (int k = 0; k < width; ++k) pn.network.arcs.emplace_back(node(L - 1, k), pn.sink);
  const int A = pn.network.num_arcs();
  Vector theta(A);
  for (int a = 0; a < A; ++a) theta[a] = uniform(rng, 0.1, 1.0);
  theta /= theta.maxCoeff();
  GeneratedInstance g;
  g.kind = InstanceKind::Path;
  g.theta_true = theta;
  const LinearForwardModel m = pn.shortest_path_model(theta);
  const SolveReport rep = solve_lp(m, {});
  const int N = std::max(1, opt.observations);
  g.data.models.push_back(m);
  g.data.shared_region = true;
  for (int k = 0; k < N; ++k)
    g.data.observations.push_back({rep.primal.array().round().matrix(), 0, 1.0});
  g.space = ParameterSpace::free(A);
  g.space.normalization = Normalization::LInfSphere;
  g.path = std::move(pn);
  return g;
}

// Five-arc network with one origin–destination pair and degree-1 costs;
// the observation is the equilibrium under θ_true.
GeneratedInstance make_traffic(Rng& rng) {
  TrafficInstance inst;
  inst.network.num_nodes = 4;
  inst.network.arcs = {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {1, 2}};
  const int A = inst.network.num_arcs();
  inst.free_flow.resize(A);
  inst.capacity.resize(A);
  for (int a = 0; a < A; ++a) {
    inst.free_flow[a] = uniform(rng, 1.0, 3.0);
    inst.capacity[a] = uniform(rng, 1.0, 2.0);
  }
  GeneratedInstance g;
  g.kind = InstanceKind::Traffic;
  g.theta_true = Vector::Constant(1, uniform(rng, 1.0, 5.0));
  inst.demands = {{0, 3, uniform(rng, 1.0, 3.0)}};
  g.traffic_flows.push_back(equilibrium_flows(inst, g.theta_true));
  g.space = ParameterSpace::nonnegative(1);
  g.traffic = std::move(inst);
  return g;
}

}  // namespace

GeneratedInstance generate_instance(InstanceKind kind, std::uint64_t seed,
                                    const GeneratorOptions& options) {
  if (options.noise < 0.0 || options.noise > 1.0)
    throw Error(ErrorCode::InvalidArgument, "noise must lie in [0, 1]");
  Rng rng(seed);
  switch (kind) {
    case InstanceKind::LP: return make_lp(rng, options);
    case InstanceKind::Knapsack: return make_knapsack(rng, options);
    case InstanceKind::Path: return make_path(rng, options);
    case InstanceKind::Traffic: return make_traffic(rng);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown instance kind");
}

}  // namespace invopt
