// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "internal.hpp"
#include "invopt/apps.hpp"
#include "invopt/solvers.hpp"

namespace invopt {

void TrafficInstance::validate() const {
  network.validate();
  const int A = network.num_arcs();
  if (free_flow.size() != A || capacity.size() != A)
    throw Error(ErrorCode::DimensionMismatch, "free-flow times and capacities need one entry per arc");
  if (free_flow.minCoeff() <= 0.0 || capacity.minCoeff() <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "free-flow times and capacities must be positive");
  if (degree < 1) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be at least 1");
  for (const ODPair& od : demands)
    if (od.demand < 0.0 || od.origin < 0 || od.destination < 0 ||
        od.origin >= network.num_nodes || od.destination >= network.num_nodes)
      throw Error(ErrorCode::InvalidArgument, "demands must be nonnegative between existing nodes");
}

Vector TrafficInstance::link_costs(const Vector& flows, const Vector& theta) const {
  Vector t(network.num_arcs());
  for (int a = 0; a < t.size(); ++a) {
    const double u = flows[a] / capacity[a];
    double g = 1.0, pw = 1.0;
    for (int k = 0; k < degree; ++k) {
      pw *= u;
      g += theta[k] * pw;
    }
    t[a] = free_flow[a] * g;
  }
  return t;
}

namespace {

// Appends rows Σ_out x − Σ_in x = d (origin), −d (destination), 0 otherwise
// as ≥ pairs over the block of arc variables starting at x0 (columns of A).
void add_balance_rows(std::vector<Eigen::RowVectorXd>& rows, std::vector<double>& rhs,
                      const Network& net, int x0, int cols, const ODPair& od) {
  for (int i = 0; i < net.num_nodes; ++i) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(cols);
    for (int a = 0; a < net.num_arcs(); ++a) {
      if (net.arcs[a].first == i) r[x0 + a] += 1.0;
      if (net.arcs[a].second == i) r[x0 + a] -= 1.0;
    }
    const double d = i == od.origin ? od.demand : i == od.destination ? -od.demand : 0.0;
    rows.push_back(r);
    rhs.push_back(d);
    rows.push_back(-r);
    rhs.push_back(-d);
  }
}

// Shortest-path distances from `origin` (Bellman–Ford; costs are positive).
Vector shortest_from(const Network& net, const Vector& cost, int origin) {
  Vector dist = Vector::Constant(net.num_nodes, kInf);
  dist[origin] = 0.0;
  for (int it = 0; it < net.num_nodes; ++it) {
    bool changed = false;
    for (int a = 0; a < net.num_arcs(); ++a) {
      const auto [u, v] = net.arcs[a];
      if (dist[u] + cost[a] < dist[v] - 1e-15) {
        dist[v] = dist[u] + cost[a];
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

void check_decomposable(const TrafficInstance& inst, const Vector& flows,
                        const SolverSettings& settings) {
  const int A = inst.network.num_arcs();
  const int W = static_cast<int>(inst.demands.size());
  if (flows.size() != A)
    throw Error(ErrorCode::DimensionMismatch, "observed flows need one entry per arc");
  LinearProgram lp;
  const int x0 = lp.add_variables(W * A, 0.0, kInf);
  for (int w = 0; w < W; ++w) {
    const ODPair& od = inst.demands[w];
    for (int i = 0; i < inst.network.num_nodes; ++i) {
      std::vector<LinearProgram::Term> t;
      for (int a = 0; a < A; ++a) {
        if (inst.network.arcs[a].first == i) t.emplace_back(x0 + w * A + a, 1.0);
        if (inst.network.arcs[a].second == i) t.emplace_back(x0 + w * A + a, -1.0);
      }
      const double d = i == od.origin ? od.demand : i == od.destination ? -od.demand : 0.0;
      lp.add_row(std::move(t), RowSense::Equal, d);
    }
  }
  for (int a = 0; a < A; ++a) {
    std::vector<LinearProgram::Term> t;
    for (int w = 0; w < W; ++w) t.emplace_back(x0 + w * A + a, 1.0);
    lp.add_row(std::move(t), RowSense::Equal, flows[a]);
  }
  if (!lp.solve(settings).optimal())
    throw Error(ErrorCode::DecompositionInfeasible,
                "observed flows cannot be split into origin–destination flows");
}

}  // namespace

ConvexForwardModel traffic_forward(const TrafficInstance& inst) {
  inst.validate();
  const int A = inst.network.num_arcs();
  const int W = static_cast<int>(inst.demands.size());
  const int cols = A + W * A;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int w = 0; w < W; ++w) add_balance_rows(rows, rhs, inst.network, A + w * A, cols, inst.demands[w]);
  for (int k = A; k < cols; ++k) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(cols);
    r[k] = 1.0;
    rows.push_back(r);
    rhs.push_back(0.0);
  }
  for (int a = 0; a < A; ++a) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(cols);
    r[a] = 1.0;
    for (int w = 0; w < W; ++w) r[A + w * A + a] = -1.0;
    rows.push_back(r);
    rhs.push_back(0.0);
    rows.push_back(-r);
    rhs.push_back(0.0);
  }
  ConvexForwardModel m;
  m.A.resize(static_cast<int>(rows.size()), cols);
  m.b.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.A.row(static_cast<int>(i)) = rows[i];
    m.b[static_cast<int>(i)] = rhs[i];
  }
  // ∫₀^x c(1 + Σ θ_k (s/m)^k) ds = c x + Σ_k θ_k c x^{k+1} / ((k+1) m^k)
  BasisObjective obj;
  obj.offset = Vector::Zero(cols);
  obj.offset.head(A) = inst.free_flow;
  for (int k = 1; k <= inst.degree; ++k) {
    BasisFunction f;
    for (int a = 0; a < A; ++a)
      f.terms.push_back({a, inst.free_flow[a] / ((k + 1) * std::pow(inst.capacity[a], k)),
                         static_cast<double>(k + 1)});
    obj.bases.push_back(std::move(f));
  }
  m.objective.form = std::move(obj);
  return m;
}

Vector equilibrium_flows(const TrafficInstance& inst, const Vector& theta,
                         const SolverSettings& settings) {
  const ConvexForwardModel m = traffic_forward(inst);
  const SolveReport rep = solve_convex(m, theta, 1e-12, 50000, settings);
  if (!rep.optimal() && rep.status != SolveStatus::IterationLimit)
    throw Error(ErrorCode::InvalidArgument, "equilibrium computation failed");
  return rep.primal.head(inst.network.num_arcs());
}

TrafficCalibration calibrate_traffic(const TrafficInstance& inst,
                                     const std::vector<Vector>& observed, double kappa,
                                     const std::vector<double>& delta,
                                     const SolverSettings& settings) {
  inst.validate();
  if (observed.empty()) throw Error(ErrorCode::InvalidArgument, "no observed flows");
  if (kappa < 0.0) throw Error(ErrorCode::InvalidArgument, "κ must be nonnegative");
  const int K = inst.degree;
  std::vector<double> dl = delta.empty() ? std::vector<double>(K, 1.0) : delta;
  if (static_cast<int>(dl.size()) != K)
    throw Error(ErrorCode::DimensionMismatch, "one penalty weight per polynomial degree");
  for (const Vector& x : observed) check_decomposable(inst, x, settings);

  const int A = inst.network.num_arcs();
  const int V = inst.network.num_nodes;
  const int W = static_cast<int>(inst.demands.size());
  const int P = static_cast<int>(observed.size());
  LinearProgram lp;
  const int t0 = lp.add_variables(K, 0.0, kInf);
  const int e0 = lp.add_variables(P, -kInf, kInf, 1.0);
  for (int p = 0; p < P; ++p) {
    const Vector& x = observed[p];
    const int pi0 = lp.add_variables(W * V, -kInf, kInf);
    // Link cost t_a = c_a + Σ_k c_a (x_a/m_a)^k θ_k at the observed flows.
    auto cost_terms = [&](int a, double scale, std::vector<LinearProgram::Term>& t) {
      double pw = 1.0;
      for (int k = 0; k < K; ++k) {
        pw *= x[a] / inst.capacity[a];
        const double coef = scale * inst.free_flow[a] * pw;
        if (coef != 0.0) t.emplace_back(t0 + k, coef);
      }
      return scale * inst.free_flow[a];
    };
    for (int w = 0; w < W; ++w) {
      const ODPair& od = inst.demands[w];
      lp.set_bounds(pi0 + w * V + od.origin, 0.0, 0.0);
      for (int a = 0; a < A; ++a) {
        // π_head − π_tail ≤ t_a(θ)
        const auto [u, v] = inst.network.arcs[a];
        std::vector<LinearProgram::Term> t{{pi0 + w * V + v, 1.0}, {pi0 + w * V + u, -1.0}};
        const double c = cost_terms(a, -1.0, t);
        lp.add_row(std::move(t), RowSense::LessEqual, -c);
      }
    }
    // Σ_a t_a(θ) x_a − Σ_w d_w π_dest − ε_p ≤ 0
    std::vector<LinearProgram::Term> gap{{e0 + p, -1.0}};
    double constant = 0.0;
    for (int a = 0; a < A; ++a) constant += cost_terms(a, x[a], gap);
    for (int w = 0; w < W; ++w)
      gap.emplace_back(pi0 + w * V + inst.demands[w].destination, -inst.demands[w].demand);
    lp.add_row(std::move(gap), RowSense::LessEqual, -constant);
  }

  Vector z;
  if (kappa == 0.0) {
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) throw Error(ErrorCode::InvalidArgument, "calibration LP failed");
    z = rep.primal;
  } else {
    SmoothFunction f;
    f.value = [&](const Vector& y) {
      double s = y.segment(e0, P).sum();
      for (int k = 0; k < K; ++k) s += kappa * dl[k] * y[t0 + k] * y[t0 + k];
      return s;
    };
    f.gradient = [&](const Vector& y) {
      Vector g = Vector::Zero(y.size());
      g.segment(e0, P).setOnes();
      for (int k = 0; k < K; ++k) g[t0 + k] = 2.0 * kappa * dl[k] * y[t0 + k];
      return g;
    };
    f.curvature = [&](const Vector& d) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += 2.0 * kappa * dl[k] * d[t0 + k] * d[t0 + k];
      return s;
    };
    const SolveReport rep = frank_wolfe(lp, f, 1e-12, settings.fw_max_iter, settings);
    if (!rep.optimal() && rep.status != SolveStatus::IterationLimit)
      throw Error(ErrorCode::InvalidArgument, "calibration conditional gradient failed");
    z = rep.primal;
  }
  TrafficCalibration out;
  out.theta = z.segment(t0, K);
  out.gaps.resize(P);
  out.objective = kappa * 0.0;
  for (int k = 0; k < K; ++k) out.objective += kappa * dl[k] * out.theta[k] * out.theta[k];
  for (int p = 0; p < P; ++p) {
    const Vector t = inst.link_costs(observed[p], out.theta);
    double sp = 0.0;
    for (const ODPair& od : inst.demands)
      sp += od.demand * shortest_from(inst.network, t, od.origin)[od.destination];
    out.gaps[p] = t.dot(observed[p]) - sp;
    out.objective += out.gaps[p];
  }
  return out;
}

}  // namespace invopt
