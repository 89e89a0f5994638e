// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "invopt/datadriven.hpp"
#include "invopt/solvers.hpp"

namespace invopt {

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::ASO: return "aso";
    case LossKind::RSO: return "rso";
    case LossKind::Distance: return "distance";
    case LossKind::VI: return "vi";
    case LossKind::KKT: return "kkt";
  }
  return "unknown";
}

ConvexForwardModel to_convex(const LinearForwardModel& model) {
  if (model.has_integers())
    throw Error(ErrorCode::UnsupportedCombination, "integer forwards have no convex view");
  const LinearForwardModel cm = canonicalize(model);
  ConvexForwardModel out;
  out.A = cm.A;
  out.b = cm.b;
  if (model.sense == Sense::Minimize) {
    out.objective.form = LinearObjective{};
    return out;
  }
  // max θᵀx is min Σ θ_j (−x_j).
  const int n = model.num_vars();
  BasisObjective basis;
  basis.offset = Vector::Zero(n);
  for (int j = 0; j < n; ++j) basis.bases.push_back(BasisFunction{{PowerTerm{j, -1.0, 1.0}}});
  basis.nonnegative.assign(n, false);
  out.objective.form = std::move(basis);
  return out;
}

namespace {

double forward_optimum(const LinearForwardModel& model, const Vector& theta,
                       const SolverSettings& settings) {
  LinearForwardModel fm = model;
  fm.c = theta;
  const SolveReport rep = fm.has_integers() ? solve_milp(fm, settings) : solve_lp(fm, settings);
  if (rep.status == SolveStatus::Unbounded)
    throw Error(ErrorCode::ForwardUnbounded, "forward problem is unbounded at θ");
  if (!rep.optimal()) throw Error(ErrorCode::InvalidArgument, "forward problem has no optimum");
  return rep.objective;
}

// min ‖x̂ − x‖_p over {Gx ≥ h}.
double polyhedron_distance(const Vector& x_hat, const Matrix& G, const Vector& h, double p,
                           const SolverSettings& settings) {
  const int n = static_cast<int>(x_hat.size());
  if (p == 2.0) {
    const auto x = project_polyhedron(x_hat, G, h, Matrix(0, n), Vector(0));
    if (!x) throw Error(ErrorCode::InvalidArgument, "optimal set is empty");
    return (*x - x_hat).norm();
  }
  LinearProgram lp;
  const int x0 = lp.add_variables(n, -kInf, kInf);
  for (int i = 0; i < G.rows(); ++i)
    detail::add_dense_row(lp, x0, G.row(i), RowSense::GreaterEqual, h[i]);
  std::vector<int> vars(n);
  std::iota(vars.begin(), vars.end(), x0);
  detail::add_norm_cost(lp, vars, x_hat, p);
  const SolveReport rep = lp.solve(settings);
  if (!rep.optimal()) throw Error(ErrorCode::InvalidArgument, "optimal set is empty");
  return rep.objective;
}

}  // namespace

double eval_loss(const LossSpec& loss, const Vector& theta, const Vector& x_hat,
                 const LinearForwardModel& model, const SolverSettings& settings) {
  const int n = model.num_vars();
  if (theta.size() != n || x_hat.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "θ and x̂ must have one entry per variable");
  switch (loss.kind) {
    case LossKind::ASO: {
      const double opt = forward_optimum(model, theta, settings);
      return std::abs(theta.dot(x_hat) - opt);
    }
    case LossKind::RSO: {
      const detail::Canon C = detail::canon(model);
      if (C.b.size() == 0 || C.b.minCoeff() <= 0.0)
        throw Error(ErrorCode::NormalizationRequired,
                    "relative sub-optimality needs a strictly positive right-hand side");
      const double opt = C.s * forward_optimum(model, theta, settings);
      if (opt <= 0.0)
        throw Error(ErrorCode::NormalizationRequired, "forward optimum must be positive",
                    {{"optimum", opt}});
      return std::abs(C.s * theta.dot(x_hat) / opt - 1.0);
    }
    case LossKind::Distance: {
      if (model.has_integers())
        throw Error(ErrorCode::UnsupportedCombination, "distance loss needs a continuous forward");
      if (loss.epsilon < 0.0) throw Error(ErrorCode::InvalidArgument, "ε must be nonnegative");
      const detail::Canon C = detail::canon(model);
      const double opt = C.s * forward_optimum(model, theta, settings);
      const double slack = loss.epsilon + 1e-9 * std::max(1.0, std::abs(opt));
      Matrix G(C.A.rows() + 1, n);
      Vector h(C.A.rows() + 1);
      G << C.A, -C.s * theta.transpose();
      h << C.b, -(opt + slack);
      return polyhedron_distance(x_hat, G, h, loss.distance_p, settings);
    }
    case LossKind::VI:
    case LossKind::KKT:
      return eval_loss(loss, theta, x_hat, to_convex(model), settings);
  }
  return 0.0;
}

double eval_loss(const LossSpec& loss, const Vector& theta, const Vector& x_hat,
                 const ConvexForwardModel& model, const SolverSettings& settings) {
  model.validate();
  const int n = model.num_vars();
  const int m = static_cast<int>(model.A.rows());
  if (x_hat.size() != n || theta.size() != model.objective.num_params(n))
    throw Error(ErrorCode::DimensionMismatch, "θ or x̂ has the wrong length");
  const Vector g = model.objective.gradient(x_hat, theta);
  if (loss.kind == LossKind::VI) {
    LinearProgram lp;
    const int x0 = lp.add_variables(n, -kInf, kInf);
    for (int j = 0; j < n; ++j) lp.set_cost(x0 + j, g[j]);
    for (int i = 0; i < m; ++i)
      detail::add_dense_row(lp, x0, model.A.row(i), RowSense::GreaterEqual, model.b[i]);
    const SolveReport rep = lp.solve(settings);
    if (rep.status == SolveStatus::Unbounded)
      throw Error(ErrorCode::ForwardUnbounded, "gradient is unbounded below on the region");
    if (!rep.optimal()) throw Error(ErrorCode::InvalidArgument, "forward region is empty");
    return std::abs(g.dot(x_hat) - rep.objective);
  }
  if (loss.kind == LossKind::KKT) {
    const Vector slack = (model.A * x_hat - model.b).cwiseAbs();
    LinearProgram lp;
    const int l0 = lp.add_variables(m, 0.0, kInf);
    for (int j = 0; j < n; ++j) {
      // r_j ≥ |g_j − Σ A_ij λ_i|
      const int r = lp.add_variable(0.0, kInf, 1.0);
      std::vector<LinearProgram::Term> up{{r, 1.0}}, dn{{r, 1.0}};
      for (int i = 0; i < m; ++i) {
        if (model.A(i, j) == 0.0) continue;
        up.emplace_back(l0 + i, model.A(i, j));
        dn.emplace_back(l0 + i, -model.A(i, j));
      }
      lp.add_row(std::move(up), RowSense::GreaterEqual, g[j]);
      lp.add_row(std::move(dn), RowSense::GreaterEqual, -g[j]);
    }
    if (std::isinf(loss.kkt_p)) {
      const int t = lp.add_variable(0.0, kInf, 1.0);
      for (int i = 0; i < m; ++i)
        if (slack[i] != 0.0) lp.add_row({{t, 1.0}, {l0 + i, -slack[i]}}, RowSense::GreaterEqual, 0.0);
    } else {
      for (int i = 0; i < m; ++i) lp.add_cost(l0 + i, slack[i]);
    }
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) throw Error(ErrorCode::InvalidArgument, "KKT residual problem failed");
    return std::max(0.0, rep.objective);
  }
  throw Error(ErrorCode::UnsupportedCombination,
              std::string(to_string(loss.kind)) + " loss needs a linear forward");
}

double aggregate_risk(const Vector& losses, const std::vector<double>& weights,
                      const RiskSpec& risk) {
  const int N = static_cast<int>(losses.size());
  if (N == 0) return 0.0;
  std::vector<double> w = weights.empty() ? std::vector<double>(N, 1.0) : weights;
  if (static_cast<int>(w.size()) != N)
    throw Error(ErrorCode::DimensionMismatch, "one weight per loss is required");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0.0) throw Error(ErrorCode::InvalidArgument, "weights must have positive sum");
  if (risk.kind == RiskKind::Expected) return detail::weighted_mean(losses, w);

  if (!(risk.level > 0.0 && risk.level <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "risk level must lie in (0, 1]");
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return losses[a] < losses[b]; });

  if (risk.kind == RiskKind::VaR) {
    double cum = 0.0;
    for (int k : order) {
      cum += w[k] / total;
      if (cum >= risk.level - 1e-12) return losses[k];
    }
    return losses[order.back()];
  }
  // CVaR: the infimum over τ is attained at one of the losses.
  std::vector<double> suffix_p(N + 1, 0.0), suffix_pl(N + 1, 0.0);
  for (int k = N - 1; k >= 0; --k) {
    const double p = w[order[k]] / total;
    suffix_p[k] = suffix_p[k + 1] + p;
    suffix_pl[k] = suffix_pl[k + 1] + p * losses[order[k]];
  }
  double best = kInf;
  for (int k = 0; k < N; ++k) {
    const double tau = losses[order[k]];
    const double tail = suffix_pl[k + 1] - tau * suffix_p[k + 1];
    best = std::min(best, tau + tail / risk.level);
  }
  return best;
}

}  // namespace invopt
