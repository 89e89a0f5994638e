// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

// Distance-to-optimal-set estimators: facet search for a shared region,
// δ-net search otherwise, and the quantile (VaR) variant.

#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "invopt/datadriven.hpp"
#include "invopt/solvers.hpp"

namespace invopt {

namespace {

// Distance from x̂ to the face {x ∈ X : a_jᵀx = b_j}; nullopt when empty.
std::optional<double> face_distance(const detail::Canon& C, int j, const Vector& x_hat,
                                    double p, const SolverSettings& settings) {
  const int n = static_cast<int>(C.A.cols());
  if (p == 2.0) {
    const auto x = project_polyhedron(x_hat, C.A, C.b, C.A.row(j), Vector::Constant(1, C.b[j]));
    if (!x) return std::nullopt;
    return (*x - x_hat).norm();
  }
  LinearProgram lp;
  const int x0 = lp.add_variables(n, -kInf, kInf);
  for (int i = 0; i < C.A.rows(); ++i)
    detail::add_dense_row(lp, x0, C.A.row(i), i == j ? RowSense::Equal : RowSense::GreaterEqual,
                          C.b[i]);
  std::vector<int> vars(n);
  for (int k = 0; k < n; ++k) vars[k] = x0 + k;
  detail::add_norm_cost(lp, vars, x_hat, p);
  const SolveReport rep = lp.solve(settings);
  if (!rep.optimal()) return std::nullopt;
  return rep.objective;
}

// Loss vector of every observation at each net point, aggregated with `risk`.
struct NetBest {
  Vector theta;
  Vector losses;
  double value = kInf;
  int index = -1;
};

NetBest sweep_net(const LinearDataset& data, const std::vector<Vector>& net, const LossSpec& loss,
                  const RiskSpec& risk, int threads, const SolverSettings& settings) {
  const int N = data.size();
  const std::vector<double> w = detail::weights_of(data);
  std::vector<Vector> losses(net.size());
  std::vector<double> values(net.size(), kInf);
  detail::parallel_for(static_cast<int>(net.size()), threads, [&](int k) {
    Vector l(N);
    for (int i = 0; i < N; ++i) {
      const Observation& o = data.observations[i];
      try {
        l[i] = eval_loss(loss, net[k], o.x, data.model_for(o), settings);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ForwardUnbounded) throw;
        l[i] = kInf;
      }
    }
    values[k] = l.allFinite() ? aggregate_risk(l, w, risk) : kInf;
    losses[k] = std::move(l);
  });
  NetBest best;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (values[k] < best.value - 1e-12) {
      best.value = values[k];
      best.index = static_cast<int>(k);
    }
  }
  if (best.index < 0) throw Error(ErrorCode::EmptyNet, "every net point gives an unbounded forward");
  best.theta = net[best.index];
  best.losses = losses[best.index];
  return best;
}

}  // namespace

EstimationResult estimate_distance(const LinearDataset& data, const ParameterSpace& space,
                                   const DataDrivenOptions& options,
                                   const SolverSettings& settings) {
  data.validate();
  space.validate();
  if (options.epsilon < 0.0) throw Error(ErrorCode::InvalidArgument, "ε must be nonnegative");
  for (const auto& m : data.models) {
    if (m.num_vars() != space.dim)
      throw Error(ErrorCode::DimensionMismatch, "parameter dimension must equal n");
    if (m.has_integers())
      throw Error(ErrorCode::UnsupportedCombination, "distance loss needs continuous forwards");
  }
  const std::vector<double> w = detail::weights_of(data);
  const int N = data.size();
  EstimationResult r;
  r.diagnostics["epsilon"] = options.epsilon;
  r.diagnostics["delta"] = options.delta;

  if (data.shared_region) {
    const LinearForwardModel& model = data.models.front();
    const detail::Canon C = detail::canon(model);
    const int m = static_cast<int>(C.A.rows());
    int best_row = -1;
    double best_value = kInf;
    Vector best_losses, best_theta;
    int candidates = 0;
    for (int j = 0; j < m; ++j) {
      const auto theta = detail::normalize_direction(C.s * C.A.row(j).transpose(), space);
      if (!theta) continue;
      Vector l(N);
      bool empty = false;
      for (int i = 0; i < N && !empty; ++i) {
        const auto d = face_distance(C, j, data.observations[i].x, 2.0, settings);
        if (!d) empty = true;
        else l[i] = *d;
      }
      if (empty) continue;
      ++candidates;
      const double v = aggregate_risk(l, w, options.risk);
      if (v < best_value - 1e-12) {
        best_value = v;
        best_row = j;
        best_losses = l;
        best_theta = *theta;
      }
    }
    if (best_row < 0)
      throw Error(ErrorCode::InfeasibleTheta, "no facet normal of the region lies in Θ");
    r.theta = best_theta;
    r.objective = best_value;
    r.per_obs_loss = best_losses;
    r.diagnostics["row"] = best_row;
    r.diagnostics["net_size"] = candidates;
  } else {
    const std::vector<Vector> net = detail::theta_net(space, options.delta);
    LossSpec loss{LossKind::Distance};
    loss.epsilon = options.epsilon;
    const NetBest best = sweep_net(data, net, loss, options.risk, options.threads, settings);
    r.theta = best.theta;
    r.objective = best.value;
    r.per_obs_loss = best.losses;
    r.diagnostics["net_size"] = static_cast<double>(net.size());
    r.diagnostics["net_index"] = best.index;
  }
  return r;
}

EstimationResult estimate_var(const LinearDataset& data, const ParameterSpace& space, double chi,
                              double p, std::optional<double> bigM,
                              const DataDrivenOptions& options, const SolverSettings& settings) {
  data.validate();
  space.validate();
  if (!(chi > 0.0 && chi <= 1.0)) throw Error(ErrorCode::InvalidArgument, "χ must lie in (0, 1]");
  if (!(p == 1.0 || std::isinf(p)))
    throw Error(ErrorCode::InvalidArgument, "VaR distance norm must be 1 or infinity");
  const int N = data.size();
  const int need = static_cast<int>(std::ceil(N * chi - 1e-9));
  RiskSpec risk{RiskKind::VaR, chi, bigM};

  if (!data.shared_region) {
    const std::vector<Vector> net = detail::theta_net(space, options.delta);
    LossSpec loss{LossKind::Distance};
    loss.distance_p = p;
    loss.epsilon = options.epsilon;
    const NetBest best = sweep_net(data, net, loss, risk, options.threads, settings);
    EstimationResult r;
    r.theta = best.theta;
    r.objective = best.value;
    r.per_obs_loss = best.losses;
    Vector sel = Vector::Zero(N);
    for (int i = 0; i < N; ++i) sel[i] = best.losses[i] <= best.value + 1e-9 ? 1.0 : 0.0;
    r.vectors["selected"] = sel;
    r.diagnostics["net_size"] = static_cast<double>(net.size());
    r.diagnostics["required"] = need;
    return r;
  }

  const LinearForwardModel& model = data.models.front();
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  const int m = static_cast<int>(C.A.rows());
  std::optional<EstimationResult> best;
  for (int j = 0; j < m; ++j) {
    const auto theta = detail::normalize_direction(C.s * C.A.row(j).transpose(), space);
    if (!theta) continue;
    // Exact per-observation distances to the face, used to validate M.
    Vector dist(N);
    bool empty = false;
    for (int i = 0; i < N && !empty; ++i) {
      const auto d = face_distance(C, j, data.observations[i].x, p, settings);
      if (!d) empty = true;
      else dist[i] = *d;
    }
    if (empty) continue;

    int tau = 0, pi0 = 0;
    auto solve = [&](double M) -> std::pair<SolveReport, bool> {
      LinearProgram lp;
      tau = lp.add_variable(0.0, kInf, 1.0);
      pi0 = lp.add_variables(N, 0.0, 1.0, 0.0, VarKind::Integer);
      std::vector<LinearProgram::Term> count;
      for (int i = 0; i < N; ++i) count.emplace_back(pi0 + i, 1.0);
      lp.add_row(std::move(count), RowSense::GreaterEqual, need);
      for (int i = 0; i < N; ++i) {
        const Vector& xh = data.observations[i].x;
        const int x0 = lp.add_variables(n, -kInf, kInf);
        for (int r = 0; r < m; ++r)
          detail::add_dense_row(lp, x0, C.A.row(r), r == j ? RowSense::Equal : RowSense::GreaterEqual,
                                C.b[r]);
        // ‖x̂ − x‖_p ≤ τ + M(1 − π_i)
        if (std::isinf(p)) {
          for (int k = 0; k < n; ++k) {
            lp.add_row({{x0 + k, 1.0}, {tau, -1.0}, {pi0 + i, M}}, RowSense::LessEqual, M + xh[k]);
            lp.add_row({{x0 + k, -1.0}, {tau, -1.0}, {pi0 + i, M}}, RowSense::LessEqual, M - xh[k]);
          }
        } else {
          const int u0 = lp.add_variables(n, 0.0, kInf);
          std::vector<LinearProgram::Term> sum{{tau, -1.0}, {pi0 + i, M}};
          for (int k = 0; k < n; ++k) {
            lp.add_row({{u0 + k, 1.0}, {x0 + k, -1.0}}, RowSense::GreaterEqual, -xh[k]);
            lp.add_row({{u0 + k, 1.0}, {x0 + k, 1.0}}, RowSense::GreaterEqual, xh[k]);
            sum.emplace_back(u0 + k, 1.0);
          }
          lp.add_row(std::move(sum), RowSense::LessEqual, M);
        }
      }
      SolveReport rep = solve_mip(lp, settings);
      bool hit = false;
      if (rep.optimal())
        for (int i = 0; i < N; ++i)
          if (dist[i] >= rep.primal[tau] + M - 1e-6) hit = true;
      return {rep, hit};
    };
    const detail::BigMRun run =
        detail::run_with_bigm(bigM, solve, ErrorCode::InfeasibleTheta, "VaR estimator");
    const double value = run.report.primal[tau];
    if (!best || value < best->objective - 1e-9) {
      EstimationResult r;
      r.theta = *theta;
      r.objective = value;
      r.per_obs_loss = dist;
      Vector sel(N);
      for (int i = 0; i < N; ++i) sel[i] = std::round(run.report.primal[pi0 + i]);
      r.vectors["selected"] = sel;
      r.diagnostics["row"] = j;
      r.diagnostics["bigM"] = run.M;
      best = std::move(r);
    }
  }
  if (!best) throw Error(ErrorCode::InfeasibleTheta, "no facet normal of the region lies in Θ");
  best->diagnostics["required"] = need;
  // τ* must be the ⌈Nχ⌉-th smallest loss at θ*.
  best->diagnostics["quantile_gap"] =
      std::abs(aggregate_risk(best->per_obs_loss, detail::weights_of(data), risk) - best->objective);
  return *best;
}

}  // namespace invopt
