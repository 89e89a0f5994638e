// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/datadriven.hpp"

#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "invopt/solvers.hpp"
#include "invopt/space.hpp"

namespace invopt {

namespace {

// Affine expression Σ coef·var + constant.
struct Affine {
  std::vector<LinearProgram::Term> terms;
  double constant = 0.0;
};

// Adds e ≥ |expr| with cost `weight`; returns e.
int add_abs(LinearProgram& lp, const Affine& expr, double weight) {
  const int e = lp.add_variable(0.0, kInf, weight);
  std::vector<LinearProgram::Term> up{{e, 1.0}}, dn{{e, 1.0}};
  for (const auto& [v, c] : expr.terms) {
    up.emplace_back(v, -c);
    dn.emplace_back(v, c);
  }
  lp.add_row(std::move(up), RowSense::GreaterEqual, expr.constant);
  lp.add_row(std::move(dn), RowSense::GreaterEqual, -expr.constant);
  return e;
}

double total_weight(const std::vector<double>& w) {
  return std::accumulate(w.begin(), w.end(), 0.0);
}

void require_nonzero_theta(const ParameterSpace& space, const DataDrivenOptions& options) {
  if (options.allow_zero_theta) return;
  if (validate_parameter(Vector::Zero(space.dim), space, 1e-9).empty())
    throw Error(ErrorCode::NormalizationRequired,
                "Θ contains θ = 0, which makes every observation optimal; add a normalization "
                "or allow it explicitly");
}

void flag_degenerate(EstimationResult& r) {
  const bool zero = r.theta.size() == 0 || r.theta.cwiseAbs().maxCoeff() <= 1e-9;
  r.diagnostics["degenerate_theta"] = zero ? 1.0 : 0.0;
  if (zero) r.status = EstimateStatus::Degenerate;
}

// Re-evaluates the loss at θ* and records the largest deviation from the
// reformulation's per-observation values.
template <typename D>
void record_fidelity(EstimationResult& r, const D& data, const LossSpec& loss,
                     const SolverSettings& settings) {
  Vector ev(data.size());
  for (int i = 0; i < data.size(); ++i) {
    const Observation& o = data.observations[i];
    ev[i] = eval_loss(loss, r.theta, o.x, data.model_for(o), settings);
  }
  r.vectors["eval_loss"] = ev;
  r.diagnostics["fidelity_gap"] =
      ev.size() ? (ev - r.per_obs_loss).cwiseAbs().maxCoeff() : 0.0;
}

EstimationResult no_theta() {
  throw Error(ErrorCode::InfeasibleTheta, "Θ is empty");
}

}  // namespace

EstimationResult estimate_aso(const LinearDataset& data, const ParameterSpace& space,
                              const DataDrivenOptions& options,
                              const SolverSettings& settings) {
  data.validate();
  space.validate();
  require_nonzero_theta(space, options);
  const std::vector<double> w = detail::weights_of(data);
  const double W = total_weight(w);
  const int N = data.size();
  std::vector<detail::Canon> canon;
  for (const auto& m : data.models) {
    if (m.num_vars() != space.dim)
      throw Error(ErrorCode::DimensionMismatch, "parameter dimension must equal n");
    if (m.has_integers())
      throw Error(ErrorCode::UnsupportedCombination, "duality reformulation needs continuous forwards");
    canon.push_back(detail::canon(m));
  }
  const int n = space.dim;

  // Shared region with feasible observations: every term is nonnegative by
  // weak duality, so the absolute values drop and the sum aggregates into
  // s·x̄ᵀθ − bᵀλ with x̄ the weighted mean observation.
  bool aggregate = data.shared_region;
  for (const Observation& o : data.observations)
    if (aggregate && detail::max_violation(canon[0].A, canon[0].b, o.x) > 1e-9) aggregate = false;
  if (aggregate) {
    const detail::Canon& C = canon[0];
    Vector xbar = Vector::Zero(n);
    for (int i = 0; i < N; ++i) xbar += (w[i] / W) * data.observations[i].x;
    auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                    -> std::optional<EstimationResult> {
      LinearProgram lp;
      const int t0 = add_theta(lp, space, piece);
      const int l0 = lp.add_variables(static_cast<int>(C.A.rows()), 0.0, kInf);
      detail::add_stationarity(lp, C.A, l0, C.s * Matrix::Identity(n, n), t0, Vector::Zero(n));
      for (int j = 0; j < n; ++j) lp.add_cost(t0 + j, C.s * xbar[j]);
      for (int r = 0; r < C.b.size(); ++r) lp.add_cost(l0 + r, -C.b[r]);
      const SolveReport rep = lp.solve(settings);
      if (!rep.optimal()) return std::nullopt;
      EstimationResult r;
      r.theta = rep.primal.segment(t0, n);
      const Vector lam = rep.primal.segment(l0, C.A.rows());
      const double dual_value = C.b.dot(lam);
      r.per_obs_loss.resize(N);
      for (int i = 0; i < N; ++i)
        r.per_obs_loss[i] = std::max(0.0, C.s * r.theta.dot(data.observations[i].x) - dual_value);
      r.objective = detail::weighted_mean(r.per_obs_loss, w);
      r.duals.push_back(lam);
      return r;
    });
    if (!res) return no_theta();
    res->diagnostics["aggregated"] = 1.0;
    record_fidelity(*res, data, LossSpec{LossKind::ASO}, settings);
    flag_degenerate(*res);
    return *res;
  }

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    // One λ block per instance (a single one for a shared region).
    std::vector<int> lam(canon.size());
    for (std::size_t k = 0; k < canon.size(); ++k) {
      const detail::Canon& C = canon[k];
      lam[k] = lp.add_variables(static_cast<int>(C.A.rows()), 0.0, kInf);
      detail::add_stationarity(lp, C.A, lam[k], C.s * Matrix::Identity(n, n), t0,
                               Vector::Zero(n));
    }
    std::vector<int> e(N);
    for (int i = 0; i < N; ++i) {
      const Observation& o = data.observations[i];
      const detail::Canon& C = canon[o.instance];
      Affine a;
      for (int j = 0; j < n; ++j)
        if (o.x[j] != 0.0) a.terms.emplace_back(t0 + j, C.s * o.x[j]);
      for (int r = 0; r < C.b.size(); ++r)
        if (C.b[r] != 0.0) a.terms.emplace_back(lam[o.instance] + r, -C.b[r]);
      e[i] = add_abs(lp, a, w[i] / W);
    }
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, n);
    r.objective = rep.objective;
    r.per_obs_loss.resize(N);
    for (int i = 0; i < N; ++i) r.per_obs_loss[i] = rep.primal[e[i]];
    for (std::size_t k = 0; k < canon.size(); ++k)
      r.duals.push_back(rep.primal.segment(lam[k], canon[k].A.rows()));
    return r;
  });
  if (!res) return no_theta();
  record_fidelity(*res, data, LossSpec{LossKind::ASO}, settings);
  flag_degenerate(*res);
  return *res;
}

EstimationResult estimate_rso(const LinearDataset& data, const ParameterSpace& space,
                              const DataDrivenOptions& options,
                              const SolverSettings& settings) {
  (void)options;
  data.validate();
  space.validate();
  const std::vector<double> w = detail::weights_of(data);
  const double W = total_weight(w);
  const int N = data.size();
  const int n = space.dim;
  std::vector<detail::Canon> canon;
  for (const auto& m : data.models) {
    if (m.num_vars() != n)
      throw Error(ErrorCode::DimensionMismatch, "parameter dimension must equal n");
    if (m.has_integers())
      throw Error(ErrorCode::UnsupportedCombination, "duality reformulation needs continuous forwards");
    canon.push_back(detail::canon(m));
    if (canon.back().b.size() == 0 || canon.back().b.minCoeff() <= 0.0)
      throw Error(ErrorCode::NormalizationRequired,
                  "relative sub-optimality needs b > 0 for every instance");
  }

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    std::vector<int> lam(canon.size());
    for (std::size_t k = 0; k < canon.size(); ++k) {
      const detail::Canon& C = canon[k];
      lam[k] = lp.add_variables(static_cast<int>(C.A.rows()), 0.0, kInf);
      detail::add_stationarity(lp, C.A, lam[k], C.s * Matrix::Identity(n, n), t0,
                               Vector::Zero(n));
      detail::add_dense_row(lp, lam[k], C.b.transpose(), RowSense::Equal, 1.0);
    }
    std::vector<int> e(N);
    for (int i = 0; i < N; ++i) {
      const Observation& o = data.observations[i];
      const detail::Canon& C = canon[o.instance];
      Affine a;
      a.constant = -1.0;
      for (int j = 0; j < n; ++j)
        if (o.x[j] != 0.0) a.terms.emplace_back(t0 + j, C.s * o.x[j]);
      e[i] = add_abs(lp, a, w[i] / W);
    }
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, n);
    r.objective = rep.objective;
    r.per_obs_loss.resize(N);
    for (int i = 0; i < N; ++i) r.per_obs_loss[i] = rep.primal[e[i]];
    for (std::size_t k = 0; k < canon.size(); ++k)
      r.duals.push_back(rep.primal.segment(lam[k], canon[k].A.rows()));
    return r;
  });
  if (!res) return no_theta();
  record_fidelity(*res, data, LossSpec{LossKind::RSO}, settings);
  flag_degenerate(*res);
  return *res;
}

namespace {

struct Gradients {
  std::vector<Matrix> J;
  std::vector<Vector> g0;
};

Gradients affine_gradients(const ConvexDataset& data, const ParameterSpace& space) {
  Gradients g;
  for (const Observation& o : data.observations) {
    const ConvexForwardModel& m = data.model_for(o);
    m.validate();
    if (m.objective.num_params(m.num_vars()) != space.dim)
      throw Error(ErrorCode::DimensionMismatch, "parameter dimension must match the objective");
    auto [J, g0] = m.objective.gradient_affine(o.x, m.num_vars());
    g.J.push_back(std::move(J));
    g.g0.push_back(std::move(g0));
  }
  return g;
}

SpacePiece signed_piece(const SpacePiece& piece, const ConvexDataset& data) {
  SpacePiece p = piece;
  for (const auto& m : data.models) p = detail::with_objective_signs(p, m.objective);
  return p;
}

bool piece_empty(const SpacePiece& p) {
  for (int i = 0; i < p.lower.size(); ++i)
    if (p.lower[i] > p.upper[i]) return true;
  return false;
}

}  // namespace

EstimationResult estimate_vi(const ConvexDataset& data, const ParameterSpace& space,
                             const DataDrivenOptions& options,
                             const SolverSettings& settings) {
  (void)options;
  data.validate();
  space.validate();
  const Gradients G = affine_gradients(data, space);
  const std::vector<double> w = detail::weights_of(data);
  const double W = total_weight(w);
  const int N = data.size();
  const int d = space.dim;

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& raw)
                                                  -> std::optional<EstimationResult> {
    const SpacePiece piece = signed_piece(raw, data);
    if (piece_empty(piece)) return std::nullopt;
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    std::vector<int> e(N), lam(N);
    for (int i = 0; i < N; ++i) {
      const Observation& o = data.observations[i];
      const ConvexForwardModel& m = data.model_for(o);
      lam[i] = lp.add_variables(static_cast<int>(m.A.rows()), 0.0, kInf);
      detail::add_stationarity(lp, m.A, lam[i], G.J[i], t0, G.g0[i]);
      // |∇f(x̂, θ)ᵀx̂ − bᵀλ| with ∇f = g0 + Jθ.
      Affine a;
      a.constant = G.g0[i].dot(o.x);
      const Vector jx = G.J[i].transpose() * o.x;
      for (int k = 0; k < d; ++k)
        if (jx[k] != 0.0) a.terms.emplace_back(t0 + k, jx[k]);
      for (int r = 0; r < m.b.size(); ++r)
        if (m.b[r] != 0.0) a.terms.emplace_back(lam[i] + r, -m.b[r]);
      e[i] = add_abs(lp, a, w[i] / W);
    }
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, d);
    r.objective = rep.objective;
    r.per_obs_loss.resize(N);
    for (int i = 0; i < N; ++i) {
      r.per_obs_loss[i] = rep.primal[e[i]];
      r.duals.push_back(rep.primal.segment(lam[i], data.model_for(data.observations[i]).A.rows()));
    }
    return r;
  });
  if (!res) return no_theta();
  record_fidelity(*res, data, LossSpec{LossKind::VI}, settings);
  res->diagnostics["degenerate_theta"] = res->theta.cwiseAbs().maxCoeff() <= 1e-9 ? 1.0 : 0.0;
  return *res;
}

EstimationResult estimate_kkt(const ConvexDataset& data, const ParameterSpace& space,
                              const DataDrivenOptions& options,
                              const SolverSettings& settings) {
  data.validate();
  space.validate();
  const double p = options.kkt_p;
  if (!(p == 1.0 || std::isinf(p)))
    throw Error(ErrorCode::InvalidArgument, "complementarity norm must be 1 or infinity");
  const Gradients G = affine_gradients(data, space);
  const std::vector<double> w = detail::weights_of(data);
  const double W = total_weight(w);
  const int N = data.size();
  const int d = space.dim;

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& raw)
                                                  -> std::optional<EstimationResult> {
    const SpacePiece piece = signed_piece(raw, data);
    if (piece_empty(piece)) return std::nullopt;
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    std::vector<std::vector<int>> loss_vars(N);
    std::vector<int> lam(N);
    for (int i = 0; i < N; ++i) {
      const Observation& o = data.observations[i];
      const ConvexForwardModel& m = data.model_for(o);
      const int mi = static_cast<int>(m.A.rows());
      const double wi = w[i] / W;
      lam[i] = lp.add_variables(mi, 0.0, kInf);
      // Stationarity residual g0 + Jθ − Aᵀλ, one epigraph per coordinate.
      for (int j = 0; j < m.num_vars(); ++j) {
        Affine a;
        a.constant = G.g0[i][j];
        for (int k = 0; k < d; ++k)
          if (G.J[i](j, k) != 0.0) a.terms.emplace_back(t0 + k, G.J[i](j, k));
        for (int r = 0; r < mi; ++r)
          if (m.A(r, j) != 0.0) a.terms.emplace_back(lam[i] + r, -m.A(r, j));
        loss_vars[i].push_back(add_abs(lp, a, wi));
      }
      const Vector slack = (m.A * o.x - m.b).cwiseAbs();
      if (std::isinf(p)) {
        const int t = lp.add_variable(0.0, kInf, wi);
        for (int r = 0; r < mi; ++r)
          if (slack[r] != 0.0)
            lp.add_row({{t, 1.0}, {lam[i] + r, -slack[r]}}, RowSense::GreaterEqual, 0.0);
        loss_vars[i].push_back(t);
      } else {
        const int t = lp.add_variable(0.0, kInf, wi);
        std::vector<LinearProgram::Term> row{{t, 1.0}};
        for (int r = 0; r < mi; ++r)
          if (slack[r] != 0.0) row.emplace_back(lam[i] + r, -slack[r]);
        lp.add_row(std::move(row), RowSense::GreaterEqual, 0.0);
        loss_vars[i].push_back(t);
      }
    }
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, d);
    r.objective = rep.objective;
    r.per_obs_loss = Vector::Zero(N);
    for (int i = 0; i < N; ++i) {
      for (int v : loss_vars[i]) r.per_obs_loss[i] += rep.primal[v];
      r.duals.push_back(rep.primal.segment(lam[i], data.model_for(data.observations[i]).A.rows()));
    }
    return r;
  });
  if (!res) return no_theta();
  LossSpec loss{LossKind::KKT};
  loss.kkt_p = p;
  record_fidelity(*res, data, loss, settings);
  res->diagnostics["degenerate_theta"] = res->theta.cwiseAbs().maxCoeff() <= 1e-9 ? 1.0 : 0.0;
  return *res;
}

}  // namespace invopt
