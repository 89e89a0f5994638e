// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/classical.hpp"

#include <cmath>

#include "internal.hpp"
#include "invopt/oracles.hpp"
#include "invopt/solvers.hpp"
#include "invopt/space.hpp"

namespace invopt {

using detail::add_dense_row;
using detail::add_stationarity;

namespace {

constexpr double kCertTol = 1e-6;

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

void check_observation(const Matrix& A, const Vector& b, const Vector& x_hat) {
  require(x_hat.size() == A.cols(), ErrorCode::DimensionMismatch,
          "observation length differs from the number of variables");
  const double v = detail::max_violation(A, b, x_hat);
  if (v > 1e-7)
    throw Error(ErrorCode::ObservationInfeasible, "observation violates the forward constraints",
                {{"violation", v}});
}

void finish_certificate(EstimationResult& r, double gap) {
  r.diagnostics["certificate_gap"] = gap;
  r.per_obs_loss = Vector::Constant(1, std::max(0.0, gap));
  r.status = gap <= kCertTol ? EstimateStatus::Optimal : EstimateStatus::Degenerate;
}

// Rows gating complementarity with binaries: λ_i ≤ M z_i and
// (A_i x − b_i) ≤ M (1 − z_i), where the slack expression is given as terms
// plus a constant.
struct GateRows {
  int lambda0 = 0;
  int z0 = 0;
};

}  // namespace

EstimationResult estimate_lp_objective(const LinearForwardModel& model, const Vector& x_hat,
                                       const ParameterSpace& space, DualityMode mode,
                                       const SolverSettings& settings) {
  space.validate();
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  const int m = static_cast<int>(C.A.rows());
  require(space.dim == n, ErrorCode::DimensionMismatch, "parameter dimension must equal n");
  check_observation(C.A, C.b, x_hat);
  const Vector slack = C.A * x_hat - C.b;
  const Matrix J = C.s * Matrix::Identity(n, n);

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    const int l0 = lp.add_variables(m, 0.0, kInf);
    add_stationarity(lp, C.A, l0, J, t0, Vector::Zero(n));
    if (mode == DualityMode::ComplementarySlackness) {
      for (int i = 0; i < m; ++i)
        if (slack[i] > settings.activity_tol) lp.set_bounds(l0 + i, 0.0, 0.0);
    } else {
      std::vector<LinearProgram::Term> t;
      for (int j = 0; j < n; ++j)
        if (x_hat[j] != 0.0) t.emplace_back(t0 + j, C.s * x_hat[j]);
      for (int i = 0; i < m; ++i)
        if (C.b[i] != 0.0) t.emplace_back(l0 + i, -C.b[i]);
      lp.add_row(std::move(t), RowSense::Equal, 0.0);
    }
    add_space_objective(lp, t0, space);
    const SolveReport rep = lp.solve(settings);
    if (rep.status == SolveStatus::Unbounded)
      throw Error(ErrorCode::InvalidArgument, "inverse objective is unbounded below on Θ");
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, n);
    r.objective = space.objective(r.theta);
    r.duals.push_back(rep.primal.segment(l0, m));
    r.diagnostics["lp_iterations"] = static_cast<double>(rep.iterations);
    return r;
  });
  if (!res)
    throw Error(ErrorCode::InverseInfeasible, "no θ in Θ makes the observation optimal");
  finish_certificate(*res, detail::forward_gap(model, res->theta, x_hat, settings));
  res->diagnostics["mode_cs"] = mode == DualityMode::ComplementarySlackness ? 1.0 : 0.0;
  return *res;
}

EstimationResult estimate_lp_joint(const LinearForwardModel& model, const Vector& x_hat,
                                   const ParameterSpace& space, std::optional<double> bigM,
                                   const SolverSettings& settings) {
  space.validate();
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  const int m = static_cast<int>(C.A.rows());
  require(space.dim == n + m, ErrorCode::DimensionMismatch,
          "joint space must have dimension n + m (θ then ψ)");
  require(x_hat.size() == n, ErrorCode::DimensionMismatch, "observation has the wrong length");
  const Vector ax = C.A * x_hat;
  const Matrix J = C.s * Matrix::Identity(n, n);

  double used_M = 0.0;
  int retries = 0;
  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    int t0 = 0, l0 = 0;
    auto solve = [&](double M) -> std::pair<SolveReport, bool> {
      LinearProgram lp;
      t0 = add_theta(lp, space, piece);
      l0 = lp.add_variables(m, 0.0, kInf);
      const int z0 = lp.add_variables(m, 0.0, 1.0, 0.0, VarKind::Integer);
      add_stationarity(lp, C.A, l0, J, t0, Vector::Zero(n));
      for (int i = 0; i < m; ++i) {
        const int psi = t0 + n + i;
        lp.add_row({{psi, 1.0}}, RowSense::LessEqual, ax[i]);
        lp.add_row({{l0 + i, 1.0}, {z0 + i, -M}}, RowSense::LessEqual, 0.0);
        lp.add_row({{psi, -1.0}, {z0 + i, M}}, RowSense::LessEqual, M - ax[i]);
      }
      add_space_objective(lp, t0, space);
      SolveReport rep = solve_mip(lp, settings);
      bool hit = false;
      if (rep.optimal()) {
        for (int i = 0; i < m; ++i) {
          if (rep.primal[l0 + i] >= M - 1e-6) hit = true;
          if (ax[i] - rep.primal[t0 + n + i] >= M - 1e-6) hit = true;
        }
      }
      return {rep, hit};
    };
    try {
      const detail::BigMRun run =
          detail::run_with_bigm(bigM, solve, ErrorCode::InverseInfeasible, "joint inverse");
      used_M = run.M;
      retries = run.retries;
      EstimationResult r;
      r.theta = run.report.primal.segment(t0, n);
      r.vectors["rhs"] = run.report.primal.segment(t0 + n, m);
      Vector stacked(n + m);
      stacked << r.theta, r.vectors["rhs"];
      r.objective = space.objective(stacked);
      r.vectors["theta_psi"] = stacked;
      r.duals.push_back(run.report.primal.segment(l0, m));
      return r;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InverseInfeasible) return std::nullopt;
      throw;
    }
  });
  if (!res)
    throw Error(ErrorCode::InverseInfeasible, "no (θ, ψ) in Θ makes the observation optimal");
  res->diagnostics["bigM"] = used_M;
  res->diagnostics["bigM_retries"] = retries;
  LinearForwardModel fm = canonicalize(model);
  fm.b = res->vectors["rhs"];
  finish_certificate(*res, detail::forward_gap(fm, C.s * res->theta, x_hat, settings));
  return *res;
}

namespace {

// Distance-minimizing replacement for row j under option (a): the new row
// carries a positive multiplier, or (b): c lies in the cone of the other
// active rows and the new row only needs to pass through x̂.
std::optional<Vector> facet_candidate(const Matrix& A, const Vector& b, const Vector& c,
                                      const Vector& x_hat, int j, const std::vector<int>& K,
                                      double p, bool positive_multiplier, double t_floor,
                                      const SolverSettings& settings) {
  const int n = static_cast<int>(A.cols());
  LinearProgram lp;
  const int phi0 = lp.add_variables(n, -kInf, kInf);
  add_dense_row(lp, phi0, x_hat.transpose(), RowSense::Equal, b[j]);
  if (positive_multiplier) {
    const int t = lp.add_variable(t_floor, kInf);
    const int mu0 = lp.add_variables(static_cast<int>(K.size()), 0.0, kInf);
    for (int l = 0; l < n; ++l) {
      std::vector<LinearProgram::Term> terms{{phi0 + l, 1.0}};
      if (c[l] != 0.0) terms.emplace_back(t, -c[l]);
      for (std::size_t k = 0; k < K.size(); ++k)
        if (A(K[k], l) != 0.0) terms.emplace_back(mu0 + static_cast<int>(k), A(K[k], l));
      lp.add_row(std::move(terms), RowSense::Equal, 0.0);
    }
  }
  std::vector<int> vars(n);
  for (int l = 0; l < n; ++l) vars[l] = phi0 + l;
  detail::add_norm_cost(lp, vars, A.row(j).transpose(), p);
  const SolveReport rep = lp.solve(settings);
  if (!rep.optimal()) return std::nullopt;
  return Vector(rep.primal.segment(phi0, n));
}

bool in_cone(const Matrix& A, const std::vector<int>& K, const Vector& c,
             const SolverSettings& settings) {
  const int n = static_cast<int>(A.cols());
  LinearProgram lp;
  const int mu0 = lp.add_variables(static_cast<int>(K.size()), 0.0, kInf);
  for (int l = 0; l < n; ++l) {
    std::vector<LinearProgram::Term> t;
    for (std::size_t k = 0; k < K.size(); ++k)
      if (A(K[k], l) != 0.0) t.emplace_back(mu0 + static_cast<int>(k), A(K[k], l));
    if (t.empty()) {
      if (std::abs(c[l]) > 1e-12) return false;
      continue;
    }
    lp.add_row(std::move(t), RowSense::Equal, c[l]);
  }
  return lp.solve(settings).optimal();
}

double norm_p(const Vector& v, double p) {
  return std::isinf(p) ? v.cwiseAbs().maxCoeff() : v.cwiseAbs().sum();
}

}  // namespace

EstimationResult estimate_constraint_matrix(const LinearForwardModel& model,
                                            const Vector& x_hat, double p,
                                            const SolverSettings& settings) {
  require(p == 1.0 || std::isinf(p), ErrorCode::InvalidArgument, "norm must be 1 or infinity");
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  const int m = static_cast<int>(C.A.rows());
  require(x_hat.size() == n, ErrorCode::DimensionMismatch, "observation has the wrong length");
  const Vector c = C.s * model.c;
  const Vector slack = C.A * x_hat - C.b;

  int best_j = -1;
  double best_d = kInf;
  Vector best_row;
  double best_gap = 0.0;
  int candidates = 0;
  for (int j = 0; j < m; ++j) {
    bool others_ok = true;
    std::vector<int> K;
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      if (slack[i] < -1e-7) others_ok = false;
      if (std::abs(slack[i]) <= settings.activity_tol) K.push_back(i);
    }
    if (!others_ok) continue;

    auto verify = [&](const Vector& phi, double& gap) {
      LinearForwardModel fm;
      fm.A = C.A;
      fm.A.row(j) = phi.transpose();
      fm.b = C.b;
      fm.c = c;
      gap = detail::forward_gap(fm, c, x_hat, settings);
      return gap <= kCertTol * std::max(1.0, std::abs(c.dot(x_hat)));
    };

    std::vector<Vector> cands;
    auto a = facet_candidate(C.A, C.b, c, x_hat, j, K, p, true, 0.0, settings);
    double gap = 0.0;
    if (a && !verify(*a, gap)) {
      const double floor = 1e-6 * std::max(1.0, C.A.row(j).cwiseAbs().sum()) /
                           std::max(1e-12, c.cwiseAbs().sum());
      a = facet_candidate(C.A, C.b, c, x_hat, j, K, p, true, floor, settings);
    }
    if (a) cands.push_back(*a);
    if (in_cone(C.A, K, c, settings)) {
      auto bcand = facet_candidate(C.A, C.b, c, x_hat, j, K, p, false, 0.0, settings);
      if (bcand) cands.push_back(*bcand);
    }
    for (const Vector& phi : cands) {
      if (!verify(phi, gap)) continue;
      ++candidates;
      const double d = norm_p(phi - C.A.row(j).transpose(), p);
      if (d < best_d - 1e-9) {
        best_d = d;
        best_j = j;
        best_row = phi;
        best_gap = gap;
      }
    }
  }
  if (best_j < 0)
    throw Error(ErrorCode::NoCandidateFacet,
                "no single-row perturbation makes the observation optimal");
  EstimationResult r;
  r.theta = best_row;
  r.objective = best_d;
  Matrix Phi = C.A;
  Phi.row(best_j) = best_row.transpose();
  r.matrix = Phi;
  r.vectors["rhs"] = C.b;
  r.diagnostics["row"] = best_j;
  r.diagnostics["candidates"] = candidates;
  finish_certificate(r, best_gap);
  return r;
}

EstimationResult estimate_constraints_feasibility(const LinearForwardModel& model,
                                                  const Vector& x_hat,
                                                  const FeasibilityOptions& options,
                                                  const SolverSettings& settings) {
  const double p = options.norm_p;
  require(p == 1.0 || std::isinf(p), ErrorCode::InvalidArgument, "norm must be 1 or infinity");
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  const int m = static_cast<int>(C.A.rows());
  require(x_hat.size() == n, ErrorCode::DimensionMismatch, "observation has the wrong length");
  const int dim = m * n + m;
  Vector prior(dim);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < n; ++l) prior[i * n + l] = C.A(i, l);
  prior.tail(m) = C.b;

  ParameterSpace space = options.space.dim == 0 ? ParameterSpace::free(dim) : options.space;
  require(space.dim == dim, ErrorCode::DimensionMismatch,
          "feasibility space must have dimension m·n + m");
  space.mode = ObjectiveMode::Zero;

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    for (int k = 0; k < dim; ++k) {
      const bool is_rhs = k >= m * n;
      const bool fixed = (options.adjust == AdjustMode::MatrixOnly && is_rhs) ||
                         (options.adjust == AdjustMode::RhsOnly && !is_rhs);
      if (!fixed) continue;
      const double lo = std::max(lp.lower(t0 + k), prior[k]);
      const double hi = std::min(lp.upper(t0 + k), prior[k]);
      if (lo > hi) return std::nullopt;
      lp.set_bounds(t0 + k, prior[k], prior[k]);
    }
    for (int i = 0; i < m; ++i) {
      std::vector<LinearProgram::Term> t;
      for (int l = 0; l < n; ++l)
        if (x_hat[l] != 0.0) t.emplace_back(t0 + i * n + l, x_hat[l]);
      t.emplace_back(t0 + m * n + i, -1.0);
      lp.add_row(std::move(t), RowSense::GreaterEqual, 0.0);
    }
    std::vector<int> vars(dim);
    for (int k = 0; k < dim; ++k) vars[k] = t0 + k;
    detail::add_norm_cost(lp, vars, prior, p);
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, dim);
    r.objective = norm_p(r.theta - prior, p);
    return r;
  });
  if (!res) throw Error(ErrorCode::InverseInfeasible, "no (Φ, ψ) in Θ keeps the observation feasible");

  const Vector c = C.s * model.c;
  Matrix Phi(m + 1, n);
  Vector psi(m + 1);
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < n; ++l) Phi(i, l) = res->theta[i * n + l];
    psi[i] = res->theta[m * n + i];
  }
  Phi.row(m) = c.transpose();
  psi[m] = c.dot(x_hat);
  res->matrix = Phi;
  res->vectors["rhs"] = psi;
  LinearForwardModel fm;
  fm.A = Phi;
  fm.b = psi;
  fm.c = c;
  finish_certificate(*res, detail::forward_gap(fm, c, x_hat, settings));
  return *res;
}

EstimationResult estimate_milp_cutting_plane(const LinearForwardModel& model,
                                             const Vector& x_hat, const ParameterSpace& space,
                                             std::size_t max_cuts,
                                             const SolverSettings& settings) {
  space.validate();
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  require(space.dim == n, ErrorCode::DimensionMismatch, "parameter dimension must equal n");
  check_observation(C.A, C.b, x_hat);
  const double s = C.s;
  std::size_t total_forward = 0;

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    std::vector<Vector> cuts;
    std::size_t forward = 0;
    while (true) {
      LinearProgram lp;
      const int t0 = add_theta(lp, space, piece);
      for (const Vector& xt : cuts) {
        std::vector<LinearProgram::Term> t;
        for (int j = 0; j < n; ++j) {
          const double coef = s * (x_hat[j] - xt[j]);
          if (coef != 0.0) t.emplace_back(t0 + j, coef);
        }
        lp.add_row(std::move(t), RowSense::LessEqual, 0.0);
      }
      add_space_objective(lp, t0, space);
      const SolveReport master = lp.solve(settings);
      if (master.status == SolveStatus::Unbounded)
        throw Error(ErrorCode::InvalidArgument, "master problem unbounded; Θ must be compact");
      if (!master.optimal()) return std::nullopt;
      const Vector theta = master.primal.segment(t0, n);

      LinearForwardModel fm = model;
      fm.c = theta;
      const SolveReport fwd = solve_milp(fm, settings);
      ++forward;
      ++total_forward;
      if (fwd.status == SolveStatus::Unbounded)
        throw Error(ErrorCode::ForwardUnbounded, "forward problem unbounded at a master iterate");
      if (fwd.status == SolveStatus::IterationLimit)
        throw Error(ErrorCode::IterationLimit, "forward MILP hit the node cap");
      if (!fwd.optimal())
        throw Error(ErrorCode::InvalidArgument, "forward MILP infeasible");
      if (s * theta.dot(x_hat) <= s * fwd.objective + 1e-7) {
        EstimationResult r;
        r.theta = theta;
        r.objective = space.objective(theta);
        r.diagnostics["cuts_added"] = static_cast<double>(cuts.size());
        r.diagnostics["forward_solves"] = static_cast<double>(forward);
        return r;
      }
      if (cuts.size() >= max_cuts)
        throw Error(ErrorCode::IterationLimit, "cutting-plane cut cap reached",
                    {{"cuts", static_cast<double>(cuts.size())}});
      cuts.push_back(fwd.primal);
    }
  });
  if (!res)
    throw Error(ErrorCode::InverseInfeasible, "master problem infeasible: no θ in Θ makes x̂ optimal");
  res->diagnostics["forward_solves_total"] = static_cast<double>(total_forward);
  finish_certificate(*res, detail::forward_gap(model, res->theta, x_hat, settings));
  return *res;
}

EstimationResult estimate_mdp_rewards(const MDPModel& mdp, const Policy& policy,
                                      const SolverSettings& settings) {
  mdp.validate();
  const int S = mdp.num_states, A = mdp.num_actions;
  require(static_cast<int>(policy.size()) == S, ErrorCode::DimensionMismatch,
          "policy must assign an action to every state");
  for (int a : policy)
    require(a >= 0 && a < A, ErrorCode::InvalidArgument, "policy action out of range");
  const ParameterSpace& space = mdp.reward_space;
  space.validate();

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    const int v0 = lp.add_variables(S, -kInf, kInf);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        // v_s − θ(s,a) − γ Σ p(s'|s,a) v_s' (≥ or =) 0
        std::vector<double> coef(S, 0.0);
        coef[s] += 1.0;
        for (int sp = 0; sp < S; ++sp) coef[sp] -= mdp.gamma * mdp.transition[a](s, sp);
        std::vector<LinearProgram::Term> t{{t0 + mdp.index(s, a), -1.0}};
        for (int sp = 0; sp < S; ++sp)
          if (coef[sp] != 0.0) t.emplace_back(v0 + sp, coef[sp]);
        lp.add_row(std::move(t), a == policy[s] ? RowSense::Equal : RowSense::GreaterEqual, 0.0);
      }
    }
    add_space_objective(lp, t0, space);
    const SolveReport rep = lp.solve(settings);
    if (rep.status == SolveStatus::Unbounded)
      throw Error(ErrorCode::InvalidArgument, "inverse objective is unbounded below on Θ");
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, S * A);
    r.vectors["values"] = rep.primal.segment(v0, S);
    r.objective = space.objective(r.theta);
    return r;
  });
  if (!res) throw Error(ErrorCode::InverseInfeasible, "no reward in Θ makes the policy optimal");
  const testing::MDPSolution vi = testing::mdp_value_iteration(mdp, res->theta);
  const Vector pv = testing::policy_value(mdp, res->theta, policy);
  const double gap = (vi.values - pv).maxCoeff();
  res->diagnostics["value_iterations"] = static_cast<double>(vi.iterations);
  finish_certificate(*res, std::max(0.0, gap));
  return *res;
}

namespace {

// Rows of the complementarity MILP shared by the optimal-value and partial
// inverses: x free with Ax ≥ b, Aᵀλ = sθ, and big-M gates. Returns the first
// index of x, λ and z.
struct CsBlock {
  int x0, l0, z0;
};

CsBlock add_cs_block(LinearProgram& lp, const detail::Canon& C, int t0, double M) {
  const int n = static_cast<int>(C.A.cols());
  const int m = static_cast<int>(C.A.rows());
  CsBlock blk;
  blk.x0 = lp.add_variables(n, -kInf, kInf);
  blk.l0 = lp.add_variables(m, 0.0, kInf);
  blk.z0 = lp.add_variables(m, 0.0, 1.0, 0.0, VarKind::Integer);
  add_stationarity(lp, C.A, blk.l0, C.s * Matrix::Identity(n, n), t0, Vector::Zero(n));
  for (int i = 0; i < m; ++i) {
    add_dense_row(lp, blk.x0, C.A.row(i), RowSense::GreaterEqual, C.b[i]);
    lp.add_row({{blk.l0 + i, 1.0}, {blk.z0 + i, -M}}, RowSense::LessEqual, 0.0);
    std::vector<LinearProgram::Term> t;
    for (int j = 0; j < n; ++j)
      if (C.A(i, j) != 0.0) t.emplace_back(blk.x0 + j, C.A(i, j));
    t.emplace_back(blk.z0 + i, M);
    lp.add_row(std::move(t), RowSense::LessEqual, M + C.b[i]);
  }
  return blk;
}

bool cs_hit(const SolveReport& rep, const detail::Canon& C, const CsBlock& blk, double M) {
  if (!rep.optimal()) return false;
  const int n = static_cast<int>(C.A.cols());
  const int m = static_cast<int>(C.A.rows());
  const Vector x = rep.primal.segment(blk.x0, n);
  const Vector sl = C.A * x - C.b;
  for (int i = 0; i < m; ++i)
    if (rep.primal[blk.l0 + i] >= M - 1e-6 || sl[i] >= M - 1e-6) return true;
  return false;
}

void add_dual_value_row(LinearProgram& lp, const detail::Canon& C, int l0, double target,
                        int gap_plus = -1, int gap_minus = -1) {
  std::vector<LinearProgram::Term> t;
  for (int i = 0; i < C.b.size(); ++i)
    if (C.b[i] != 0.0) t.emplace_back(l0 + i, C.b[i]);
  if (gap_plus >= 0) {
    t.emplace_back(gap_plus, -1.0);
    t.emplace_back(gap_minus, 1.0);
  }
  lp.add_row(std::move(t), RowSense::Equal, target);
}

}  // namespace

EstimationResult estimate_inverse_optimal_value(const LinearForwardModel& model, double z_hat,
                                                const ParameterSpace& space,
                                                std::optional<double> bigM,
                                                const SolverSettings& settings) {
  space.validate();
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  const int m = static_cast<int>(C.A.rows());
  require(space.dim == n, ErrorCode::DimensionMismatch, "parameter dimension must equal n");
  const double target = C.s * z_hat;

  auto value_gap = [&](const Vector& theta) {
    LinearForwardModel fm = model;
    fm.c = theta;
    const SolveReport rep = solve_lp(fm, settings);
    return rep.optimal() ? std::abs(rep.objective - z_hat) : kInf;
  };

  // Stage 1: dual-value LP. Weak duality only guarantees min ≥ ẑ here, so
  // the result is kept only when the forward value matches.
  auto lp_res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                     -> std::optional<EstimationResult> {
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    const int l0 = lp.add_variables(m, 0.0, kInf);
    add_stationarity(lp, C.A, l0, C.s * Matrix::Identity(n, n), t0, Vector::Zero(n));
    add_dual_value_row(lp, C, l0, target);
    add_space_objective(lp, t0, space);
    const SolveReport rep = lp.solve(settings);
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, n);
    r.objective = space.objective(r.theta);
    r.duals.push_back(rep.primal.segment(l0, m));
    return r;
  });
  const double tol = 1e-6 * std::max(1.0, std::abs(z_hat));
  if (lp_res) {
    const double g = value_gap(lp_res->theta);
    if (g <= tol) {
      lp_res->diagnostics["stage"] = 1;
      lp_res->diagnostics["value_gap"] = g;
      lp_res->per_obs_loss = Vector::Constant(1, g);
      lp_res->status = EstimateStatus::Optimal;
      return *lp_res;
    }
  }

  // Stage 2: complementarity MILP pins the value exactly.
  double used_M = 0.0;
  auto milp_res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                       -> std::optional<EstimationResult> {
    int t0 = 0;
    CsBlock blk{};
    auto solve = [&](double M) -> std::pair<SolveReport, bool> {
      LinearProgram lp;
      t0 = add_theta(lp, space, piece);
      blk = add_cs_block(lp, C, t0, M);
      add_dual_value_row(lp, C, blk.l0, target);
      add_space_objective(lp, t0, space);
      SolveReport rep = solve_mip(lp, settings);
      return {rep, cs_hit(rep, C, blk, M)};
    };
    try {
      const detail::BigMRun run =
          detail::run_with_bigm(bigM, solve, ErrorCode::InverseInfeasible, "optimal-value inverse");
      used_M = run.M;
      EstimationResult r;
      r.theta = run.report.primal.segment(t0, n);
      r.objective = space.objective(r.theta);
      r.duals.push_back(run.report.primal.segment(blk.l0, m));
      r.vectors["x"] = run.report.primal.segment(blk.x0, n);
      return r;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InverseInfeasible) return std::nullopt;
      throw;
    }
  });
  if (milp_res) {
    const double g = value_gap(milp_res->theta);
    milp_res->diagnostics["stage"] = 2;
    milp_res->diagnostics["bigM"] = used_M;
    milp_res->diagnostics["value_gap"] = g;
    milp_res->per_obs_loss = Vector::Constant(1, g);
    milp_res->status = g <= tol ? EstimateStatus::Optimal : EstimateStatus::Degenerate;
    return *milp_res;
  }

  // Unattainable: report the smallest achievable |min value − ẑ|.
  double min_gap = kInf;
  for (const SpacePiece& piece : expand_pieces(space)) {
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    const double M = bigM.value_or(1e4);
    const CsBlock blk = add_cs_block(lp, C, t0, M);
    const int gp = lp.add_variable(0.0, kInf, 1.0);
    const int gm = lp.add_variable(0.0, kInf, 1.0);
    add_dual_value_row(lp, C, blk.l0, target, gp, gm);
    const SolveReport rep = solve_mip(lp, settings);
    if (rep.optimal()) min_gap = std::min(min_gap, rep.objective);
  }
  throw Error(ErrorCode::TargetUnattainable, "no θ in Θ attains the target optimal value",
              {{"min_gap", min_gap}});
}

EstimationResult estimate_partial_lp(const LinearForwardModel& model,
                                     const std::map<int, double>& fixed,
                                     const ParameterSpace& space, std::optional<double> bigM,
                                     const SolverSettings& settings) {
  space.validate();
  const detail::Canon C = detail::canon(model);
  const int n = model.num_vars();
  const int m = static_cast<int>(C.A.rows());
  require(space.dim == n, ErrorCode::DimensionMismatch, "parameter dimension must equal n");
  for (const auto& [idx, v] : fixed) {
    (void)v;
    require(idx >= 0 && idx < n, ErrorCode::DimensionMismatch, "fixed component out of range");
  }
  {
    LinearProgram lp;
    const int x0 = lp.add_variables(n, -kInf, kInf);
    for (const auto& [idx, v] : fixed) lp.set_bounds(x0 + idx, v, v);
    for (int i = 0; i < m; ++i) add_dense_row(lp, x0, C.A.row(i), RowSense::GreaterEqual, C.b[i]);
    if (lp.solve(settings).status == SolveStatus::Infeasible)
      throw Error(ErrorCode::CompletionInfeasible, "fixed components admit no feasible completion");
  }

  double used_M = 0.0;
  auto res = detail::best_over_pieces(space, [&](const SpacePiece& piece)
                                                  -> std::optional<EstimationResult> {
    int t0 = 0;
    CsBlock blk{};
    auto solve = [&](double M) -> std::pair<SolveReport, bool> {
      LinearProgram lp;
      t0 = add_theta(lp, space, piece);
      blk = add_cs_block(lp, C, t0, M);
      for (const auto& [idx, v] : fixed) lp.set_bounds(blk.x0 + idx, v, v);
      add_space_objective(lp, t0, space);
      SolveReport rep = solve_mip(lp, settings);
      return {rep, cs_hit(rep, C, blk, M)};
    };
    try {
      const detail::BigMRun run =
          detail::run_with_bigm(bigM, solve, ErrorCode::InverseInfeasible, "partial inverse");
      used_M = run.M;
      EstimationResult r;
      r.theta = run.report.primal.segment(t0, n);
      r.objective = space.objective(r.theta);
      r.duals.push_back(run.report.primal.segment(blk.l0, m));
      r.vectors["x"] = run.report.primal.segment(blk.x0, n);
      return r;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InverseInfeasible) return std::nullopt;
      throw;
    }
  });
  if (!res) throw Error(ErrorCode::InverseInfeasible, "no θ in Θ admits an optimal completion");
  res->diagnostics["bigM"] = used_M;
  finish_certificate(*res, detail::forward_gap(model, res->theta, res->vectors["x"], settings));
  return *res;
}

EstimationResult estimate_convex_objective_kkt(const ConvexForwardModel& model,
                                               const Vector& x_hat,
                                               const ParameterSpace& space,
                                               const SolverSettings& settings) {
  model.validate();
  space.validate();
  const int n = model.num_vars();
  const int m = static_cast<int>(model.A.rows());
  require(space.dim == model.objective.num_params(n), ErrorCode::DimensionMismatch,
          "parameter dimension must match the objective");
  check_observation(model.A, model.b, x_hat);
  const auto [J, g0] = model.objective.gradient_affine(x_hat, n);
  const Vector slack = model.A * x_hat - model.b;

  auto res = detail::best_over_pieces(space, [&](const SpacePiece& raw)
                                                  -> std::optional<EstimationResult> {
    const SpacePiece piece = detail::with_objective_signs(raw, model.objective);
    for (int i = 0; i < space.dim; ++i)
      if (piece.lower[i] > piece.upper[i]) return std::nullopt;
    LinearProgram lp;
    const int t0 = add_theta(lp, space, piece);
    const int l0 = lp.add_variables(m, 0.0, kInf);
    for (int i = 0; i < m; ++i)
      if (slack[i] > settings.activity_tol) lp.set_bounds(l0 + i, 0.0, 0.0);
    add_stationarity(lp, model.A, l0, J, t0, g0);
    add_space_objective(lp, t0, space);
    const SolveReport rep = lp.solve(settings);
    if (rep.status == SolveStatus::Unbounded)
      throw Error(ErrorCode::InvalidArgument, "inverse objective is unbounded below on Θ");
    if (!rep.optimal()) return std::nullopt;
    EstimationResult r;
    r.theta = rep.primal.segment(t0, space.dim);
    r.objective = space.objective(r.theta);
    r.duals.push_back(rep.primal.segment(l0, m));
    return r;
  });
  if (!res) throw Error(ErrorCode::InverseInfeasible, "no θ in Θ satisfies the KKT system at x̂");
  const testing::InverseCheck chk = testing::verify_inverse_feasible(model, res->theta, x_hat);
  finish_certificate(*res, chk.gap);
  return *res;
}

}  // namespace invopt
