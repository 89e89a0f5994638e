// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "internal.hpp"

#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include "invopt/solvers.hpp"

namespace invopt::detail {

Canon canon(const LinearForwardModel& model) {
  const LinearForwardModel cm = canonicalize(model);
  return {cm.A, cm.b, model.sign()};
}

double max_violation(const Matrix& A, const Vector& b, const Vector& x) {
  if (A.rows() == 0) return 0.0;
  return std::max(0.0, (b - A * x).maxCoeff());
}

void add_dense_row(LinearProgram& lp, int first, const Eigen::RowVectorXd& row,
                   RowSense sense, double rhs) {
  std::vector<LinearProgram::Term> t;
  for (int j = 0; j < row.size(); ++j)
    if (row[j] != 0.0) t.emplace_back(first + j, row[j]);
  lp.add_row(std::move(t), sense, rhs);
}

void add_stationarity(LinearProgram& lp, const Matrix& A, int lambda0, const Matrix& J,
                      int theta0, const Vector& rhs) {
  for (int j = 0; j < A.cols(); ++j) {
    std::vector<LinearProgram::Term> t;
    for (int i = 0; i < A.rows(); ++i)
      if (A(i, j) != 0.0) t.emplace_back(lambda0 + i, A(i, j));
    for (int k = 0; k < J.cols(); ++k)
      if (J(j, k) != 0.0) t.emplace_back(theta0 + k, -J(j, k));
    lp.add_row(std::move(t), RowSense::Equal, rhs[j]);
  }
}

SpacePiece with_objective_signs(SpacePiece piece, const ObjectiveSpec& obj) {
  if (const auto* b = std::get_if<BasisObjective>(&obj.form)) {
    for (std::size_t k = 0; k < b->bases.size(); ++k) {
      const bool nonneg = b->nonnegative.empty() || b->nonnegative[k];
      if (nonneg) {
        const int i = static_cast<int>(k);
        piece.lower[i] = std::max(piece.lower[i], 0.0);
      }
    }
  }
  return piece;
}

std::optional<EstimationResult> best_over_pieces(
    const ParameterSpace& space,
    const std::function<std::optional<EstimationResult>(const SpacePiece&)>& fn) {
  std::optional<EstimationResult> best;
  int idx = 0;
  for (const SpacePiece& piece : expand_pieces(space)) {
    auto r = fn(piece);
    if (r) {
      const double tol = 1e-9 * std::max(1.0, std::abs(r->objective));
      if (!best || r->objective < best->objective - tol) {
        best = std::move(r);
        best->diagnostics["piece"] = idx;
      }
    }
    ++idx;
  }
  if (best) best->diagnostics["pieces"] = idx;
  return best;
}

BigMRun run_with_bigm(std::optional<double> bigM,
                      const std::function<std::pair<SolveReport, bool>(double)>& solve,
                      ErrorCode infeasible_code, const char* what) {
  BigMRun run;
  if (bigM) {
    run.M = *bigM;
    auto [rep, hit] = solve(run.M);
    if (rep.status == SolveStatus::Infeasible) {
      auto [probe, probe_hit] = solve(1e7);
      (void)probe_hit;
      if (probe.optimal())
        throw Error(ErrorCode::BigMViolation,
                    std::string(what) + ": infeasible with the given M but feasible with a larger one",
                    {{"bigM", run.M}});
      throw Error(infeasible_code, std::string(what) + ": no parameter satisfies the conditions");
    }
    if (hit)
      throw Error(ErrorCode::BigMViolation,
                  std::string(what) + ": a gated dual or slack reached M", {{"bigM", run.M}});
    run.report = rep;
    return run;
  }
  double M = 1e4;
  bool any_feasible = false;
  for (int attempt = 0; attempt <= 3; ++attempt, M *= 10.0) {
    auto [rep, hit] = solve(M);
    run.M = M;
    run.retries = attempt;
    if (rep.status == SolveStatus::IterationLimit)
      throw Error(ErrorCode::IterationLimit, std::string(what) + ": branch-and-bound node cap reached");
    if (!rep.optimal()) continue;
    any_feasible = true;
    if (!hit) {
      run.report = rep;
      return run;
    }
  }
  if (any_feasible)
    throw Error(ErrorCode::BigMViolation,
                std::string(what) + ": gated quantities reach M even after retries", {{"bigM", run.M}});
  throw Error(infeasible_code, std::string(what) + ": no parameter satisfies the conditions");
}

double forward_gap(const LinearForwardModel& model, const Vector& theta, const Vector& x_hat,
                   const SolverSettings& settings) {
  LinearForwardModel m = model;
  m.c = theta;
  const SolveReport rep = m.has_integers() ? solve_milp(m, settings) : solve_lp(m, settings);
  if (!rep.optimal()) return kInf;
  return model.sign() * (theta.dot(x_hat) - rep.objective);
}

void add_norm_cost(LinearProgram& lp, const std::vector<int>& vars, const Vector& center,
                   double p, double weight) {
  if (std::isinf(p)) {
    const int t = lp.add_variable(0.0, kInf, weight);
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const double c = center[static_cast<int>(k)];
      lp.add_row({{t, 1.0}, {vars[k], -1.0}}, RowSense::GreaterEqual, -c);
      lp.add_row({{t, 1.0}, {vars[k], 1.0}}, RowSense::GreaterEqual, c);
    }
    return;
  }
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const double c = center[static_cast<int>(k)];
    const int u = lp.add_variable(0.0, kInf, weight);
    lp.add_row({{u, 1.0}, {vars[k], -1.0}}, RowSense::GreaterEqual, -c);
    lp.add_row({{u, 1.0}, {vars[k], 1.0}}, RowSense::GreaterEqual, c);
  }
}

double weighted_mean(const Vector& values, const std::vector<double>& weights) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < values.size(); ++i) {
    num += weights[i] * values[i];
    den += weights[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

std::optional<Vector> normalize_direction(const Vector& v, const ParameterSpace& space) {
  Vector t = v;
  switch (space.normalization) {
    case Normalization::L1Sphere: {
      const double s = v.lpNorm<1>();
      if (s <= 1e-12) return std::nullopt;
      t /= s;
      break;
    }
    case Normalization::LInfSphere: {
      const double s = v.lpNorm<Eigen::Infinity>();
      if (s <= 1e-12) return std::nullopt;
      t /= s;
      break;
    }
    case Normalization::FixedComponent: {
      const double vi = v[space.fixed_index];
      if (std::abs(vi) <= 1e-12 || vi * space.fixed_value <= 0.0) return std::nullopt;
      t *= space.fixed_value / vi;
      break;
    }
    case Normalization::None: {
      const double s = v.norm();
      if (s <= 1e-12) return std::nullopt;
      t /= s;
      break;
    }
  }
  if (!validate_parameter(t, space, 1e-7).empty()) return std::nullopt;
  return t;
}

namespace {

std::vector<Vector> sphere_directions(int n, double delta) {
  constexpr double kPi = 3.14159265358979323846;
  std::vector<Vector> out;
  if (n == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
  } else if (n == 2) {
    const int K = static_cast<int>(std::ceil(2.0 * kPi / delta));
    for (int k = 0; k < K; ++k) {
      const double a = 2.0 * kPi * k / K;
      Vector u(2);
      u << std::cos(a), std::sin(a);
      out.push_back(u);
    }
  } else {
    const int K = static_cast<int>(std::ceil(kPi / delta));
    for (int i = 0; i <= K; ++i) {
      const double phi = kPi * i / K;
      const int Ka = std::max(1, static_cast<int>(std::ceil(2.0 * kPi * std::sin(phi) / delta)));
      for (int k = 0; k < Ka; ++k) {
        const double a = 2.0 * kPi * k / Ka;
        Vector u(3);
        u << std::sin(phi) * std::cos(a), std::sin(phi) * std::sin(a), std::cos(phi);
        out.push_back(u);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Vector> theta_net(const ParameterSpace& space, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error(ErrorCode::EmptyNet, "net spacing δ must be positive");
  const int n = space.dim;
  const bool sphere = space.normalization == Normalization::L1Sphere ||
                      space.normalization == Normalization::LInfSphere;
  std::vector<Vector> raw;
  if (sphere && n <= 3) {
    for (Vector u : sphere_directions(n, delta)) {
      const double s = space.normalization == Normalization::L1Sphere
                           ? u.lpNorm<1>()
                           : u.lpNorm<Eigen::Infinity>();
      raw.push_back(u / s);
    }
  } else {
    Vector lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = space.lower_bound(i);
      hi[i] = space.upper_bound(i);
      if (sphere) {
        lo[i] = std::max(lo[i], -1.0);
        hi[i] = std::min(hi[i], 1.0);
      }
      if (space.normalization == Normalization::FixedComponent && i == space.fixed_index)
        lo[i] = hi[i] = space.fixed_value;
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
        throw Error(ErrorCode::EmptyNet, "a net needs a bounded Θ; add bounds or a normalization");
    }
    std::vector<int> steps(n);
    double count = 1.0;
    for (int i = 0; i < n; ++i) {
      steps[i] = static_cast<int>(std::floor((hi[i] - lo[i]) / delta + 1e-9)) + 1;
      count *= steps[i];
    }
    if (count > 2e5)
      throw Error(ErrorCode::TooLarge, "δ-net would exceed 200000 points", {{"points", count}});
    std::vector<int> idx(n, 0);
    while (true) {
      Vector t(n);
      for (int i = 0; i < n; ++i) t[i] = std::min(hi[i], lo[i] + idx[i] * delta);
      raw.push_back(t);
      int k = 0;
      while (k < n && ++idx[k] == steps[k]) idx[k++] = 0;
      if (k == n) break;
    }
  }
  std::vector<Vector> net;
  std::set<std::vector<long long>> seen;
  for (const Vector& t : raw) {
    std::optional<Vector> p;
    if (validate_parameter(t, space, 1e-9).empty())
      p = t;
    else
      p = project_onto_space(t, space);
    if (!p) continue;
    std::vector<long long> key(n);
    for (int i = 0; i < n; ++i) key[i] = std::llround((*p)[i] * 1e8);
    if (seen.insert(key).second) net.push_back(*p);
  }
  if (net.empty()) throw Error(ErrorCode::EmptyNet, "no net point lies in Θ");
  return net;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int T = std::max(1, std::min(threads, count));
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&](int w) {
    for (int i = w; i < count; i += T) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (T == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < T; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace invopt::detail
