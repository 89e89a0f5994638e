// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "invopt/solvers.hpp"
#include "invopt/space.hpp"

namespace invopt::testing {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void push_unique(std::vector<Vector>& pts, const Vector& x, double tol) {
  for (const Vector& p : pts)
    if ((p - x).cwiseAbs().maxCoeff() <= tol) return;
  pts.push_back(x);
}

}  // namespace

std::vector<Vector> enumerate_vertices(const Matrix& A_in, const Vector& b_in,
                                       const Vector& lower, const Vector& upper) {
  const int n = static_cast<int>(A_in.cols());
  if (n > 8 || A_in.rows() > 12)
    throw Error(ErrorCode::TooLarge, "vertex enumeration limited to n ≤ 8, m ≤ 12");
  Matrix A = A_in;
  Vector b = b_in;
  append_box_rows(A, b, lower, upper);
  const int m = static_cast<int>(A.rows());
  std::vector<Vector> out;
  if (n == 0) return out;
  if (m < n) return out;
  if (binomial(m, n) > 5e6) throw Error(ErrorCode::TooLarge, "too many row subsets");

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Matrix S(n, n);
  Vector r(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      S.row(i) = A.row(idx[i]);
      r[i] = b[idx[i]];
    }
    Eigen::FullPivLU<Matrix> lu(S);
    if (lu.rank() == n) {
      const Vector x = lu.solve(r);
      const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
      if (((A * x - b).array() >= -1e-9 * scale).all()) push_unique(out, x, 1e-8);
    }
    int k = n - 1;
    while (k >= 0 && idx[k] == m - n + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int i = k + 1; i < n; ++i) idx[i] = idx[i - 1] + 1;
  }
  std::sort(out.begin(), out.end(), [](const Vector& a, const Vector& c) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), c.data(),
                                        c.data() + c.size());
  });
  return out;
}

std::vector<Vector> enumerate_integer_points(const LinearForwardModel& model) {
  const LinearForwardModel cm = canonicalize(model);
  const int n = cm.num_vars();
  Vector lo = Vector::Constant(n, -kInf), hi = Vector::Constant(n, kInf);
  for (int i = 0; i < cm.num_rows(); ++i) {
    int var = -1, count = 0;
    for (int j = 0; j < n; ++j)
      if (cm.A(i, j) != 0.0) {
        var = j;
        ++count;
      }
    if (count != 1) continue;
    const double a = cm.A(i, var), rhs = cm.b[i] / a;
    if (a > 0) lo[var] = std::max(lo[var], std::ceil(rhs - 1e-9));
    else hi[var] = std::min(hi[var], std::floor(rhs + 1e-9));
  }
  double count = 1.0;
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]))
      throw Error(ErrorCode::TooLarge, "integer enumeration needs a bounding box");
    count *= std::max(0.0, hi[j] - lo[j] + 1.0);
  }
  if (count > 32768.0) throw Error(ErrorCode::TooLarge, "more than 2^15 lattice points");
  std::vector<Vector> out;
  if (count == 0.0) return out;
  Vector x = lo;
  while (true) {
    if (((cm.A * x - cm.b).array() >= -1e-9).all()) out.push_back(x);
    int j = 0;
    while (j < n && x[j] >= hi[j]) {
      x[j] = lo[j];
      ++j;
    }
    if (j == n) break;
    x[j] += 1.0;
  }
  return out;
}

OptimalSet brute_force_optimal_set(const LinearForwardModel& model, const Vector& theta,
                                   double tol) {
  const LinearForwardModel cm = canonicalize(model);
  std::vector<Vector> cand;
  if (model.has_integers()) {
    if (!std::all_of(model.integer.begin(), model.integer.end(), [](bool f) { return f; }))
      throw Error(ErrorCode::UnsupportedCombination, "mixed-integer enumeration not supported");
    cand = enumerate_integer_points(model);
  } else {
    cand = enumerate_vertices(cm.A, cm.b);
  }
  OptimalSet res;
  const double s = model.sign();
  double best = kInf;
  for (const Vector& x : cand) best = std::min(best, s * theta.dot(x));
  for (const Vector& x : cand)
    if (s * theta.dot(x) <= best + tol * std::max(1.0, std::abs(best))) res.points.push_back(x);
  res.value = cand.empty() ? kInf : s * best;
  return res;
}

InverseCheck verify_inverse_feasible(const LinearForwardModel& model, const Vector& theta,
                                     const Vector& x_hat, double tol) {
  InverseCheck out;
  const LinearForwardModel cm = canonicalize(model);
  out.violation = cm.num_rows() ? std::max(0.0, (cm.b - cm.A * x_hat).maxCoeff()) : 0.0;
  if (model.has_integers()) {
    for (int j = 0; j < model.num_vars(); ++j)
      if (model.integer[j])
        out.violation = std::max(out.violation, std::abs(x_hat[j] - std::round(x_hat[j])));
  }
  LinearForwardModel m = model;
  m.c = theta;
  const SolveReport rep = model.has_integers() ? solve_milp(m) : solve_lp(m);
  if (rep.status == SolveStatus::Unbounded) {
    out.gap = kInf;
    return out;
  }
  if (!rep.optimal()) {
    out.gap = kInf;
    return out;
  }
  out.gap = std::max(0.0, model.sign() * (theta.dot(x_hat) - rep.objective));
  out.ok = out.violation <= 1e-7 && out.gap <= tol;
  return out;
}

InverseCheck verify_inverse_feasible(const ConvexForwardModel& model, const Vector& theta,
                                     const Vector& x_hat, double tol) {
  InverseCheck out;
  out.violation = model.A.rows() ? std::max(0.0, (model.b - model.A * x_hat).maxCoeff()) : 0.0;
  const Vector g = model.objective.gradient(x_hat, theta);
  LinearForwardModel lin;
  lin.c = g;
  lin.A = model.A;
  lin.b = model.b;
  const SolveReport rep = solve_lp(lin);
  if (!rep.optimal()) {
    out.gap = kInf;
    return out;
  }
  out.gap = std::max(0.0, g.dot(x_hat) - rep.objective);
  out.ok = out.violation <= 1e-7 && out.gap <= tol;
  return out;
}

MDPSolution mdp_value_iteration(const MDPModel& mdp, const Vector& theta) {
  const int S = mdp.num_states, A = mdp.num_actions;
  Vector v = Vector::Zero(S);
  MDPSolution sol;
  auto q_value = [&](const Vector& val, int s, int a) {
    return theta[mdp.index(s, a)] + mdp.gamma * mdp.transition[a].row(s).dot(val);
  };
  for (std::size_t it = 0; it < 1000000; ++it) {
    Vector nv(S);
    for (int s = 0; s < S; ++s) {
      double best = -kInf;
      for (int a = 0; a < A; ++a) best = std::max(best, q_value(v, s, a));
      nv[s] = best;
    }
    const double change = (nv - v).cwiseAbs().maxCoeff();
    v = nv;
    sol.iterations = it + 1;
    if (change <= 1e-10) break;
  }
  sol.values = v;
  sol.policy.assign(S, 0);
  for (int s = 0; s < S; ++s) {
    double best = -kInf;
    for (int a = 0; a < A; ++a) best = std::max(best, q_value(v, s, a));
    for (int a = 0; a < A; ++a) {
      if (q_value(v, s, a) >= best - 1e-9) {
        sol.policy[s] = a;
        break;
      }
    }
  }
  return sol;
}

Vector policy_value(const MDPModel& mdp, const Vector& theta, const Policy& policy) {
  const int S = mdp.num_states;
  Matrix P(S, S);
  Vector r(S);
  for (int s = 0; s < S; ++s) {
    P.row(s) = mdp.transition[policy[s]].row(s);
    r[s] = theta[mdp.index(s, policy[s])];
  }
  const Matrix M = Matrix::Identity(S, S) - mdp.gamma * P;
  return M.partialPivLu().solve(r);
}

namespace {

// All lattice points k·r (k integer) with lo ≤ x ≤ hi, over `dim` axes.
void box_lattice(const Vector& lo, const Vector& hi, double r,
                 const std::function<void(const Vector&)>& emit) {
  const int n = static_cast<int>(lo.size());
  if (n == 0) {
    emit(Vector(0));
    return;
  }
  std::vector<long> kl(n), kh(n);
  double total = 1.0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw Error(ErrorCode::TooLarge, "grid needs a finite box");
    kl[i] = static_cast<long>(std::ceil(lo[i] / r - 1e-9));
    kh[i] = static_cast<long>(std::floor(hi[i] / r + 1e-9));
    total *= std::max<double>(0.0, static_cast<double>(kh[i] - kl[i] + 1));
  }
  if (total > 2e7) throw Error(ErrorCode::TooLarge, "grid too fine");
  if (total == 0.0) return;
  std::vector<long> k = kl;
  Vector x(n);
  while (true) {
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>(k[i]) * r;
    emit(x);
    int i = 0;
    while (i < n && k[i] >= kh[i]) {
      k[i] = kl[i];
      ++i;
    }
    if (i == n) break;
    ++k[i];
  }
}

}  // namespace

std::vector<Vector> theta_grid(const ParameterSpace& space, double r) {
  const int n = space.dim;
  if (n > 3) throw Error(ErrorCode::TooLarge, "grid oracle limited to dim ≤ 3");
  std::vector<Vector> pts;
  for (const SpacePiece& piece : expand_pieces(space)) {
    const PieceSystem sys = piece_system(space, piece);
    auto accept = [&](const Vector& th) {
      if (sys.G.rows() && (sys.G * th - sys.h).minCoeff() < -1e-9) return;
      if (sys.E.rows() && (sys.E * th - sys.f).cwiseAbs().maxCoeff() > 1e-9) return;
      pts.push_back(th);
    };
    // Pick a coordinate solvable from one piece equality (normalizations
    // contribute exactly one), grid the rest.
    int solve_for = -1;
    Vector eq_row;
    double eq_rhs = 0.0;
    if (!piece.eq.empty()) {
      eq_row = piece.eq.front().first;
      eq_rhs = piece.eq.front().second;
      for (int i = n - 1; i >= 0; --i)
        if (eq_row[i] != 0.0 && piece.lower[i] != piece.upper[i]) {
          solve_for = i;
          break;
        }
    }
    Vector lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = piece.lower[i];
      hi[i] = piece.upper[i];
      if (space.normalization == Normalization::L1Sphere ||
          space.normalization == Normalization::LInfSphere) {
        lo[i] = std::max(lo[i], -1.0);
        hi[i] = std::min(hi[i], 1.0);
      }
    }
    std::vector<int> free_axes;
    for (int i = 0; i < n; ++i)
      if (i != solve_for && lo[i] != hi[i]) free_axes.push_back(i);
    Vector flo(free_axes.size()), fhi(free_axes.size());
    for (std::size_t k = 0; k < free_axes.size(); ++k) {
      flo[static_cast<int>(k)] = lo[free_axes[k]];
      fhi[static_cast<int>(k)] = hi[free_axes[k]];
    }
    box_lattice(flo, fhi, r, [&](const Vector& z) {
      Vector th(n);
      for (int i = 0; i < n; ++i) th[i] = lo[i] == hi[i] ? lo[i] : 0.0;
      for (std::size_t k = 0; k < free_axes.size(); ++k)
        th[free_axes[k]] = z[static_cast<int>(k)];
      if (solve_for >= 0) {
        th[solve_for] = 0.0;
        th[solve_for] = (eq_rhs - eq_row.dot(th)) / eq_row[solve_for];
        if (th[solve_for] < lo[solve_for] - 1e-12 || th[solve_for] > hi[solve_for] + 1e-12)
          return;
      }
      accept(th);
    });
  }
  return pts;
}

GridMin grid_min_loss(const std::function<double(const Vector&)>& risk,
                      const ParameterSpace& space, double r) {
  GridMin out;
  out.value = kInf;
  for (const Vector& th : theta_grid(space, r)) {
    ++out.points;
    const double v = risk(th);
    if (v < out.value) {
      out.value = v;
      out.theta = th;
    }
  }
  return out;
}

}  // namespace invopt::testing
