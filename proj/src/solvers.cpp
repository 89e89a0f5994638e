// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace invopt {

LinearProgram to_linear_program(const LinearForwardModel& model, bool keep_integers) {
  validate_model(model);
  LinearProgram lp;
  const int n = model.num_vars();
  const double s = model.sign();
  for (int j = 0; j < n; ++j) {
    const bool integral = keep_integers && !model.integer.empty() && model.integer[j];
    lp.add_variable(-kInf, kInf, s * model.c[j],
                    integral ? VarKind::Integer : VarKind::Continuous);
  }
  for (int i = 0; i < model.num_rows(); ++i) {
    std::vector<LinearProgram::Term> terms;
    for (int j = 0; j < n; ++j)
      if (model.A(i, j) != 0.0) terms.emplace_back(j, model.A(i, j));
    RowSense rs = RowSense::GreaterEqual;
    if (!model.row_sense.empty()) {
      if (model.row_sense[i] == ConstraintSense::LessEqual) rs = RowSense::LessEqual;
      if (model.row_sense[i] == ConstraintSense::Equal) rs = RowSense::Equal;
    }
    lp.add_row(std::move(terms), rs, model.b[i]);
  }
  return lp;
}

namespace {

SolveReport restore_sense(SolveReport rep, double s) {
  if (rep.optimal()) {
    rep.objective *= s;
    rep.dual *= s;
  }
  return rep;
}

}  // namespace

SolveReport solve_lp(const LinearForwardModel& model, const SolverSettings& settings) {
  return restore_sense(to_linear_program(model, false).solve(settings), model.sign());
}

SolveReport solve_milp(const LinearForwardModel& model, const SolverSettings& settings) {
  return restore_sense(solve_mip(to_linear_program(model, true), settings), model.sign());
}

SolveReport frank_wolfe(const LinearProgram& region, const SmoothFunction& f,
                        double tol, std::size_t max_iter,
                        const SolverSettings& settings) {
  LinearProgram lmo = region;
  const int n = region.num_variables();
  auto oracle = [&](const Vector& g) {
    for (int j = 0; j < n; ++j) lmo.set_cost(j, g[j]);
    lmo.set_objective_offset(0.0);
    return lmo.solve(settings);
  };

  SolveReport rep;
  rep.primal = Vector::Zero(n);
  SolveReport first = oracle(Vector::Zero(n));
  if (!first.optimal()) {
    rep.status = first.status;
    return rep;
  }

  std::vector<Vector> verts{first.primal};
  std::vector<double> weight{1.0};
  Vector x = first.primal;
  double fx = f.value(x);
  double gap = kInf;
  std::size_t it = 0;

  auto line_search = [&](const Vector& d, const Vector& g, double gmax) {
    const double slope = g.dot(d);
    if (slope >= 0.0) return 0.0;
    if (f.curvature) {
      const double curv = f.curvature(d);
      if (curv <= 0.0) return gmax;
      return std::min(gmax, -slope / curv);
    }
    auto deriv = [&](double t) { return f.gradient(x + t * d).dot(d); };
    if (deriv(gmax) <= 0.0) return gmax;
    double lo = 0.0, hi = gmax;
    for (int k = 0; k < 100 && hi - lo > 1e-15 * std::max(1.0, gmax); ++k) {
      const double mid = 0.5 * (lo + hi);
      if (deriv(mid) > 0.0) hi = mid;
      else lo = mid;
    }
    return lo;
  };

  for (; it < max_iter; ++it) {
    const Vector g = f.gradient(x);
    SolveReport s = oracle(g);
    if (s.status == SolveStatus::Unbounded) {
      rep.status = SolveStatus::Unbounded;
      return rep;
    }
    if (!s.optimal()) {
      rep.status = s.status;
      return rep;
    }
    gap = g.dot(x - s.primal);
    if (gap <= tol) break;

    std::size_t away = 0;
    double away_val = -kInf;
    for (std::size_t k = 0; k < verts.size(); ++k) {
      const double v = g.dot(verts[k]);
      if (v > away_val) {
        away_val = v;
        away = k;
      }
    }
    const double away_gap = away_val - g.dot(x);
    const bool fw_step = gap >= away_gap || verts.size() == 1;
    Vector d;
    double gmax;
    if (fw_step) {
      d = s.primal - x;
      gmax = 1.0;
    } else {
      d = x - verts[away];
      gmax = weight[away] / (1.0 - weight[away]);
    }
    const double step = line_search(d, g, gmax);
    if (step <= 0.0) break;

    if (fw_step) {
      for (double& w : weight) w *= (1.0 - step);
      std::size_t idx = verts.size();
      for (std::size_t k = 0; k < verts.size(); ++k)
        if ((verts[k] - s.primal).cwiseAbs().maxCoeff() <= 1e-10) idx = k;
      if (idx == verts.size()) {
        verts.push_back(s.primal);
        weight.push_back(step);
      } else {
        weight[idx] += step;
      }
    } else {
      for (double& w : weight) w *= (1.0 + step);
      weight[away] -= step;
    }
    for (std::size_t k = verts.size(); k-- > 0;) {
      if (weight[k] <= 1e-14) {
        verts.erase(verts.begin() + static_cast<long>(k));
        weight.erase(weight.begin() + static_cast<long>(k));
      }
    }
    x += step * d;
    const double fnew = f.value(x);
    fx = std::min(fx, fnew);
  }

  rep.primal = x;
  rep.objective = f.value(x);
  rep.complementarity = std::max(0.0, gap);
  rep.iterations = it;
  rep.status = gap <= tol ? SolveStatus::Optimal : SolveStatus::IterationLimit;
  if (rep.status == SolveStatus::IterationLimit && gap <= 1e-5) rep.status = SolveStatus::Optimal;
  return rep;
}

SolveReport solve_convex(const ConvexForwardModel& model, const Vector& theta,
                         double tol, std::size_t max_iter,
                         const SolverSettings& settings) {
  model.validate();
  LinearProgram region;
  const int n = model.num_vars();
  region.add_variables(n, -kInf, kInf);
  for (int i = 0; i < model.A.rows(); ++i) {
    std::vector<LinearProgram::Term> terms;
    for (int j = 0; j < n; ++j)
      if (model.A(i, j) != 0.0) terms.emplace_back(j, model.A(i, j));
    region.add_row(std::move(terms), RowSense::GreaterEqual, model.b[i]);
  }
  SmoothFunction f;
  f.value = [&](const Vector& x) { return model.objective.value(x, theta); };
  f.gradient = [&](const Vector& x) { return model.objective.gradient(x, theta); };
  if (const auto* q = std::get_if<QuadraticObjective>(&model.objective.form)) {
    f.curvature = [q](const Vector& d) { return d.dot(q->Phi * d); };
  } else if (model.objective.is_linear()) {
    f.curvature = [](const Vector&) { return 0.0; };
  }
  return frank_wolfe(region, f, tol, max_iter, settings);
}

SolveReport solve_convex(const ConvexForwardModel& model, const Vector& theta,
                         const SolverSettings& settings) {
  return solve_convex(model, theta, settings.fw_tol, settings.fw_max_iter, settings);
}

Vector nnls(const Matrix& C, const Vector& d) {
  const int n = static_cast<int>(C.cols());
  Vector x = Vector::Zero(n);
  if (n == 0) return x;
  std::vector<char> passive(n, 0);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     C.cwiseAbs().colwise().sum().maxCoeff() *
                     std::max<double>(C.rows(), n);
  Vector w = C.transpose() * (d - C * x);

  auto solve_passive = [&](Vector& z) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Matrix Cp(C.rows(), static_cast<int>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Cp.col(static_cast<int>(k)) = C.col(idx[k]);
    const Vector zp = Cp.colPivHouseholderQr().solve(d);
    z = Vector::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[static_cast<int>(k)];
  };

  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    int t = -1;
    double wmax = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        t = j;
      }
    }
    if (t < 0) break;
    passive[t] = 1;
    Vector z;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      solve_passive(z);
      bool all_pos = true;
      for (int j = 0; j < n; ++j)
        if (passive[j] && z[j] <= tol) all_pos = false;
      if (all_pos) break;
      double alpha = kInf;
      for (int j = 0; j < n; ++j) {
        if (passive[j] && z[j] <= tol) {
          const double denom = x[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
        }
      }
      if (!std::isfinite(alpha)) alpha = 0.0;
      x += alpha * (z - x);
      for (int j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= tol) {
          passive[j] = 0;
          x[j] = 0.0;
        }
      }
    }
    x = z;
    for (int j = 0; j < n; ++j)
      if (x[j] < 0.0) x[j] = 0.0;
    w = C.transpose() * (d - C * x);
  }
  return x;
}

namespace {

// min ‖y‖ s.t. G y ≥ h via the NNLS dual, followed by an active-set polish.
std::optional<Vector> least_distance(const Matrix& G_in, const Vector& h_in) {
  const int n = static_cast<int>(G_in.cols());
  const int m = static_cast<int>(G_in.rows());
  if (m == 0) return Vector::Zero(n);
  Matrix G = G_in;
  Vector h = h_in;
  for (int i = 0; i < m; ++i) {
    const double nrm = G.row(i).norm();
    if (nrm <= 1e-300) {
      if (h[i] > 1e-12) return std::nullopt;
      G.row(i).setZero();
      h[i] = 0.0;
      continue;
    }
    G.row(i) /= nrm;
    h[i] /= nrm;
  }
  if ((h.array() <= 0.0).all()) return Vector::Zero(n);

  Matrix C(n + 1, m);
  C.topRows(n) = G.transpose();
  C.row(n) = h.transpose();
  Vector d = Vector::Zero(n + 1);
  d[n] = 1.0;
  const Vector u = nnls(C, d);
  const Vector r = C * u - d;
  if (std::abs(r[n]) <= 1e-13) return std::nullopt;
  Vector y = -r.head(n) / r[n];

  const double hscale = std::max(1.0, h.cwiseAbs().maxCoeff());
  // Polish: minimum-norm solution of the rows carrying positive multipliers.
  std::vector<int> act;
  for (int i = 0; i < m; ++i)
    if (u[i] > 0.0) act.push_back(i);
  if (!act.empty()) {
    Matrix Ga(static_cast<int>(act.size()), n);
    Vector ha(static_cast<int>(act.size()));
    for (std::size_t k = 0; k < act.size(); ++k) {
      Ga.row(static_cast<int>(k)) = G.row(act[k]);
      ha[static_cast<int>(k)] = h[act[k]];
    }
    const Vector yp = Ga.completeOrthogonalDecomposition().solve(ha);
    const double viol = m ? (h - G * yp).maxCoeff() : 0.0;
    if (viol <= 1e-12 * hscale && (Ga * yp - ha).cwiseAbs().maxCoeff() <= 1e-10 * hscale)
      y = yp;
  }
  const double viol = (h - G * y).maxCoeff();
  if (viol > 1e-7 * hscale) return std::nullopt;
  return y;
}

}  // namespace

std::optional<Vector> project_polyhedron(const Vector& p, const Matrix& G,
                                         const Vector& h, const Matrix& E,
                                         const Vector& f) {
  const int n = static_cast<int>(p.size());
  Vector x0 = Vector::Zero(n);
  Matrix Z = Matrix::Identity(n, n);
  if (E.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(E);
    x0 = cod.solve(f);
    const double fscale = std::max(1.0, f.cwiseAbs().maxCoeff());
    if ((E * x0 - f).cwiseAbs().maxCoeff() > 1e-9 * fscale) return std::nullopt;
    Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeFullV);
    const int rank = static_cast<int>(cod.rank());
    Z = svd.matrixV().rightCols(n - rank);
  }
  // x = x0 + Z w; nearest point to p means w near w_p = Zᵀ(p − x0).
  const Vector wp = Z.transpose() * (p - x0);
  const Vector base = x0 + Z * wp;
  if (Z.cols() == 0) {
    if (G.rows() > 0 && (h - G * x0).maxCoeff() > 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()))
      return std::nullopt;
    return x0;
  }
  const Matrix GZ = G * Z;
  const Vector hw = h - G * base;
  const auto y = least_distance(GZ, hw);
  if (!y) return std::nullopt;
  return Vector(base + Z * (*y));
}

std::optional<Vector> solve_strict_qp(const Matrix& Q, const Vector& q,
                                      const Matrix& G, const Vector& h,
                                      const Matrix& E, const Vector& f) {
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::UnsupportedObjective, "quadratic term is not positive definite");
  const Matrix L = llt.matrixL();
  // z = Lᵀx + L⁻¹q, x = L⁻ᵀ(z − L⁻¹q).
  const Vector Linv_q = L.triangularView<Eigen::Lower>().solve(q);
  const Matrix Lt = L.transpose();
  const int n = static_cast<int>(Q.rows());
  const Matrix LtInv = Lt.triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
  const Vector shift = LtInv * Linv_q;  // = Q⁻¹ q
  const Matrix Gz = G * LtInv;
  const Vector hz = h + G * shift;
  const Matrix Ez = E.rows() ? Matrix(E * LtInv) : Matrix(0, n);
  const Vector fz = E.rows() ? Vector(f + E * shift) : Vector(0);
  const auto z = project_polyhedron(Vector::Zero(n), Gz, hz, Ez, fz);
  if (!z) return std::nullopt;
  return Vector(LtInv * (*z) - shift);
}

}  // namespace invopt
