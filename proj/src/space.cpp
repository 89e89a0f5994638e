// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "invopt/solvers.hpp"

namespace invopt {

namespace {

std::vector<LinearProgram::Term> dense_terms(int first, const Eigen::RowVectorXd& row) {
  std::vector<LinearProgram::Term> t;
  for (int j = 0; j < row.size(); ++j)
    if (row[j] != 0.0) t.emplace_back(first + j, row[j]);
  return t;
}

}  // namespace

int add_theta(LinearProgram& lp, const ParameterSpace& space, const SpacePiece& piece,
              VarKind kind) {
  const int n = space.dim;
  const int t0 = lp.num_variables();
  for (int i = 0; i < n; ++i) lp.add_variable(piece.lower[i], piece.upper[i], 0.0, kind);
  for (int i = 0; i < space.G.rows(); ++i)
    lp.add_row(dense_terms(t0, space.G.row(i)), RowSense::GreaterEqual, space.h[i]);
  for (int i = 0; i < space.E.rows(); ++i)
    lp.add_row(dense_terms(t0, space.E.row(i)), RowSense::Equal, space.f[i]);
  for (const auto& [a, r] : piece.ge)
    lp.add_row(dense_terms(t0, a.transpose()), RowSense::GreaterEqual, r);
  for (const auto& [a, r] : piece.eq)
    lp.add_row(dense_terms(t0, a.transpose()), RowSense::Equal, r);
  return t0;
}

void add_space_objective(LinearProgram& lp, int theta0, const ParameterSpace& space,
                         double scale) {
  const int n = space.dim;
  switch (space.mode) {
    case ObjectiveMode::Zero: return;
    case ObjectiveMode::LinearCost:
      for (int i = 0; i < n; ++i) lp.add_cost(theta0 + i, scale * space.cost[i]);
      return;
    case ObjectiveMode::NormToPrior: {
      const Vector& p = *space.prior;
      if (std::isinf(space.norm_p)) {
        const int t = lp.add_variable(0.0, kInf, scale);
        for (int i = 0; i < n; ++i) {
          lp.add_row({{t, 1.0}, {theta0 + i, -1.0}}, RowSense::GreaterEqual, -p[i]);
          lp.add_row({{t, 1.0}, {theta0 + i, 1.0}}, RowSense::GreaterEqual, p[i]);
        }
      } else {
        for (int i = 0; i < n; ++i) {
          const int u = lp.add_variable(0.0, kInf, scale);
          lp.add_row({{u, 1.0}, {theta0 + i, -1.0}}, RowSense::GreaterEqual, -p[i]);
          lp.add_row({{u, 1.0}, {theta0 + i, 1.0}}, RowSense::GreaterEqual, p[i]);
        }
      }
      return;
    }
  }
}

PieceSystem piece_system(const ParameterSpace& space, const SpacePiece& piece) {
  const int n = space.dim;
  std::vector<std::pair<Eigen::RowVectorXd, double>> ge, eq;
  for (int i = 0; i < space.G.rows(); ++i) ge.emplace_back(space.G.row(i), space.h[i]);
  for (const auto& [a, r] : piece.ge) ge.emplace_back(a.transpose(), r);
  for (int i = 0; i < n; ++i) {
    const double lo = piece.lower[i], hi = piece.upper[i];
    if (std::isfinite(lo) && std::isfinite(hi) && lo == hi) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r[i] = 1.0;
      eq.emplace_back(r, lo);
      continue;
    }
    if (std::isfinite(lo)) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r[i] = 1.0;
      ge.emplace_back(r, lo);
    }
    if (std::isfinite(hi)) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r[i] = -1.0;
      ge.emplace_back(r, -hi);
    }
  }
  for (int i = 0; i < space.E.rows(); ++i) eq.emplace_back(space.E.row(i), space.f[i]);
  for (const auto& [a, r] : piece.eq) eq.emplace_back(a.transpose(), r);
  PieceSystem s;
  s.G.resize(static_cast<int>(ge.size()), n);
  s.h.resize(static_cast<int>(ge.size()));
  for (std::size_t k = 0; k < ge.size(); ++k) {
    s.G.row(static_cast<int>(k)) = ge[k].first;
    s.h[static_cast<int>(k)] = ge[k].second;
  }
  s.E.resize(static_cast<int>(eq.size()), n);
  s.f.resize(static_cast<int>(eq.size()));
  for (std::size_t k = 0; k < eq.size(); ++k) {
    s.E.row(static_cast<int>(k)) = eq[k].first;
    s.f[static_cast<int>(k)] = eq[k].second;
  }
  return s;
}

bool is_unit_simplex(const ParameterSpace& space) {
  if (space.normalization != Normalization::L1Sphere) return false;
  if (space.G.rows() > 0 || space.E.rows() > 0) return false;
  for (int i = 0; i < space.dim; ++i) {
    if (space.lower_bound(i) != 0.0) return false;
    if (space.upper_bound(i) < 1.0) return false;
  }
  return true;
}

Vector project_simplex(const Vector& v, double radius) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += u[k];
    const double t = (cum - radius) / (k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  return (v.array() - tau).max(0.0).matrix();
}

std::optional<Vector> project_onto_space(const Vector& p, const ParameterSpace& space) {
  if (is_unit_simplex(space)) return project_simplex(p);
  std::optional<Vector> best;
  double best_d = kInf;
  for (const SpacePiece& piece : expand_pieces(space)) {
    const PieceSystem sys = piece_system(space, piece);
    auto q = project_polyhedron(p, sys.G, sys.h, sys.E, sys.f);
    if (!q) continue;
    const double d = (*q - p).norm();
    if (d < best_d - 1e-12) {
      best_d = d;
      best = std::move(q);
    }
  }
  return best;
}

}  // namespace invopt
