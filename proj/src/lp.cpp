// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/lp.hpp"

#include <algorithm>
#include <cmath>

namespace invopt {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr int kDegenerateBeforeBland = 30;
// Relative row violation above which a returned vertex is rejected.
constexpr double kFeasibilityCheck = 1e-6;

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

// Dense revised simplex on min cᵀx, Ax = b (b ≥ 0), x ≥ 0, starting from a
// feasible basis. The explicit basis inverse is updated by elementary row
// operations and rebuilt from an LU factorization every few pivots.
class RevisedSimplex {
 public:
  RevisedSimplex(const Matrix& A, const Vector& b, const SolverSettings& s)
      : A_(A), b_(b), s_(s) {}

  std::vector<int> basis;
  Matrix binv;
  Vector xb;
  std::vector<char> enterable;
  std::size_t iterations = 0;

  void refactor() {
    const int m = static_cast<int>(A_.rows());
    Matrix B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = A_.col(basis[i]);
    binv = B.partialPivLu().inverse();
    xb = binv * b_;
    clean();
  }

  Vector duals(const Vector& c) const {
    Vector cb(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) cb[i] = c[basis[i]];
    return binv.transpose() * cb;
  }

  PhaseResult run(const Vector& c) {
    const int m = static_cast<int>(A_.rows());
    const int n = static_cast<int>(A_.cols());
    std::vector<char> in_basis(n, 0);
    for (int j : basis) in_basis[j] = 1;
    int degenerate_run = 0;
    bool bland = false;
    std::size_t since_refactor = 0;
    while (true) {
      if (iterations >= s_.lp_max_iter) return PhaseResult::IterationLimit;
      const Vector y = duals(c);
      const Vector d = c - A_.transpose() * y;
      const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
      int q = -1;
      double best = -s_.lp_tol * scale;
      for (int j = 0; j < n; ++j) {
        if (in_basis[j] || !enterable[j]) continue;
        if (d[j] < best) {
          q = j;
          if (bland) break;
          best = d[j];
        }
      }
      if (q < 0) return PhaseResult::Optimal;

      const Vector alpha = binv * A_.col(q);
      int r = -1;
      double ratio = kInf;
      for (int i = 0; i < m; ++i) {
        if (alpha[i] <= kPivotTol) continue;
        const double t = std::max(0.0, xb[i]) / alpha[i];
        if (r < 0 || t < ratio - 1e-12) {
          r = i;
          ratio = t;
        } else if (t <= ratio + 1e-12) {
          const bool prefer = bland ? basis[i] < basis[r] : alpha[i] > alpha[r];
          if (prefer) {
            r = i;
            ratio = std::min(ratio, t);
          }
        }
      }
      if (r < 0) return PhaseResult::Unbounded;

      if (ratio <= 1e-12) {
        if (++degenerate_run > kDegenerateBeforeBland) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      pivot(r, q, alpha, ratio);
      in_basis[basis[r]] = 0;
      in_basis[q] = 1;
      basis[r] = q;
      ++iterations;
      if (++since_refactor >= s_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  void pivot(int r, int q, const Vector& alpha, double step) {
    (void)q;
    xb -= step * alpha;
    xb[r] = step;
    const double piv = alpha[r];
    binv.row(r) /= piv;
    for (int i = 0; i < binv.rows(); ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      binv.row(i) -= alpha[i] * binv.row(r);
    }
    clean();
  }

 private:
  void clean() {
    for (int i = 0; i < xb.size(); ++i)
      if (xb[i] < 0.0 && xb[i] > -1e-11) xb[i] = 0.0;
  }

  const Matrix& A_;
  const Vector& b_;
  const SolverSettings& s_;
};

}  // namespace

SolveReport simplex_standard_form(const Matrix& A_in, const Vector& b_in,
                                  const Vector& c,
                                  const SolverSettings& settings) {
  const int m = static_cast<int>(A_in.rows());
  const int n = static_cast<int>(A_in.cols());
  SolveReport rep;
  rep.primal = Vector::Zero(n);
  rep.dual = Vector::Zero(m);
  if (m == 0) {
    for (int j = 0; j < n; ++j) {
      if (c[j] < -settings.lp_tol) {
        rep.status = SolveStatus::Unbounded;
        return rep;
      }
    }
    rep.status = SolveStatus::Optimal;
    return rep;
  }

  Matrix A = A_in;
  Vector b = b_in;
  std::vector<double> flip(m, 1.0);
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      A.row(i) *= -1.0;
      b[i] = -b[i];
      flip[i] = -1.0;
    }
  }

  // Reuse identity columns as the starting basis where available; the rest
  // of the rows receive artificial columns.
  std::vector<int> unit_col(m, -1);
  for (int j = 0; j < n; ++j) {
    int row = -1;
    bool unit = true;
    for (int i = 0; i < m && unit; ++i) {
      const double v = A(i, j);
      if (v == 0.0) continue;
      if (v == 1.0 && row < 0) row = i;
      else unit = false;
    }
    if (unit && row >= 0 && unit_col[row] < 0) unit_col[row] = j;
  }
  int num_art = 0;
  for (int i = 0; i < m; ++i)
    if (unit_col[i] < 0) ++num_art;

  Matrix Aw(m, n + num_art);
  Aw.leftCols(n) = A;
  Aw.rightCols(num_art).setZero();
  RevisedSimplex sx(Aw, b, settings);
  sx.basis.resize(m);
  sx.enterable.assign(n + num_art, 1);
  int k = n;
  for (int i = 0; i < m; ++i) {
    if (unit_col[i] >= 0) {
      sx.basis[i] = unit_col[i];
    } else {
      Aw(i, k) = 1.0;
      sx.basis[i] = k++;
    }
  }
  sx.binv = Matrix::Identity(m, m);
  sx.xb = b;

  if (num_art > 0) {
    Vector c1 = Vector::Zero(n + num_art);
    c1.tail(num_art).setOnes();
    const PhaseResult p1 = sx.run(c1);
    if (p1 == PhaseResult::IterationLimit) {
      rep.status = SolveStatus::IterationLimit;
      rep.iterations = sx.iterations;
      return rep;
    }
    sx.refactor();
    // Each artificial must sit at zero up to the rhs scale. Summing them or
    // scaling by m lets big-M rows hide a genuinely infeasible system.
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (sx.basis[i] >= n) infeas = std::max(infeas, std::abs(sx.xb[i]));
    const double bscale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (infeas > 1e-9 * bscale) {
      rep.status = SolveStatus::Infeasible;
      rep.iterations = sx.iterations;
      rep.primal_infeasibility = infeas;
      return rep;
    }
    // Drive remaining (zero-level) artificials out of the basis; rows where
    // that is impossible are redundant and keep their artificial at zero.
    for (int i = 0; i < m; ++i) {
      if (sx.basis[i] < n) continue;
      const Eigen::RowVectorXd row = sx.binv.row(i) * A;
      int q = -1;
      double best = 1e-7;
      for (int j = 0; j < n; ++j) {
        if (std::find(sx.basis.begin(), sx.basis.end(), j) != sx.basis.end())
          continue;
        if (std::abs(row[j]) > best) {
          best = std::abs(row[j]);
          q = j;
        }
      }
      if (q < 0) continue;
      const Vector alpha = sx.binv * Aw.col(q);
      sx.pivot(i, q, alpha, sx.xb[i] / alpha[i]);
      sx.basis[i] = q;
    }
    sx.refactor();
    for (int j = n; j < n + num_art; ++j) sx.enterable[j] = 0;
  }

  Vector c2 = Vector::Zero(n + num_art);
  c2.head(n) = c;
  const PhaseResult p2 = sx.run(c2);
  rep.iterations = sx.iterations;
  if (p2 == PhaseResult::IterationLimit) {
    rep.status = SolveStatus::IterationLimit;
    return rep;
  }
  if (p2 == PhaseResult::Unbounded) {
    rep.status = SolveStatus::Unbounded;
    return rep;
  }
  sx.refactor();
  for (int i = 0; i < m; ++i)
    if (sx.basis[i] < n) rep.primal[sx.basis[i]] = std::max(0.0, sx.xb[i]);
  const Vector y = sx.duals(c2);
  for (int i = 0; i < m; ++i) rep.dual[i] = flip[i] * y[i];
  rep.objective = c.dot(rep.primal);
  rep.status = SolveStatus::Optimal;
  return rep;
}

int LinearProgram::add_variable(double lower, double upper, double cost,
                                VarKind kind) {
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  kind_.push_back(kind);
  return static_cast<int>(cost_.size()) - 1;
}

int LinearProgram::add_variables(int count, double lower, double upper,
                                 double cost, VarKind kind) {
  const int first = num_variables();
  for (int i = 0; i < count; ++i) add_variable(lower, upper, cost, kind);
  return first;
}

int LinearProgram::add_row(std::vector<Term> terms, RowSense sense, double rhs) {
  for (const auto& [var, coef] : terms) {
    if (var < 0 || var >= num_variables())
      throw Error(ErrorCode::DimensionMismatch, "row references unknown variable");
    (void)coef;
  }
  rows_.push_back(std::move(terms));
  sense_.push_back(sense);
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  lower_[var] = lower;
  upper_[var] = upper;
}

bool LinearProgram::has_integers() const {
  return std::any_of(kind_.begin(), kind_.end(),
                     [](VarKind k) { return k == VarKind::Integer; });
}

SolveReport LinearProgram::solve(const SolverSettings& settings) const {
  const int n = num_variables();
  const int m = num_rows();
  SolveReport rep;
  rep.primal = Vector::Zero(n);
  rep.dual = Vector::Zero(m);

  for (int j = 0; j < n; ++j) {
    if (lower_[j] > upper_[j] + 1e-12) {
      rep.status = SolveStatus::Infeasible;
      rep.primal_infeasibility = lower_[j] - upper_[j];
      return rep;
    }
  }

  // Column map: x_j = base_j + sign_j * y_col[j] (− y_neg[j] when free).
  std::vector<int> col(n, -1), neg(n, -1);
  std::vector<double> base(n, 0.0), sign(n, 1.0);
  int ncols = 0;
  int nbound_rows = 0;
  for (int j = 0; j < n; ++j) {
    const bool lf = std::isfinite(lower_[j]);
    const bool uf = std::isfinite(upper_[j]);
    col[j] = ncols++;
    if (lf) {
      base[j] = lower_[j];
      if (uf) ++nbound_rows;
    } else if (uf) {
      base[j] = upper_[j];
      sign[j] = -1.0;
    } else {
      neg[j] = ncols++;
    }
  }
  int nslack = 0;
  for (int i = 0; i < m; ++i)
    if (sense_[i] != RowSense::Equal) ++nslack;
  const int total_rows = m + nbound_rows;
  const int total_cols = ncols + nslack + nbound_rows;

  Matrix A = Matrix::Zero(total_rows, total_cols);
  Vector b = Vector::Zero(total_rows);
  Vector c = Vector::Zero(total_cols);
  for (int j = 0; j < n; ++j) {
    c[col[j]] = sign[j] * cost_[j];
    if (neg[j] >= 0) c[neg[j]] = -cost_[j];
  }
  int slack = ncols;
  for (int i = 0; i < m; ++i) {
    double r = rhs_[i];
    for (const auto& [var, coef] : rows_[i]) {
      A(i, col[var]) += sign[var] * coef;
      if (neg[var] >= 0) A(i, neg[var]) -= coef;
      r -= coef * base[var];
    }
    b[i] = r;
    if (sense_[i] == RowSense::GreaterEqual) A(i, slack++) = -1.0;
    else if (sense_[i] == RowSense::LessEqual) A(i, slack++) = 1.0;
  }
  int brow = m;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lower_[j]) && std::isfinite(upper_[j])) {
      A(brow, col[j]) = 1.0;
      A(brow, slack++) = 1.0;
      b[brow] = upper_[j] - lower_[j];
      ++brow;
    }
  }

  const SolveReport std_rep = simplex_standard_form(A, b, c, settings);
  rep.status = std_rep.status;
  rep.iterations = std_rep.iterations;
  if (!std_rep.optimal()) {
    rep.primal_infeasibility = std_rep.primal_infeasibility;
    return rep;
  }

  for (int j = 0; j < n; ++j) {
    double v = base[j] + sign[j] * std_rep.primal[col[j]];
    if (neg[j] >= 0) v -= std_rep.primal[neg[j]];
    rep.primal[j] = v;
  }
  for (int i = 0; i < m; ++i) rep.dual[i] = std_rep.dual[i];

  double obj = offset_;
  for (int j = 0; j < n; ++j) obj += cost_[j] * rep.primal[j];
  rep.objective = obj;

  // Residuals in terms of the original model. A violation that is large
  // relative to the row's own magnitude means the basis lost feasibility.
  double pinf = 0.0;
  bool lost = false;
  for (int i = 0; i < m; ++i) {
    double lhs = 0.0;
    double mag = std::abs(rhs_[i]);
    for (const auto& [var, coef] : rows_[i]) {
      lhs += coef * rep.primal[var];
      mag = std::max(mag, std::abs(coef * rep.primal[var]));
    }
    const double diff = lhs - rhs_[i];
    double v = 0.0;
    if (sense_[i] == RowSense::GreaterEqual) v = -diff;
    else if (sense_[i] == RowSense::LessEqual) v = diff;
    else v = std::abs(diff);
    pinf = std::max(pinf, v);
    if (v > kFeasibilityCheck * (1.0 + mag)) lost = true;
  }
  for (int j = 0; j < n; ++j) {
    const double v = std::max(lower_[j] - rep.primal[j], rep.primal[j] - upper_[j]);
    pinf = std::max(pinf, v);
    if (v > kFeasibilityCheck * (1.0 + std::abs(rep.primal[j]))) lost = true;
  }
  rep.primal_infeasibility = pinf;
  if (lost) {
    rep.status = SolveStatus::Infeasible;
    return rep;
  }

  Vector reduced = Vector::Zero(n);
  for (int j = 0; j < n; ++j) reduced[j] = cost_[j];
  double dinf = 0.0;
  double dual_obj = offset_;
  for (int i = 0; i < m; ++i) {
    const double pi = rep.dual[i];
    if (sense_[i] == RowSense::GreaterEqual) dinf = std::max(dinf, -pi);
    else if (sense_[i] == RowSense::LessEqual) dinf = std::max(dinf, pi);
    dual_obj += rhs_[i] * pi;
    for (const auto& [var, coef] : rows_[i]) reduced[var] -= coef * pi;
  }
  for (int j = 0; j < n; ++j) {
    const double d = reduced[j];
    const bool lf = std::isfinite(lower_[j]);
    const bool uf = std::isfinite(upper_[j]);
    if (d > 0.0) {
      if (lf) dual_obj += lower_[j] * d;
      else dinf = std::max(dinf, d);
    } else if (d < 0.0) {
      if (uf) dual_obj += upper_[j] * d;
      else dinf = std::max(dinf, -d);
    }
  }
  rep.dual_infeasibility = dinf;
  rep.complementarity = std::abs(obj - dual_obj);
  return rep;
}

SolveReport solve_mip(const LinearProgram& lp, const SolverSettings& settings) {
  if (!lp.has_integers()) return lp.solve(settings);

  LinearProgram work = lp;
  const int n = lp.num_variables();
  std::vector<int> ints;
  for (int j = 0; j < n; ++j)
    if (lp.kind(j) == VarKind::Integer) ints.push_back(j);

  struct Node {
    std::vector<double> lo, hi;
  };
  std::vector<Node> stack;
  Node root;
  for (int j : ints) {
    root.lo.push_back(std::ceil(lp.lower(j) - settings.int_tol));
    root.hi.push_back(std::floor(lp.upper(j) + settings.int_tol));
  }
  stack.push_back(std::move(root));

  SolveReport best;
  best.status = SolveStatus::Infeasible;
  bool have_incumbent = false;
  double incumbent = kInf;
  std::size_t nodes = 0;
  bool root_unbounded = false;

  while (!stack.empty()) {
    if (nodes >= settings.milp_node_cap) {
      best.status = SolveStatus::IterationLimit;
      best.iterations = nodes;
      return best;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++nodes;
    bool empty = false;
    for (std::size_t k = 0; k < ints.size(); ++k) {
      if (node.lo[k] > node.hi[k]) empty = true;
      work.set_bounds(ints[k], node.lo[k], node.hi[k]);
    }
    if (empty) continue;
    SolveReport rep = work.solve(settings);
    if (rep.status == SolveStatus::Unbounded) {
      if (nodes == 1) root_unbounded = true;
      break;
    }
    if (rep.status == SolveStatus::IterationLimit) {
      best.status = SolveStatus::IterationLimit;
      return best;
    }
    if (!rep.optimal()) continue;
    const double cutoff = incumbent - 1e-9 * (1.0 + std::abs(incumbent));
    if (have_incumbent && rep.objective >= cutoff) continue;

    int branch = -1;
    double best_frac = settings.int_tol;
    for (std::size_t k = 0; k < ints.size(); ++k) {
      const double v = rep.primal[ints[k]];
      const double frac = std::abs(v - std::round(v));
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = static_cast<int>(k);
      }
    }
    if (branch < 0) {
      // Polish: re-solve with the integers fixed at their rounded values so
      // that a nearly-integral binary cannot leak through a big-M row. When
      // that LP is infeasible, branch on the largest residual fraction.
      LinearProgram fixed = work;
      for (int j : ints) {
        const double r = std::round(rep.primal[j]);
        fixed.set_bounds(j, r, r);
      }
      SolveReport polished = fixed.solve(settings);
      if (polished.optimal()) {
        for (int j : ints) polished.primal[j] = std::round(polished.primal[j]);
        double obj = lp.objective_offset();
        for (int j = 0; j < n; ++j) obj += lp.cost(j) * polished.primal[j];
        polished.objective = obj;
        if (have_incumbent && obj >= cutoff) continue;
        incumbent = obj;
        best = std::move(polished);
        have_incumbent = true;
        continue;
      }
      double frac = 0.0;
      for (std::size_t k = 0; k < ints.size(); ++k) {
        const double v = rep.primal[ints[k]];
        if (std::abs(v - std::round(v)) > frac) {
          frac = std::abs(v - std::round(v));
          branch = static_cast<int>(k);
        }
      }
      if (branch < 0) continue;
    }
    const double v = rep.primal[ints[branch]];
    // Split around the nearest integer so that near-integral values still
    // produce two strictly smaller children.
    const double r = std::round(v);
    Node down = node, up = node;
    down.hi[branch] = v < r ? r - 1.0 : r;
    up.lo[branch] = v < r ? r : r + 1.0;
    // Explore the child on the rounding side first (pushed last).
    if (v - std::floor(v) >= 0.5) {
      stack.push_back(std::move(down));
      stack.push_back(std::move(up));
    } else {
      stack.push_back(std::move(up));
      stack.push_back(std::move(down));
    }
  }

  if (root_unbounded) {
    best = SolveReport{};
    best.status = SolveStatus::Unbounded;
  }
  best.iterations = nodes;
  return best;
}

}  // namespace invopt
