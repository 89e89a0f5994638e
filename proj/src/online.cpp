// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/online.hpp"

#include <algorithm>
#include <cmath>

#include "internal.hpp"
#include "invopt/datadriven.hpp"
#include "invopt/solvers.hpp"
#include "invopt/space.hpp"

namespace invopt {

const char* to_string(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::MWU: return "mwu";
    case UpdateRule::OGD: return "ogd";
    case UpdateRule::Implicit: return "implicit";
  }
  return "unknown";
}

double OnlineState::eta(int round) const {
  const double base = eta0 * eta_scale;
  return schedule == Schedule::Constant ? base : base / std::sqrt(static_cast<double>(round));
}

Vector mwu_update(const Vector& theta, double eta, const Vector& gradient) {
  return theta - eta * theta.cwiseProduct(gradient);
}

Vector ogd_update(const Vector& theta, double eta, const Vector& gradient) {
  return theta - eta * gradient;
}

namespace {

Vector project_or_throw(const Vector& v, const ParameterSpace& space) {
  if (is_unit_simplex(space)) return project_simplex(v);
  const auto p = project_onto_space(v, space);
  if (!p) throw Error(ErrorCode::InfeasibleTheta, "Θ is empty");
  return *p;
}

OnlineState linear_step(const OnlineState& state, const Vector& x_hat,
                        const LinearForwardModel& model, const ParameterSpace& space,
                        bool multiplicative, const SolverSettings& settings) {
  if (state.theta.size() != model.num_vars() || x_hat.size() != model.num_vars())
    throw Error(ErrorCode::DimensionMismatch, "θ and x̂ must match the forward dimension");
  LinearForwardModel fm = model;
  fm.c = state.theta;
  const SolveReport rep = fm.has_integers() ? solve_milp(fm, settings) : solve_lp(fm, settings);
  if (rep.status == SolveStatus::Unbounded)
    throw Error(ErrorCode::ForwardUnbounded, "forward problem is unbounded at θ_t");
  if (!rep.optimal()) throw Error(ErrorCode::InvalidArgument, "forward problem has no optimum");
  OnlineState next = state;
  next.t = state.t + 1;
  const double eta = state.eta(next.t);
  const Vector g = model.sign() * (x_hat - rep.primal);
  const double loss = std::abs(state.theta.dot(x_hat) - rep.objective);
  next.cumulative_loss += loss;
  if (next.keep_history) next.history.push_back({next.t, state.theta, loss, eta});
  const Vector raw = multiplicative ? mwu_update(state.theta, eta, g) : ogd_update(state.theta, eta, g);
  next.theta = project_or_throw(raw, space);
  return next;
}

const QuadraticObjective& strict_quadratic(const ConvexForwardModel& model) {
  const auto* q = std::get_if<QuadraticObjective>(&model.objective.form);
  if (!q) throw Error(ErrorCode::UnsupportedObjective, "implicit update needs a quadratic forward");
  Eigen::SelfAdjointEigenSolver<Matrix> es(q->Phi, Eigen::EigenvaluesOnly);
  if (q->Phi.rows() == 0 || es.eigenvalues().minCoeff() <= 1e-12)
    throw Error(ErrorCode::UnsupportedObjective, "implicit update needs Φ positive definite");
  return *q;
}

double distance_loss(const Vector& theta, const Vector& x_hat, const ConvexForwardModel& model) {
  const QuadraticObjective& q = strict_quadratic(model);
  const int n = model.num_vars();
  const auto x = solve_strict_qp(q.Phi, q.psi - theta, model.A, model.b, Matrix(0, n), Vector(0));
  if (!x) throw Error(ErrorCode::InvalidArgument, "forward region is empty");
  return (x_hat - *x).norm();
}

// Coordinate (compass) search on f restricted to Θ, starting at x with step s.
Vector compass_search(const std::function<double(const Vector&)>& f, const ParameterSpace& space,
                      Vector x, double step, double min_step, int max_evals = 4000) {
  double fx = f(x);
  int evals = 1;
  const int d = static_cast<int>(x.size());
  while (step > min_step && evals < max_evals) {
    bool improved = false;
    for (int i = 0; i < d && !improved; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vector y = x;
        y[i] += sgn * step;
        y = project_or_throw(y, space);
        const double fy = f(y);
        ++evals;
        if (fy < fx - 1e-15) {
          x = y;
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

// Lattice of `per_dim` points per coordinate over [c − R, c + R], projected
// onto Θ. Only used for dim ≤ 3.
std::vector<Vector> local_net(const Vector& c, double R, int per_dim, const ParameterSpace& space) {
  const int d = static_cast<int>(c.size());
  std::vector<Vector> out;
  std::vector<int> idx(d, 0);
  while (true) {
    Vector t(d);
    for (int i = 0; i < d; ++i) t[i] = c[i] - R + 2.0 * R * idx[i] / (per_dim - 1);
    if (validate_parameter(t, space, 1e-9).empty()) out.push_back(t);
    else if (auto p = project_onto_space(t, space)) out.push_back(*p);
    int k = 0;
    while (k < d && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == d) break;
  }
  return out;
}

bool same_model(const LinearForwardModel& a, const LinearForwardModel& b) {
  return a.sense == b.sense && a.A.rows() == b.A.rows() && a.A.cols() == b.A.cols() &&
         a.A == b.A && a.b == b.b && a.row_sense == b.row_sense && a.integer == b.integer;
}

double region_diameter(const LinearForwardModel& model, const SolverSettings& settings) {
  const int n = model.num_vars();
  Vector lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    LinearForwardModel fm = model;
    fm.sense = Sense::Minimize;
    fm.c = Vector::Unit(n, j);
    const SolveReport a = solve_lp(fm, settings);
    fm.c = -Vector::Unit(n, j);
    const SolveReport b = solve_lp(fm, settings);
    if (!a.optimal() || !b.optimal()) return kInf;
    lo[j] = a.objective;
    hi[j] = -b.objective;
  }
  return (hi - lo).norm();
}

Vector default_start(const ParameterSpace& space) {
  return project_or_throw(Vector::Constant(space.dim, 1.0 / space.dim), space);
}

std::vector<int> checkpoints_for(const OnlineOptions& options, int T) {
  std::vector<int> cps;
  for (int c : options.checkpoints)
    if (c >= 1 && c <= T) cps.push_back(c);
  cps.push_back(T);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

}  // namespace

OnlineState step_mwu(const OnlineState& state, const Vector& x_hat,
                     const LinearForwardModel& model, const ParameterSpace& space,
                     const SolverSettings& settings) {
  return linear_step(state, x_hat, model, space, true, settings);
}

OnlineState step_ogd(const OnlineState& state, const Vector& x_hat,
                     const LinearForwardModel& model, const ParameterSpace& space,
                     const SolverSettings& settings) {
  return linear_step(state, x_hat, model, space, false, settings);
}

double implicit_objective(const Vector& theta, const Vector& theta_t, double eta,
                          const Vector& x_hat, const ConvexForwardModel& model) {
  return (theta - theta_t).squaredNorm() + eta * distance_loss(theta, x_hat, model);
}

OnlineState step_implicit(const OnlineState& state, const Vector& x_hat,
                          const ConvexForwardModel& model, const ParameterSpace& space,
                          const SolverSettings& settings) {
  (void)settings;
  strict_quadratic(model);
  if (state.theta.size() != model.num_vars() || x_hat.size() != model.num_vars())
    throw Error(ErrorCode::DimensionMismatch, "θ and x̂ must match the forward dimension");
  OnlineState next = state;
  next.t = state.t + 1;
  const double eta = state.eta(next.t);
  const double loss = distance_loss(state.theta, x_hat, model);
  next.cumulative_loss += loss;
  if (next.keep_history) next.history.push_back({next.t, state.theta, loss, eta});
  if (eta <= 0.0 || loss <= 1e-12) return next;

  // Any improvement satisfies ‖θ − θ_t‖² ≤ η ℓ(θ_t), so search that ball.
  const double R = std::sqrt(eta * loss);
  auto P = [&](const Vector& th) { return implicit_objective(th, state.theta, eta, x_hat, model); };
  Vector best = state.theta;
  double best_val = P(best);
  const int d = static_cast<int>(state.theta.size());
  if (d <= 3) {
    const int per_dim = d == 1 ? 81 : d == 2 ? 41 : 13;
    for (const Vector& c : local_net(state.theta, R, per_dim, space)) {
      const double v = P(c);
      if (v < best_val - 1e-15) {
        best_val = v;
        best = c;
      }
    }
  }
  const double step = d <= 3 ? 2.0 * R / 40.0 : R / 4.0;
  best = compass_search(P, space, best, step, 1e-9 * std::max(1.0, R));
  if (P(best) <= best_val) best_val = P(best);
  next.theta = best;
  return next;
}

StreamResult run_stream(const LinearDataset& stream, const ParameterSpace& space,
                        const OnlineOptions& options, const SolverSettings& settings) {
  stream.validate();
  space.validate();
  if (options.rule == UpdateRule::Implicit)
    throw Error(ErrorCode::UnsupportedObjective, "the implicit rule needs strictly convex forwards");
  const int T = stream.size();
  OnlineState st;
  st.schedule = options.schedule;
  st.eta0 = options.eta0;
  st.keep_history = options.keep_history;
  if (options.eta_scale) {
    st.eta_scale = *options.eta_scale;
  } else {
    const double diam = region_diameter(stream.models.front(), settings);
    st.eta_scale = std::isfinite(diam) && diam > 1e-12 ? 1.0 / diam : 1.0;
  }
  st.theta = options.theta0 ? project_or_throw(*options.theta0, space) : default_start(space);

  StreamResult out;
  out.losses.resize(T);
  for (int t = 0; t < T; ++t) {
    const Observation& o = stream.observations[t];
    const double before = st.cumulative_loss;
    st = options.rule == UpdateRule::MWU ? step_mwu(st, o.x, stream.model_for(o), space, settings)
                                         : step_ogd(st, o.x, stream.model_for(o), space, settings);
    out.losses[t] = st.cumulative_loss - before;
  }

  bool shared = true;
  for (const auto& m : stream.models) shared = shared && same_model(m, stream.models.front());
  DataDrivenOptions dd;
  dd.allow_zero_theta = true;
  for (int T_c : checkpoints_for(options, T)) {
    LinearDataset prefix;
    prefix.shared_region = shared;
    prefix.models = shared ? std::vector<LinearForwardModel>{stream.models.front()} : stream.models;
    for (int t = 0; t < T_c; ++t) {
      Observation o = stream.observations[t];
      o.weight = 1.0;
      if (shared) o.instance = 0;
      prefix.observations.push_back(o);
    }
    const EstimationResult batch = estimate_aso(prefix, space, dd, settings);
    const double online_avg = out.losses.head(T_c).sum() / T_c;
    out.checkpoint.push_back(T_c);
    out.regret.push_back(online_avg - batch.objective);
  }
  out.state = std::move(st);
  return out;
}

StreamResult run_stream(const ConvexDataset& stream, const ParameterSpace& space,
                        const OnlineOptions& options, const SolverSettings& settings) {
  stream.validate();
  space.validate();
  if (options.rule != UpdateRule::Implicit)
    throw Error(ErrorCode::UnsupportedCombination, "MWU and OGD streams need linear forwards");
  for (const auto& m : stream.models) strict_quadratic(m);
  const int T = stream.size();
  OnlineState st;
  st.schedule = options.schedule;
  st.eta0 = options.eta0;
  st.eta_scale = options.eta_scale.value_or(1.0);
  st.keep_history = true;
  st.theta = options.theta0 ? project_or_throw(*options.theta0, space) : default_start(space);

  StreamResult out;
  out.losses.resize(T);
  for (int t = 0; t < T; ++t) {
    const Observation& o = stream.observations[t];
    const double before = st.cumulative_loss;
    st = step_implicit(st, o.x, stream.model_for(o), space, settings);
    out.losses[t] = st.cumulative_loss - before;
  }

  // No exact batch solver exists for the distance loss over general Θ; the
  // comparator is the best of the visited iterates refined by compass search.
  out.batch_exact = false;
  for (int T_c : checkpoints_for(options, T)) {
    auto total = [&](const Vector& th) {
      double s = 0.0;
      for (int t = 0; t < T_c; ++t) {
        const Observation& o = stream.observations[t];
        s += distance_loss(th, o.x, stream.model_for(o));
      }
      return s;
    };
    const int stride = std::max(1, T_c / 20);
    Vector best = st.theta;
    double best_val = total(best);
    for (int t = 0; t < T_c; t += stride) {
      const double v = total(st.history[t].theta);
      if (v < best_val) {
        best_val = v;
        best = st.history[t].theta;
      }
    }
    best = compass_search(total, space, best, 0.1, 1e-7, 600);
    best_val = std::min(best_val, total(best));
    const double online_avg = out.losses.head(T_c).sum() / T_c;
    out.checkpoint.push_back(T_c);
    out.regret.push_back(online_avg - best_val / T_c);
  }
  if (!options.keep_history) st.history.clear();
  out.state = std::move(st);
  return out;
}

}  // namespace invopt
