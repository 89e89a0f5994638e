// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace invopt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ObservationInfeasible: return "ObservationInfeasible";
    case ErrorCode::InverseInfeasible: return "InverseInfeasible";
    case ErrorCode::BigMViolation: return "BigMViolation";
    case ErrorCode::NoCandidateFacet: return "NoCandidateFacet";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::TargetUnattainable: return "TargetUnattainable";
    case ErrorCode::CompletionInfeasible: return "CompletionInfeasible";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::NormalizationRequired: return "NormalizationRequired";
    case ErrorCode::EmptyNet: return "EmptyNet";
    case ErrorCode::UnsupportedObjective: return "UnsupportedObjective";
    case ErrorCode::ForwardUnbounded: return "ForwardUnbounded";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::InfeasiblePaths: return "InfeasiblePaths";
    case ErrorCode::DecompositionInfeasible: return "DecompositionInfeasible";
    case ErrorCode::InfeasibleTheta: return "InfeasibleTheta";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::map<std::string, double> details)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      details_(std::move(details)) {}

const char* to_string(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::Optimal: return "Optimal";
    case EstimateStatus::Infeasible: return "Infeasible";
    case EstimateStatus::IterationLimit: return "IterationLimit";
    case EstimateStatus::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

namespace {

[[noreturn]] void mismatch(const std::string& what) {
  throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

bool LinearForwardModel::has_integers() const {
  return std::find(integer.begin(), integer.end(), true) != integer.end();
}

bool LinearForwardModel::is_canonical() const {
  if (sense != Sense::Minimize) return false;
  return std::all_of(row_sense.begin(), row_sense.end(), [](ConstraintSense s) {
    return s == ConstraintSense::GreaterEqual;
  });
}

void validate_model(const LinearForwardModel& model) {
  const int n = model.num_vars();
  const int m = model.num_rows();
  if (model.c.size() != n) {
    std::ostringstream os;
    os << "cost has " << model.c.size() << " entries but A has " << n << " columns";
    mismatch(os.str());
  }
  if (model.b.size() != m) mismatch("b length differs from the number of rows of A");
  if (!model.row_sense.empty() && static_cast<int>(model.row_sense.size()) != m)
    mismatch("row sense list length differs from the number of rows");
  if (!model.integer.empty() && static_cast<int>(model.integer.size()) != n)
    mismatch("integrality list length differs from the number of variables");
}

LinearForwardModel canonicalize(const LinearForwardModel& model) {
  validate_model(model);
  if (model.is_canonical()) {
    LinearForwardModel out = model;
    out.row_sense.assign(model.num_rows(), ConstraintSense::GreaterEqual);
    return out;
  }
  const int n = model.num_vars();
  const int m = model.num_rows();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int i = 0; i < m; ++i) {
    const ConstraintSense s =
        model.row_sense.empty() ? ConstraintSense::GreaterEqual : model.row_sense[i];
    if (s == ConstraintSense::GreaterEqual || s == ConstraintSense::Equal) {
      rows.push_back(model.A.row(i));
      rhs.push_back(model.b[i]);
    }
    if (s == ConstraintSense::LessEqual || s == ConstraintSense::Equal) {
      rows.push_back(-model.A.row(i));
      rhs.push_back(-model.b[i]);
    }
  }
  LinearForwardModel out;
  out.A.resize(static_cast<int>(rows.size()), n);
  out.b.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.A.row(static_cast<int>(i)) = rows[i];
    out.b[static_cast<int>(i)] = rhs[i];
  }
  out.c = model.sign() * model.c;
  out.sense = Sense::Minimize;
  out.integer = model.integer;
  out.row_sense.assign(rows.size(), ConstraintSense::GreaterEqual);
  return out;
}

double BasisFunction::value(const Vector& x) const {
  double v = 0.0;
  for (const PowerTerm& t : terms) {
    const double xi = x[t.var];
    v += t.coef * (t.power == 1.0 ? xi : std::pow(std::max(xi, 0.0), t.power));
  }
  return v;
}

Vector BasisFunction::gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (const PowerTerm& t : terms) {
    const double xi = x[t.var];
    g[t.var] += t.coef * (t.power == 1.0
                              ? 1.0
                              : t.power * std::pow(std::max(xi, 0.0), t.power - 1.0));
  }
  return g;
}

int ObjectiveSpec::num_params(int n) const {
  if (const auto* b = std::get_if<BasisObjective>(&form))
    return static_cast<int>(b->bases.size());
  return n;
}

double ObjectiveSpec::value(const Vector& x, const Vector& theta) const {
  if (std::holds_alternative<LinearObjective>(form)) return theta.dot(x);
  if (const auto* q = std::get_if<QuadraticObjective>(&form))
    return 0.5 * x.dot(q->Phi * x) + q->psi.dot(x) - theta.dot(x);
  const auto& b = std::get<BasisObjective>(form);
  double v = b.offset.size() ? b.offset.dot(x) : 0.0;
  for (std::size_t k = 0; k < b.bases.size(); ++k)
    v += theta[static_cast<int>(k)] * b.bases[k].value(x);
  return v;
}

std::pair<Matrix, Vector> ObjectiveSpec::gradient_affine(const Vector& x, int n) const {
  if (std::holds_alternative<LinearObjective>(form))
    return {Matrix::Identity(n, n), Vector::Zero(n)};
  if (const auto* q = std::get_if<QuadraticObjective>(&form))
    return {-Matrix::Identity(n, n), q->Phi * x + q->psi};
  const auto& b = std::get<BasisObjective>(form);
  Matrix J(n, static_cast<int>(b.bases.size()));
  for (std::size_t k = 0; k < b.bases.size(); ++k)
    J.col(static_cast<int>(k)) = b.bases[k].gradient(x);
  Vector g0 = b.offset.size() ? b.offset : Vector::Zero(n);
  return {J, g0};
}

Vector ObjectiveSpec::gradient(const Vector& x, const Vector& theta) const {
  const auto [J, g0] = gradient_affine(x, static_cast<int>(x.size()));
  return g0 + J * theta;
}

void ObjectiveSpec::validate(int n) const {
  if (const auto* q = std::get_if<QuadraticObjective>(&form)) {
    if (q->Phi.rows() != n || q->Phi.cols() != n) mismatch("Phi must be n×n");
    if (q->psi.size() != n) mismatch("psi must have n entries");
    const double scale = std::max(1.0, q->Phi.cwiseAbs().maxCoeff());
    if ((q->Phi - q->Phi.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw Error(ErrorCode::InvalidArgument, "Phi is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(q->Phi, Eigen::EigenvaluesOnly);
    if (n > 0 && es.eigenvalues().minCoeff() < -1e-9)
      throw Error(ErrorCode::InvalidArgument, "Phi is not positive semidefinite");
  } else if (const auto* b = std::get_if<BasisObjective>(&form)) {
    if (b->offset.size() && b->offset.size() != n) mismatch("basis offset must have n entries");
    if (!b->nonnegative.empty() && b->nonnegative.size() != b->bases.size())
      mismatch("one sign rule per basis function expected");
    for (const auto& f : b->bases) {
      for (const PowerTerm& t : f.terms) {
        if (t.var < 0 || t.var >= n) mismatch("basis term references unknown variable");
        if (t.power < 1.0)
          throw Error(ErrorCode::InvalidArgument, "basis powers must be at least 1");
      }
    }
  }
}

void ConvexForwardModel::validate() const {
  if (b.size() != A.rows()) mismatch("b length differs from the number of rows of A");
  objective.validate(num_vars());
}

ParameterSpace ParameterSpace::free(int dim) {
  ParameterSpace s;
  s.dim = dim;
  s.G = Matrix::Zero(0, dim);
  s.h = Vector::Zero(0);
  s.E = Matrix::Zero(0, dim);
  s.f = Vector::Zero(0);
  return s;
}

ParameterSpace ParameterSpace::nonnegative(int dim) {
  ParameterSpace s = free(dim);
  s.lower = Vector::Zero(dim);
  s.upper = Vector::Constant(dim, kInf);
  return s;
}

ParameterSpace ParameterSpace::simplex(int dim) {
  ParameterSpace s = nonnegative(dim);
  s.normalization = Normalization::L1Sphere;
  return s;
}

ParameterSpace& ParameterSpace::with_prior(const Vector& p, double norm) {
  prior = p;
  mode = ObjectiveMode::NormToPrior;
  norm_p = norm;
  return *this;
}

ParameterSpace& ParameterSpace::with_bounds(const Vector& lo, const Vector& hi) {
  lower = lo;
  upper = hi;
  return *this;
}

double ParameterSpace::objective(const Vector& theta) const {
  switch (mode) {
    case ObjectiveMode::NormToPrior: {
      const Vector d = theta - *prior;
      return std::isinf(norm_p) ? d.cwiseAbs().maxCoeff() : d.cwiseAbs().sum();
    }
    case ObjectiveMode::LinearCost: return cost.dot(theta);
    case ObjectiveMode::Zero: return 0.0;
  }
  return 0.0;
}

void ParameterSpace::validate() const {
  if (G.rows() != h.size() || (G.rows() > 0 && G.cols() != dim))
    mismatch("G/h dimensions do not match the parameter dimension");
  if (E.rows() != f.size() || (E.rows() > 0 && E.cols() != dim))
    mismatch("E/f dimensions do not match the parameter dimension");
  if ((lower.size() && lower.size() != dim) || (upper.size() && upper.size() != dim))
    mismatch("box bounds must have one entry per parameter");
  if (normalization == Normalization::FixedComponent &&
      (fixed_index < 0 || fixed_index >= dim))
    mismatch("fixed component index out of range");
  if (mode == ObjectiveMode::NormToPrior) {
    if (!prior) throw Error(ErrorCode::InvalidArgument, "norm-to-prior objective needs a prior");
    if (prior->size() != dim) mismatch("prior has the wrong dimension");
    if (norm_p != 1.0 && !std::isinf(norm_p))
      throw Error(ErrorCode::InvalidArgument, "prior norm must be 1 or infinity");
  }
  if (mode == ObjectiveMode::LinearCost && cost.size() != dim)
    mismatch("linear cost has the wrong dimension");
}

std::vector<SpacePiece> expand_pieces(const ParameterSpace& space) {
  const int n = space.dim;
  SpacePiece base;
  base.lower = Vector(n);
  base.upper = Vector(n);
  for (int i = 0; i < n; ++i) {
    base.lower[i] = space.lower_bound(i);
    base.upper[i] = space.upper_bound(i);
  }
  std::vector<SpacePiece> out;
  auto push_if_nonempty = [&](SpacePiece p) {
    for (int i = 0; i < n; ++i)
      if (p.lower[i] > p.upper[i] + 1e-12) return;
    out.push_back(std::move(p));
  };

  switch (space.normalization) {
    case Normalization::None:
      out.push_back(base);
      break;
    case Normalization::FixedComponent: {
      SpacePiece p = base;
      p.lower[space.fixed_index] = std::max(p.lower[space.fixed_index], space.fixed_value);
      p.upper[space.fixed_index] = std::min(p.upper[space.fixed_index], space.fixed_value);
      push_if_nonempty(std::move(p));
      break;
    }
    case Normalization::L1Sphere: {
      if ((base.lower.array() >= 0.0).all()) {
        SpacePiece p = base;
        p.eq.emplace_back(Vector::Ones(n), 1.0);
        push_if_nonempty(std::move(p));
        break;
      }
      if (n > 16) throw Error(ErrorCode::TooLarge, "L1 sphere expansion limited to 16 dimensions");
      for (long mask = 0; mask < (1L << n); ++mask) {
        SpacePiece p = base;
        Vector s(n);
        bool skip = false;
        for (int i = 0; i < n; ++i) {
          s[i] = (mask >> i) & 1 ? -1.0 : 1.0;
          if (s[i] > 0) {
            if (base.upper[i] <= 0.0 && base.lower[i] < 0.0) skip = true;
            p.lower[i] = std::max(p.lower[i], 0.0);
          } else {
            if (base.lower[i] >= 0.0) skip = true;
            p.upper[i] = std::min(p.upper[i], 0.0);
          }
        }
        if (skip) continue;
        p.eq.emplace_back(s, 1.0);
        push_if_nonempty(std::move(p));
      }
      break;
    }
    case Normalization::LInfSphere: {
      for (int k = 0; k < n; ++k) {
        for (double sgn : {1.0, -1.0}) {
          SpacePiece p = base;
          for (int i = 0; i < n; ++i) {
            p.lower[i] = std::max(p.lower[i], -1.0);
            p.upper[i] = std::min(p.upper[i], 1.0);
          }
          if (sgn < p.lower[k] - 1e-12 || sgn > p.upper[k] + 1e-12) continue;
          p.lower[k] = p.upper[k] = sgn;
          push_if_nonempty(std::move(p));
        }
      }
      break;
    }
  }
  return out;
}

std::vector<std::string> validate_parameter(const Vector& theta,
                                            const ParameterSpace& space,
                                            double tol) {
  std::vector<std::string> report;
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
  };
  if (theta.size() != space.dim) {
    report.push_back("dimension " + std::to_string(theta.size()) + " != " +
                     std::to_string(space.dim));
    return report;
  }
  for (int i = 0; i < space.G.rows(); ++i) {
    const double lhs = space.G.row(i).dot(theta);
    if (lhs < space.h[i] - tol)
      report.push_back("inequality " + std::to_string(i) + ": " + fmt(lhs) + " < " + fmt(space.h[i]));
  }
  for (int i = 0; i < space.E.rows(); ++i) {
    const double lhs = space.E.row(i).dot(theta);
    if (std::abs(lhs - space.f[i]) > tol)
      report.push_back("equality " + std::to_string(i) + ": " + fmt(lhs) + " != " + fmt(space.f[i]));
  }
  for (int i = 0; i < space.dim; ++i) {
    if (theta[i] < space.lower_bound(i) - tol)
      report.push_back("theta[" + std::to_string(i) + "] below lower bound");
    if (theta[i] > space.upper_bound(i) + tol)
      report.push_back("theta[" + std::to_string(i) + "] above upper bound");
  }
  switch (space.normalization) {
    case Normalization::None: break;
    case Normalization::L1Sphere: {
      const double nrm = theta.cwiseAbs().sum();
      if (std::abs(nrm - 1.0) > tol) report.push_back("‖θ‖₁ = " + fmt(nrm) + " ≠ 1");
      break;
    }
    case Normalization::LInfSphere: {
      const double nrm = theta.size() ? theta.cwiseAbs().maxCoeff() : 0.0;
      if (std::abs(nrm - 1.0) > tol) report.push_back("‖θ‖∞ = " + fmt(nrm) + " ≠ 1");
      break;
    }
    case Normalization::FixedComponent:
      if (std::abs(theta[space.fixed_index] - space.fixed_value) > tol)
        report.push_back("theta[" + std::to_string(space.fixed_index) + "] != " +
                         fmt(space.fixed_value));
      break;
  }
  return report;
}

template <typename Model>
void Dataset<Model>::validate() const {
  if (observations.empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no observations");
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no models");
  if (shared_region && models.size() != 1)
    throw Error(ErrorCode::InvalidArgument, "shared region requires exactly one model");
  double total = 0.0;
  for (const Observation& o : observations) {
    if (o.instance < 0 || o.instance >= static_cast<int>(models.size()))
      mismatch("observation references unknown instance");
    if (o.x.size() != models[o.instance].num_vars())
      mismatch("observation dimension differs from its instance");
    if (!(o.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be positive");
    total += o.weight;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must sum to a positive value");
}

template struct Dataset<LinearForwardModel>;
template struct Dataset<ConvexForwardModel>;

void MDPModel::validate() const {
  if (num_states <= 0 || num_actions <= 0)
    throw Error(ErrorCode::InvalidArgument, "MDP needs states and actions");
  if (static_cast<int>(transition.size()) != num_actions)
    mismatch("one transition matrix per action expected");
  for (const Matrix& P : transition) {
    if (P.rows() != num_states || P.cols() != num_states) mismatch("transition must be |S|×|S|");
    if ((P.array() < 0.0).any())
      throw Error(ErrorCode::InvalidArgument, "negative transition probability");
    for (int s = 0; s < num_states; ++s)
      if (std::abs(P.row(s).sum() - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidArgument, "transition rows must sum to 1");
  }
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw Error(ErrorCode::InvalidArgument, "discount must lie in [0, 1)");
  if (reward_space.dim != num_states * num_actions)
    mismatch("reward space dimension must be |S|·|A|");
}

void append_box_rows(Matrix& A, Vector& b, const Vector& lo, const Vector& hi) {
  const int n = static_cast<int>(A.cols());
  std::vector<std::pair<Eigen::RowVectorXd, double>> extra;
  for (int j = 0; j < n; ++j) {
    if (lo.size() && std::isfinite(lo[j])) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r[j] = 1.0;
      extra.emplace_back(r, lo[j]);
    }
    if (hi.size() && std::isfinite(hi[j])) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r[j] = -1.0;
      extra.emplace_back(r, -hi[j]);
    }
  }
  const int m0 = static_cast<int>(A.rows());
  A.conservativeResize(m0 + static_cast<int>(extra.size()), n);
  b.conservativeResize(m0 + static_cast<int>(extra.size()));
  for (std::size_t k = 0; k < extra.size(); ++k) {
    A.row(m0 + static_cast<int>(k)) = extra[k].first;
    b[m0 + static_cast<int>(k)] = extra[k].second;
  }
}

}  // namespace invopt
