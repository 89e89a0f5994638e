// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "invopt/classical.hpp"
#include "invopt/oracles.hpp"
#include "invopt/solvers.hpp"
#include "test_util.hpp"

using namespace invopt;
using namespace invopt::test;

namespace {

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

ParameterSpace simplex_with_prior(const Vector& prior) {
  ParameterSpace s = ParameterSpace::simplex(static_cast<int>(prior.size()));
  s.with_prior(prior, 1.0);
  return s;
}

ParameterSpace fixed_space(const Vector& value) {
  ParameterSpace s = ParameterSpace::free(static_cast<int>(value.size()));
  s.with_bounds(value, value);
  return s;
}

LinearForwardModel knapsack() {
  LinearForwardModel m;
  m.sense = Sense::Maximize;
  m.c = V({1, 1, 3});
  m.A = M({{2, 3, 4}});
  m.b = V({5});
  m.row_sense = {ConstraintSense::LessEqual};
  Matrix A = m.A;
  Vector b = m.b;
  append_box_rows(A, b, Vector::Zero(3), Vector::Ones(3));
  m.A = A;
  m.b = b;
  m.row_sense.resize(A.rows(), ConstraintSense::GreaterEqual);
  m.integer = {true, true, true};
  return m;
}

// {x₁ + x₂ ≥ 1, 0 ≤ x ≤ 1}.
LinearForwardModel boxed_corner(const Vector& c) {
  LinearForwardModel m = corner_model(c);
  Matrix A = M({{1, 1}});
  Vector b = V({1});
  append_box_rows(A, b, Vector::Zero(2), Vector::Ones(2));
  m.A = A;
  m.b = b;
  return m;
}

// Two states, actions 0 = stay and 1 = switch.
MDPModel chain() {
  MDPModel mdp;
  mdp.num_states = 2;
  mdp.num_actions = 2;
  mdp.transition = {Matrix::Identity(2, 2), M({{0, 1}, {1, 0}})};
  mdp.gamma = 0.9;
  mdp.reward_space = ParameterSpace::free(4);
  return mdp;
}

bool policy_optimal(const MDPModel& mdp, const Vector& theta, const Policy& pol) {
  const auto sol = testing::mdp_value_iteration(mdp, theta);
  const Vector v = testing::policy_value(mdp, theta, pol);
  return (v - sol.values).cwiseAbs().maxCoeff() <= 1e-6;
}

}  // namespace

TEST_CASE("lp-obj moves the prior into the normal cone") {
  const LinearForwardModel m = corner_model(V({1, 1}));
  for (DualityMode mode : {DualityMode::ComplementarySlackness, DualityMode::StrongDuality}) {
    const EstimationResult r = estimate_lp_objective(m, V({1, 0}), simplex_with_prior(V({0.9, 0.1})), mode);
    CHECK(r.theta.isApprox(V({0.5, 0.5}), 1e-9));
    CHECK(r.objective == doctest::Approx(0.8));
    CHECK(testing::verify_inverse_feasible(m, r.theta, V({1, 0})).ok);

    const EstimationResult same = estimate_lp_objective(m, V({1, 0}), simplex_with_prior(V({0.4, 0.6})), mode);
    CHECK(same.theta.isApprox(V({0.4, 0.6}), 1e-9));
    CHECK(same.objective == doctest::Approx(0.0));
  }
}

TEST_CASE("lp-obj rejects interior and infeasible observations") {
  const LinearForwardModel m = corner_model(V({1, 1}));
  CHECK(error_of([&] {
          estimate_lp_objective(m, V({2, 2}), simplex_with_prior(V({0.5, 0.5})),
                                DualityMode::StrongDuality);
        }) == ErrorCode::InverseInfeasible);
  CHECK(error_of([&] {
          estimate_lp_objective(m, V({-1, 0}), simplex_with_prior(V({0.5, 0.5})),
                                DualityMode::StrongDuality);
        }) == ErrorCode::ObservationInfeasible);
}

TEST_CASE("complementary slackness and strong duality agree on h") {
  std::mt19937_64 rng(21);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    const RandomLP r = random_lp(rng, n, 3);
    const auto verts = testing::enumerate_vertices(r.A, r.b, r.lower, r.upper);
    REQUIRE(!verts.empty());
    const Vector x = verts[rng() % verts.size()];
    ParameterSpace space = ParameterSpace::free(n);
    space.normalization = Normalization::L1Sphere;
    Vector prior(n);
    for (int j = 0; j < n; ++j) prior[j] = uniform(rng, -1, 1);
    space.with_prior(prior, 1.0);
    const auto cs = estimate_lp_objective(r.model, x, space, DualityMode::ComplementarySlackness);
    const auto sd = estimate_lp_objective(r.model, x, space, DualityMode::StrongDuality);
    CHECK(cs.objective == doctest::Approx(sd.objective).epsilon(1e-6));
    CHECK(testing::verify_inverse_feasible(r.model, cs.theta, x).ok);
    CHECK(testing::verify_inverse_feasible(r.model, sd.theta, x).ok);
    CHECK(validate_parameter(cs.theta, space, 1e-8).empty());
    ++compared;
  }
  CHECK(compared == 40);
}

TEST_CASE("strong-duality solutions scale within the inverse-feasible cone") {
  ParameterSpace space = ParameterSpace::nonnegative(2);
  space.mode = ObjectiveMode::LinearCost;
  space.cost = V({1, 1});
  space.G = M({{1, 1}});
  space.h = V({1});
  const LinearForwardModel m = corner_model(V({1, 1}));
  const auto r = estimate_lp_objective(m, V({1, 0}), space, DualityMode::StrongDuality);
  for (double alpha : {0.5, 2.0, 10.0}) CHECK(testing::verify_inverse_feasible(m, alpha * r.theta, V({1, 0})).ok);
}

TEST_CASE("lp-joint keeps consistent priors") {
  const LinearForwardModel m = corner_model(V({1, 1}));
  ParameterSpace space = ParameterSpace::free(5);
  space.with_prior(V({1, 1, 1, 0, 0}), 1.0);
  const auto r = estimate_lp_joint(m, V({0.5, 0.5}), space);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.theta.isApprox(V({1, 1, 1, 0, 0}), 1e-9));

  const auto v = estimate_lp_joint(m, V({1, 0}), space);
  CHECK(v.objective == doctest::Approx(0.0));
}

TEST_CASE("lp-joint flags a too-small big-M") {
  // θ fixed at (3, 3) needs the dual 3 on the first row.
  const LinearForwardModel m = corner_model(V({1, 1}));
  const ParameterSpace space = fixed_space(V({3, 3, 1, 0, 0}));
  CHECK(error_of([&] { estimate_lp_joint(m, V({1, 0}), space, 1.0); }) == ErrorCode::BigMViolation);
  const auto ok = estimate_lp_joint(m, V({1, 0}), space);
  CHECK(ok.theta.head(2).isApprox(V({3, 3})));
}

TEST_CASE("constraint matrix: nearest facet perturbation") {
  const LinearForwardModel m = corner_model(V({1, 1}));
  const auto r = estimate_constraint_matrix(m, V({0.6, 0.6}), 1.0);
  CHECK(r.diagnostics.at("row") == 0.0);
  CHECK(r.theta.isApprox(V({5.0 / 6.0, 5.0 / 6.0}), 1e-8));
  CHECK(r.objective == doctest::Approx(1.0 / 3.0));
  REQUIRE(r.matrix.has_value());
  CHECK(r.matrix->bottomRows(2).isApprox(m.A.bottomRows(2)));

  const auto same = estimate_constraint_matrix(m, V({0.5, 0.5}), 1.0);
  CHECK(same.objective == doctest::Approx(0.0));
  REQUIRE(same.matrix.has_value());
  CHECK(same.matrix->isApprox(m.A));

  CHECK(error_of([&] { estimate_constraint_matrix(m, V({-1, -1}), 1.0); }) ==
        ErrorCode::NoCandidateFacet);
}

TEST_CASE("constraint feasibility relaxes the violated row") {
  LinearForwardModel m;
  m.c = V({1, 1});
  m.A = Matrix::Identity(2, 2);
  m.b = V({1, 1});
  FeasibilityOptions opt;
  opt.adjust = AdjustMode::RhsOnly;
  const auto r = estimate_constraints_feasibility(m, V({0.5, 1}), opt);
  REQUIRE(r.vectors.count("rhs"));
  CHECK(r.vectors.at("rhs").head(2).isApprox(V({0.5, 1})));
  CHECK(r.objective == doctest::Approx(0.5));

  const auto feasible = estimate_constraints_feasibility(m, V({2, 3}), opt);
  CHECK(feasible.objective == doctest::Approx(0.0));
  CHECK(feasible.vectors.at("rhs").head(2).isApprox(V({1, 1})));

  // ψ₁ ≥ 1 cannot hold with Φ fixed and x̂₁ = 0.5.
  FeasibilityOptions bad = opt;
  bad.space = ParameterSpace::free(6);
  Vector lo = Vector::Constant(6, -kInf);
  lo[4] = 1.0;
  bad.space.with_bounds(lo, Vector::Constant(6, kInf));
  CHECK(error_of([&] { estimate_constraints_feasibility(m, V({0.5, 1}), bad); }) ==
        ErrorCode::InverseInfeasible);
}

TEST_CASE("cutting plane on the worked knapsack") {
  const LinearForwardModel m = knapsack();
  ParameterSpace space = ParameterSpace::nonnegative(3);
  space.with_prior(V({1, 1, 3}), 1.0);
  const auto r = estimate_milp_cutting_plane(m, V({1, 1, 0}), space);
  CHECK(r.objective == doctest::Approx(1.0));
  CHECK(testing::verify_inverse_feasible(m, r.theta, V({1, 1, 0})).ok);
  // Brute force: x̂ must beat every feasible point.
  for (const Vector& p : testing::enumerate_integer_points(m))
    CHECK(r.theta.dot(V({1, 1, 0})) >= r.theta.dot(p) - 1e-7);

  const auto zero = estimate_milp_cutting_plane(m, V({0, 0, 1}), space);
  CHECK(zero.objective == doctest::Approx(0.0));
  CHECK(zero.theta.isApprox(V({1, 1, 3})));

  CHECK(error_of([&] { estimate_milp_cutting_plane(m, V({1, 1, 0}), fixed_space(V({1, 1, 3}))); }) ==
        ErrorCode::InverseInfeasible);
}

TEST_CASE("inverse MDP with constant prior returns the prior") {
  MDPModel mdp = chain();
  mdp.reward_space.with_prior(Vector::Constant(4, 0.5), 1.0);
  for (const Policy& pol : {Policy{0, 0}, Policy{1, 0}, Policy{0, 1}}) {
    const auto r = estimate_mdp_rewards(mdp, pol);
    CHECK(r.objective == doctest::Approx(0.0));
    CHECK(r.theta.isApprox(Vector::Constant(4, 0.5)));
  }
}

TEST_CASE("inverse MDP adjusts a prior that favors switching") {
  MDPModel mdp = chain();
  Vector prior = Vector::Zero(4);
  prior[mdp.index(0, 1)] = 1.0;
  prior[mdp.index(1, 1)] = 1.0;
  mdp.reward_space.with_prior(prior, 1.0);
  const Policy pol{0, 0};
  CHECK(!policy_optimal(mdp, prior, pol));
  const auto r = estimate_mdp_rewards(mdp, pol);
  CHECK(policy_optimal(mdp, r.theta, pol));
  CHECK(r.objective > 0.0);
  // Zeroing both switch rewards is feasible at cost 2, so h* is at most 2.
  CHECK(r.objective <= 2.0 + 1e-9);
}

TEST_CASE("inverse MDP detects dominated actions") {
  MDPModel mdp = chain();
  // From state 1 both actions lead to state 1.
  mdp.transition[1](1, 0) = 0.0;
  mdp.transition[1](1, 1) = 1.0;
  mdp.reward_space.G = Eigen::RowVectorXd::Zero(4);
  mdp.reward_space.G(0, mdp.index(1, 1)) = 1.0;
  mdp.reward_space.G(0, mdp.index(1, 0)) = -1.0;
  mdp.reward_space.h = V({0.1});
  CHECK(error_of([&] { estimate_mdp_rewards(mdp, {0, 0}); }) == ErrorCode::InverseInfeasible);
}

TEST_CASE("inverse optimal value") {
  const LinearForwardModel m = corner_model(V({1, 1}));
  ParameterSpace space = ParameterSpace::nonnegative(2);
  space.with_prior(V({1, 1}), 1.0);
  const auto r = estimate_inverse_optimal_value(m, 0.7, space);
  CHECK(r.theta.isApprox(V({0.7, 1}), 1e-8));
  CHECK(r.objective == doctest::Approx(0.3));
  CHECK(solve_lp(corner_model(r.theta)).objective == doctest::Approx(0.7));

  const auto same = estimate_inverse_optimal_value(m, 1.0, space);
  CHECK(same.objective == doctest::Approx(0.0));

  try {
    estimate_inverse_optimal_value(m, -1.0, space);
    FAIL("expected TargetUnattainable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TargetUnattainable);
    CHECK(e.details().count("min_gap") == 1);
    CHECK(e.details().at("min_gap") == doctest::Approx(1.0));
  }
}

TEST_CASE("partial inverse completes the fixed components") {
  ParameterSpace space = ParameterSpace::nonnegative(2);
  space.with_prior(V({1, 1}), 1.0);
  const auto r = estimate_partial_lp(boxed_corner(V({1, 1})), {{0, 1.0}}, space);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.theta.isApprox(V({1, 1})));
  REQUIRE(r.vectors.count("x"));
  CHECK(r.vectors.at("x").isApprox(V({1, 0}), 1e-9));

  ParameterSpace space2 = ParameterSpace::nonnegative(2);
  space2.with_prior(V({1, 2}), 1.0);
  const auto s = estimate_partial_lp(boxed_corner(V({1, 2})), {{1, 1.0}}, space2);
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(s.theta[1] <= s.theta[0] + 1e-9);
  CHECK(testing::verify_inverse_feasible(boxed_corner(V({1, 2})), s.theta, s.vectors.at("x")).ok);
  CHECK(s.vectors.at("x")[1] == doctest::Approx(1.0));

  CHECK(error_of([&] { estimate_partial_lp(boxed_corner(V({1, 1})), {{0, 5.0}}, space); }) ==
        ErrorCode::CompletionInfeasible);
}

TEST_CASE("KKT inverse for the projection objective") {
  ConvexForwardModel m;
  m.objective.form = QuadraticObjective{Matrix::Identity(2, 2), Vector::Zero(2)};
  m.A = Matrix::Identity(2, 2);
  m.b = Vector::Zero(2);

  ParameterSpace any = ParameterSpace::free(2);
  any.with_prior(V({5, -3}), 1.0);
  CHECK(estimate_convex_objective_kkt(m, V({1, 2}), any).theta.isApprox(V({1, 2}), 1e-9));

  ParameterSpace space = ParameterSpace::free(2);
  space.with_prior(V({1, 1}), 1.0);
  const auto r = estimate_convex_objective_kkt(m, V({0, 2}), space);
  CHECK(r.theta.isApprox(V({0, 2}), 1e-9));
  CHECK(r.objective == doctest::Approx(2.0));
  CHECK(testing::verify_inverse_feasible(m, r.theta, V({0, 2})).ok);

  CHECK(error_of([&] { estimate_convex_objective_kkt(m, V({1, 2}), fixed_space(V({5, 5}))); }) ==
        ErrorCode::InverseInfeasible);
}
