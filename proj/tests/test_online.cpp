// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "invopt/apps.hpp"
#include "invopt/online.hpp"
#include "invopt/oracles.hpp"
#include "invopt/space.hpp"
#include "test_util.hpp"

using namespace invopt;
using namespace invopt::test;

namespace {

OnlineState constant_state(const Vector& theta, double eta) {
  OnlineState s;
  s.theta = theta;
  s.schedule = Schedule::Constant;
  s.eta0 = eta;
  return s;
}

// ½‖x‖² − θᵀx over the unit square; x*(θ) is θ clipped to the square.
ConvexForwardModel square_projection() {
  ConvexForwardModel m;
  m.objective.form = QuadraticObjective{Matrix::Identity(2, 2), Vector::Zero(2)};
  m.A = unit_square(V({0, 0})).A;
  m.b = unit_square(V({0, 0})).b;
  return m;
}

ParameterSpace unit_box() {
  ParameterSpace s = ParameterSpace::free(2);
  s.with_bounds(Vector::Zero(2), Vector::Ones(2));
  return s;
}

}  // namespace

TEST_CASE("single updates match hand arithmetic") {
  const Vector g = V({2, 0}) - V({1, 1});  // x* − x̂
  CHECK(mwu_update(V({1, 1}), 0.5, g) == V({0.5, 1.5}));
  CHECK(ogd_update(V({1, 1}), 0.5, g) == V({0.5, 1.5}));
  CHECK(mwu_update(V({1, 1}), 0.5, Vector::Zero(2)) == V({1, 1}));
  CHECK(ogd_update(V({0.3, 0.7}), 0.0, g) == V({0.3, 0.7}));
  CHECK(project_simplex(V({0.5, 1.5})).isApprox(V({0, 1})));
  // Brute-force check of the projection on a fine simplex grid.
  double best = kInf;
  for (const Vector& t : testing::theta_grid(ParameterSpace::simplex(2), 1e-3))
    best = std::min(best, (t - V({0.5, 1.5})).norm());
  CHECK((project_simplex(V({0.5, 1.5})) - V({0.5, 1.5})).norm() <= best + 1e-12);
}

TEST_CASE("a forward step uses the solved optimum and projects") {
  // Corner region, θ = (0.3, 0.7): x* = (1, 0). For a min forward the loss
  // gradient is g = x̂ − x* = (−1, 1).
  const LinearForwardModel m = corner_model(V({1, 1}));
  const OnlineState s0 = constant_state(V({0.3, 0.7}), 0.5);
  const OnlineState ogd = step_ogd(s0, V({0, 1}), m, ParameterSpace::simplex(2));
  CHECK(ogd.t == 1);
  CHECK(ogd.cumulative_loss == doctest::Approx(0.4));
  CHECK(ogd.theta.isApprox(V({0.8, 0.2})));
  const OnlineState mwu = step_mwu(s0, V({0, 1}), m, ParameterSpace::simplex(2));
  CHECK(mwu.theta.isApprox(project_simplex(V({0.45, 0.35}))));
  CHECK(mwu.theta.isApprox(V({0.55, 0.45})));
  CHECK(validate_parameter(mwu.theta, ParameterSpace::simplex(2)).empty());
  // An optimal observation leaves θ in place.
  const OnlineState same = step_ogd(s0, V({1, 0}), m, ParameterSpace::simplex(2));
  CHECK(same.theta.isApprox(V({0.3, 0.7})));
  CHECK(same.cumulative_loss == doctest::Approx(0.0));
  // η = 0 leaves θ in place.
  const OnlineState frozen = step_ogd(constant_state(V({0.3, 0.7}), 0.0), V({0, 1}), m,
                                      ParameterSpace::simplex(2));
  CHECK(frozen.theta.isApprox(V({0.3, 0.7})));
}

TEST_CASE("implicit step limits") {
  const ConvexForwardModel m = square_projection();
  const OnlineState s0 = constant_state(V({0.9, 0.1}), 0.0);
  CHECK(step_implicit(s0, V({0.3, 0.8}), m, unit_box()).theta == V({0.9, 0.1}));
  const OnlineState s1 = constant_state(V({0.3, 0.8}), 1.0);
  CHECK(step_implicit(s1, V({0.3, 0.8}), m, unit_box()).theta == V({0.3, 0.8}));
}

TEST_CASE("implicit step against a grid of the proximal objective") {
  const ConvexForwardModel m = square_projection();
  const Vector x_hat = V({0.3, 0.8});
  const double eta = 1.0;
  const OnlineState s0 = constant_state(V({0.9, 0.1}), eta);
  const OnlineState s1 = step_implicit(s0, x_hat, m, unit_box());
  const double at_step = implicit_objective(s1.theta, s0.theta, eta, x_hat, m);
  CHECK(at_step <= implicit_objective(s0.theta, s0.theta, eta, x_hat, m));
  const double r = 2e-3;
  const auto g = testing::grid_min_loss(
      [&](const Vector& t) { return implicit_objective(t, s0.theta, eta, x_hat, m); }, unit_box(), r);
  // The proximal objective is Lipschitz with constant 2·diam + η ≤ 2√2 + 1 on the box.
  const double slack = (2 * std::sqrt(2.0) + eta) * r * std::sqrt(2.0);
  CHECK(at_step <= g.value + slack);
  CHECK(at_step >= g.value - slack);
  CHECK(validate_parameter(s1.theta, unit_box()).empty());
}

TEST_CASE("implicit step rejects non-strict objectives") {
  ConvexForwardModel lin;
  lin.objective.form = LinearObjective{};
  lin.A = unit_square(V({0, 0})).A;
  lin.b = unit_square(V({0, 0})).b;
  try {
    step_implicit(constant_state(V({0.5, 0.5}), 1.0), V({1, 1}), lin, unit_box());
    FAIL("expected UnsupportedObjective");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedObjective);
  }
}

TEST_CASE("a stream of optimal observations has zero regret") {
  const LinearForwardModel m = corner_model(V({1, 1}));
  LinearDataset d;
  d.models.push_back(m);
  d.shared_region = true;
  for (int t = 0; t < 20; ++t) d.observations.push_back({V({1, 0}), 0, 1.0});
  OnlineOptions opt;
  opt.theta0 = V({0.4, 0.6});
  opt.checkpoints = {5, 10};
  for (UpdateRule rule : {UpdateRule::OGD, UpdateRule::MWU}) {
    opt.rule = rule;
    const StreamResult r = run_stream(d, ParameterSpace::simplex(2), opt);
    REQUIRE(r.regret.size() == 3);
    for (double v : r.regret) CHECK(std::abs(v) <= 1e-12);
    CHECK(r.losses.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.state.t == 20);
  }
}

TEST_CASE("regret on a planted stream is nonnegative and shrinks") {
  const GeneratedInstance g = generate_instance(InstanceKind::LP, 1, {3, 4000, 0.0});
  for (UpdateRule rule : {UpdateRule::OGD, UpdateRule::MWU}) {
    OnlineOptions opt;
    opt.rule = rule;
    opt.keep_history = false;
    opt.checkpoints = {250, 1000, 4000};
    const StreamResult r = run_stream(g.data, g.space, opt);
    REQUIRE(r.regret.size() == 3);
    for (double v : r.regret) CHECK(v >= -1e-9);
    CHECK(r.regret[0] >= 2.0 * r.regret[2]);
    CHECK(r.batch_exact);
    CHECK(validate_parameter(r.state.theta, g.space, 1e-8).empty());
  }
}

TEST_CASE("implicit rule over a quadratic stream") {
  ConvexDataset d;
  d.models.push_back(square_projection());
  d.shared_region = true;
  for (int t = 0; t < 30; ++t) d.observations.push_back({V({0.3, 0.8}), 0, 1.0});
  OnlineOptions opt;
  opt.rule = UpdateRule::Implicit;
  opt.theta0 = V({0.9, 0.1});
  const StreamResult r = run_stream(d, unit_box(), opt);
  CHECK(r.losses[r.losses.size() - 1] <= r.losses[0]);
  CHECK((r.state.theta - V({0.3, 0.8})).norm() < (V({0.9, 0.1}) - V({0.3, 0.8})).norm());
  for (double v : r.regret) CHECK(v >= -1e-9);
}
