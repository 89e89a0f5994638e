// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "invopt/apps.hpp"
#include "invopt/datadriven.hpp"
#include "invopt/oracles.hpp"
#include "invopt/solvers.hpp"
#include "test_util.hpp"

using namespace invopt;
using namespace invopt::test;

namespace {

// 0 → {1, 2} → 3.
PathNetwork diamond() {
  PathNetwork pn;
  pn.network.num_nodes = 4;
  pn.network.arcs = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  pn.source = 0;
  pn.sink = 3;
  return pn;
}

// Two parallel links 0 → 1 with t_a = c_a(1 + θ x_a).
TrafficInstance two_link(const Vector& c) {
  TrafficInstance inst;
  inst.network.num_nodes = 2;
  inst.network.arcs = {{0, 1}, {0, 1}};
  inst.free_flow = c;
  inst.capacity = Vector::Ones(2);
  inst.demands = {{0, 1, 1.0}};
  return inst;
}

template <class F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("path helpers") {
  const PathNetwork pn = diamond();
  const Vector upper = pn.path_from_nodes({0, 1, 3});
  CHECK(upper == V({1, 0, 1, 0}));
  CHECK(pn.is_path(upper));
  CHECK(!pn.is_path(V({1, 0, 0, 1})));
  CHECK(error_of([&] { pn.path_from_nodes({0, 3}); }) == ErrorCode::InfeasiblePaths);
  CHECK(max_cost_walk(pn, V({1, 0.5, 1, 0.2}), 2) == doctest::Approx(2.0));
  CHECK(max_cost_walk(pn, V({1, 0.5, 1, 0.2}), 3) == -kInf);
}

TEST_CASE("pathway costs separate survivors from deaths") {
  const PathNetwork pn = diamond();
  const Vector upper = pn.path_from_nodes({0, 1, 3});
  const Vector lower = pn.path_from_nodes({0, 2, 3});
  for (PathwayVariant variant : {PathwayVariant::L1, PathwayVariant::Squared}) {
    PathwayOptions opt;
    opt.variant = variant;
    const PathwayResult r = estimate_pathway_costs(pn, {upper}, {upper}, {lower}, opt);
    CHECK(r.stage1_objective == doctest::Approx(0.0).epsilon(1e-6));
    // Best separation: θ = (−1, 1, −1, 1) puts the dead path 4 above the clinical one.
    CHECK(r.stage2_objective == doctest::Approx(-4.0));
    CHECK(r.eps_died[0] == doctest::Approx(4.0));
    CHECK(r.clinical_drift <= 1e-6);
    CHECK(r.theta.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    // The clinical path is shortest under the stage-2 costs.
    const SolveReport sp = solve_lp(pn.shortest_path_model(r.theta));
    CHECK(r.theta.dot(upper) == doctest::Approx(sp.objective));
  }
  CHECK(error_of([&] { estimate_pathway_costs(pn, {V({1, 0, 0, 1})}, {}, {}); }) ==
        ErrorCode::InfeasiblePaths);
}

TEST_CASE("concordance endpoints and an interior value") {
  const PathNetwork pn = diamond();
  const Vector theta = V({1, 0.5, 1, 0.2});
  CHECK(concordance_omega(theta, pn.path_from_nodes({0, 2, 3}), pn) == doctest::Approx(1.0));
  CHECK(concordance_omega(theta, pn.path_from_nodes({0, 1, 3}), pn) == doctest::Approx(0.0));

  PathNetwork five;
  five.network.num_nodes = 5;
  five.network.arcs = {{0, 1}, {0, 2}, {1, 4}, {2, 3}, {3, 4}, {1, 3}};
  five.sink = 4;
  // Shortest is 0-1-4 (cost 2); the longest three-arc walk costs 3; 0-1-3-4 costs 2.5.
  const Vector t2 = V({1, 1, 1, 1, 1, 0.5});
  CHECK(concordance_omega(t2, five.path_from_nodes({0, 1, 3, 4}), five) == doctest::Approx(0.5));
  // The alternative denominator uses M − θᵀx̂ = 0.5.
  CHECK(concordance_omega(t2, five.path_from_nodes({0, 1, 3, 4}), five, OmegaFormula::Displayed) ==
        doctest::Approx(0.0));
}

TEST_CASE("concordance falls as the pathway cost rises") {
  std::mt19937_64 rng(12);
  const PathNetwork pn = diamond();
  for (int trial = 0; trial < 30; ++trial) {
    Vector theta(4);
    for (int a = 0; a < 4; ++a) theta[a] = uniform(rng, 0.1, 1.0);
    const Vector up = pn.path_from_nodes({0, 1, 3});
    const Vector lo = pn.path_from_nodes({0, 2, 3});
    if (std::abs(theta.dot(up) - theta.dot(lo)) < 1e-6) continue;
    const double wu = concordance_omega(theta, up, pn);
    const double wl = concordance_omega(theta, lo, pn);
    CHECK((theta.dot(up) < theta.dot(lo)) == (wu > wl));
    CHECK(wu + wl == doctest::Approx(1.0));
  }
}

TEST_CASE("concordance on a single path is degenerate") {
  PathNetwork line;
  line.network.num_nodes = 3;
  line.network.arcs = {{0, 1}, {1, 2}};
  line.sink = 2;
  CHECK(error_of([&] { concordance_omega(V({1, 1}), V({1, 1}), line); }) ==
        ErrorCode::DegenerateRange);
}

TEST_CASE("two-link traffic calibration") {
  const TrafficInstance inst = two_link(V({1, 2}));
  // 1 + 0.75θ = 2 + 0.5θ at θ = 4.
  const TrafficCalibration cal = calibrate_traffic(inst, {V({0.75, 0.25})}, 0.0);
  CHECK(cal.theta[0] == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(cal.gaps[0] == doctest::Approx(0.0).scale(1.0));
  const Vector flows = equilibrium_flows(inst, cal.theta);
  CHECK((flows - V({0.75, 0.25})).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(inst.link_costs(V({0.75, 0.25}), cal.theta).isApprox(V({4, 4})));
}

TEST_CASE("ridge picks the smallest parameter on a symmetric network") {
  const TrafficInstance inst = two_link(V({1, 1}));
  const TrafficCalibration cal = calibrate_traffic(inst, {V({0.5, 0.5})}, 1.0);
  CHECK(cal.theta[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(cal.gaps[0] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("traffic input errors") {
  const TrafficInstance inst = two_link(V({1, 2}));
  CHECK(error_of([&] { calibrate_traffic(inst, {V({0.75, 0.75})}, 0.0); }) ==
        ErrorCode::DecompositionInfeasible);
  CHECK(error_of([&] { calibrate_traffic(inst, {V({0.75, 0.25})}, -1.0); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_of([&] { calibrate_traffic(inst, {V({1.0})}, 0.0); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("generators are deterministic") {
  for (const char* name : {"lp", "knapsack", "path", "traffic"}) {
    const InstanceKind kind = instance_kind_from_string(name);
    CHECK(std::string(to_string(kind)) == name);
    const GeneratedInstance a = generate_instance(kind, 7, {3, 4, 0.05});
    const GeneratedInstance b = generate_instance(kind, 7, {3, 4, 0.05});
    CHECK(a.theta_true == b.theta_true);
    REQUIRE(a.data.observations.size() == b.data.observations.size());
    for (std::size_t k = 0; k < a.data.observations.size(); ++k)
      CHECK(a.data.observations[k].x == b.data.observations[k].x);
    CHECK(a.traffic_flows.size() == b.traffic_flows.size());
  }
  CHECK(error_of([] { instance_kind_from_string("maze"); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { generate_instance(InstanceKind::LP, 0, {3, 4, 1.5}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("planted instances are optimal under the planted parameter") {
  const GeneratedInstance lp = generate_instance(InstanceKind::LP, 3, {3, 6, 0.0});
  CHECK(validate_parameter(lp.theta_true, lp.space, 1e-9).empty());
  for (const Observation& o : lp.data.observations)
    CHECK(eval_loss({LossKind::ASO}, lp.theta_true, o.x, lp.data.models[o.instance]) <= 1e-9);
  const GeneratedInstance noisy = generate_instance(InstanceKind::LP, 3, {3, 6, 0.1});
  double total = 0.0;
  for (const Observation& o : noisy.data.observations)
    total += eval_loss({LossKind::ASO}, noisy.theta_true, o.x, noisy.data.models[o.instance]);
  CHECK(total > 1e-6);

  const GeneratedInstance ks = generate_instance(InstanceKind::Knapsack, 5, {4, 3, 0.0});
  for (const Observation& o : ks.data.observations)
    CHECK(testing::verify_inverse_feasible(ks.data.models[o.instance], ks.theta_true, o.x).ok);

  const GeneratedInstance path = generate_instance(InstanceKind::Path, 2, {3, 2, 0.0});
  REQUIRE(path.path.has_value());
  CHECK(path.path->is_path(path.data.observations[0].x));
  CHECK(path.theta_true.maxCoeff() == doctest::Approx(1.0));

  const GeneratedInstance tr = generate_instance(InstanceKind::Traffic, 4);
  REQUIRE(tr.traffic.has_value());
  const TrafficCalibration cal = calibrate_traffic(*tr.traffic, tr.traffic_flows, 0.0);
  CHECK(cal.theta[0] == doctest::Approx(tr.theta_true[0]).epsilon(1e-3));
}
