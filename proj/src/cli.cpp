// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "toml.hpp"

#include "invopt/apps.hpp"
#include "invopt/classical.hpp"
#include "invopt/datadriven.hpp"
#include "invopt/io.hpp"
#include "invopt/online.hpp"
#include "invopt/oracles.hpp"
#include "invopt/solvers.hpp"

namespace invopt::cli {

namespace {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 0;
  std::optional<double> tol;
  int threads = 1;
  std::string config;
  std::string out = ".";
};

/// What a subcommand produced: the report plus extra files (name, text).
struct Outcome {
  std::string method;
  EstimationResult result;
  std::vector<std::pair<std::string, std::string>> files;
};

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

SolverSettings load_settings(const Globals& g) {
  SolverSettings s;
  std::string path = g.config;
  if (path.empty() && fs::exists("invopt.toml")) path = "invopt.toml";
  if (!path.empty()) {
    toml::table cfg;
    try {
      cfg = toml::parse_file(path);
    } catch (const toml::parse_error& e) {
      usage("cannot read config '" + path + "': " + std::string(e.description()));
    }
    if (auto v = cfg["lp"]["tol"].value<double>()) s.lp_tol = *v;
    if (auto v = cfg["milp"]["node_cap"].value<std::int64_t>()) s.milp_node_cap = static_cast<std::size_t>(*v);
    if (auto v = cfg["fw"]["tol"].value<double>()) s.fw_tol = *v;
  }
  if (g.tol) s.lp_tol = *g.tol;
  if (s.lp_tol <= 0.0 || s.fw_tol <= 0.0) usage("tolerances must be positive");
  return s;
}

const LinearForwardModel& require_linear(const io::AnyModel& m) {
  const auto* p = std::get_if<LinearForwardModel>(&m);
  if (!p) usage("this method needs a linear model");
  return *p;
}

RiskSpec parse_risk(const std::string& s) {
  RiskSpec r;
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  if (name == "expected") {
    r.kind = RiskKind::Expected;
    if (colon != std::string::npos) usage("expected risk takes no level");
    return r;
  }
  if (name == "cvar") r.kind = RiskKind::CVaR;
  else if (name == "var") r.kind = RiskKind::VaR;
  else usage("risk must be expected, cvar:A or var:X");
  if (colon == std::string::npos) usage("risk '" + name + "' needs a level, e.g. " + name + ":0.8");
  try {
    r.level = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    usage("invalid risk level in '" + s + "'");
  }
  if (!(r.level > 0.0 && r.level <= 1.0)) usage("risk level must lie in (0, 1]");
  return r;
}

std::map<int, double> parse_fixed(const std::vector<std::string>& items) {
  std::map<int, double> out;
  for (const std::string& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos) usage("--fix expects index=value pairs");
    try {
      out[std::stoi(it.substr(0, eq))] = std::stod(it.substr(eq + 1));
    } catch (const std::exception&) {
      usage("invalid --fix entry '" + it + "'");
    }
  }
  return out;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

std::string losses_csv(const EstimationResult& r) {
  std::string s = "index,loss\n";
  const auto it = r.vectors.find("eval_loss");
  const Vector& l = it != r.vectors.end() ? it->second : r.per_obs_loss;
  for (int i = 0; i < l.size(); ++i) s += csv_row({std::to_string(i), io::fmt(l[i])});
  return s;
}

// ---- solve-forward -------------------------------------------------------

struct ForwardArgs {
  std::string model;
  std::vector<double> theta;
};

Outcome cmd_solve_forward(const ForwardArgs& a, const SolverSettings& settings) {
  const io::AnyModel any = io::load_model(a.model);
  Outcome o;
  o.method = "solve-forward";
  EstimationResult& r = o.result;
  if (const auto* lm = std::get_if<LinearForwardModel>(&any)) {
    LinearForwardModel m = *lm;
    if (!a.theta.empty()) {
      if (static_cast<int>(a.theta.size()) != m.num_vars()) usage("--theta needs one entry per variable");
      m.c = to_vector(a.theta);
    }
    const SolveReport rep = m.has_integers() ? solve_milp(m, settings) : solve_lp(m, settings);
    r.theta = m.c;
    r.diagnostics["iterations"] = static_cast<double>(rep.iterations);
    if (rep.status == SolveStatus::Unbounded) throw Error(ErrorCode::ForwardUnbounded, "forward problem is unbounded");
    if (!rep.optimal()) throw Error(ErrorCode::InverseInfeasible, "forward problem is infeasible");
    r.objective = m.c.dot(rep.primal);
    r.vectors["x"] = rep.primal;
    if (rep.dual.size()) r.vectors["dual"] = rep.dual;
    return o;
  }
  const auto& m = std::get<ConvexForwardModel>(any);
  if (a.theta.empty()) usage("convex models need --theta");
  const Vector theta = to_vector(a.theta);
  const SolveReport rep = solve_convex(m, theta, settings);
  if (rep.status == SolveStatus::Unbounded) throw Error(ErrorCode::ForwardUnbounded, "forward problem is unbounded");
  if (!rep.optimal() && rep.status != SolveStatus::IterationLimit)
    throw Error(ErrorCode::InverseInfeasible, "forward problem is infeasible");
  r.theta = theta;
  r.objective = m.objective.value(rep.primal, theta);
  r.vectors["x"] = rep.primal;
  r.diagnostics["fw_gap"] = rep.complementarity;
  r.diagnostics["iterations"] = static_cast<double>(rep.iterations);
  if (!rep.optimal()) r.status = EstimateStatus::IterationLimit;
  return o;
}

// ---- classical -----------------------------------------------------------

struct ClassicalArgs {
  std::string method;
  std::string model;
  std::string space;
  std::string mdp;
  std::vector<double> x;
  std::string mode = "cs";
  std::optional<double> bigm;
  std::optional<double> z;
  std::vector<std::string> fix;
  double norm_p = 1.0;
  std::string adjust = "both";
  std::size_t max_cuts = 1000;
};

Outcome cmd_classical(const ClassicalArgs& a, const SolverSettings& settings) {
  Outcome o;
  o.method = "classical/" + a.method;
  auto need = [&](bool ok, const char* what) {
    if (!ok) usage(std::string("method '") + a.method + "' needs " + what);
  };
  if (a.method == "mdp") {
    need(!a.mdp.empty(), "--mdp");
    Policy pol;
    const MDPModel mdp = io::parse_mdp(io::read_text(a.mdp), &pol);
    o.result = estimate_mdp_rewards(mdp, pol, settings);
    return o;
  }
  need(!a.model.empty(), "--model");
  const io::AnyModel any = io::load_model(a.model);
  std::optional<ParameterSpace> space;
  if (!a.space.empty()) space = io::load_space(a.space);
  const Vector x = to_vector(a.x);

  if (a.method == "kkt") {
    const auto* cm = std::get_if<ConvexForwardModel>(&any);
    need(space.has_value(), "--theta-space");
    need(!a.x.empty(), "--x");
    o.result = cm ? estimate_convex_objective_kkt(*cm, x, *space, settings)
                  : estimate_convex_objective_kkt(to_convex(std::get<LinearForwardModel>(any)), x,
                                                  *space, settings);
    return o;
  }
  const LinearForwardModel& m = require_linear(any);
  if (a.method == "lp-obj") {
    need(space.has_value(), "--theta-space");
    need(!a.x.empty(), "--x");
    DualityMode mode;
    if (a.mode == "cs") mode = DualityMode::ComplementarySlackness;
    else if (a.mode == "sd") mode = DualityMode::StrongDuality;
    else usage("--mode must be cs or sd");
    o.result = estimate_lp_objective(m, x, *space, mode, settings);
  } else if (a.method == "lp-joint") {
    need(space.has_value(), "--theta-space");
    need(!a.x.empty(), "--x");
    o.result = estimate_lp_joint(m, x, *space, a.bigm, settings);
  } else if (a.method == "con-matrix") {
    need(!a.x.empty(), "--x");
    o.result = estimate_constraint_matrix(m, x, a.norm_p, settings);
  } else if (a.method == "con-feas") {
    need(!a.x.empty(), "--x");
    FeasibilityOptions fo;
    fo.norm_p = a.norm_p;
    if (a.adjust == "both") fo.adjust = AdjustMode::Both;
    else if (a.adjust == "matrix") fo.adjust = AdjustMode::MatrixOnly;
    else if (a.adjust == "rhs") fo.adjust = AdjustMode::RhsOnly;
    else usage("--adjust must be both, matrix or rhs");
    if (space) fo.space = *space;
    o.result = estimate_constraints_feasibility(m, x, fo, settings);
  } else if (a.method == "milp-cut") {
    need(space.has_value(), "--theta-space");
    need(!a.x.empty(), "--x");
    o.result = estimate_milp_cutting_plane(m, x, *space, a.max_cuts, settings);
  } else if (a.method == "opt-value") {
    need(space.has_value(), "--theta-space");
    need(a.z.has_value(), "--z");
    o.result = estimate_inverse_optimal_value(m, *a.z, *space, a.bigm, settings);
  } else if (a.method == "partial") {
    need(space.has_value(), "--theta-space");
    need(!a.fix.empty(), "--fix");
    o.result = estimate_partial_lp(m, parse_fixed(a.fix), *space, a.bigm, settings);
  } else {
    usage("unknown classical method '" + a.method + "'");
  }
  return o;
}

// ---- datadriven ----------------------------------------------------------

struct DataDrivenArgs {
  std::string loss = "aso";
  std::string risk = "expected";
  std::string dataset;
  std::string space;
  double epsilon = 0.0;
  double delta = 0.05;
  double p = 2.0;
  double kkt_p = 1.0;
  std::optional<double> bigm;
  bool allow_zero = false;
};

Outcome cmd_datadriven(const DataDrivenArgs& a, const Globals& g, const SolverSettings& settings) {
  const io::AnyDataset data = io::load_dataset(a.dataset);
  const ParameterSpace space = io::load_space(a.space);
  DataDrivenOptions opt;
  opt.allow_zero_theta = a.allow_zero;
  opt.epsilon = a.epsilon;
  opt.delta = a.delta;
  opt.risk = parse_risk(a.risk);
  opt.kkt_p = a.kkt_p;
  opt.threads = g.threads;
  Outcome o;
  o.method = "datadriven/" + a.loss;
  if (opt.risk.kind != RiskKind::Expected && a.loss != "distance")
    throw Error(ErrorCode::UnsupportedCombination, "only the distance loss supports cvar/var risk");

  auto convex_view = [&] {
    if (data.convex) return data.convex_data;
    ConvexDataset c;
    c.observations = data.linear.observations;
    c.shared_region = data.linear.shared_region;
    for (const LinearForwardModel& m : data.linear.models) c.models.push_back(to_convex(m));
    return c;
  };
  auto linear_only = [&]() -> const LinearDataset& {
    if (data.convex) throw Error(ErrorCode::UnsupportedCombination, "loss '" + a.loss + "' needs linear models");
    return data.linear;
  };
  if (a.loss == "aso") {
    o.result = estimate_aso(linear_only(), space, opt, settings);
  } else if (a.loss == "rso") {
    o.result = estimate_rso(linear_only(), space, opt, settings);
  } else if (a.loss == "distance") {
    if (opt.risk.kind == RiskKind::VaR && linear_only().shared_region) {
      const double p = a.p == 2.0 ? 1.0 : a.p;
      o.result = estimate_var(data.linear, space, opt.risk.level, p, a.bigm, opt, settings);
    } else {
      o.result = estimate_distance(linear_only(), space, opt, settings);
    }
  } else if (a.loss == "vi") {
    o.result = estimate_vi(convex_view(), space, opt, settings);
  } else if (a.loss == "kkt") {
    o.result = estimate_kkt(convex_view(), space, opt, settings);
  } else {
    usage("loss must be aso, rso, distance, vi or kkt");
  }
  o.files.emplace_back("losses.csv", losses_csv(o.result));
  return o;
}

// ---- online --------------------------------------------------------------

struct OnlineArgs {
  std::string rule = "ogd";
  std::string stream;
  std::string space;
  double eta0 = 1.0;
  std::optional<double> eta_scale;
  std::string schedule = "sqrt";
  std::vector<int> checkpoints;
  std::vector<double> theta0;
};

Outcome cmd_online(const OnlineArgs& a, const SolverSettings& settings) {
  const io::AnyDataset data = io::load_dataset(a.stream);
  const ParameterSpace space = io::load_space(a.space);
  OnlineOptions opt;
  if (a.rule == "mwu") opt.rule = UpdateRule::MWU;
  else if (a.rule == "ogd") opt.rule = UpdateRule::OGD;
  else if (a.rule == "implicit") opt.rule = UpdateRule::Implicit;
  else usage("--rule must be mwu, ogd or implicit");
  if (a.schedule == "sqrt") opt.schedule = Schedule::InvSqrt;
  else if (a.schedule == "constant") opt.schedule = Schedule::Constant;
  else usage("--schedule must be sqrt or constant");
  opt.eta0 = a.eta0;
  opt.eta_scale = a.eta_scale;
  opt.checkpoints = a.checkpoints;
  if (!a.theta0.empty()) opt.theta0 = to_vector(a.theta0);
  opt.keep_history = true;

  StreamResult sr;
  if (opt.rule == UpdateRule::Implicit) {
    if (!data.convex) usage("the implicit rule needs a stream of quadratic models");
    sr = run_stream(data.convex_data, space, opt, settings);
  } else {
    if (data.convex) usage("mwu and ogd need a stream of linear models");
    sr = run_stream(data.linear, space, opt, settings);
  }
  Outcome o;
  o.method = "online/" + a.rule;
  EstimationResult& r = o.result;
  r.theta = sr.state.theta;
  r.per_obs_loss = sr.losses;
  r.objective = sr.regret.empty() ? 0.0 : sr.regret.back();
  r.diagnostics["rounds"] = sr.state.t;
  r.diagnostics["cumulative_loss"] = sr.state.cumulative_loss;
  r.diagnostics["batch_exact"] = sr.batch_exact ? 1.0 : 0.0;
  r.diagnostics["eta_scale"] = sr.state.eta_scale;
  for (std::size_t i = 0; i < sr.checkpoint.size(); ++i)
    r.diagnostics["regret_" + std::to_string(sr.checkpoint[i])] = sr.regret[i];

  std::map<int, double> regret_at;
  for (std::size_t i = 0; i < sr.checkpoint.size(); ++i) regret_at[sr.checkpoint[i]] = sr.regret[i];
  const int k = static_cast<int>(sr.state.theta.size());
  std::vector<std::string> head{"t"};
  for (int j = 0; j < k; ++j) head.push_back("theta_" + std::to_string(j));
  head.push_back("loss");
  head.push_back("avg_regret");
  std::string csv = csv_row(head);
  for (const StepRecord& s : sr.state.history) {
    std::vector<std::string> row{std::to_string(s.t)};
    for (int j = 0; j < k; ++j) row.push_back(io::fmt(s.theta[j]));
    row.push_back(io::fmt(s.loss));
    const auto it = regret_at.find(s.t);
    row.push_back(it != regret_at.end() ? io::fmt(it->second) : "");
    csv += csv_row(row);
  }
  o.files.emplace_back("trajectory.csv", csv);
  return o;
}

// ---- bench ---------------------------------------------------------------

struct PathwayArgs {
  std::string network;
  std::string paths;
  std::string variant = "l1";
  std::string omega = "prose";
  bool zero_incidence = false;
};

Outcome cmd_pathway(const PathwayArgs& a, const SolverSettings& settings) {
  const PathNetwork net = io::parse_network(io::read_text(a.network));
  const io::PathSets ps = io::parse_paths(io::read_text(a.paths), net);
  PathwayOptions opt;
  if (a.variant == "l1") opt.variant = PathwayVariant::L1;
  else if (a.variant == "squared") opt.variant = PathwayVariant::Squared;
  else usage("--variant must be l1 or squared");
  opt.zero_incidence = a.zero_incidence;
  OmegaFormula formula;
  if (a.omega == "prose") formula = OmegaFormula::Prose;
  else if (a.omega == "displayed") formula = OmegaFormula::Displayed;
  else usage("--omega must be prose or displayed");

  const PathwayResult pr = estimate_pathway_costs(net, ps.clinical, ps.survived, ps.died, opt, settings);
  Outcome o;
  o.method = "bench/pathway";
  EstimationResult& r = o.result;
  r.theta = pr.theta;
  r.objective = pr.stage1_objective;
  r.per_obs_loss = pr.eps_clinical;
  r.diagnostics["stage1_objective"] = pr.stage1_objective;
  r.diagnostics["stage2_objective"] = pr.stage2_objective;
  r.diagnostics["facet"] = pr.facet;
  r.diagnostics["clinical_drift"] = pr.clinical_drift;
  r.vectors["theta_stage1"] = pr.theta_stage1;
  r.vectors["lambda"] = pr.lambda;
  r.vectors["eps_survived"] = pr.eps_survived;
  r.vectors["eps_died"] = pr.eps_died;

  // Plot data: one (index, ω) point per path and group.
  std::string csv = "group,index,omega\n";
  auto emit = [&](const char* group, const std::vector<Vector>& paths) {
    Vector om(static_cast<int>(paths.size()));
    for (std::size_t i = 0; i < paths.size(); ++i) {
      double w;
      try {
        w = concordance_omega(pr.theta, paths[i], net, formula, settings);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateRange) throw;
        w = std::nan("");
      }
      om[static_cast<int>(i)] = w;
      csv += csv_row({group, std::to_string(i), std::isnan(w) ? "" : io::fmt(w)});
    }
    r.vectors[std::string("omega_") + group] = om;
  };
  emit("clinical", ps.clinical);
  emit("survived", ps.survived);
  emit("died", ps.died);
  o.files.emplace_back("omega.csv", csv);
  return o;
}

struct TrafficArgs {
  std::string instance;
  double kappa = 0.0;
  std::optional<int> degree;
};

Outcome cmd_traffic(const TrafficArgs& a, const SolverSettings& settings) {
  std::vector<Vector> observed;
  TrafficInstance inst = io::parse_traffic(io::read_text(a.instance), &observed);
  if (a.degree) inst.degree = *a.degree;
  inst.validate();
  if (observed.empty()) usage("the traffic instance has no 'observed' flows");
  const TrafficCalibration tc = calibrate_traffic(inst, observed, a.kappa, {}, settings);
  Outcome o;
  o.method = "bench/traffic";
  EstimationResult& r = o.result;
  r.theta = tc.theta;
  r.objective = tc.objective;
  r.per_obs_loss = tc.gaps;
  r.diagnostics["kappa"] = a.kappa;
  r.diagnostics["degree"] = inst.degree;
  const Vector eq = equilibrium_flows(inst, tc.theta, settings);
  r.vectors["equilibrium"] = eq;
  double err = 0.0;
  for (const Vector& x : observed) err = std::max(err, (eq - x).cwiseAbs().maxCoeff());
  r.diagnostics["flow_error"] = err;
  // Plot data: observed vs equilibrium flow per arc.
  std::string csv = "arc,observed,equilibrium\n";
  for (int k = 0; k < eq.size(); ++k)
    csv += csv_row({std::to_string(k), io::fmt(observed.front()[k]), io::fmt(eq[k])});
  o.files.emplace_back("flows.csv", csv);
  return o;
}

struct GenerateArgs {
  std::string kind = "lp";
  GeneratorOptions options;
};

Outcome cmd_generate(const GenerateArgs& a, const Globals& g) {
  const GeneratedInstance gi = generate_instance(instance_kind_from_string(a.kind), g.seed, a.options);
  Outcome o;
  o.method = "bench/generate";
  o.result.theta = gi.theta_true;
  o.result.diagnostics["seed"] = static_cast<double>(g.seed);
  if (gi.traffic) {
    const TrafficInstance& t = *gi.traffic;
    std::ostringstream s;
    s.precision(17);
    s << "{\n  \"num_nodes\": " << t.network.num_nodes << ",\n  \"arcs\": [";
    for (int k = 0; k < t.network.num_arcs(); ++k)
      s << (k ? ", " : "") << "[" << t.network.arcs[k].first << ", " << t.network.arcs[k].second << "]";
    auto list = [&](const Vector& v) {
      std::string out = "[";
      for (int k = 0; k < v.size(); ++k) out += (k ? ", " : "") + io::fmt(v[k]);
      return out + "]";
    };
    s << "],\n  \"free_flow\": " << list(t.free_flow) << ",\n  \"capacity\": " << list(t.capacity)
      << ",\n  \"degree\": " << t.degree << ",\n  \"demands\": [";
    for (std::size_t k = 0; k < t.demands.size(); ++k)
      s << (k ? ", " : "") << "{\"origin\": " << t.demands[k].origin << ", \"destination\": "
        << t.demands[k].destination << ", \"demand\": " << io::fmt(t.demands[k].demand) << "}";
    s << "],\n  \"observed\": [";
    for (std::size_t k = 0; k < gi.traffic_flows.size(); ++k)
      s << (k ? ", " : "") << list(gi.traffic_flows[k]);
    s << "]\n}\n";
    o.files.emplace_back("traffic.json", s.str());
    return o;
  }
  io::AnyDataset d;
  d.linear = gi.data;
  o.files.emplace_back("dataset.json", io::dump_dataset(d));
  o.files.emplace_back("theta_space.json", io::dump_space(gi.space));
  return o;
}

// ---- oracle --------------------------------------------------------------

struct OracleArgs {
  std::string model;
  std::vector<double> theta;
  std::vector<double> x;
  double tol = 1e-6;
};

Matrix stack_rows(const std::vector<Vector>& pts, int n) {
  Matrix M(static_cast<int>(pts.size()), n);
  for (std::size_t i = 0; i < pts.size(); ++i) M.row(static_cast<int>(i)) = pts[i].transpose();
  return M;
}

Outcome cmd_oracle(const std::string& what, const OracleArgs& a) {
  const LinearForwardModel m = require_linear(io::load_model(a.model));
  Outcome o;
  o.method = "oracle/" + what;
  EstimationResult& r = o.result;
  const Vector theta = a.theta.empty() ? m.c : to_vector(a.theta);
  if (theta.size() != m.num_vars()) usage("--theta needs one entry per variable");
  r.theta = theta;
  if (what == "vertices") {
    const LinearForwardModel c = canonicalize(m);
    const auto pts = testing::enumerate_vertices(c.A, c.b);
    r.matrix = stack_rows(pts, m.num_vars());
    r.diagnostics["count"] = static_cast<double>(pts.size());
  } else if (what == "optimal-set") {
    const testing::OptimalSet os = testing::brute_force_optimal_set(m, theta);
    r.matrix = stack_rows(os.points, m.num_vars());
    r.objective = os.value;
    r.diagnostics["count"] = static_cast<double>(os.points.size());
  } else {
    if (a.x.empty()) usage("verify needs --x");
    const testing::InverseCheck ic = testing::verify_inverse_feasible(m, theta, to_vector(a.x), a.tol);
    r.objective = ic.gap;
    r.diagnostics["inverse_feasible"] = ic.ok ? 1.0 : 0.0;
    r.diagnostics["violation"] = ic.violation;
  }
  return o;
}

// ---- validate ------------------------------------------------------------

struct ValidateArgs {
  std::string model;
  std::string space;
  std::string dataset;
  std::string mdp;
};

Outcome cmd_validate(const ValidateArgs& a) {
  if (a.model.empty() && a.space.empty() && a.dataset.empty() && a.mdp.empty())
    usage("validate needs at least one of --model, --theta-space, --dataset, --mdp");
  Outcome o;
  o.method = "validate";
  auto& d = o.result.diagnostics;
  if (!a.model.empty()) {
    const io::AnyModel m = io::load_model(a.model);
    std::visit([&](const auto& mm) {
      d["model_vars"] = mm.num_vars();
      d["model_rows"] = static_cast<double>(mm.A.rows());
    }, m);
  }
  if (!a.space.empty()) d["space_dim"] = io::load_space(a.space).dim;
  if (!a.dataset.empty()) {
    const io::AnyDataset ds = io::load_dataset(a.dataset);
    d["observations"] = ds.convex ? ds.convex_data.size() : ds.linear.size();
  }
  if (!a.mdp.empty()) {
    Policy pol;
    const MDPModel mdp = io::parse_mdp(io::read_text(a.mdp), &pol);
    d["mdp_states"] = mdp.num_states;
  }
  return o;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + p.string() + "'");
  f << text;
}

bool usage_code(ErrorCode c) {
  return c == ErrorCode::InvalidArgument || c == ErrorCode::DimensionMismatch;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inverse optimization estimators and benchmarks", "invopt"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for generators");
  app.add_option("--tol", g.tol, "LP feasibility/optimality tolerance (overrides lp.tol)");
  app.add_option("--threads", g.threads, "Worker threads for net sweeps")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "TOML config (default ./invopt.toml when present)");
  app.add_option("--out", g.out, "Output directory for result.json and CSV files");

  std::function<Outcome(const SolverSettings&)> action;

  ForwardArgs fa;
  auto* sf = app.add_subcommand("solve-forward", "Solve a forward model");
  sf->add_option("--model", fa.model, "model.json")->required();
  sf->add_option("--theta", fa.theta, "Cost/parameter vector")->delimiter(',');
  sf->callback([&] { action = [&](const SolverSettings& s) { return cmd_solve_forward(fa, s); }; });

  ClassicalArgs ca;
  auto* cl = app.add_subcommand("classical", "Classical inverse estimators");
  cl->add_option("--method", ca.method, "lp-obj|lp-joint|con-matrix|con-feas|milp-cut|mdp|opt-value|partial|kkt")
      ->required()
      ->check(CLI::IsMember({"lp-obj", "lp-joint", "con-matrix", "con-feas", "milp-cut", "mdp",
                             "opt-value", "partial", "kkt"}));
  cl->add_option("--model", ca.model, "model.json");
  cl->add_option("--theta-space,--space", ca.space, "theta_space.json");
  cl->add_option("--mdp", ca.mdp, "mdp.json (with policy)");
  cl->add_option("--x", ca.x, "Observed decision")->delimiter(',');
  cl->add_option("--mode", ca.mode, "cs|sd for lp-obj");
  cl->add_option("--bigm", ca.bigm, "Big-M constant");
  cl->add_option("--z", ca.z, "Target optimal value for opt-value");
  cl->add_option("--fix", ca.fix, "index=value pairs for partial")->delimiter(',');
  cl->add_option("--norm-p", ca.norm_p, "1 or inf for con-matrix/con-feas");
  cl->add_option("--adjust", ca.adjust, "both|matrix|rhs for con-feas");
  cl->add_option("--max-cuts", ca.max_cuts, "Cut cap for milp-cut");
  cl->callback([&] { action = [&](const SolverSettings& s) { return cmd_classical(ca, s); }; });

  DataDrivenArgs da;
  auto* dd = app.add_subcommand("datadriven", "Data-driven loss minimization");
  dd->add_option("--loss", da.loss, "aso|rso|distance|vi|kkt");
  dd->add_option("--risk", da.risk, "expected|cvar:A|var:X");
  dd->add_option("--dataset", da.dataset, "dataset.json")->required();
  dd->add_option("--theta-space,--space", da.space, "theta_space.json")->required();
  dd->add_option("--epsilon", da.epsilon, "Distance optimal-set relaxation");
  dd->add_option("--delta", da.delta, "Net spacing");
  dd->add_option("--p", da.p, "Distance norm (VaR: 1 or inf)");
  dd->add_option("--kkt-p", da.kkt_p, "KKT complementarity norm");
  dd->add_option("--bigm", da.bigm, "Big-M for the VaR MILP");
  dd->add_flag("--allow-zero", da.allow_zero, "Allow θ = 0 in Θ");
  dd->callback([&] { action = [&](const SolverSettings& s) { return cmd_datadriven(da, g, s); }; });

  OnlineArgs oa;
  auto* on = app.add_subcommand("online", "Online inverse learning over a stream");
  on->add_option("--rule", oa.rule, "mwu|ogd|implicit");
  on->add_option("--stream", oa.stream, "stream.json (dataset format, in order)")->required();
  on->add_option("--theta-space,--space", oa.space, "theta_space.json")->required();
  on->add_option("--eta0", oa.eta0, "Base step size");
  on->add_option("--eta-scale", oa.eta_scale, "Step-size scale (default 1/diameter)");
  on->add_option("--schedule", oa.schedule, "sqrt|constant");
  on->add_option("--checkpoints", oa.checkpoints, "Rounds with reported regret")->delimiter(',');
  on->add_option("--theta0", oa.theta0, "Starting point")->delimiter(',');
  on->callback([&] { action = [&](const SolverSettings& s) { return cmd_online(oa, s); }; });

  auto* bench = app.add_subcommand("bench", "Reference applications and generators");
  bench->require_subcommand(1);
  PathwayArgs pa;
  auto* bp = bench->add_subcommand("pathway", "Two-stage arc-cost estimation and concordance");
  bp->add_option("--network", pa.network, "net.json")->required();
  bp->add_option("--paths", pa.paths, "paths.json")->required();
  bp->add_option("--variant", pa.variant, "l1|squared");
  bp->add_option("--omega", pa.omega, "prose|displayed");
  bp->add_flag("--zero-incidence", pa.zero_incidence, "Add Aθ = 0");
  bp->callback([&] { action = [&](const SolverSettings& s) { return cmd_pathway(pa, s); }; });
  TrafficArgs ta;
  auto* bt = bench->add_subcommand("traffic", "Wardrop equilibrium calibration");
  bt->add_option("--instance", ta.instance, "traffic.json")->required();
  bt->add_option("--kappa", ta.kappa, "Ridge weight κ")->check(CLI::NonNegativeNumber);
  bt->add_option("--degree", ta.degree, "Polynomial degree (overrides the file)");
  bt->callback([&] { action = [&](const SolverSettings& s) { return cmd_traffic(ta, s); }; });
  GenerateArgs ga;
  auto* bg = bench->add_subcommand("generate", "Synthetic instance with planted θ");
  bg->add_option("--kind", ga.kind, "lp|knapsack|path|traffic");
  bg->add_option("--size", ga.options.size, "Instance size");
  bg->add_option("--observations", ga.options.observations, "Number of observations");
  bg->add_option("--noise", ga.options.noise, "Noise level σ in [0, 1]");
  bg->callback([&] { action = [&](const SolverSettings&) { return cmd_generate(ga, g); }; });

  OracleArgs ora;
  auto* oc = app.add_subcommand("oracle", "Brute-force reference checks");
  oc->group("");  // hidden from help
  oc->require_subcommand(1);
  for (const char* what : {"vertices", "optimal-set", "verify"}) {
    auto* sub = oc->add_subcommand(what, "Oracle query");
    sub->add_option("--model", ora.model, "model.json")->required();
    sub->add_option("--theta", ora.theta, "Cost vector")->delimiter(',');
    sub->add_option("--x", ora.x, "Observed decision")->delimiter(',');
    sub->add_option("--tol", ora.tol, "Gap tolerance");
    const std::string name = what;
    sub->callback([&, name] { action = [&, name](const SolverSettings&) { return cmd_oracle(name, ora); }; });
  }

  ValidateArgs va;
  auto* vl = app.add_subcommand("validate", "Validate input files");
  vl->add_option("--model", va.model, "model.json");
  vl->add_option("--theta-space,--space", va.space, "theta_space.json");
  vl->add_option("--dataset", va.dataset, "dataset.json");
  vl->add_option("--mdp", va.mdp, "mdp.json");
  vl->callback([&] { action = [&](const SolverSettings&) { return cmd_validate(va); }; });

  // Global flags may appear after the subcommand.
  std::function<void(CLI::App*)> fall = [&](CLI::App* a) {
    for (CLI::App* sub : a->get_subcommands({})) {
      sub->fallthrough();
      fall(sub);
    }
  };
  fall(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Outcome outcome;
  std::string error;
  int code = kExitOk;
  fs::path dir;
  try {
    const SolverSettings settings = load_settings(g);
    dir = g.out;
    fs::create_directories(dir);
    outcome = action(settings);
    if (outcome.result.status == EstimateStatus::Infeasible) code = kExitModel;
  } catch (const Error& e) {
    if (usage_code(e.code())) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    code = kExitModel;
    error = e.what();
    outcome.result.status = EstimateStatus::Infeasible;
    outcome.result.objective = std::nan("");
    for (const auto& [k, v] : e.details()) outcome.result.diagnostics[k] = v;
    err << "error: " << e.what() << "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (outcome.method.empty()) {
    // Failed before the command could name itself: recover it from argv.
    const CLI::App* sub = app.get_subcommands().front();
    outcome.method = sub->get_name();
    for (const CLI::App* s : sub->get_subcommands()) outcome.method += "/" + s->get_name();
    if (const auto* m = cl->get_option("--method"); sub == cl && m->count())
      outcome.method += "/" + ca.method;
    if (sub == dd) outcome.method += "/" + da.loss;
    if (sub == on) outcome.method += "/" + oa.rule;
  }
  try {
    write_file(dir / "result.json", io::result_json(outcome.method, outcome.result, error));
    if (code == kExitOk)
      for (const auto& [name, text] : outcome.files) write_file(dir / name, text);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (code == kExitOk) {
    out << "status: " << to_string(outcome.result.status) << "\n";
    out << "objective: " << io::fmt(outcome.result.objective) << "\n";
    out << "theta:";
    for (int i = 0; i < outcome.result.theta.size(); ++i) out << " " << io::fmt(outcome.result.theta[i]);
    out << "\n";
  }
  return code;
}

}  // namespace invopt::cli
