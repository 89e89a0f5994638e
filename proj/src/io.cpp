// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "invopt/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace invopt::io {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  bad("expected a number");
}

Vector vec(const json& j) {
  if (!j.is_array()) bad("expected an array of numbers");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = number(j[i]);
  return v;
}

Matrix mat(const json& j, int cols_if_empty = 0) {
  if (!j.is_array()) bad("expected an array of rows");
  if (j.empty()) return Matrix(0, cols_if_empty);
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Vector row = vec(j[r]);
    if (row.size() != cols) bad("matrix rows have different lengths");
    m.row(r) = row.transpose();
  }
  return m;
}

// Converts JSON type errors into InvalidArgument.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    bad(std::string("malformed input: ") + e.what());
  }
}

json to_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round12(v);
}

json to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
  return a;
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
  return a;
}

json bound_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return round12(v);
}

ConstraintSense sense_from(const std::string& s) {
  if (s == ">=") return ConstraintSense::GreaterEqual;
  if (s == "<=") return ConstraintSense::LessEqual;
  if (s == "=" || s == "==") return ConstraintSense::Equal;
  bad("row sense must be one of >=, <=, =");
}

const char* sense_str(ConstraintSense s) {
  switch (s) {
    case ConstraintSense::GreaterEqual: return ">=";
    case ConstraintSense::LessEqual: return "<=";
    case ConstraintSense::Equal: return "=";
  }
  return ">=";
}

LinearForwardModel linear_from(const json& j) {
  LinearForwardModel m;
  m.c = vec(field(j, "c"));
  m.A = mat(field(j, "A"), static_cast<int>(m.c.size()));
  m.b = vec(field(j, "b"));
  if (j.contains("sense")) {
    const std::string s = j.at("sense").get<std::string>();
    if (s == "max") m.sense = Sense::Maximize;
    else if (s != "min") bad("sense must be 'min' or 'max'");
  }
  if (j.contains("row_sense"))
    for (const json& s : j.at("row_sense")) m.row_sense.push_back(sense_from(s.get<std::string>()));
  if (j.contains("integer"))
    for (const json& s : j.at("integer")) m.integer.push_back(s.get<bool>());
  validate_model(m);
  return m;
}

ConvexForwardModel convex_from(const json& j) {
  ConvexForwardModel m;
  m.A = mat(field(j, "A"));
  m.b = vec(field(j, "b"));
  const json& o = field(j, "objective");
  const std::string type = field(o, "type").get<std::string>();
  if (type == "linear") {
    m.objective.form = LinearObjective{};
  } else if (type == "quadratic") {
    QuadraticObjective q;
    q.Phi = mat(field(o, "Phi"));
    q.psi = vec(field(o, "psi"));
    m.objective.form = std::move(q);
  } else if (type == "basis") {
    BasisObjective b;
    b.offset = o.contains("offset") ? vec(o.at("offset")) : Vector::Zero(m.A.cols());
    for (const json& fb : field(o, "bases")) {
      BasisFunction f;
      for (const json& t : fb)
        f.terms.push_back({field(t, "var").get<int>(), number(field(t, "coef")),
                           t.contains("power") ? number(t.at("power")) : 1.0});
      b.bases.push_back(std::move(f));
    }
    if (o.contains("nonnegative"))
      for (const json& s : o.at("nonnegative")) b.nonnegative.push_back(s.get<bool>());
    m.objective.form = std::move(b);
  } else {
    bad("objective type must be linear, quadratic or basis");
  }
  m.validate();
  return m;
}

AnyModel model_from(const json& j) {
  const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "linear";
  if (kind == "linear") return linear_from(j);
  if (kind == "convex") return convex_from(j);
  bad("model kind must be 'linear' or 'convex'");
}

json model_to(const AnyModel& any) {
  json j;
  if (const auto* m = std::get_if<LinearForwardModel>(&any)) {
    j["kind"] = "linear";
    j["sense"] = m->sense == Sense::Minimize ? "min" : "max";
    j["c"] = to_json(m->c);
    j["A"] = to_json(m->A);
    j["b"] = to_json(m->b);
    if (!m->row_sense.empty()) {
      json s = json::array();
      for (ConstraintSense r : m->row_sense) s.push_back(sense_str(r));
      j["row_sense"] = s;
    }
    if (!m->integer.empty()) {
      json s = json::array();
      for (bool b : m->integer) s.push_back(b);
      j["integer"] = s;
    }
    return j;
  }
  const auto& m = std::get<ConvexForwardModel>(any);
  j["kind"] = "convex";
  j["A"] = to_json(m.A);
  j["b"] = to_json(m.b);
  json o;
  if (std::holds_alternative<LinearObjective>(m.objective.form)) {
    o["type"] = "linear";
  } else if (const auto* q = std::get_if<QuadraticObjective>(&m.objective.form)) {
    o["type"] = "quadratic";
    o["Phi"] = to_json(q->Phi);
    o["psi"] = to_json(q->psi);
  } else {
    const auto& b = std::get<BasisObjective>(m.objective.form);
    o["type"] = "basis";
    o["offset"] = to_json(b.offset);
    json bases = json::array();
    for (const BasisFunction& f : b.bases) {
      json terms = json::array();
      for (const PowerTerm& t : f.terms)
        terms.push_back({{"var", t.var}, {"coef", round12(t.coef)}, {"power", round12(t.power)}});
      bases.push_back(terms);
    }
    o["bases"] = bases;
    if (!b.nonnegative.empty()) {
      json s = json::array();
      for (bool v : b.nonnegative) s.push_back(v);
      o["nonnegative"] = s;
    }
  }
  j["objective"] = o;
  return j;
}

ParameterSpace space_from(const json& j) {
  const int dim = field(j, "dim").get<int>();
  ParameterSpace s = ParameterSpace::free(dim);
  if (j.contains("G")) s.G = mat(j.at("G"), dim);
  if (j.contains("h")) s.h = vec(j.at("h"));
  if (j.contains("E")) s.E = mat(j.at("E"), dim);
  if (j.contains("f")) s.f = vec(j.at("f"));
  if (j.contains("lower")) s.lower = vec(j.at("lower"));
  if (j.contains("upper")) s.upper = vec(j.at("upper"));
  if (s.lower.size() && !s.upper.size()) s.upper = Vector::Constant(dim, kInf);
  if (s.upper.size() && !s.lower.size()) s.lower = Vector::Constant(dim, -kInf);
  const std::string norm = j.value("normalization", std::string("none"));
  if (norm == "none") s.normalization = Normalization::None;
  else if (norm == "l1") s.normalization = Normalization::L1Sphere;
  else if (norm == "linf") s.normalization = Normalization::LInfSphere;
  else if (norm == "fixed") {
    s.normalization = Normalization::FixedComponent;
    s.fixed_index = j.value("fixed_index", 0);
    s.fixed_value = j.contains("fixed_value") ? number(j.at("fixed_value")) : 1.0;
  } else {
    bad("normalization must be none, l1, linf or fixed");
  }
  if (j.contains("prior")) s.prior = vec(j.at("prior"));
  const std::string obj = j.value("objective", std::string(s.prior ? "norm" : "zero"));
  if (obj == "zero") s.mode = ObjectiveMode::Zero;
  else if (obj == "norm") s.mode = ObjectiveMode::NormToPrior;
  else if (obj == "linear") s.mode = ObjectiveMode::LinearCost;
  else bad("objective must be zero, norm or linear");
  if (j.contains("norm_p")) s.norm_p = number(j.at("norm_p"));
  if (j.contains("cost")) s.cost = vec(j.at("cost"));
  s.validate();
  return s;
}

json space_to(const ParameterSpace& s) {
  json j;
  j["dim"] = s.dim;
  if (s.G.rows()) {
    j["G"] = to_json(s.G);
    j["h"] = to_json(s.h);
  }
  if (s.E.rows()) {
    j["E"] = to_json(s.E);
    j["f"] = to_json(s.f);
  }
  if (s.lower.size()) {
    json lo = json::array(), hi = json::array();
    for (int i = 0; i < s.dim; ++i) {
      lo.push_back(bound_json(s.lower[i]));
      hi.push_back(bound_json(s.upper[i]));
    }
    j["lower"] = lo;
    j["upper"] = hi;
  }
  switch (s.normalization) {
    case Normalization::None: j["normalization"] = "none"; break;
    case Normalization::L1Sphere: j["normalization"] = "l1"; break;
    case Normalization::LInfSphere: j["normalization"] = "linf"; break;
    case Normalization::FixedComponent:
      j["normalization"] = "fixed";
      j["fixed_index"] = s.fixed_index;
      j["fixed_value"] = round12(s.fixed_value);
      break;
  }
  if (s.prior) j["prior"] = to_json(*s.prior);
  switch (s.mode) {
    case ObjectiveMode::Zero: j["objective"] = "zero"; break;
    case ObjectiveMode::NormToPrior:
      j["objective"] = "norm";
      j["norm_p"] = bound_json(s.norm_p);
      break;
    case ObjectiveMode::LinearCost:
      j["objective"] = "linear";
      j["cost"] = to_json(s.cost);
      break;
  }
  return j;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AnyModel parse_model(const std::string& text) {
  return guarded([&] { return model_from(parse_json(text)); });
}

ParameterSpace parse_space(const std::string& text) {
  return guarded([&] { return space_from(parse_json(text)); });
}

AnyDataset parse_dataset(const std::string& text) {
  return guarded([&] {
    const json j = parse_json(text);
    AnyDataset d;
    const bool shared = j.value("shared_region", false);
    std::vector<AnyModel> models;
    for (const json& m : field(j, "models")) models.push_back(model_from(m));
    if (models.empty()) bad("dataset has no models");
    d.convex = std::holds_alternative<ConvexForwardModel>(models.front());
    std::vector<Observation> obs;
    for (const json& o : field(j, "observations")) {
      Observation ob;
      ob.x = vec(field(o, "x"));
      ob.instance = o.value("instance", 0);
      ob.weight = o.contains("weight") ? number(o.at("weight")) : 1.0;
      obs.push_back(std::move(ob));
    }
    for (const AnyModel& m : models) {
      if (std::holds_alternative<ConvexForwardModel>(m) != d.convex)
        bad("dataset mixes linear and convex models");
      if (d.convex) d.convex_data.models.push_back(std::get<ConvexForwardModel>(m));
      else d.linear.models.push_back(std::get<LinearForwardModel>(m));
    }
    if (d.convex) {
      d.convex_data.observations = std::move(obs);
      d.convex_data.shared_region = shared;
      d.convex_data.validate();
    } else {
      d.linear.observations = std::move(obs);
      d.linear.shared_region = shared;
      d.linear.validate();
    }
    return d;
  });
}

MDPModel parse_mdp(const std::string& text, Policy* policy) {
  return guarded([&] {
    const json j = parse_json(text);
    MDPModel m;
    m.num_states = field(j, "num_states").get<int>();
    m.num_actions = field(j, "num_actions").get<int>();
    m.gamma = number(field(j, "gamma"));
    for (const json& t : field(j, "transition")) m.transition.push_back(mat(t));
    m.reward_space = j.contains("reward_space") ? space_from(j.at("reward_space"))
                                                : ParameterSpace::free(m.num_states * m.num_actions);
    m.validate();
    if (policy) {
      policy->clear();
      for (const json& a : field(j, "policy")) policy->push_back(a.get<int>());
      if (static_cast<int>(policy->size()) != m.num_states) bad("policy needs one action per state");
    }
    return m;
  });
}

PathNetwork parse_network(const std::string& text) {
  return guarded([&] {
    const json j = parse_json(text);
    PathNetwork p;
    p.network.num_nodes = field(j, "num_nodes").get<int>();
    for (const json& a : field(j, "arcs")) {
      if (!a.is_array() || a.size() != 2) bad("arcs are [tail, head] pairs");
      p.network.arcs.emplace_back(a[0].get<int>(), a[1].get<int>());
    }
    p.source = field(j, "source").get<int>();
    p.sink = field(j, "sink").get<int>();
    p.network.validate();
    if (p.source < 0 || p.sink < 0 || p.source >= p.network.num_nodes || p.sink >= p.network.num_nodes)
      bad("source and sink must be existing nodes");
    return p;
  });
}

PathSets parse_paths(const std::string& text, const PathNetwork& net) {
  return guarded([&] {
    const json j = parse_json(text);
    auto group = [&](const char* key) {
      std::vector<Vector> out;
      if (!j.contains(key)) return out;
      for (const json& p : j.at(key)) out.push_back(net.path_from_nodes(p.get<std::vector<int>>()));
      return out;
    };
    return PathSets{group("clinical"), group("survived"), group("died")};
  });
}

TrafficInstance parse_traffic(const std::string& text, std::vector<Vector>* observed) {
  return guarded([&] {
    const json j = parse_json(text);
    TrafficInstance t;
    t.network.num_nodes = field(j, "num_nodes").get<int>();
    for (const json& a : field(j, "arcs")) {
      if (!a.is_array() || a.size() != 2) bad("arcs are [tail, head] pairs");
      t.network.arcs.emplace_back(a[0].get<int>(), a[1].get<int>());
    }
    t.free_flow = vec(field(j, "free_flow"));
    t.capacity = vec(field(j, "capacity"));
    for (const json& d : field(j, "demands"))
      t.demands.push_back({field(d, "origin").get<int>(), field(d, "destination").get<int>(),
                           number(field(d, "demand"))});
    t.degree = j.value("degree", 1);
    t.validate();
    if (observed) {
      observed->clear();
      if (j.contains("observed"))
        for (const json& x : j.at("observed")) observed->push_back(vec(x));
    }
    return t;
  });
}

AnyModel load_model(const std::string& path) { return parse_model(read_text(path)); }
ParameterSpace load_space(const std::string& path) { return parse_space(read_text(path)); }
AnyDataset load_dataset(const std::string& path) { return parse_dataset(read_text(path)); }

std::string dump_model(const AnyModel& model) { return model_to(model).dump(2) + "\n"; }

std::string dump_space(const ParameterSpace& space) { return space_to(space).dump(2) + "\n"; }

std::string dump_dataset(const AnyDataset& data) {
  json j;
  json models = json::array();
  json obs = json::array();
  auto fill = [&](const auto& d) {
    for (const auto& m : d.models) models.push_back(model_to(AnyModel(m)));
    for (const Observation& o : d.observations)
      obs.push_back({{"x", to_json(o.x)}, {"instance", o.instance}, {"weight", round12(o.weight)}});
    j["shared_region"] = d.shared_region;
  };
  if (data.convex) fill(data.convex_data);
  else fill(data.linear);
  j["models"] = models;
  j["observations"] = obs;
  return j.dump(2) + "\n";
}

double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // drop negative zero
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", round12(v));
  return buf;
}

std::string result_json(const std::string& method, const EstimationResult& result,
                        const std::string& error) {
  json j;
  j["method"] = method;
  j["status"] = to_string(result.status);
  j["theta"] = to_json(result.theta);
  j["objective"] = to_json(result.objective);
  j["per_obs_loss"] = to_json(result.per_obs_loss);
  json diag = json::object();
  for (const auto& [k, v] : result.diagnostics) diag[k] = to_json(v);
  j["diagnostics"] = diag;
  if (!result.vectors.empty()) {
    json vs = json::object();
    for (const auto& [k, v] : result.vectors) vs[k] = to_json(v);
    j["vectors"] = vs;
  }
  if (result.matrix) j["matrix"] = to_json(*result.matrix);
  if (!error.empty()) j["error"] = error;
  j["versions"] = {{"invopt", kVersion}, {"format", kFormatVersion}};
  return j.dump(2) + "\n";
}

}  // namespace invopt::io
