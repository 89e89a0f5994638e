// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "invopt/apps.hpp"
#include "invopt/model.hpp"

namespace invopt::io {

/// Library version reported in result.json.
inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

/// Either forward family, as read from a model file ("kind" field).
using AnyModel = std::variant<LinearForwardModel, ConvexForwardModel>;

/// Dataset whose models share one family.
struct AnyDataset {
  bool convex = false;
  LinearDataset linear;
  ConvexDataset convex_data;
};

struct PathSets {
  std::vector<Vector> clinical;
  std::vector<Vector> survived;
  std::vector<Vector> died;
};

/// Readers throw Error(InvalidArgument) on malformed JSON or missing fields
/// and validate the parsed object.
std::string read_text(const std::string& path);
AnyModel parse_model(const std::string& text);
ParameterSpace parse_space(const std::string& text);
AnyDataset parse_dataset(const std::string& text);
MDPModel parse_mdp(const std::string& text, Policy* policy = nullptr);
PathNetwork parse_network(const std::string& text);
PathSets parse_paths(const std::string& text, const PathNetwork& net);
TrafficInstance parse_traffic(const std::string& text, std::vector<Vector>* observed = nullptr);

AnyModel load_model(const std::string& path);
ParameterSpace load_space(const std::string& path);
AnyDataset load_dataset(const std::string& path);

/// Writers produce the same schema the readers accept.
std::string dump_model(const AnyModel& model);
std::string dump_space(const ParameterSpace& space);
std::string dump_dataset(const AnyDataset& data);

/// Rounds to 12 significant digits, the precision of every report.
double round12(double v);

/// Stable result.json text: {method, status, theta, objective, per_obs_loss,
/// diagnostics, versions}, plus "vectors" and "error" when present. Keys are
/// sorted and non-finite numbers are written as null.
std::string result_json(const std::string& method, const EstimationResult& result,
                        const std::string& error = {});

/// Formats a number for CSV output (12 significant digits).
std::string fmt(double v);

}  // namespace invopt::io
