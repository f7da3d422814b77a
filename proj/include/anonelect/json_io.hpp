#pragma once

#include <string>

#include "json.hpp"

#include "anonelect/graph.hpp"

namespace anonelect {

// Wire format:
// { "n_bound": int, "nodes": int,
//   "edges": [{"u": int, "pu": int, "v": int, "pv": int}, ...],
//   "occupied": [int, ...] }
Configuration configuration_from_json(const nlohmann::json& j);
nlohmann::json configuration_to_json(const Configuration& g);

Configuration load_configuration(const std::string& path);
void save_configuration(const Configuration& g, const std::string& path);

}  // namespace anonelect
