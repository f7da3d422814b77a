#include "anonelect/json_io.hpp"

#include <fstream>

namespace anonelect {

using nlohmann::json;

Configuration configuration_from_json(const json& j) {
  if (!j.is_object())
    throw Error(Error::Code::kInvalidInput, "graph document must be an object");
  for (const char* key : {"n_bound", "nodes", "edges", "occupied"})
    if (!j.contains(key))
      throw Error(Error::Code::kInvalidInput,
                  std::string("graph document missing key \"") + key + "\"");
  try {
    int nodes = j.at("nodes").get<int>();
    int bound = j.at("n_bound").get<int>();
    std::vector<Configuration::Edge> edges;
    for (const auto& e : j.at("edges"))
      edges.push_back({e.at("u").get<int>(), e.at("pu").get<int>(),
                       e.at("v").get<int>(), e.at("pv").get<int>()});
    std::vector<NodeId> occ = j.at("occupied").get<std::vector<NodeId>>();
    return Configuration(nodes, bound, edges, std::move(occ));
  } catch (const json::exception& e) {
    throw Error(Error::Code::kInvalidInput,
                std::string("malformed graph document: ") + e.what());
  }
}

json configuration_to_json(const Configuration& g) {
  json j;
  j["n_bound"] = g.bound();
  j["nodes"] = g.node_count();
  j["edges"] = json::array();
  for (const auto& e : g.edges())
    j["edges"].push_back({{"u", e.u}, {"pu", e.pu}, {"v", e.v}, {"pv", e.pv}});
  j["occupied"] = g.occupied();
  return j;
}

Configuration load_configuration(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Error::Code::kInvalidInput, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Error::Code::kInvalidInput,
                path + ": invalid JSON: " + e.what());
  }
  return configuration_from_json(j);
}

void save_configuration(const Configuration& g, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw Error(Error::Code::kInvalidInput, "cannot write " + path);
  out << configuration_to_json(g).dump(2) << "\n";
}

}  // namespace anonelect
