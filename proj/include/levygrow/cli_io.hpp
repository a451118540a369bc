// Run configuration, mechanism spec files and growth-state persistence used
// by the command-line front end.
#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "levygrow/growth.hpp"

namespace levygrow {

struct RunConfig {
  std::string mech_path;
  double a = 1.0;
  std::vector<double> levels;
  double radius = std::numeric_limits<double>::infinity();
  std::size_t node_budget = 1u << 22;
  std::uint64_t seed = 0;
  int reps = 1;
  std::string out_dir = ".";

  void validate() const {
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (!(levels[i] > levels[i - 1]))
        throw DomainError("levels must be strictly increasing");
    for (double l : levels)
      if (l < 0) throw DomainError("levels must be >= 0");
    if (a < 0) throw DomainError("a must be >= 0");
    if (!(radius > 0)) throw DomainError("radius must be > 0");
    if (reps < 1) throw DomainError("reps must be >= 1");
  }
};

inline BranchingMechanism mechanism_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open mechanism spec: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_mechanism(os.str());
}

// --- growth-state persistence --------------------------------------------------

inline nlohmann::json state_to_json(const GrowthState& st) {
  nlohmann::json j;
  j["levels"] = st.levels;
  j["forest"] = st.forest.to_dump();
  std::vector<int> frontier;
  for (const auto& n : st.forest.nodes) frontier.push_back(n.frontier ? 1 : 0);
  j["frontier"] = frontier;
  j["birth_step"] = st.birth_step;
  j["leaf_mark"] = st.leaf_mark;
  return j;
}

inline GrowthState state_from_json(const nlohmann::json& j) {
  GrowthState st;
  st.levels = j.at("levels").get<std::vector<double>>();
  st.forest = RealTree::from_dump(j.at("forest").get<std::string>());
  auto frontier = j.at("frontier").get<std::vector<int>>();
  if (frontier.size() != st.forest.size())
    throw DomainError("frontier flags do not match the forest");
  for (std::size_t u = 0; u < frontier.size(); ++u)
    st.forest.nodes[u].frontier = frontier[u] != 0;
  st.birth_step = j.at("birth_step").get<std::vector<int>>();
  st.leaf_mark = j.at("leaf_mark").get<std::vector<double>>();
  if (st.birth_step.size() != st.forest.size() ||
      st.leaf_mark.size() != st.forest.size())
    throw DomainError("per-node state arrays do not match the forest");
  return st;
}

// Persist a grown state as a directory: one dump per level (the tree visible
// after that growth step), a marks file carrying the full per-node state, and
// a manifest recording how the run was configured.
inline nlohmann::json run_manifest(const BranchingMechanism& mech,
                                   const RunConfig& cfg) {
  nlohmann::json j;
  j["mechanism"] = mechanism_to_spec(mech);
  j["a"] = cfg.a;
  j["levels"] = cfg.levels;
  j["radius"] = cfg.radius;
  j["budget"] = cfg.node_budget;
  j["seed"] = cfg.seed;
  j["reps"] = cfg.reps;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path);
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace levygrow
