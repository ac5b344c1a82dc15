#include "tvu/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace tvu {

using nlohmann::json;

namespace {

json node_to_json(const TreeNode& nd) {
  json j = json::object();
  j["u"] = nd.u;
  if (nd.r) j["r"] = *nd.r;
  if (nd.w) j["w"] = *nd.w;
  if (nd.z) j["z"] = *nd.z;
  return j;
}

TreeNode node_from_json(const json& j) {
  TreeNode nd;
  nd.u = j.at("u").get<Vec>();
  if (j.contains("r")) nd.r = j.at("r").get<Vec>();
  if (j.contains("w")) nd.w = j.at("w").get<Vec>();
  if (j.contains("z")) nd.z = j.at("z").get<std::int64_t>();
  return nd;
}

}  // namespace

json tree_to_json(const PrefixTree& tree) {
  const PrefixTree::Snapshot snap = tree.snapshot();
  json j;
  j["capacity"] = snap.capacity;
  j["filled"] = snap.filled;
  j["dim"] = snap.dim;
  if (snap.anytime) {
    j["schedule"] = "per-height";
    j["budget_b"] = snap.budget_b;
    j["rho"] = snap.rho;
  } else {
    j["schedule"] = "uniform";
    j["sigma"] = snap.sigma;
  }
  json nodes = json::object();
  for (const auto& [bits, nd] : snap.nodes) nodes[bits] = node_to_json(nd);
  j["nodes"] = std::move(nodes);
  return j;
}

PrefixTree tree_from_json(const json& j) {
  PrefixTree::Snapshot snap;
  snap.capacity = j.at("capacity").get<std::size_t>();
  snap.filled = j.at("filled").get<std::size_t>();
  snap.dim = j.at("dim").get<std::size_t>();
  const std::string schedule = j.at("schedule").get<std::string>();
  if (schedule == "per-height") {
    snap.anytime = true;
    snap.budget_b = j.at("budget_b").get<double>();
    snap.rho = j.at("rho").get<double>();
  } else if (schedule == "uniform") {
    snap.sigma = j.at("sigma").get<double>();
  } else {
    throw std::invalid_argument("unknown tree schedule: " + schedule);
  }
  for (const auto& [bits, nd] : j.at("nodes").items()) {
    snap.nodes.emplace_back(bits, node_from_json(nd));
  }
  return PrefixTree::from_snapshot(snap);
}

json state_to_json(const LearnState& state) {
  json j;
  j["tree"] = tree_to_json(state.tree);
  j["data"] = state.data;
  j["perm"] = state.perm;
  j["models"] = state.models;
  j["rho"] = state.rho;
  j["queries_learn"] = state.queries_learn;
  j["spec"] = state.spec.name;
  j["rule"] = state.rule.name;
  return j;
}

LearnState state_from_json(const json& j, const QuerySpec& spec,
                           const UpdateRule& rule) {
  if (j.at("spec").get<std::string>() != spec.name) {
    throw std::invalid_argument("checkpoint was produced by query spec '" +
                                j.at("spec").get<std::string>() + "', not '" +
                                spec.name + "'");
  }
  if (j.at("rule").get<std::string>() != rule.name) {
    throw std::invalid_argument("checkpoint was produced by update rule '" +
                                j.at("rule").get<std::string>() + "', not '" +
                                rule.name + "'");
  }
  LearnState state{tree_from_json(j.at("tree")),
                   j.at("data").get<std::vector<Vec>>(),
                   j.at("perm").get<std::vector<std::size_t>>(),
                   j.at("models").get<ModelHist>(),
                   spec,
                   rule,
                   j.at("rho").get<double>(),
                   j.at("queries_learn").get<std::size_t>()};
  return state;
}

void save_checkpoint(const std::string& path, const LearnState& state,
                     const Config& cfg) {
  json j;
  j["format"] = "tvu-checkpoint-v1";
  j["config"] = cfg.entries();
  j["state"] = state_to_json(state);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << '\n';
}

std::pair<json, Config> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != "tvu-checkpoint-v1") {
    throw std::runtime_error("not a tvu checkpoint: " + path);
  }
  Config cfg;
  for (const auto& [k, v] : j.at("config").items()) {
    cfg.set(k, v.get<std::string>());
  }
  return {std::move(j), std::move(cfg)};
}

}  // namespace tvu
