// JSON snapshots: prefix trees round-trip exactly (doubles survive
// serialization bit-for-bit), checkpoints bundle a learn state with the
// config that produced it. Query/update closures are not serialized; loading
// re-attaches them from the problem name recorded in the config.
#pragma once

#include <string>
#include <utility>

#include "json.hpp"
#include "tvu/config.hpp"
#include "tvu/engine.hpp"
#include "tvu/prefix_tree.hpp"

namespace tvu {

nlohmann::json tree_to_json(const PrefixTree& tree);
PrefixTree tree_from_json(const nlohmann::json& j);

nlohmann::json state_to_json(const LearnState& state);
LearnState state_from_json(const nlohmann::json& j, const QuerySpec& spec,
                           const UpdateRule& rule);

void save_checkpoint(const std::string& path, const LearnState& state,
                     const Config& cfg);
// Returns the raw checkpoint json and its config; the caller rebuilds the
// spec/rule pair from the config and finishes with state_from_json.
std::pair<nlohmann::json, Config> load_checkpoint(const std::string& path);

}  // namespace tvu
