#pragma once
#include <json.hpp>

#include "ctqw/graph.hpp"

namespace ctqw {

using json = nlohmann::json;

// {"kind":"cayley","r":..,"M":..,"layer_weights":[..]|"omega":..,
//  "perturbation":{..},"noise":{"sigma":..,"seed":..}}
// or {"kind":"joined_complete","n":..}
WeightedGraph graph_from_json(const json& spec);
Perturbation perturbation_from_json(const json& spec, const WeightedGraph& g);
json perturbation_to_json(const Perturbation& p);

json cayley_to_json(const CayleySpec& spec);
CayleySpec cayley_from_json(const json& spec);

} // namespace ctqw
