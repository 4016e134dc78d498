#pragma once
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinlab/model.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

using json = nlohmann::json;

// ---- text / JSON input ----
Graph parse_edge_list(const std::string& text);
Graph parse_graph_json(const json& j);
Graph read_graph_file(const std::string& path);  // JSON when the file starts with '{'
json graph_to_json(const Graph& g);

SpinParams parse_params_json(const json& j, int n);
json params_to_json(const SpinParams& p);
Boundary parse_boundary_json(const json& j);
json boundary_to_json(const Boundary& bc);
json read_json_file(const std::string& path);

// ---- generators ----
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph star_graph(int leaves);  // center 0
Graph complete_graph(int n);
// Erdos-Renyi style edges with probability p, rejecting any edge that would push a
// degree above max_degree; resampled until connected when require_connected.
Graph random_bounded_degree(int n, int max_degree, double p, CounterRng& rng,
                            bool require_connected = true);
// configuration model with restarts
Graph random_regular(int n, int d, CounterRng& rng);
Graph random_tree(int n, CounterRng& rng);

// ---- exhaustive enumeration ----
// canonical adjacency bitmask (minimum over all relabelings), n <= 8
std::uint64_t canonical_form(const Graph& g);
// all connected graphs on n vertices up to isomorphism (n <= 6)
std::vector<Graph> connected_graphs_up_to_iso(int n);

}  // namespace spinlab
