#pragma once
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "spinlab/rational.hpp"

namespace spinlab {

struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adj;  // sorted
  std::vector<int> order;             // rank of each vertex in the total order

  Graph() = default;
  explicit Graph(int n);

  void add_edge(int u, int v);
  bool has_edge(int u, int v) const;
  int degree(int v) const { return static_cast<int>(adj[v].size()); }
  int max_degree() const;
  std::size_t edge_count() const;
  std::vector<std::pair<int, int>> edges() const;  // u < v, lexicographic
  bool less(int u, int v) const { return order[u] < order[v]; }
};

struct SpinParams {
  Rat beta;
  Rat gamma;
  std::vector<Rat> lambda;  // per vertex

  static SpinParams uniform(int n, const Rat& beta, const Rat& gamma, const Rat& lambda);
  void validate(int n) const;
  bool uniform_field() const;
};

// vertex -> spin
using Boundary = std::map<int, int>;

// spins of the free vertices, ascending vertex order
using Configuration = std::vector<std::uint8_t>;

enum class Regime { AntiferroHard, AntiferroSoft, Ferro, Product };

const char* regime_name(Regime r);
Regime classify(const SpinParams& p);

std::vector<int> free_vertices(const Graph& g, const Boundary& bc);
void validate_boundary(const Graph& g, const Boundary& bc);

Rat config_weight(const Graph& g, const SpinParams& p, const Boundary& bc,
                  const Configuration& sigma);

struct DegreeProfile {
  int max_degree = 0;
  std::vector<int> degree;
};
DegreeProfile degree_profile(const Graph& g);

// connectivity of the subgraph induced by vertices with keep[v] true (all if empty)
bool is_connected(const Graph& g, const std::vector<bool>& keep = {});
// component id per vertex of the subgraph induced by keep; -1 outside
std::vector<int> components(const Graph& g, const std::vector<bool>& keep = {});

Graph relabel(const Graph& g, const std::vector<int>& perm);  // vertex v -> perm[v]

}  // namespace spinlab
