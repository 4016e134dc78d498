#pragma once
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinlab/gibbs.hpp"
#include "spinlab/model.hpp"

namespace spinlab {

constexpr std::size_t kSawNodeCap = 1000000;

struct SawNode {
  int origin = -1;
  int parent = -1;
  std::vector<int> children;  // ascending origin order
  std::optional<int> fixed_spin;
  int depth = 0;
};

struct SawTree {
  std::vector<SawNode> nodes;
  int root = 0;
  int graph_n = 0;
  std::vector<std::vector<int>> copies;  // C_v: free node indices per graph vertex

  std::size_t size() const { return nodes.size(); }
  int free_count() const;
  int fixed_count() const;
  void rebuild_copies();
  // nodes grouped by depth (L_r(k) includes fixed nodes; callers filter)
  std::vector<std::vector<int>> levels() const;
};

struct ConditionedSawTree {
  SawTree tree;               // pinned and pruned, re-indexed
  std::vector<int> base_index;  // tree node -> index in the unconditioned tree
  std::vector<std::pair<int, int>> extra_pins;  // (base node, spin) for pinned copies
  std::vector<int> pruned;    // base nodes removed below pinned copies
};

SawTree build_saw(const Graph& g, int r, std::size_t node_cap = kSawNodeCap);
// the vertex-splitting recursion; pins in bc become leaves. Test oracle only.
SawTree build_saw_recursive(const Graph& g, int r, const Boundary& bc = {},
                            std::size_t node_cap = kSawNodeCap);
ConditionedSawTree condition_saw(const SawTree& t, const Boundary& bc);
// convenience: build then condition, rejecting r in bc and disconnected G \ bc
ConditionedSawTree build_conditioned_saw(const Graph& g, int r, const Boundary& bc,
                                         std::size_t node_cap = kSawNodeCap);

// Isomorphism-invariant encoding over (origin, fixed spin) labels.
std::string saw_canonical(const SawTree& t);

// The tree as a spin system: node graph, per-node fields from the origins, and
// fixed nodes as the boundary.
struct TreeSystem {
  Graph graph;
  SpinParams params;
  Boundary boundary;
};
TreeSystem tree_system(const SawTree& t, const SpinParams& p);

// Exact quantities on a tree by two-pass message passing.
struct TreeExact {
  std::vector<Rat> Z1, Z0;    // subtree partition functions with the node at 1 / 0
  ExtRat root_ratio;
  Rat root_marginal;
  std::vector<Rat> cond1, cond0;  // P(node = 1 | root = 1), P(node = 1 | root = 0)
  std::vector<Rat> influence;     // I(root -> node), meaningful when 0 < root_marginal < 1
  std::vector<Rat> cov;           // K(root, node)
};
TreeExact tree_exact(const SawTree& t, const SpinParams& p);

nlohmann::json saw_to_json(const SawTree& t);
std::string saw_to_dot(const SawTree& t);

struct PreservationReport {
  bool marginal_equal = false;
  ExtRat R_graph, R_tree;
  bool influence_defined = false;  // false when the root marginal is deterministic
  bool influence_equal = false;
  bool covariance_equal = false;
  Rat max_influence_dev;           // exact |difference|, zero on success
  Rat max_covariance_dev;
  bool used_enumeration_on_tree = false;
};

enum class TreeMethod { Auto, Enumeration, MessagePassing };

PreservationReport marginal_preservation_check(const Graph& g, const SpinParams& p,
                                               const Boundary& bc, int r,
                                               TreeMethod method = TreeMethod::Auto);
PreservationReport influence_preservation_check(const Graph& g, const SpinParams& p,
                                                const Boundary& bc, int r,
                                                TreeMethod method = TreeMethod::Auto);
// both checks from one tree build and one enumeration of G
PreservationReport preservation_check(const Graph& g, const SpinParams& p, const Boundary& bc,
                                      int r, TreeMethod method = TreeMethod::Auto);

}  // namespace spinlab
