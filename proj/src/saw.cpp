#include "spinlab/saw.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "spinlab/errors.hpp"

namespace spinlab {

int SawTree::free_count() const {
  int c = 0;
  for (const auto& nd : nodes) c += !nd.fixed_spin;
  return c;
}

int SawTree::fixed_count() const { return static_cast<int>(nodes.size()) - free_count(); }

void SawTree::rebuild_copies() {
  copies.assign(graph_n, {});
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!nodes[i].fixed_spin) copies[nodes[i].origin].push_back(static_cast<int>(i));
}

std::vector<std::vector<int>> SawTree::levels() const {
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int d = nodes[i].depth;
    if (static_cast<int>(out.size()) <= d) out.resize(d + 1);
    out[d].push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

std::vector<std::vector<int>> ordered_adjacency(const Graph& g) {
  auto adj = g.adj;
  for (auto& a : adj) std::sort(a.begin(), a.end(), [&](int x, int y) { return g.less(x, y); });
  return adj;
}

int add_node(SawTree& t, int origin, int parent, std::optional<int> spin, std::size_t cap) {
  if (t.nodes.size() >= cap)
    throw Error(ErrorKind::CapExceeded, "SAW tree exceeds node cap " + std::to_string(cap));
  SawNode nd;
  nd.origin = origin;
  nd.parent = parent;
  nd.fixed_spin = spin;
  nd.depth = parent < 0 ? 0 : t.nodes[parent].depth + 1;
  t.nodes.push_back(std::move(nd));
  int id = static_cast<int>(t.nodes.size()) - 1;
  if (parent >= 0) t.nodes[parent].children.push_back(id);
  return id;
}

// Walk enumeration. Pinned vertices (bc) terminate walks as fixed leaves.
SawTree build_walks(const Graph& g, int r, const Boundary& bc, std::size_t cap) {
  if (r < 0 || r >= g.n) throw Error(ErrorKind::InvalidParams, "root out of range");
  const auto adj = ordered_adjacency(g);
  SawTree t;
  t.graph_n = g.n;
  std::vector<int> pos(g.n, -1), walk;
  std::function<void(int)> grow = [&](int node) {
    int v = t.nodes[node].origin;
    int l = static_cast<int>(walk.size()) - 1;
    int prev = l > 0 ? walk[l - 1] : -1;
    for (int w : adj[v]) {
      if (w == prev) continue;
      if (pos[w] >= 0) {
        // closes a cycle at v_i; spin 1 iff v_{i+1} precedes v_l
        int i = pos[w];
        add_node(t, w, node, g.less(walk[i + 1], v) ? 1 : 0, cap);
        continue;
      }
      auto pin = bc.find(w);
      if (pin != bc.end()) {
        add_node(t, w, node, pin->second, cap);
        continue;
      }
      int child = add_node(t, w, node, std::nullopt, cap);
      pos[w] = static_cast<int>(walk.size());
      walk.push_back(w);
      grow(child);
      walk.pop_back();
      pos[w] = -1;
    }
  };
  t.root = add_node(t, r, -1, std::nullopt, cap);
  pos[r] = 0;
  walk.push_back(r);
  grow(t.root);
  t.rebuild_copies();
  return t;
}

}  // namespace

SawTree build_saw(const Graph& g, int r, std::size_t node_cap) {
  if (!is_connected(g)) throw Error(ErrorKind::Disconnected, "graph is not connected");
  return build_walks(g, r, {}, node_cap);
}

SawTree build_saw_recursive(const Graph& g, int r, const Boundary& bc, std::size_t node_cap) {
  if (r < 0 || r >= g.n) throw Error(ErrorKind::InvalidParams, "root out of range");
  if (bc.count(r)) throw Error(ErrorKind::InvalidParams, "root is pinned");
  {
    std::vector<bool> keep(g.n, true);
    for (auto [v, s] : bc) keep[v] = false;
    if (!is_connected(g, keep))
      throw Error(ErrorKind::Disconnected, "graph minus the boundary is not connected");
  }
  struct Pendant {
    int origin, spin;
  };
  const auto adj = ordered_adjacency(g);
  SawTree t;
  t.graph_n = g.n;
  std::vector<bool> deleted(g.n, false);
  // pendants[v]: pinned split-copies of earlier roots hanging off v
  std::vector<std::vector<Pendant>> pendants(g.n);

  // T_saw(G_cur, v): v is the current root of the current graph
  std::function<void(int, int)> rec = [&](int v, int node) {
    struct Child {
      int origin;
      bool pendant;
      int spin;
    };
    std::vector<Child> kids;
    for (int w : adj[v])
      if (!deleted[w]) kids.push_back({w, false, -1});
    for (auto p : pendants[v]) kids.push_back({p.origin, true, p.spin});
    std::sort(kids.begin(), kids.end(),
              [&](const Child& a, const Child& b) { return g.less(a.origin, b.origin); });
    // graph neighbours of v, the d vertices adjacent to the split copies of v
    std::vector<int> nbrs;
    for (const auto& c : kids)
      if (!c.pendant) nbrs.push_back(c.origin);
    for (const auto& c : kids) {
      if (c.pendant) {
        add_node(t, c.origin, node, c.spin, node_cap);
        continue;
      }
      auto pin = bc.find(c.origin);
      if (pin != bc.end()) {
        add_node(t, c.origin, node, pin->second, node_cap);
        continue;
      }
      int child = add_node(t, c.origin, node, std::nullopt, node_cap);
      // G_i = G' - v_i: delete v, hang a pinned copy of v off every other neighbour
      deleted[v] = true;
      std::vector<int> touched;
      for (int u : nbrs) {
        if (u == c.origin) continue;
        pendants[u].push_back({v, g.less(u, c.origin) ? 0 : 1});
        touched.push_back(u);
      }
      rec(c.origin, child);
      for (int u : touched) pendants[u].pop_back();
      deleted[v] = false;
    }
  };
  t.root = add_node(t, r, -1, std::nullopt, node_cap);
  rec(r, t.root);
  t.rebuild_copies();
  return t;
}

ConditionedSawTree condition_saw(const SawTree& base, const Boundary& bc) {
  if (bc.count(base.nodes[base.root].origin))
    throw Error(ErrorKind::InvalidParams, "cannot pin the root");
  ConditionedSawTree out;
  out.tree.graph_n = base.graph_n;
  std::function<void(int, int)> copy = [&](int b, int parent) {
    const SawNode& nd = base.nodes[b];
    std::optional<int> spin = nd.fixed_spin;
    bool pin_here = false;
    if (!spin) {
      auto it = bc.find(nd.origin);
      if (it != bc.end()) {
        spin = it->second;
        pin_here = true;
        out.extra_pins.emplace_back(b, it->second);
      }
    }
    int id = add_node(out.tree, nd.origin, parent, spin, kSawNodeCap);
    out.base_index.push_back(b);
    if (pin_here) {
      std::function<void(int)> prune = [&](int x) {
        for (int c : base.nodes[x].children) {
          out.pruned.push_back(c);
          prune(c);
        }
      };
      prune(b);
      return;
    }
    for (int c : nd.children) copy(c, id);
  };
  out.tree.root = 0;
  copy(base.root, -1);
  out.tree.rebuild_copies();
  return out;
}

ConditionedSawTree build_conditioned_saw(const Graph& g, int r, const Boundary& bc,
                                         std::size_t node_cap) {
  validate_boundary(g, bc);
  if (bc.count(r)) throw Error(ErrorKind::InvalidParams, "root is pinned");
  std::vector<bool> keep(g.n, true);
  for (auto [v, s] : bc) keep[v] = false;
  if (!is_connected(g, keep))
    throw Error(ErrorKind::Disconnected, "graph minus the boundary is not connected");
  ConditionedSawTree out;
  // walks stop at pinned vertices, which is the conditioned tree directly
  out.tree = build_walks(g, r, bc, node_cap);
  out.base_index.clear();
  return out;
}

std::string saw_canonical(const SawTree& t) {
  std::function<std::string(int)> enc = [&](int i) {
    const SawNode& nd = t.nodes[i];
    std::vector<std::string> kids;
    for (int c : nd.children) kids.push_back(enc(c));
    std::sort(kids.begin(), kids.end());
    std::string s = "(" + std::to_string(nd.origin);
    if (nd.fixed_spin) s += *nd.fixed_spin ? "+" : "-";
    for (auto& k : kids) s += k;
    return s + ")";
  };
  return enc(t.root);
}

TreeSystem tree_system(const SawTree& t, const SpinParams& p) {
  TreeSystem s;
  const int N = static_cast<int>(t.nodes.size());
  s.graph = Graph(N);
  s.params.beta = p.beta;
  s.params.gamma = p.gamma;
  s.params.lambda.resize(N);
  for (int i = 0; i < N; ++i) {
    const auto& nd = t.nodes[i];
    if (nd.parent >= 0) s.graph.add_edge(nd.parent, i);
    s.params.lambda[i] = p.lambda[nd.origin];
    if (nd.fixed_spin) s.boundary[i] = *nd.fixed_spin;
  }
  return s;
}

TreeExact tree_exact(const SawTree& t, const SpinParams& p) {
  const int N = static_cast<int>(t.nodes.size());
  TreeExact e;
  e.Z1.assign(N, Rat(0));
  e.Z0.assign(N, Rat(0));
  // children always follow parents in index order
  for (int i = N - 1; i >= 0; --i) {
    const auto& nd = t.nodes[i];
    if (nd.fixed_spin) {
      (*nd.fixed_spin ? e.Z1 : e.Z0)[i] = 1;
      continue;
    }
    Rat a = p.lambda[nd.origin], b = 1;
    for (int c : nd.children) {
      a *= p.beta * e.Z1[c] + e.Z0[c];
      b *= e.Z1[c] + p.gamma * e.Z0[c];
    }
    e.Z1[i] = a;
    e.Z0[i] = b;
  }
  const int r = t.root;
  Rat Z = e.Z1[r] + e.Z0[r];
  if (Z == 0) throw Error(ErrorKind::ZeroPartition, "tree partition function is zero");
  e.root_marginal = e.Z1[r] / Z;
  if (e.Z0[r] == 0) e.root_ratio = {Rat(0), true};
  else e.root_ratio = {e.Z1[r] / e.Z0[r], false};
  e.cond1.assign(N, Rat(0));
  e.cond0.assign(N, Rat(0));
  e.cond1[r] = 1;
  for (int i = 0; i < N; ++i) {
    for (int c : t.nodes[i].children) {
      Rat up = p.beta * e.Z1[c], dn = e.Z1[c] + p.gamma * e.Z0[c];
      Rat a = (up + e.Z0[c] == 0) ? Rat(0) : up / (up + e.Z0[c]);  // P(c=1 | parent=1)
      Rat b = dn == 0 ? Rat(0) : e.Z1[c] / dn;                       // P(c=1 | parent=0)
      e.cond1[c] = e.cond1[i] * a + (1 - e.cond1[i]) * b;
      e.cond0[c] = e.cond0[i] * a + (1 - e.cond0[i]) * b;
    }
  }
  e.influence.assign(N, Rat(0));
  e.cov.assign(N, Rat(0));
  const Rat& M = e.root_marginal;
  for (int i = 0; i < N; ++i) {
    e.influence[i] = e.cond1[i] - e.cond0[i];
    Rat Mi = M * e.cond1[i] + (1 - M) * e.cond0[i];
    e.cov[i] = M * e.cond1[i] - M * Mi;
  }
  return e;
}

nlohmann::json saw_to_json(const SawTree& t) {
  nlohmann::json j;
  j["root"] = t.root;
  j["nodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& nd = t.nodes[i];
    nlohmann::json n;
    n["id"] = i;
    n["origin"] = nd.origin;
    n["parent"] = nd.parent;
    n["depth"] = nd.depth;
    n["children"] = nd.children;
    n["fixed_spin"] = nd.fixed_spin ? nlohmann::json(*nd.fixed_spin) : nlohmann::json(nullptr);
    j["nodes"].push_back(std::move(n));
  }
  nlohmann::json cp = nlohmann::json::object();
  for (int v = 0; v < t.graph_n; ++v)
    if (!t.copies[v].empty()) cp[std::to_string(v)] = t.copies[v];
  j["copies"] = cp;
  j["free_nodes"] = t.free_count();
  j["fixed_nodes"] = t.fixed_count();
  return j;
}

std::string saw_to_dot(const SawTree& t) {
  std::ostringstream os;
  os << "graph saw {\n";
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& nd = t.nodes[i];
    os << "  n" << i << " [label=\"" << nd.origin << "\"";
    if (nd.fixed_spin) os << (*nd.fixed_spin ? ", style=filled, fillcolor=black, fontcolor=white"
                                             : ", shape=doublecircle");
    os << "];\n";
    if (nd.parent >= 0) os << "  n" << nd.parent << " -- n" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

namespace {

Rat abs_rat(const Rat& x) { return x < 0 ? Rat(-x) : x; }

bool ext_equal(const ExtRat& a, const ExtRat& b) {
  return a.infinite == b.infinite && (a.infinite || a.value == b.value);
}

}  // namespace

PreservationReport preservation_check(const Graph& g, const SpinParams& p, const Boundary& bc,
                                      int r, TreeMethod method) {
  p.validate(g.n);
  ConditionedSawTree ct = build_conditioned_saw(g, r, bc);
  const SawTree& T = ct.tree;
  Moments mg = enumerate_moments(g, p, bc, MomentLevel::Pairs);
  if (mg.Z == 0) throw Error(ErrorKind::ZeroPartition, "graph partition function is zero");
  const int k = static_cast<int>(mg.free.size());
  const int ri = static_cast<int>(std::lower_bound(mg.free.begin(), mg.free.end(), r) - mg.free.begin());

  PreservationReport rep;
  mpz_class zero_side = mg.Z - mg.S[ri];
  rep.R_graph = zero_side == 0 ? ExtRat{Rat(0), true} : ExtRat{Rat(mg.S[ri], zero_side), false};
  rep.R_graph.value.canonicalize();

  bool enumerate = method == TreeMethod::Enumeration ||
                   (method == TreeMethod::Auto && T.free_count() <= 16);
  rep.used_enumeration_on_tree = enumerate;
  // per tree node: I(root -> node), K(root, node)
  std::vector<Rat> tI(T.size()), tK(T.size());
  if (enumerate) {
    TreeSystem ts = tree_system(T, p);
    Moments mt = enumerate_moments(ts.graph, ts.params, ts.boundary, MomentLevel::Pairs);
    if (mt.Z == 0) throw Error(ErrorKind::ZeroPartition, "tree partition function is zero");
    int root_i = static_cast<int>(std::lower_bound(mt.free.begin(), mt.free.end(), T.root) -
                                  mt.free.begin());
    mpz_class zs = mt.Z - mt.S[root_i];
    rep.R_tree = zs == 0 ? ExtRat{Rat(0), true} : ExtRat{Rat(mt.S[root_i], zs), false};
    rep.R_tree.value.canonicalize();
    if (mt.S[root_i] != 0 && zs != 0) {
      auto row = influence_row(mt, root_i);
      auto K = covariance_matrix(mt);
      for (std::size_t j = 0; j < mt.free.size(); ++j) {
        tI[mt.free[j]] = row[j];
        tK[mt.free[j]] = K[root_i][j];
      }
    }
  } else {
    TreeExact te = tree_exact(T, p);
    rep.R_tree = te.root_ratio;
    tI = te.influence;
    tK = te.cov;
  }
  rep.marginal_equal = ext_equal(rep.R_graph, rep.R_tree);

  rep.influence_defined = mg.S[ri] != 0 && zero_side != 0;
  if (rep.influence_defined) {
    auto row = influence_row(mg, ri);
    auto K = covariance_matrix(mg);
    rep.influence_equal = rep.covariance_equal = true;
    for (int j = 0; j < k; ++j) {
      int v = mg.free[j];
      Rat sI = 0, sK = 0;
      for (int node : T.copies[v]) {
        sI += tI[node];
        sK += tK[node];
      }
      Rat dI = abs_rat(row[j] - sI), dK = abs_rat(K[ri][j] - sK);
      if (dI != 0) rep.influence_equal = false;
      if (dK != 0) rep.covariance_equal = false;
      if (dI > rep.max_influence_dev) rep.max_influence_dev = dI;
      if (dK > rep.max_covariance_dev) rep.max_covariance_dev = dK;
    }
  }
  return rep;
}

PreservationReport marginal_preservation_check(const Graph& g, const SpinParams& p,
                                               const Boundary& bc, int r, TreeMethod method) {
  return preservation_check(g, p, bc, r, method);
}

PreservationReport influence_preservation_check(const Graph& g, const SpinParams& p,
                                                const Boundary& bc, int r, TreeMethod method) {
  return preservation_check(g, p, bc, r, method);
}

}  // namespace spinlab
