#include <doctest.h>

#include "spinlab/errors.hpp"
#include "spinlab/graphs.hpp"
#include "spinlab/saw.hpp"

using namespace spinlab;

namespace {
SpinParams P(const char* b, const char* g, const char* l, int n) {
  return SpinParams::uniform(n, parse_rat(b), parse_rat(g), parse_rat(l));
}

// random uniform params with small rational entries, beta gamma != 1
SpinParams random_params(CounterRng& rng, int n, bool hard) {
  for (;;) {
    Rat b = hard ? Rat(0) : Rat(static_cast<long>(rng.below(12)) + 1, 4);
    Rat g(static_cast<long>(rng.below(12)) + 1, 4);
    b.canonicalize();
    g.canonicalize();
    if (b * g == 1) continue;
    SpinParams p = SpinParams::uniform(n, b, g, Rat(1));
    for (int v = 0; v < n; ++v) {
      p.lambda[v] = Rat(static_cast<long>(rng.below(9)) + 1, 3);
      p.lambda[v].canonicalize();
    }
    return p;
  }
}
}  // namespace

TEST_CASE("SAW tree of a tree is the tree itself") {
  CounterRng rng(1);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_tree(7, rng);
    for (int r = 0; r < 7; ++r) {
      SawTree T = build_saw(g, r);
      CHECK(T.size() == 7);
      CHECK(T.fixed_count() == 0);
      for (int v = 0; v < 7; ++v) CHECK(T.copies[v].size() == 1);
      CHECK(saw_canonical(T) == saw_canonical(build_saw_recursive(g, r)));
    }
  }
  SawTree p = build_saw(path_graph(3), 0);
  CHECK(p.nodes[p.root].children.size() == 1);
}

TEST_CASE("K3 SAW tree has seven nodes with opposite cycle pins") {
  SawTree T = build_saw(complete_graph(3), 0);
  CHECK(T.size() == 7);
  CHECK(T.fixed_count() == 2);
  CHECK(T.nodes[T.root].children.size() == 2);
  int seen = 0;
  for (const auto& nd : T.nodes) {
    if (!nd.fixed_spin) continue;
    CHECK(nd.origin == 0);
    // walk 0-1-2-0 closes with v_{i+1} = 1 < v_l = 2, so spin 1; walk 0-2-1-0 gives 0
    int last = T.nodes[nd.parent].origin;
    CHECK(*nd.fixed_spin == (last == 2 ? 1 : 0));
    ++seen;
  }
  CHECK(seen == 2);
  CHECK(saw_canonical(T) == saw_canonical(build_saw_recursive(complete_graph(3), 0)));
}

TEST_CASE("4-cycle SAW tree") {
  SawTree T = build_saw(cycle_graph(4), 0);
  CHECK(T.size() == 9);
  CHECK(T.fixed_count() == 2);
  CHECK(T.nodes[T.root].children.size() == 2);
  for (int c : T.nodes[T.root].children) {
    // a path of three free vertices ending at a pinned root copy
    int u = c, len = 0;
    while (!T.nodes[u].children.empty()) {
      CHECK(T.nodes[u].children.size() == 1);
      u = T.nodes[u].children[0];
      ++len;
    }
    CHECK(len == 3);
    CHECK(T.nodes[u].fixed_spin.has_value());
  }
  CHECK(saw_canonical(T) == saw_canonical(build_saw_recursive(cycle_graph(4), 0)));
}

TEST_CASE("structural invariants of SAW trees") {
  for (int n = 3; n <= 6; ++n)
    for (const Graph& g : connected_graphs_up_to_iso(n))
      for (int r = 0; r < n; ++r) {
        SawTree T = build_saw(g, r);
        CHECK(T.copies[r].size() == 1);
        CHECK_FALSE(T.nodes[T.root].fixed_spin.has_value());
        for (std::size_t i = 0; i < T.size(); ++i) {
          const auto& nd = T.nodes[i];
          if (nd.fixed_spin) {
            CHECK(nd.children.empty());
            continue;
          }
          // internal free nodes keep their degree (parent edge excluded below the root)
          if (!nd.children.empty()) {
            int expect = g.degree(nd.origin) - (static_cast<int>(i) == T.root ? 0 : 1);
            CHECK(static_cast<int>(nd.children.size()) == expect);
          }
          for (std::size_t k = 1; k < nd.children.size(); ++k)
            CHECK(T.nodes[nd.children[k - 1]].origin < T.nodes[nd.children[k]].origin);
        }
      }
}

TEST_CASE("direct and recursive constructions agree") {
  for (int n = 3; n <= 5; ++n)
    for (const Graph& g : connected_graphs_up_to_iso(n))
      for (int r = 0; r < n; ++r)
        CHECK(saw_canonical(build_saw(g, r)) == saw_canonical(build_saw_recursive(g, r)));
  CounterRng rng(17);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_bounded_degree(7, 4, 0.45, rng);
    int r = static_cast<int>(rng.below(7));
    CHECK(saw_canonical(build_saw(g, r)) == saw_canonical(build_saw_recursive(g, r)));
  }
}

TEST_CASE("conditioning pins every copy and prunes below it") {
  Graph g = complete_graph(4);
  SawTree T = build_saw(g, 0);
  auto same = condition_saw(T, {});
  CHECK(saw_canonical(same.tree) == saw_canonical(T));

  auto c = condition_saw(T, {{2, 1}});
  for (const auto& nd : c.tree.nodes)
    if (nd.origin == 2) {
      CHECK(nd.fixed_spin == std::optional<int>(1));
      CHECK(nd.children.empty());
    }
  CHECK(c.tree.copies[2].empty());
  CHECK_FALSE(c.pruned.empty());

  // all neighbours of the root pinned: depth one only
  auto d = condition_saw(T, {{1, 0}, {2, 1}, {3, 0}});
  CHECK(d.tree.size() == 4);
  for (int ch : d.tree.nodes[d.tree.root].children) CHECK(d.tree.nodes[ch].fixed_spin.has_value());
}

TEST_CASE("conditioning agrees with the recursive oracle under pins") {
  for (int n = 4; n <= 5; ++n)
    for (const Graph& g : connected_graphs_up_to_iso(n)) {
      for (int pin = 1; pin < n; ++pin) {
        std::vector<bool> keep(n, true);
        keep[pin] = false;
        if (!is_connected(g, keep)) continue;
        Boundary bc{{pin, pin % 2}};
        auto c = build_conditioned_saw(g, 0, bc);
        CHECK(saw_canonical(c.tree) == saw_canonical(build_saw_recursive(g, 0, bc)));
      }
    }
}

TEST_CASE("construction errors") {
  Graph g(3);
  g.add_edge(0, 1);
  CHECK_THROWS_AS(build_saw(g, 0), Error);
  CHECK_THROWS_AS(build_conditioned_saw(path_graph(3), 0, {{0, 1}}), Error);
  CHECK_THROWS_AS(build_conditioned_saw(path_graph(3), 0, {{1, 1}}), Error);
  try {
    build_saw(complete_graph(7), 0, 100);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CapExceeded);
  }
}

TEST_CASE("preservation examples") {
  auto tree = preservation_check(path_graph(4), P("1/2", "2", "3/2", 4), {}, 1);
  CHECK(tree.marginal_equal);
  CHECK(tree.influence_equal);
  auto k3 = preservation_check(complete_graph(3), P("0", "1", "1", 3), {}, 0);
  CHECK(k3.marginal_equal);
  CHECK(k3.influence_equal);
  CHECK(k3.covariance_equal);
  CHECK(k3.max_influence_dev == 0);
  auto c4 = preservation_check(cycle_graph(4), P("2/3", "3", "1/2", 4), {{2, 1}}, 0);
  CHECK(c4.marginal_equal);
  CHECK(c4.influence_equal);
}

TEST_CASE("preservation over small graphs with random params and pins") {
  CounterRng rng(23);
  for (int n = 3; n <= 5; ++n)
    for (const Graph& g : connected_graphs_up_to_iso(n))
      for (int r = 0; r < n; ++r) {
        auto p = random_params(rng, n, rng.below(3) == 0);
        Boundary bc;
        int pin = static_cast<int>(rng.below(n));
        std::vector<bool> keep(n, true);
        keep[pin] = false;
        if (pin != r && is_connected(g, keep)) bc[pin] = static_cast<int>(rng.below(2));
        auto rep = preservation_check(g, p, bc, r);
        CHECK(rep.marginal_equal);
        if (rep.influence_defined) {
          CHECK(rep.influence_equal);
          CHECK(rep.covariance_equal);
        }
      }
}

TEST_CASE("message passing and enumeration on the tree agree") {
  CounterRng rng(31);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_bounded_degree(5, 3, 0.6, rng);
    auto p = random_params(rng, 5, false);
    auto a = preservation_check(g, p, {}, 0, TreeMethod::Enumeration);
    auto b = preservation_check(g, p, {}, 0, TreeMethod::MessagePassing);
    CHECK(a.used_enumeration_on_tree);
    CHECK_FALSE(b.used_enumeration_on_tree);
    CHECK(a.marginal_equal);
    CHECK(b.marginal_equal);
    CHECK(a.R_tree.value == b.R_tree.value);
    CHECK(b.influence_equal);
  }
}

TEST_CASE("export formats") {
  SawTree T = build_saw(complete_graph(3), 0);
  auto j = saw_to_json(T);
  CHECK(j["nodes"].size() == 7);
  CHECK(j["fixed_nodes"] == 2);
  std::string dot = saw_to_dot(T);
  CHECK(dot.rfind("graph saw {", 0) == 0);
  CHECK(T.levels().size() == 4);
}
