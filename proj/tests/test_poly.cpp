#include <doctest.h>

#include "spinlab/errors.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/graphs.hpp"
#include "spinlab/poly.hpp"
#include "spinlab/saw.hpp"

using namespace spinlab;

namespace {
MultiPoly x(int v) { return MultiPoly::variable(v); }
MultiPoly k(const Rat& c) { return MultiPoly::constant(c); }

SpinParams P(const char* b, const char* g, int n) {
  return SpinParams::uniform(n, parse_rat(b), parse_rat(g), Rat(1));
}
}  // namespace

TEST_CASE("poly_partition examples") {
  CHECK(poly_partition(Graph(1), P("1", "1", 1)) == k(1) + x(0));
  CHECK(poly_partition(path_graph(2), P("0", "1", 2)) == k(1) + x(0) + x(1));
  auto p = P("3/2", "5/7", 2);
  CHECK(poly_partition(path_graph(2), p) == (x(0) * x(1)).scaled(p.beta) + x(0) + x(1) + k(p.gamma));
}

TEST_CASE("graph polynomial is multilinear and evaluates to Z") {
  CounterRng rng(8);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_bounded_degree(6, 3, 0.5, rng);
    auto p = SpinParams::uniform(6, Rat(1, 3), Rat(7, 2), Rat(1));
    MultiPoly Z = poly_partition(g, p);
    for (int v = 0; v < 6; ++v) CHECK(Z.degree(v) <= 1);
    std::vector<Rat> vals;
    for (int v = 0; v < 6; ++v) vals.push_back(Rat(v + 1, 3));
    p.lambda = vals;
    CHECK(poly_eval(Z, vals) == gibbs_summary(g, p).Z);
  }
}

TEST_CASE("SAW tree polynomial degree equals copy count") {
  Graph g = complete_graph(4);
  SawTree t = build_saw(g, 0);
  MultiPoly Z = poly_partition(t, P("1/2", "2", 4));
  for (int v = 0; v < 4; ++v) CHECK(Z.degree(v) == static_cast<int>(t.copies[v].size()));
  CHECK(Z.degree(0) == 1);
}

TEST_CASE("poly_div_exact examples") {
  MultiPoly A = x(0) * x(0) - x(1) * x(1);
  CHECK(poly_div_exact(A, x(0) - x(1), 2) == x(0) + x(1));
  MultiPoly B = k(3) + x(0) * x(2) + x(1).scaled(Rat(2, 5));
  CHECK(poly_div_exact(B, B, 3) == k(1));
  try {
    poly_div_exact(k(1) + x(0) + x(1), k(1) + x(0), 2);
    FAIL("expected NotDivisible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotDivisible);
  }
  CHECK_THROWS_AS(poly_div_exact(A, MultiPoly(), 2), Error);
}

TEST_CASE("division recovers random products") {
  CounterRng rng(13);
  for (int t = 0; t < 20; ++t) {
    auto rp = [&] {
      MultiPoly p = k(Rat(1 + static_cast<int>(rng.below(4))));
      for (int i = 0; i < 3; ++i) {
        Rat c(static_cast<int>(rng.below(7)) - 3, 1 + static_cast<int>(rng.below(3)));
        c.canonicalize();
        MultiPoly m = k(c);
        for (int v = 0; v < 4; ++v)
          if (rng.below(2)) m = m * x(v);
        p = p + m;
      }
      return p;
    };
    MultiPoly a = rp(), b = rp();
    if (b.is_zero() || a.is_zero()) continue;
    CHECK(poly_div_exact(a * b, b, 4) == a);
  }
}

TEST_CASE("canonical term order is deterministic") {
  MultiPoly p = x(1) + x(0) * x(1) + k(2) + x(0);
  auto terms = canonical_terms(p);
  REQUIRE(terms.size() == 4);
  CHECK(terms[0].first.is_one());
  CHECK(poly_to_string(p, 2) == poly_to_string(x(0) + k(2) + x(0) * x(1) + x(1), 2));
  auto j = poly_to_json(p, 2);
  CHECK(j.size() == 4);
}

TEST_CASE("divisibility on a tree gives quotient one") {
  Graph g = path_graph(4);
  auto r = verify_divisibility(g, P("1/3", "2", 4), 1);
  CHECK(r.ok());
  CHECK(r.full);
  CHECK(r.quotient == k(1));
}

TEST_CASE("divisibility on K3 and the pinned 4-cycle") {
  auto r = verify_divisibility(complete_graph(3), P("1/2", "3", 3), 0);
  CHECK(r.ok());
  CHECK(r.tree_nodes == 7);
  CHECK(r.quotient.degree(0) == 0);

  auto c = verify_divisibility(cycle_graph(4), P("2/3", "5/4", 4), 0, {{2, 1}});
  CHECK(c.remainder_zero);
  CHECK(c.ok());
}

TEST_CASE("divisibility over small graphs, roots, and pins") {
  for (int n = 3; n <= 5; ++n)
    for (const Graph& g : connected_graphs_up_to_iso(n))
      for (int r = 0; r < n; ++r) {
        auto rep = verify_divisibility(g, P("1/2", "3/2", n), r);
        CHECK(rep.ok());
        int pin = (r + 1) % n;
        std::vector<bool> keep(n, true);
        keep[pin] = false;
        if (!is_connected(g, keep)) continue;
        CHECK(verify_divisibility(g, P("3", "1/5", n), r, {{pin, 0}}).ok());
      }
}

TEST_CASE("divisibility errors") {
  Graph g(3);
  g.add_edge(0, 1);
  CHECK_THROWS_AS(verify_divisibility(g, P("1/2", "2", 3), 0), Error);
  CHECK_THROWS_AS(verify_divisibility(path_graph(3), P("1/2", "2", 3), 0, {{0, 1}}), Error);
}

TEST_CASE("line mode agrees with full expansion") {
  Graph g = complete_graph(4);
  DivisibilityOptions lines;
  lines.monomial_budget = 1;
  lines.lines = 4;
  auto a = verify_divisibility(g, P("1/2", "3", 4), 0, {}, lines);
  CHECK_FALSE(a.full);
  CHECK(a.lines_checked == 4 * 3);  // one per line and non-root variable
  CHECK(a.ok());
  lines.allow_lines = false;
  CHECK_THROWS_AS(verify_divisibility(g, P("1/2", "3", 4), 0, {}, lines), Error);
}

TEST_CASE("hardcore root forced to 0 by a pinned neighbour") {
  // only the r=0 halves survive; the quotient must still be free of lambda_r
  for (const Graph& g : {complete_graph(3), cycle_graph(4), complete_graph(4)}) {
    auto full = verify_divisibility(g, P("0", "1", g.n), 0, {{1, 1}});
    CHECK(full.ok());
    CHECK(full.quotient.degree(0) == 0);
    DivisibilityOptions lines;
    lines.monomial_budget = 1;
    CHECK(verify_divisibility(g, P("0", "1", g.n), 0, {{1, 1}}, lines).ok());
  }
}
