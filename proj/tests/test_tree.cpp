#include <doctest.h>

#include <cmath>

#include "spinlab/errors.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/graphs.hpp"
#include "spinlab/potential.hpp"
#include "spinlab/tree.hpp"

using namespace spinlab;

namespace {
SpinParams P(const char* b, const char* g, const char* l, int n) {
  return SpinParams::uniform(n, parse_rat(b), parse_rat(g), parse_rat(l));
}

SpinParams random_params(CounterRng& rng, int n) {
  for (;;) {
    Rat b(static_cast<long>(rng.below(10)), 4), g(static_cast<long>(rng.below(10)) + 1, 4);
    b.canonicalize();
    g.canonicalize();
    if (b * g == 1) continue;
    SpinParams p = SpinParams::uniform(n, b, g, Rat(1));
    for (auto& l : p.lambda) {
      l = Rat(static_cast<long>(rng.below(12)) + 1, 4);
      l.canonicalize();
    }
    return p;
  }
}

// complete tree: the root has `root_children`, every other internal node `branch`
Graph complete_tree(int root_children, int branch, int depth) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> frontier{0};
  int n = 1;
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int u : frontier) {
      int k = d == 0 ? root_children : branch;
      for (int i = 0; i < k; ++i) {
        edges.push_back({u, n});
        next.push_back(n++);
      }
    }
    frontier = next;
  }
  Graph g(n);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

double log_ratio_exact(const Graph& g, const SpinParams& p, const Boundary& bc, int r) {
  auto s = gibbs_summary(g, p, bc);
  Rat m = s.M[s.index_of(r)];
  return std::log(to_double(m)) - std::log(to_double(1 - m));
}
}  // namespace

TEST_CASE("h_func examples") {
  ScalarParams hc{0, 1, 1};
  CHECK(h_func(0, hc) == doctest::Approx(-0.5));
  CHECK(h_func(-INFINITY, hc) == 0);
  CHECK(h_func(INFINITY, ScalarParams{0.5, 1, 1}) == 0);
  // without the 1-1 edge weight the upper limit is -1
  CHECK(h_func(INFINITY, hc) == -1);
  CHECK(h_func(800, ScalarParams{0.5, 2, 1}) == doctest::Approx(0).epsilon(1e-300));
  ScalarParams p{0.25, 4, 1};  // sqrt(bg) = 1
  CHECK(h_func(0.3, p) == 0);
  ScalarParams q{0.3, 1.7, 1};
  double s = std::sqrt(q.beta * q.gamma);
  CHECK(std::abs(h_func(h_argmax(q), q)) == doctest::Approx((1 - s) / (1 + s)).epsilon(1e-14));
}

TEST_CASE("|h| is maximized only at log sqrt(gamma/beta)") {
  for (ScalarParams q : {ScalarParams{0.3, 1.7, 1}, ScalarParams{2.0, 5.0, 1}, ScalarParams{0.1, 0.2, 1}}) {
    double cap = h_abs_max(q), at = h_argmax(q);
    for (int i = -4000; i <= 4000; ++i) {
      double y = i * 0.01;
      double a = std::abs(h_func(y, q));
      CHECK(a <= cap * (1 + 1e-15));
      if (std::abs(y - at) > 0.05) CHECK(a < cap);
    }
  }
}

TEST_CASE("gradient of H_d is h") {
  CounterRng rng(3);
  for (int t = 0; t < 50; ++t) {
    ScalarParams q{rng.uniform() * 2, 0.2 + rng.uniform() * 3, 0.1 + rng.uniform() * 4};
    int d = 1 + static_cast<int>(rng.below(4));
    std::vector<double> ys(d);
    for (auto& y : ys) y = rng.uniform() * 8 - 4;
    for (int i = 0; i < d; ++i) {
      const double e = 1e-5;
      auto a = ys, b = ys;
      a[i] += e;
      b[i] -= e;
      CHECK((H_d(a, q) - H_d(b, q)) / (2 * e) == doctest::Approx(h_func(ys[i], q)).epsilon(1e-7));
    }
  }
}

TEST_CASE("single vertex and hardcore star log-ratios") {
  SawTree one = build_saw(Graph(1), 0);
  auto p1 = P("1/2", "2", "3", 1);
  CHECK(tree_log_ratios(one, p1).y[0] == doctest::Approx(std::log(3.0)));
  for (int d = 1; d <= 6; ++d) {
    auto p = P("0", "1", "3/2", d + 1);
    SawTree t = build_saw(star_graph(d), 0);
    auto r = tree_log_ratios(t, p);
    double expect = std::log(1.5) - d * std::log(2.5);
    CHECK(r.y[t.root] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("root log-ratio matches enumeration on random trees") {
  CounterRng rng(41);
  for (int t = 0; t < 40; ++t) {
    int n = 2 + static_cast<int>(rng.below(14));
    Graph g = random_tree(n, rng);
    auto p = random_params(rng, n);
    int r = static_cast<int>(rng.below(n));
    SawTree T = build_saw(g, r);
    double y = tree_log_ratios(T, p).y[T.root];
    double ex = log_ratio_exact(g, p, {}, r);
    CHECK(std::abs(y - ex) <= 1e-9 * std::max(1.0, std::abs(ex)));
  }
}

TEST_CASE("conditioned SAW trees: ratios and influences match enumeration") {
  CounterRng rng(43);
  int checked = 0;
  while (checked < 40) {
    int n = 4 + static_cast<int>(rng.below(3));
    Graph g = random_bounded_degree(n, 3, 0.6, rng);
    auto p = random_params(rng, n);
    Boundary bc;
    int pin = 1 + static_cast<int>(rng.below(n - 1));
    std::vector<bool> keep(n, true);
    keep[pin] = false;
    if (is_connected(g, keep)) bc[pin] = static_cast<int>(rng.below(2));
    auto C = build_conditioned_saw(g, 0, bc);
    if (C.tree.free_count() > 20) continue;
    TreeSystem ts = tree_system(C.tree, p);
    auto ex = tree_exact(C.tree, p);
    if (ex.root_marginal == 0 || ex.root_marginal == 1) continue;
    auto R = tree_log_ratios(C.tree, p);
    double ey = std::log(to_double(ex.root_marginal)) - std::log(to_double(1 - ex.root_marginal));
    CHECK(std::abs(R.y[C.tree.root] - ey) <= 1e-9 * std::max(1.0, std::abs(ey)));
    CHECK(std::abs(R.y[C.tree.root] - log_ratio_exact(ts.graph, ts.params, ts.boundary, C.tree.root)) <= 1e-9);
    auto I = tree_influences(C.tree, R, p);
    for (std::size_t v = 0; v < C.tree.size(); ++v) {
      if (C.tree.nodes[v].fixed_spin) continue;
      CHECK(std::abs(I[v] - to_double(ex.influence[v])) <= 1e-9);
    }
    ++checked;
  }
}

TEST_CASE("tree_influence chain rule") {
  auto p = P("1/3", "2", "3/2", 3);
  SawTree t = build_saw(path_graph(3), 0);
  auto r = tree_log_ratios(t, p);
  ScalarParams base{1.0 / 3, 2, 1};
  int a = t.nodes[t.root].children[0];
  int b = t.nodes[a].children[0];
  CHECK(tree_influence(t, p, a) == doctest::Approx(h_func(r.y[a], base)));
  CHECK(tree_influence(t, p, b) == doctest::Approx(h_func(r.y[a], base) * h_func(r.y[b], base)));
  CHECK(tree_influence(t, p, t.root) == 1);
  SawTree k3 = build_saw(complete_graph(3), 0);
  for (std::size_t v = 0; v < k3.size(); ++v)
    if (k3.nodes[v].fixed_spin) CHECK_THROWS_AS(tree_influence(k3, p, static_cast<int>(v)), Error);
}

TEST_CASE("antiferromagnetic influences alternate in sign") {
  CounterRng rng(5);
  for (int t = 0; t < 20; ++t) {
    Graph g = random_bounded_degree(6, 3, 0.5, rng);
    auto p = P("1/4", "3/2", "5/4", 6);
    SawTree T = build_saw(g, static_cast<int>(rng.below(6)));
    auto R = tree_log_ratios(T, p);
    auto I = tree_influences(T, R, p);
    for (std::size_t v = 0; v < T.size(); ++v) {
      if (T.nodes[v].fixed_spin || I[v] == 0) continue;
      CHECK((I[v] > 0) == (T.nodes[v].depth % 2 == 0));
    }
    CHECK(ratios_in_J(R, T, p));
  }
}

TEST_CASE("log-ratios lie in J_d for both regimes") {
  CounterRng rng(6);
  for (int t = 0; t < 30; ++t) {
    Graph g = random_bounded_degree(7, 4, 0.5, rng);
    auto p = random_params(rng, 7);
    SawTree T = build_saw(g, 0);
    CHECK(ratios_in_J(tree_log_ratios(T, p), T, p));
  }
}

TEST_CASE("a child pinned occupied under hardcore silences its parent") {
  Graph g = path_graph(3);
  auto C = build_conditioned_saw(g, 0, {{2, 1}});
  auto p = P("0", "1", "1", 3);
  auto R = tree_log_ratios(C.tree, p);
  int a = C.tree.nodes[C.tree.root].children[0];
  CHECK(R.y[a] == -INFINITY);
  CHECK(tree_influence(C.tree, p, a) == 0);
  CHECK(R.y[C.tree.root] == doctest::Approx(0));
}

TEST_CASE("decay profile on a star with the identity potential") {
  for (int d = 2; d <= 5; ++d) {
    auto p = P("0", "1", "2", d + 1);
    SawTree t = build_saw(star_graph(d), 0);
    auto q = ScalarParams::from(p);
    auto pot = Potential::identity(q);
    auto prof = decay_profile(t, p, pot, 0.5, 3);
    double h = std::abs(h_func(std::log(2.0), q));
    REQUIRE(prof.levels.size() == 3);
    CHECK(prof.Delta_r == d);
    CHECK(prof.levels[0].s == doctest::Approx(d * h));
    CHECK(prof.levels[0].bound == doctest::Approx(d * h));
    CHECK(prof.levels[0].s_weighted == doctest::Approx(d * h));
    CHECK(prof.levels[1].s == 0);
    CHECK_FALSE(prof.levels[1].bound_defined);
    CHECK(prof.bounds_hold());
  }
}

TEST_CASE("isolated root leaves the bound undefined") {
  auto p = P("1/3", "2", "1", 1);
  auto pot = Potential::lly(ScalarParams::from(p));
  auto prof = decay_profile(build_saw(Graph(1), 0), p, pot, 0.5, 2);
  for (const auto& l : prof.levels) {
    CHECK(l.s == 0);
    CHECK_FALSE(l.bound_defined);
  }
}

TEST_CASE("hardcore decay on a complete tree follows the LLY contraction") {
  Graph g = complete_tree(3, 2, 4);
  auto p = P("0", "1", "2", g.n);
  auto q = ScalarParams::from(p);
  double gap = uniqueness_gap(3, q).gap;
  REQUIRE(gap > 0);
  auto pot = Potential::lly(q);
  double kappa = contraction_sup(pot, 3).sup;
  CHECK(kappa <= std::sqrt(1 - gap) + 1e-6);
  SawTree t = build_saw(g, 0);
  auto prof = decay_profile(t, p, pot, kappa, 4);
  CHECK(prof.bounds_hold());
  for (const auto& l : prof.levels) {
    CHECK(l.bound_defined);
    CHECK(l.s <= l.bound * (1 + 1e-9));
  }
  for (int k = 1; k < 4; ++k)
    CHECK(prof.levels[k].bound <= prof.levels[k - 1].bound * kappa * (1 + 1e-12) *
                                      (prof.levels[k].B / prof.levels[k - 1].B));
}

TEST_CASE("certified level bounds on SAW trees of random graphs") {
  CounterRng rng(77);
  auto p0 = P("1/2", "1/2", "1", 1);
  auto cert = certify(ScalarParams::from(p0), 3);
  REQUIRE(cert.passed());
  auto pot = Potential::make(cert.potential, cert.params);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_bounded_degree(7, 3, 0.5, rng);
    auto p = P("1/2", "1/2", "1", 7);
    SawTree T = build_saw(g, 0);
    auto prof = decay_profile(T, p, pot, cert.contraction, 6);
    CHECK(prof.bounds_hold());
    for (const auto& l : prof.levels) {
      CHECK(l.s <= cert.c * std::pow(1 - cert.alpha, l.k - 1) * (1 + 1e-9));
      CHECK(l.s_weighted <= 2 * cert.c * std::pow(1 - cert.alpha, l.k - 1) * prof.Delta_r * (1 + 1e-9));
    }
  }
}

TEST_CASE("total influence: product system and the star example") {
  Graph c = cycle_graph(5);
  auto prod = total_influence_bound(c, P("2", "1/2", "1", 5), {}, 0, 0.5, 1);
  CHECK(prod.plain == 0);
  CHECK(prod.holds());
  double last_plain = 0;
  for (int d = 3; d <= 8; ++d) {
    auto ti = total_influence_bound(star_graph(d), P("0", "2", "1", d + 1), {}, 0, 1, 1);
    CHECK(ti.plain == doctest::Approx(d / 3.0));
    CHECK(ti.weighted == doctest::Approx(1 / 3.0));
    CHECK(ti.plain > last_plain);
    last_plain = ti.plain;
  }
  CHECK_THROWS_AS(total_influence_bound(c, P("0", "1", "1", 5), {{0, 1}}, 0, 0.5, 1), Error);
}

TEST_CASE("hardcore total influence below c/alpha on bounded-degree graphs") {
  Rat lam = hardcore_critical_field(3, Rat(1)) / 2;
  CounterRng rng(8);
  auto cert = certify(ScalarParams{0, 1, to_double(lam)}, 3);
  REQUIRE(cert.passed());
  for (int t = 0; t < 8; ++t) {
    Graph g = random_bounded_degree(8, 3, 0.5, rng);
    auto p = SpinParams::uniform(8, Rat(0), Rat(1), lam);
    auto ti = total_influence_bound(g, p, {}, 0, cert.alpha, cert.c);
    CHECK(ti.holds());
    CHECK(ti.plain <= 4 / (0.5 / 8));
  }
}
