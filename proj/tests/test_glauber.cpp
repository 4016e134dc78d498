#include <doctest.h>

#include <cmath>

#include "spinlab/errors.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/glauber.hpp"
#include "spinlab/graphs.hpp"

using namespace spinlab;

namespace {
SpinParams P(const char* b, const char* g, const char* l, int n) {
  return SpinParams::uniform(n, parse_rat(b), parse_rat(g), parse_rat(l));
}
}  // namespace

TEST_CASE("single vertex chain") {
  auto r = transition_matrix(Graph(1), P("1", "1", "1", 1));
  REQUIRE(r.states.size() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(r.P(i, j) == doctest::Approx(0.5));
  CHECK(r.gap == doctest::Approx(1));
  CHECK(r.t_mix_exact == 1);
}

TEST_CASE("single edge hardcore chain") {
  auto r = transition_matrix(path_graph(2), P("0", "1", "1", 2));
  REQUIRE(r.states.size() == 3);
  for (double m : r.mu) CHECK(m == doctest::Approx(1.0 / 3));
  // rows by hand: from 00 each vertex turns on w.p. 1/4; from 10 only vertex 0 can move
  int s00 = r.index_of(0), s10 = r.index_of(1), s01 = r.index_of(2);
  CHECK(r.P(s00, s00) == doctest::Approx(0.5));
  CHECK(r.P(s00, s10) == doctest::Approx(0.25));
  CHECK(r.P(s10, s10) == doctest::Approx(0.75));
  CHECK(r.P(s10, s01) == 0);
  REQUIRE(r.eigenvalues.size() == 3);
  CHECK(r.eigenvalues[0] == doctest::Approx(1));
  CHECK(r.eigenvalues[1] == doctest::Approx(0.75));
  CHECK(r.eigenvalues[2] == doctest::Approx(0.25));
  CHECK(r.gap == doctest::Approx(0.25));
  CHECK(r.psd);
  CHECK(r.irreducible);
}

TEST_CASE("reversibility, PSD and the mixing-time sandwich on random instances") {
  CounterRng rng(14);
  for (int t = 0; t < 25; ++t) {
    int n = 2 + static_cast<int>(rng.below(7));
    Graph g = random_bounded_degree(n, 3, 0.5, rng);
    Rat b(static_cast<long>(rng.below(8)), 4), c(static_cast<long>(rng.below(8)) + 1, 4);
    b.canonicalize();
    c.canonicalize();
    auto p = SpinParams::uniform(n, b, c, Rat(3, 2));
    Boundary bc;
    if (rng.below(2)) bc[static_cast<int>(rng.below(n))] = static_cast<int>(rng.below(2));
    auto r = transition_matrix(g, p, bc);
    CHECK(r.reversibility_residual <= 1e-12);
    CHECK(r.min_eigenvalue >= -1e-10);
    CHECK(r.psd);
    CHECK(r.irreducible);
    for (int i = 0; i < r.P.rows(); ++i) CHECK(r.P.row(i).sum() == doctest::Approx(1).epsilon(1e-14));
    CHECK(static_cast<double>(r.t_mix_exact) <= r.t_mix_bound);
  }
}

TEST_CASE("exact mixing time is the first time worst TV drops to 1/4") {
  auto r = transition_matrix(cycle_graph(5), P("1/4", "1", "2", 5));
  Eigen::MatrixXd Pt = Eigen::MatrixXd::Identity(r.P.rows(), r.P.cols());
  long t = 0;
  while (worst_tv(r, Pt) > 0.25) {
    Pt = Pt * r.P;
    ++t;
  }
  CHECK(r.t_mix_exact == t);
}

TEST_CASE("parallel and serial transition matrices agree") {
  auto a = transition_matrix(complete_graph(5), P("1/3", "2", "1", 5));
  auto b = transition_matrix_serial(complete_graph(5), P("1/3", "2", "1", 5));
  CHECK((a.P - b.P).cwiseAbs().maxCoeff() == 0);
  CHECK(a.t_mix_exact == b.t_mix_exact);
  CHECK(a.gap == doctest::Approx(b.gap).epsilon(1e-13));
}

TEST_CASE("transition matrix cap") {
  try {
    transition_matrix(path_graph(13), P("1/2", "1", "1", 13));
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CapExceeded);
  }
}

TEST_CASE("heat-bath update rules") {
  Graph g = path_graph(3);
  auto hc = P("0", "1", "1", 3);
  ChainState s{{1, 0, 0}};
  CHECK(heat_bath_prob(s, g, hc, 1) == 0);
  CHECK(heat_bath_prob(s, g, hc, 2) == doctest::Approx(0.5));
  auto one = P("1", "1", "1", 1);
  ChainState x{{0}};
  CHECK(heat_bath_prob(x, Graph(1), one, 0) == doctest::Approx(0.5));

  // pinned vertices are never touched
  Boundary bc{{0, 1}, {2, 0}};
  ChainState st = boundary_state(g, bc, 0);
  CounterRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    glauber_step(st, g, P("1/2", "2", "1", 3), {1}, rng);
    CHECK(st.spins[0] == 1);
    CHECK(st.spins[2] == 0);
  }
}

TEST_CASE("greedy start is feasible and maximal") {
  Graph g = cycle_graph(5);
  auto hc = P("0", "1", "1", 5);
  auto s = greedy_one_state(g, hc, {});
  CHECK(s.spins == std::vector<std::uint8_t>{1, 0, 1, 0, 0});
}

TEST_CASE("spectral-independence gap bound arithmetic") {
  CHECK(alo_gap_bound({0, 0, 0}, 4) == doctest::Approx(0.25));
  CHECK(alo_gap_bound({0.5}, 2) == doctest::Approx(0.25));
  CHECK(alo_gap_bound_exact({Rat(1, 2)}, 2) == Rat(1, 4));
  CHECK(alo_gap_bound({3, 0, 0}, 4) == 0);
  CHECK(capped_gap_bound_exact(Rat(0), Rat(1, 3), 6) == Rat(1, 6));
  // a = 2, b = 1/2, n = 8: threshold 1/2, K = 4, then two (1 - b) factors
  Rat v = capped_gap_bound_exact(Rat(2), Rat(1, 2), 8);
  CHECK(v == Rat(1, 672));
  CHECK(capped_gap_bound(2, 0.5, 8) == doctest::Approx(1.0 / 672));
  try {
    capped_gap_bound_exact(Rat(5), Rat(1, 2), 8);
    FAIL("expected InvalidThreshold");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidThreshold);
  }
}

TEST_CASE("capped product dominates the constant-cap product") {
  CounterRng rng(99);
  for (int t = 0; t < 50; ++t) {
    int n = 3 + static_cast<int>(rng.below(10));
    Rat b(1 + static_cast<long>(rng.below(8)), 8);
    b.canonicalize();
    Rat a(static_cast<long>(rng.below(static_cast<std::uint64_t>(n) * 2)), 4);
    a.canonicalize();
    if (b * n < a) continue;
    std::vector<Rat> eta(n - 1, a);
    CHECK(capped_gap_bound_exact(a, b, n) >= alo_gap_bound_exact(eta, n));
  }
}

TEST_CASE("asymptotic floor is below the capped product") {
  for (int n : {6, 10, 20})
    for (double q : {0.5, 1.0, 2.0}) {
      double C = 0.3;
      std::vector<double> eta;
      for (int i = 0; i <= n - 2; ++i) eta.push_back(std::min(q, C * (n - i - 1)));
      CHECK(alo_gap_bound(eta, n) >= asymptotic_gap_floor(q, C, n));
    }
}

TEST_CASE("end-to-end chain on small graphs") {
  auto hc_cert = certify(ScalarParams{0, 1, 2}, 3);
  for (const Graph& g : {path_graph(4), cycle_graph(5), star_graph(3), complete_graph(4)}) {
    auto p = P("0", "1", "2", g.n);
    auto rep = end_to_end_check(g, p, hc_cert);
    CHECK(rep.gap_ok);
    CHECK(rep.t_mix_ok);
    CHECK(rep.reversible);
    CHECK(rep.psd);
    CHECK(rep.eta_within_q);
    CHECK(rep.ok());
  }
}

TEST_CASE("product system gap is at least 1/n") {
  auto cert = certify(ScalarParams{0.5, 0.5, 1}, 3);
  Graph g = cycle_graph(5);
  auto r = transition_matrix(g, P("2", "1/2", "1", 5));
  CHECK(r.gap >= 1.0 / 5 - 1e-12);
  auto prof = spectral_independence_profile(g, P("2", "1/2", "1", 5));
  for (double e : prof.eta) CHECK(e == doctest::Approx(0).epsilon(1e-12));
  CHECK(alo_gap_bound(prof.eta, 5) == doctest::Approx(0.2));
  (void)cert;
}

TEST_CASE("simulation: single vertex and frozen boundary") {
  auto tr = simulate_mixing(Graph(1), P("1", "1", "1", 1), {}, 3, 1000, 5);
  for (const auto& pt : tr)
    if (pt.t >= 1) CHECK(pt.tv_exact == doctest::Approx(0).epsilon(1e-15));
  Graph g = path_graph(3);
  auto frozen = simulate_mixing(g, P("1/2", "2", "1", 3), {{0, 1}, {1, 0}, {2, 1}}, 5, 100, 5);
  for (const auto& pt : frozen) {
    CHECK(pt.tv_exact == 0);
    CHECK(pt.tv_empirical == 0);
  }
}

TEST_CASE("simulated TV tracks exact TV on a single edge") {
  auto tr = simulate_mixing(path_graph(2), P("0", "1", "1", 2), {}, 50, 100000, 2024);
  REQUIRE(!tr.empty());
  for (const auto& pt : tr) CHECK(std::abs(pt.tv_empirical - pt.tv_exact) <= pt.ci + 1e-12);
  auto again = simulate_mixing(path_graph(2), P("0", "1", "1", 2), {}, 50, 100000, 2024);
  REQUIRE(again.size() == tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) CHECK(again[i].tv_empirical == tr[i].tv_empirical);
}

TEST_CASE("long-run frequencies pass a chi-square test on a single edge") {
  Graph g = path_graph(2);
  auto p = P("1/2", "2", "3/2", 2);
  auto r = transition_matrix(g, p);
  const long reps = 1000000;
  auto counts = sample_histogram(g, p, {}, r, 0, 40, reps, 77);
  double chi2 = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double e = reps * r.mu[i];
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
  }
  // three degrees of freedom, 0.001 level
  CHECK(chi2 < 16.266);
}

TEST_CASE("spectral report JSON") {
  auto r = transition_matrix(path_graph(2), P("0", "1", "1", 2));
  auto j = spectral_to_json(r);
  CHECK(j["states"].size() == 3);
  CHECK(j["t_mix_exact"].get<long>() == r.t_mix_exact);
}
