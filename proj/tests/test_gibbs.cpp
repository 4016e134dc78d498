#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "spinlab/errors.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/graphs.hpp"

using namespace spinlab;

namespace {
SpinParams P(const char* b, const char* g, const char* l, int n) {
  return SpinParams::uniform(n, parse_rat(b), parse_rat(g), parse_rat(l));
}

Rat rand_rat(CounterRng& rng, int lo_num, int hi_num, int den) {
  return Rat(lo_num + static_cast<int>(rng.below(hi_num - lo_num + 1)), den);
}
}  // namespace

TEST_CASE("gibbs_summary examples") {
  auto s = gibbs_summary(Graph(1), P("1", "1", "1", 1));
  CHECK(s.Z == 2);
  CHECK(s.M[0] == Rat(1, 2));

  auto hc = gibbs_summary(path_graph(2), P("0", "1", "1", 2));
  CHECK(hc.Z == 3);
  CHECK(hc.M[0] == Rat(1, 3));
  CHECK(hc.R[0].value == Rat(1, 2));

  auto is = gibbs_summary(path_graph(2), P("2", "2", "1", 2));
  CHECK(is.Z == 6);
  CHECK(is.M[1] == Rat(1, 2));
}

TEST_CASE("forced-empty vertex has zero marginal and ratio") {
  auto s = gibbs_summary(path_graph(2), P("0", "1", "1", 2), {{1, 1}});
  REQUIRE(s.M.size() == 1);
  CHECK(s.M[0] == 0);
  CHECK_FALSE(s.R[0].infinite);
  CHECK(s.R[0].value == 0);
  CHECK(s.index_of(1) == -1);
}

TEST_CASE("edges between pinned vertices carry no weight") {
  // adjacent occupied pins under hardcore do not zero the conditional partition function
  auto s = gibbs_summary(path_graph(3), P("0", "1", "1", 3), {{0, 1}, {1, 1}});
  CHECK(s.Z == 1);
  CHECK(s.M[0] == 0);
}

TEST_CASE("enumeration cap") {
  try {
    gibbs_summary(path_graph(10), P("1/2", "1", "1", 10), {}, 8);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CapExceeded);
  }
}

TEST_CASE("influence and covariance examples") {
  Graph k2 = path_graph(2);
  auto hc = P("0", "1", "1", 2);
  auto I = influence_matrix(k2, hc);
  CHECK(I.at(0, 1) == Rat(-1, 2));
  CHECK(I.at(0, 0) == 1);
  CHECK(covariance(k2, hc, {}, 0, 1) == Rat(-1, 9));
  CHECK(covariance(k2, hc, {}, 0, 0) == Rat(2, 9));
  CHECK(covariance(Graph(1), P("1", "1", "1", 1), {}, 0, 0) == Rat(1, 4));
  Graph two(2);
  CHECK(covariance(two, P("1/2", "3", "2", 2), {}, 0, 1) == 0);
}

TEST_CASE("star leaf influence is lambda/(lambda+gamma) in magnitude") {
  for (int d = 2; d <= 6; ++d) {
    Graph s = star_graph(d);
    for (const char* gam : {"2", "3/2", "5"}) {
      auto p = P("0", gam, "1", d + 1);
      auto I = influence_matrix(s, p);
      Rat expect = Rat(1) / (Rat(1) + parse_rat(gam));
      for (int v = 1; v <= d; ++v) CHECK(abs(I.at(0, v)) == expect);
    }
  }
}

TEST_CASE("pinned separator gives zero influence") {
  Graph g = path_graph(5);
  auto p = P("1/3", "2", "3/2", 5);
  auto I = influence_matrix(g, p, {{2, 0}});
  CHECK(I.at(0, 4) == 0);
  CHECK(I.at(4, 1) == 0);
  CHECK(I.at(0, 1) != 0);
}

TEST_CASE("exact identity I K(u,u) = K(u,v) on random instances") {
  CounterRng rng(5);
  for (int t = 0; t < 20; ++t) {
    int n = 3 + static_cast<int>(rng.below(4));
    Graph g = random_bounded_degree(n, 3, 0.5, rng);
    auto p = SpinParams::uniform(n, rand_rat(rng, 0, 8, 4), rand_rat(rng, 1, 8, 3),
                                 rand_rat(rng, 1, 9, 4));
    Moments m = enumerate_moments(g, p, {}, MomentLevel::Pairs);
    auto K = covariance_matrix(m);
    auto I = influence_matrix(m);
    for (std::size_t a = 0; a < I.vertices.size(); ++a)
      for (std::size_t b = 0; b < I.vertices.size(); ++b) {
        int ia = static_cast<int>(std::find(m.free.begin(), m.free.end(), I.vertices[a]) - m.free.begin());
        int ib = static_cast<int>(std::find(m.free.begin(), m.free.end(), I.vertices[b]) - m.free.begin());
        CHECK(I.exact[a][b] * K[ia][ia] == K[ia][ib]);
      }
  }
}

TEST_CASE("derivative identities by finite differences") {
  CounterRng rng(9);
  for (int t = 0; t < 15; ++t) {
    int n = 2 + static_cast<int>(rng.below(5));
    Graph g = random_bounded_degree(n, 4, 0.6, rng);
    auto p = SpinParams::uniform(n, rand_rat(rng, 0, 12, 4), rand_rat(rng, 1, 12, 4),
                                 rand_rat(rng, 1, 12, 4));
    auto r = derivative_identity_check(g, p);
    CHECK(r.exact_identity);
    CHECK(r.dev_log_partition <= r.tolerance);
    CHECK(r.dev_covariance <= r.tolerance);
    CHECK(r.dev_influence <= r.tolerance);
    CHECK(r.passed());
  }
}

TEST_CASE("product system has identity influence and zero deviations") {
  Graph g = cycle_graph(4);
  auto p = P("2", "1/2", "3", 4);
  auto r = derivative_identity_check(g, p);
  CHECK(r.passed());
  auto I = influence_matrix(g, p);
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v) CHECK(I.at(u, v) == (u == v ? 1 : 0));
  auto prof = spectral_independence_profile(g, p);
  for (double e : prof.eta) CHECK(e == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("strict derivative check rejects a deterministic row") {
  Graph g = path_graph(2);
  auto p = P("0", "1", "1", 2);
  auto ok = derivative_identity_check(g, p, {}, 1e-5, true);
  CHECK(ok.passed());
  // vertex 1 next to a vertex pinned to 1 under hardcore is forced to 0
  Graph h = path_graph(3);
  auto q = P("0", "1", "1", 3);
  CHECK_THROWS_AS(derivative_identity_check(h, q, {{0, 1}}, 1e-5, true), Error);
  auto lax = derivative_identity_check(h, q, {{0, 1}});
  CHECK(lax.degenerate_rows == 1);
}

TEST_CASE("spectral independence profile examples") {
  auto prof = spectral_independence_profile(path_graph(2), P("0", "1", "1", 2));
  REQUIRE(prof.eta.size() == 1);
  CHECK(prof.eta[0] == doctest::Approx(0.5).epsilon(1e-12));
  auto p5 = spectral_independence_profile(cycle_graph(5), P("1/2", "1/2", "1", 5));
  CHECK(p5.eta.size() == 4);
  for (double e : p5.eta) CHECK(e >= 0);
}

TEST_CASE("influence spectrum is real and dominated by row norms") {
  CounterRng rng(21);
  for (int t = 0; t < 20; ++t) {
    int n = 3 + static_cast<int>(rng.below(4));
    Graph g = random_bounded_degree(n, 3, 0.6, rng);
    auto p = SpinParams::uniform(n, rand_rat(rng, 0, 6, 4), rand_rat(rng, 2, 8, 4),
                                 rand_rat(rng, 1, 9, 4));
    auto I = influence_matrix(g, p);
    if (I.vertices.empty()) continue;
    auto [re, im] = influence_eigen_general(I);
    CHECK(im <= 1e-10);
    double lmax = influence_lambda_max(I);
    CHECK(lmax == doctest::Approx(re).epsilon(1e-9));
    Eigen::MatrixXd A = I.values();
    double inf_norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    double one_norm = A.cwiseAbs().colwise().sum().maxCoeff();
    CHECK(lmax <= std::min(inf_norm, one_norm) + 1e-9);
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) CHECK(std::abs(A(i, j)) <= 1 + 1e-15);
  }
}

TEST_CASE("hardcore marginals on trees stay below lambda/(1+lambda)") {
  CounterRng rng(2);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_tree(7, rng);
    auto p = P("0", "1", "3/2", 7);
    auto s = gibbs_summary(g, p);
    for (const auto& m : s.M) {
      CHECK(m >= 0);
      CHECK(m <= Rat(3, 5));
    }
  }
}

TEST_CASE("parallel and serial enumeration agree") {
  CounterRng rng(4);
  Graph g = random_bounded_degree(12, 4, 0.4, rng);
  auto p = P("1/3", "5/2", "7/4", 12);
  auto a = enumerate_moments(g, p, {{3, 1}}, MomentLevel::Pairs);
  auto b = enumerate_moments_serial(g, p, {{3, 1}}, MomentLevel::Pairs);
  CHECK(a.Z == b.Z);
  CHECK(a.S == b.S);
  CHECK(a.S2 == b.S2);
  auto pa = spectral_independence_profile(cycle_graph(6), P("0", "1", "2", 6));
  auto pb = spectral_independence_profile_serial(cycle_graph(6), P("0", "1", "2", 6));
  REQUIRE(pa.eta.size() == pb.eta.size());
  for (std::size_t k = 0; k < pa.eta.size(); ++k) CHECK(pa.eta[k] == doctest::Approx(pb.eta[k]));
}

TEST_CASE("floating enumeration matches exact") {
  Graph g = complete_graph(4);
  auto p = P("1/2", "3", "5/4", 4);
  auto s = gibbs_summary(g, p);
  std::vector<long double> lam(4, 1.25L);
  auto f = enumerate_moments_f(g, lam, 0.5L, 3.0L, {}, MomentLevel::Marginals);
  CHECK(static_cast<double>(f.Z) == doctest::Approx(to_double(s.Z)).epsilon(1e-14));
  CHECK(static_cast<double>(f.S[2] / f.Z) == doctest::Approx(to_double(s.M[2])).epsilon(1e-14));
}
