#include "spinlab/gibbs.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spinlab/errors.hpp"

namespace spinlab {

namespace {

struct Layout {
  int k = 0;
  std::vector<int> free;
  std::vector<std::uint32_t> hi;  // free neighbours with larger free index
  std::vector<int> pin1, pin0;    // pinned neighbours by spin
  int E = 0;                      // edges with at least one free endpoint
  int lo_bits = 0;
};

Layout make_layout(const Graph& g, const Boundary& bc, int cap) {
  validate_boundary(g, bc);
  Layout L;
  L.free = free_vertices(g, bc);
  L.k = static_cast<int>(L.free.size());
  if (L.k > cap)
    throw Error(ErrorKind::CapExceeded, std::to_string(L.k) + " free vertices exceeds cap " +
                                            std::to_string(cap));
  std::vector<int> idx(g.n, -1);
  for (int i = 0; i < L.k; ++i) idx[L.free[i]] = i;
  L.hi.assign(L.k, 0);
  L.pin1.assign(L.k, 0);
  L.pin0.assign(L.k, 0);
  for (int i = 0; i < L.k; ++i) {
    for (int w : g.adj[L.free[i]]) {
      if (idx[w] >= 0) {
        if (idx[w] > i) L.hi[i] |= 1u << idx[w];
      } else {
        (bc.at(w) ? L.pin1 : L.pin0)[i]++;
      }
    }
  }
  for (auto [u, v] : g.edges())
    if (idx[u] >= 0 || idx[v] >= 0) ++L.E;
  L.lo_bits = L.k / 2;
  return L;
}

template <class T>
struct Tables {
  std::vector<T> bg;  // (E+1)^2, index m1*(E+1)+m0
  std::vector<T> lo, hi;
};

template <class T>
void fill_lambda_tables(const Layout& L, const std::vector<T>& w1, const std::vector<T>& w0,
                        Tables<T>& t) {
  int hb = L.k - L.lo_bits;
  t.lo.assign(std::size_t(1) << L.lo_bits, T(1));
  t.hi.assign(std::size_t(1) << hb, T(1));
  for (std::size_t s = 0; s < t.lo.size(); ++s)
    for (int i = 0; i < L.lo_bits; ++i) t.lo[s] *= (s >> i & 1) ? w1[i] : w0[i];
  for (std::size_t s = 0; s < t.hi.size(); ++s)
    for (int i = 0; i < hb; ++i) t.hi[s] *= (s >> i & 1) ? w1[L.lo_bits + i] : w0[L.lo_bits + i];
}

template <class T>
struct Accum {
  T Z = T(0);
  std::vector<T> S, S2;
  void init(int k, MomentLevel level) {
    if (level >= MomentLevel::Marginals) S.assign(k, T(0));
    if (level >= MomentLevel::Pairs) S2.assign(std::size_t(k) * k, T(0));
  }
  void merge(const Accum& o) {
    Z += o.Z;
    for (std::size_t i = 0; i < S.size(); ++i) S[i] += o.S[i];
    for (std::size_t i = 0; i < S2.size(); ++i) S2[i] += o.S2[i];
  }
};

inline int mono_counts(const Layout& L, std::uint32_t s, int& m1) {
  const std::uint32_t full = L.k == 32 ? ~0u : ((1u << L.k) - 1);
  std::uint32_t ns = ~s & full;
  int a = 0, b = 0;
  for (int i = 0; i < L.k; ++i) {
    if (s >> i & 1) {
      a += __builtin_popcount(s & L.hi[i]) + L.pin1[i];
    } else {
      b += __builtin_popcount(ns & L.hi[i]) + L.pin0[i];
    }
  }
  m1 = a;
  return b;
}

template <class T>
void accumulate_range(const Layout& L, const Tables<T>& t, MomentLevel level, std::uint64_t begin,
                      std::uint64_t end, Accum<T>& acc) {
  const std::uint32_t lomask = (1u << L.lo_bits) - 1;
  const int stride = L.E + 1;
  T w = T(0);
  for (std::uint64_t s64 = begin; s64 < end; ++s64) {
    std::uint32_t s = static_cast<std::uint32_t>(s64);
    int m1;
    int m0 = mono_counts(L, s, m1);
    const T& b = t.bg[m1 * stride + m0];
    if (b == 0) continue;
    w = b * t.lo[s & lomask];
    w *= t.hi[s >> L.lo_bits];
    acc.Z += w;
    if (level == MomentLevel::Partition) continue;
    for (std::uint32_t x = s; x; x &= x - 1) {
      int i = __builtin_ctz(x);
      acc.S[i] += w;
      if (level == MomentLevel::Pairs) {
        for (std::uint32_t y = x & (x - 1); y; y &= y - 1) {
          int j = __builtin_ctz(y);
          acc.S2[std::size_t(i) * L.k + j] += w;
        }
      }
    }
  }
}

template <class T>
void finish_pairs(int k, std::vector<T>& S2, const std::vector<T>& S) {
  for (int i = 0; i < k; ++i) {
    S2[std::size_t(i) * k + i] = S[i];
    for (int j = i + 1; j < k; ++j) S2[std::size_t(j) * k + i] = S2[std::size_t(i) * k + j];
  }
}

template <class T>
Accum<T> run_enumeration(const Layout& L, const Tables<T>& t, MomentLevel level, bool parallel) {
  const std::uint64_t total = std::uint64_t(1) << L.k;
  Accum<T> result;
  result.init(L.k, level);
  if (!parallel || total < 4096) {
    accumulate_range(L, t, level, 0, total, result);
  } else {
#pragma omp parallel
    {
      Accum<T> local;
      local.init(L.k, level);
      int nt = omp_get_num_threads(), id = omp_get_thread_num();
      // contiguous blocks keep the reduction order fixed for a given thread count
      std::uint64_t chunk = (total + nt - 1) / nt;
      std::uint64_t b = std::min<std::uint64_t>(total, chunk * id);
      std::uint64_t e = std::min<std::uint64_t>(total, b + chunk);
      accumulate_range(L, t, level, b, e, local);
#pragma omp critical(spinlab_enum_merge)
      result.merge(local);
    }
  }
  if (level == MomentLevel::Pairs) finish_pairs(L.k, result.S2, result.S);
  return result;
}

Moments moments_impl(const Graph& g, const SpinParams& p, const Boundary& bc, MomentLevel level,
                     int cap, bool parallel) {
  p.validate(g.n);
  Layout L = make_layout(g, bc, cap);
  const mpz_class pb = p.beta.get_num(), qb = p.beta.get_den();
  const mpz_class pg = p.gamma.get_num(), qg = p.gamma.get_den();
  Tables<mpz_class> t;
  const int E = L.E;
  std::vector<mpz_class> pbp(E + 1), qbp(E + 1), pgp(E + 1), qgp(E + 1);
  pbp[0] = qbp[0] = pgp[0] = qgp[0] = 1;
  for (int i = 1; i <= E; ++i) {
    pbp[i] = pbp[i - 1] * pb;
    qbp[i] = qbp[i - 1] * qb;
    pgp[i] = pgp[i - 1] * pg;
    qgp[i] = qgp[i - 1] * qg;
  }
  t.bg.assign(std::size_t(E + 1) * (E + 1), mpz_class(0));
  for (int m1 = 0; m1 <= E; ++m1)
    for (int m0 = 0; m0 + m1 <= E; ++m0)
      t.bg[m1 * (E + 1) + m0] = pbp[m1] * qbp[E - m1] * pgp[m0] * qgp[E - m0];
  std::vector<mpz_class> w1(L.k), w0(L.k);
  mpz_class den = qbp[E] * qgp[E];
  for (int i = 0; i < L.k; ++i) {
    w1[i] = p.lambda[L.free[i]].get_num();
    w0[i] = p.lambda[L.free[i]].get_den();
    den *= w0[i];
  }
  fill_lambda_tables(L, w1, w0, t);
  auto acc = run_enumeration(L, t, level, parallel);
  Moments m;
  m.free = L.free;
  m.Z = std::move(acc.Z);
  m.S = std::move(acc.S);
  m.S2 = std::move(acc.S2);
  m.denominator = den;
  return m;
}

Rat ratio(const mpz_class& a, const mpz_class& b) {
  Rat r(a, b);
  r.canonicalize();
  return r;
}

}  // namespace

Moments enumerate_moments(const Graph& g, const SpinParams& p, const Boundary& bc,
                          MomentLevel level, int cap) {
  return moments_impl(g, p, bc, level, cap, true);
}

Moments enumerate_moments_serial(const Graph& g, const SpinParams& p, const Boundary& bc,
                                 MomentLevel level, int cap) {
  return moments_impl(g, p, bc, level, cap, false);
}

MomentsF enumerate_moments_f(const Graph& g, const std::vector<long double>& lambda,
                             long double beta, long double gamma, const Boundary& bc,
                             MomentLevel level, int cap) {
  Layout L = make_layout(g, bc, cap);
  Tables<long double> t;
  const int E = L.E;
  t.bg.assign(std::size_t(E + 1) * (E + 1), 0.0L);
  for (int m1 = 0; m1 <= E; ++m1)
    for (int m0 = 0; m0 + m1 <= E; ++m0)
      t.bg[m1 * (E + 1) + m0] =
          (m1 == 0 ? 1.0L : std::pow(beta, m1)) * (m0 == 0 ? 1.0L : std::pow(gamma, m0));
  std::vector<long double> w1(L.k), w0(L.k, 1.0L);
  for (int i = 0; i < L.k; ++i) w1[i] = lambda[L.free[i]];
  fill_lambda_tables(L, w1, w0, t);
  auto acc = run_enumeration(L, t, level, true);
  MomentsF m;
  m.free = L.free;
  m.Z = acc.Z;
  m.S = std::move(acc.S);
  m.S2 = std::move(acc.S2);
  return m;
}

int GibbsSummary::index_of(int v) const {
  auto it = std::lower_bound(free.begin(), free.end(), v);
  return (it != free.end() && *it == v) ? static_cast<int>(it - free.begin()) : -1;
}

GibbsSummary gibbs_summary(const Graph& g, const SpinParams& p, const Boundary& bc, int cap) {
  Moments m = enumerate_moments(g, p, bc, MomentLevel::Marginals, cap);
  if (m.Z == 0) throw Error(ErrorKind::ZeroPartition, "partition function is zero");
  GibbsSummary s;
  s.free = m.free;
  s.Z = ratio(m.Z, m.denominator);
  for (std::size_t i = 0; i < m.free.size(); ++i) {
    s.M.push_back(ratio(m.S[i], m.Z));
    mpz_class zero_side = m.Z - m.S[i];
    if (zero_side == 0) s.R.push_back({Rat(0), true});
    else s.R.push_back({ratio(m.S[i], zero_side), false});
  }
  return s;
}

Eigen::MatrixXd InfluenceMatrix::values() const {
  const int k = static_cast<int>(vertices.size());
  Eigen::MatrixXd out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = exact[i][j].get_d();
  return out;
}

int InfluenceMatrix::index_of(int v) const {
  auto it = std::find(vertices.begin(), vertices.end(), v);
  return it == vertices.end() ? -1 : static_cast<int>(it - vertices.begin());
}

const Rat& InfluenceMatrix::at(int u, int v) const {
  int i = index_of(u), j = index_of(v);
  if (i < 0 || j < 0) throw Error(ErrorKind::DegenerateRow, "influence row/column not defined");
  return exact[i][j];
}

InfluenceMatrix influence_matrix(const Moments& m) {
  if (m.Z == 0) throw Error(ErrorKind::ZeroPartition, "partition function is zero");
  const int k = static_cast<int>(m.free.size());
  InfluenceMatrix I;
  std::vector<int> rows;
  for (int i = 0; i < k; ++i) {
    if (m.S[i] == 0 || m.S[i] == m.Z) I.excluded.push_back(m.free[i]);
    else {
      rows.push_back(i);
      I.vertices.push_back(m.free[i]);
    }
  }
  const mpz_class Z2 = m.Z * m.Z;
  for (int i : rows) {
    // I(u->v) = (S2uv Z - Su Sv) / (Su Z - Su^2)
    mpz_class den = m.S[i] * (m.Z - m.S[i]);
    I.self_cov.push_back(ratio(den, Z2));
    std::vector<Rat> row;
    row.reserve(rows.size());
    for (int j : rows) {
      mpz_class num = m.S2[std::size_t(i) * k + j] * m.Z - m.S[i] * m.S[j];
      row.push_back(ratio(num, den));
    }
    I.exact.push_back(std::move(row));
  }
  return I;
}

InfluenceMatrix influence_matrix(const Graph& g, const SpinParams& p, const Boundary& bc, int cap) {
  return influence_matrix(enumerate_moments(g, p, bc, MomentLevel::Pairs, cap));
}

std::vector<Rat> influence_row(const Moments& m, int i) {
  if (m.Z == 0) throw Error(ErrorKind::ZeroPartition, "partition function is zero");
  const int k = static_cast<int>(m.free.size());
  mpz_class den = m.S[i] * (m.Z - m.S[i]);
  if (den == 0)
    throw Error(ErrorKind::DegenerateRow,
                "vertex " + std::to_string(m.free[i]) + " has a deterministic marginal");
  std::vector<Rat> row(k);
  for (int j = 0; j < k; ++j) row[j] = ratio(m.S2[std::size_t(i) * k + j] * m.Z - m.S[i] * m.S[j], den);
  return row;
}

std::vector<std::vector<Rat>> covariance_matrix(const Moments& m) {
  if (m.Z == 0) throw Error(ErrorKind::ZeroPartition, "partition function is zero");
  const int k = static_cast<int>(m.free.size());
  const mpz_class Z2 = m.Z * m.Z;
  std::vector<std::vector<Rat>> K(k, std::vector<Rat>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      K[i][j] = ratio(m.S2[std::size_t(i) * k + j] * m.Z - m.S[i] * m.S[j], Z2);
  return K;
}

Rat covariance(const Graph& g, const SpinParams& p, const Boundary& bc, int u, int v) {
  if (bc.count(u) || bc.count(v))
    throw Error(ErrorKind::InvalidParams, "covariance needs free vertices");
  Moments m = enumerate_moments(g, p, bc, MomentLevel::Pairs);
  auto pos = [&](int x) {
    return static_cast<int>(std::lower_bound(m.free.begin(), m.free.end(), x) - m.free.begin());
  };
  return covariance_matrix(m)[pos(u)][pos(v)];
}

bool DerivativeReport::passed() const {
  return exact_identity && dev_log_partition <= tolerance && dev_covariance <= tolerance &&
         dev_influence <= tolerance;
}

DerivativeReport derivative_identity_check(const Graph& g, const SpinParams& p,
                                           const Boundary& bc, double eps, bool strict) {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidParams, "eps must be positive");
  Moments m = enumerate_moments(g, p, bc, MomentLevel::Pairs);
  if (m.Z == 0) throw Error(ErrorKind::ZeroPartition, "partition function is zero");
  const int k = static_cast<int>(m.free.size());
  auto K = covariance_matrix(m);
  DerivativeReport rep;
  rep.eps = eps;
  rep.tolerance = 10.0 * eps * eps;

  std::vector<bool> degenerate(k);
  for (int u = 0; u < k; ++u) {
    degenerate[u] = K[u][u] == 0;
    if (degenerate[u]) {
      if (strict)
        throw Error(ErrorKind::DegenerateRow,
                    "K(u,u) = 0 at vertex " + std::to_string(m.free[u]));
      ++rep.degenerate_rows;
    }
  }
  // exact identity I(u->v) K(u,u) = K(u,v)
  InfluenceMatrix I = influence_matrix(m);
  for (std::size_t a = 0; a < I.vertices.size(); ++a) {
    int u = static_cast<int>(std::lower_bound(m.free.begin(), m.free.end(), I.vertices[a]) -
                             m.free.begin());
    for (std::size_t b = 0; b < I.vertices.size(); ++b) {
      int v = static_cast<int>(std::lower_bound(m.free.begin(), m.free.end(), I.vertices[b]) -
                               m.free.begin());
      if (I.exact[a][b] * K[u][u] != K[u][v]) rep.exact_identity = false;
    }
  }

  std::vector<long double> lam(g.n);
  for (int v = 0; v < g.n; ++v) lam[v] = to_long_double(p.lambda[v]);
  const long double beta = to_long_double(p.beta), gamma = to_long_double(p.gamma);
  const long double e = eps;
  for (int v = 0; v < k; ++v) {
    auto shifted = [&](long double sgn) {
      auto l = lam;
      l[m.free[v]] *= std::exp(sgn * e);
      return enumerate_moments_f(g, l, beta, gamma, bc, MomentLevel::Marginals);
    };
    MomentsF up = shifted(1), dn = shifted(-1);
    long double d_logz = (std::log(up.Z) - std::log(dn.Z)) / (2 * e);
    rep.dev_log_partition = std::max<double>(
        rep.dev_log_partition, std::fabs(static_cast<double>(d_logz - to_long_double(Rat(m.S[v], m.Z)))));
    for (int u = 0; u < k; ++u) {
      long double Mu_up = up.S[u] / up.Z, Mu_dn = dn.S[u] / dn.Z;
      long double dM = (Mu_up - Mu_dn) / (2 * e);
      rep.dev_covariance = std::max<double>(
          rep.dev_covariance, std::fabs(static_cast<double>(dM - to_long_double(K[u][v]))));
      if (degenerate[u]) continue;
      long double dR = (std::log(Mu_up / (1 - Mu_up)) - std::log(Mu_dn / (1 - Mu_dn))) / (2 * e);
      Rat Iuv = K[u][v] / K[u][u];
      rep.dev_influence =
          std::max<double>(rep.dev_influence, std::fabs(static_cast<double>(dR - to_long_double(Iuv))));
    }
  }
  return rep;
}

double influence_lambda_max(const InfluenceMatrix& I) {
  const int k = static_cast<int>(I.vertices.size());
  if (k == 0) return 1.0;
  // D^{1/2} I D^{-1/2} with D = diag K(u,u): entry = I(u,v) sqrt(K_uu / K_vv)
  Eigen::MatrixXd S(k, k);
  std::vector<double> sq(k);
  for (int i = 0; i < k; ++i) sq[i] = std::sqrt(I.self_cov[i].get_d());
  bool ok = std::all_of(sq.begin(), sq.end(), [](double x) { return x > 0 && std::isfinite(x); });
  if (!ok) return influence_eigen_general(I).first;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) S(i, j) = I.exact[i][j].get_d() * sq[i] / sq[j];
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

std::pair<double, double> influence_eigen_general(const InfluenceMatrix& I) {
  if (I.vertices.empty()) return {1.0, 0.0};
  Eigen::EigenSolver<Eigen::MatrixXd> es(I.values(), false);
  auto ev = es.eigenvalues();
  double best = -1e300, imag = 0;
  for (int i = 0; i < ev.size(); ++i) {
    best = std::max(best, ev[i].real());
    imag = std::max(imag, std::fabs(ev[i].imag()));
  }
  return {best, imag};
}

namespace {

struct Pinning {
  Boundary bc;
  int k;
};

std::vector<Pinning> all_pinnings(const Graph& g) {
  std::vector<Pinning> out;
  const int n = g.n;
  for (std::uint32_t set = 0; set < (1u << n); ++set) {
    int k = __builtin_popcount(set);
    if (k > n - 2) continue;
    std::vector<int> verts;
    for (int v = 0; v < n; ++v)
      if (set >> v & 1) verts.push_back(v);
    for (std::uint32_t spins = 0; spins < (1u << k); ++spins) {
      Pinning pin;
      pin.k = k;
      for (int i = 0; i < k; ++i) pin.bc[verts[i]] = spins >> i & 1;
      out.push_back(std::move(pin));
    }
  }
  return out;
}

// a pinning is admissible when it has positive probability
bool pinning_feasible(const Graph& g, const SpinParams& p, const Boundary& bc) {
  if (p.beta == 0)
    for (auto [u, v] : g.edges())
      if (bc.count(u) && bc.count(v) && bc.at(u) == 1 && bc.at(v) == 1) return false;
  return true;
}

SpectralIndependenceProfile profile_impl(const Graph& g, const SpinParams& p, int cap,
                                         bool parallel) {
  if (g.n > cap)
    throw Error(ErrorKind::CapExceeded, "profile supports n <= " + std::to_string(cap));
  p.validate(g.n);
  const int len = std::max(0, g.n - 1);
  auto pins = all_pinnings(g);
  std::vector<double> value(pins.size(), -1.0);
  auto eval = [&](std::size_t i) {
    const Boundary& bc = pins[i].bc;
    if (!pinning_feasible(g, p, bc)) return;
    Moments m = enumerate_moments_serial(g, p, bc, MomentLevel::Pairs);
    if (m.Z == 0) return;
    value[i] = std::max(0.0, influence_lambda_max(influence_matrix(m)) - 1.0);
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < static_cast<long>(pins.size()); ++i) eval(i);
  } else {
    for (std::size_t i = 0; i < pins.size(); ++i) eval(i);
  }
  SpectralIndependenceProfile prof;
  prof.eta.assign(len, 0.0);
  prof.witness.assign(len, Boundary{});
  std::vector<bool> seen(len, false);
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (value[i] < 0) continue;
    ++prof.pinnings_evaluated;
    int k = pins[i].k;
    if (!seen[k] || value[i] > prof.eta[k]) {
      seen[k] = true;
      prof.eta[k] = value[i];
      prof.witness[k] = pins[i].bc;
    }
  }
  return prof;
}

}  // namespace

SpectralIndependenceProfile spectral_independence_profile(const Graph& g, const SpinParams& p,
                                                          int cap) {
  return profile_impl(g, p, cap, true);
}

SpectralIndependenceProfile spectral_independence_profile_serial(const Graph& g,
                                                                 const SpinParams& p, int cap) {
  return profile_impl(g, p, cap, false);
}

}  // namespace spinlab
