#include "spinlab/poly.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

#include "spinlab/errors.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

// ---- PolyT ----

template <class C>
PolyT<C> PolyT<C>::constant(const C& c) {
  PolyT p;
  if (c != 0) p.terms.emplace(Mono{}, c);
  return p;
}

template <class C>
PolyT<C> PolyT<C>::variable(int v) {
  if (v < 0 || v >= kMaxVars) throw Error(ErrorKind::CapExceeded, "too many polynomial variables");
  PolyT p;
  Mono m;
  m.set(v, 1);
  p.terms.emplace(m, C(1));
  return p;
}

template <class C>
int PolyT<C>::degree(int v) const {
  int d = 0;
  for (const auto& [m, c] : terms) d = std::max(d, m.exp(v));
  return d;
}

template <class C>
std::array<int, kMaxVars> PolyT<C>::degrees() const {
  std::array<int, kMaxVars> d{};
  for (const auto& [m, c] : terms)
    for (int v = 0; v < kMaxVars; ++v) d[v] = std::max(d[v], m.exp(v));
  return d;
}

template <class C>
void PolyT<C>::add_term(const Mono& m, const C& c) {
  if (c == 0) return;
  auto [it, fresh] = terms.try_emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms.erase(it);
  }
}

template <class C>
PolyT<C> PolyT<C>::operator+(const PolyT& o) const {
  PolyT r = *this;
  for (const auto& [m, c] : o.terms) r.add_term(m, c);
  return r;
}

template <class C>
PolyT<C> PolyT<C>::operator-(const PolyT& o) const {
  PolyT r = *this;
  for (const auto& [m, c] : o.terms) r.add_term(m, C(-c));
  return r;
}

template <class C>
PolyT<C> PolyT<C>::operator*(const PolyT& o) const {
  PolyT r;
  if (is_zero() || o.is_zero()) return r;
  auto da = degrees(), db = o.degrees();
  for (int v = 0; v < kMaxVars; ++v)
    if (da[v] + db[v] > kMaxExponent)
      throw Error(ErrorKind::CapExceeded, "polynomial exponent exceeds 255");
  r.terms.reserve(std::min<std::size_t>(size() * o.size(), 1 << 22));
  C t;
  for (const auto& [ma, ca] : terms)
    for (const auto& [mb, cb] : o.terms) {
      t = ca * cb;
      auto [it, fresh] = r.terms.try_emplace(ma + mb, t);
      if (!fresh) it->second += t;
    }
  for (auto it = r.terms.begin(); it != r.terms.end();)
    it = it->second == 0 ? r.terms.erase(it) : std::next(it);
  return r;
}

template <class C>
PolyT<C> PolyT<C>::scaled(const C& c) const {
  PolyT r;
  if (c == 0) return r;
  r.terms.reserve(terms.size());
  for (const auto& [m, x] : terms) r.terms.emplace(m, C(x * c));
  return r;
}

template <class C>
bool PolyT<C>::operator==(const PolyT& o) const {
  if (terms.size() != o.terms.size()) return false;
  for (const auto& [m, c] : terms) {
    auto it = o.terms.find(m);
    if (it == o.terms.end() || it->second != c) return false;
  }
  return true;
}

template class PolyT<Rat>;
template class PolyT<mpz_class>;

MultiPoly to_rational(const IntPoly& p, const Rat& scale) {
  MultiPoly r;
  r.terms.reserve(p.size());
  for (const auto& [m, c] : p.terms) r.terms.emplace(m, Rat(c) * scale);
  return r;
}

Rat poly_eval(const MultiPoly& p, const std::vector<Rat>& values) {
  Rat s = 0;
  for (const auto& [m, c] : p.terms) {
    Rat t = c;
    for (std::size_t v = 0; v < values.size() && v < std::size_t(kMaxVars); ++v) {
      int e = m.exp(static_cast<int>(v));
      if (e) t *= rat_pow(values[v], e);
    }
    s += t;
  }
  return s;
}

namespace {

bool lex_less(const Mono& a, const Mono& b, const std::vector<int>& prio) {
  for (int v : prio) {
    int x = a.exp(v), y = b.exp(v);
    if (x != y) return x < y;
  }
  return false;
}

std::vector<int> default_priority(int nvars, int last) {
  std::vector<int> p;
  for (int v = 0; v < nvars; ++v)
    if (v != last) p.push_back(v);
  if (last >= 0 && last < nvars) p.push_back(last);
  return p;
}

std::string mono_string(const Mono& m, int nvars) {
  std::string s;
  for (int v = 0; v < nvars; ++v) {
    int e = m.exp(v);
    if (!e) continue;
    if (!s.empty()) s += "*";
    s += "l" + std::to_string(v);
    if (e > 1) s += "^" + std::to_string(e);
  }
  return s.empty() ? "1" : s;
}

}  // namespace

std::vector<std::pair<Mono, Rat>> canonical_terms(const MultiPoly& p) {
  std::vector<std::pair<Mono, Rat>> out(p.terms.begin(), p.terms.end());
  std::vector<int> prio(kMaxVars);
  for (int v = 0; v < kMaxVars; ++v) prio[v] = v;
  std::sort(out.begin(), out.end(),
            [&](const auto& a, const auto& b) { return lex_less(a.first, b.first, prio); });
  return out;
}

nlohmann::json poly_to_json(const MultiPoly& p, int nvars) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [m, c] : canonical_terms(p)) {
    std::vector<int> e(nvars);
    for (int v = 0; v < nvars; ++v) e[v] = m.exp(v);
    arr.push_back({{"exponents", e}, {"coeff", rat_str(c)}});
  }
  return arr;
}

std::string poly_to_string(const MultiPoly& p, int nvars) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : canonical_terms(p)) {
    if (!first) os << " + ";
    first = false;
    os << "(" << rat_str(c) << ")*" << mono_string(m, nvars);
  }
  return os.str();
}

MultiPoly poly_div_exact(const MultiPoly& A, const MultiPoly& B, const std::vector<int>& prio) {
  if (B.is_zero()) throw Error(ErrorKind::InvalidParams, "division by the zero polynomial");
  auto cmp = [&](const Mono& a, const Mono& b) { return lex_less(b, a, prio); };  // descending
  std::map<Mono, Rat, decltype(cmp)> rem(cmp);
  for (const auto& [m, c] : A.terms) rem.emplace(m, c);
  std::vector<std::pair<Mono, Rat>> bt(B.terms.begin(), B.terms.end());
  std::sort(bt.begin(), bt.end(), [&](const auto& x, const auto& y) { return cmp(x.first, y.first); });
  const Mono lb = bt[0].first;
  const Rat lc = bt[0].second;
  MultiPoly Q;
  Rat q;
  while (!rem.empty()) {
    auto lead = rem.begin();
    const Mono lm = lead->first;
    Mono qm;
    for (int v = 0; v < kMaxVars; ++v) {
      int e = lm.exp(v) - lb.exp(v);
      if (e < 0) {
        throw Error(ErrorKind::NotDivisible,
                    "remainder leading term " + mono_string(lm, kMaxVars) + " with coefficient " +
                        rat_str(lead->second) + " is not divisible by " +
                        mono_string(lb, kMaxVars));
      }
      qm.set(v, e);
    }
    q = lead->second / lc;
    Q.terms.emplace(qm, q);
    for (const auto& [m, c] : bt) {
      Mono t = m + qm;
      auto [it, fresh] = rem.try_emplace(t, Rat(-q * c));
      if (!fresh) {
        it->second -= q * c;
        if (it->second == 0) rem.erase(it);
      }
    }
  }
  return Q;
}

MultiPoly poly_div_exact(const MultiPoly& A, const MultiPoly& B, int nvars, int last_var) {
  return poly_div_exact(A, B, default_priority(nvars, last_var));
}

// ---- partition polynomials ----

namespace {

template <class C>
struct EdgeW {
  C w11, w10, w00;  // w01 == w10
  const C& w(int a, int b) const { return a && b ? w11 : (a || b) ? w10 : w00; }
};

EdgeW<Rat> rational_weights(const SpinParams& p) { return {p.beta, Rat(1), p.gamma}; }

// beta, gamma scaled by qb*qg so every edge factor is an integer
EdgeW<mpz_class> integer_weights(const SpinParams& p) {
  mpz_class qb = p.beta.get_den(), qg = p.gamma.get_den();
  return {p.beta.get_num() * qg, qb * qg, p.gamma.get_num() * qb};
}

// Z_G split by the spin of r: (Z(r=1) / lambda_r, Z(r=0)); r < 0 returns (0, Z).
template <class C>
std::pair<PolyT<C>, PolyT<C>> graph_split(const Graph& g, const Boundary& bc, int r,
                                          const EdgeW<C>& W, int cap, int* edges_counted) {
  auto fv = free_vertices(g, bc);
  const int k = static_cast<int>(fv.size());
  if (k > cap)
    throw Error(ErrorKind::CapExceeded, std::to_string(k) + " free vertices exceeds cap " +
                                            std::to_string(cap));
  if (g.n > kMaxVars) throw Error(ErrorKind::CapExceeded, "too many polynomial variables");
  std::vector<int> spin(g.n, 0), idx(g.n, -1);
  for (auto [v, s] : bc) spin[v] = s;
  for (int i = 0; i < k; ++i) idx[fv[i]] = i;
  std::vector<std::pair<int, int>> es;
  for (auto [u, v] : g.edges())
    if (idx[u] >= 0 || idx[v] >= 0) es.emplace_back(u, v);
  if (edges_counted) *edges_counted = static_cast<int>(es.size());
  std::pair<PolyT<C>, PolyT<C>> out;
  C w;
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << k); ++s) {
    for (int i = 0; i < k; ++i) spin[fv[i]] = s >> i & 1;
    w = 1;
    for (auto [u, v] : es) {
      w *= W.w(spin[u], spin[v]);
      if (w == 0) break;
    }
    if (w == 0) continue;
    Mono m;
    for (int i = 0; i < k; ++i)
      if ((s >> i & 1) && fv[i] != r) m.set(fv[i], 1);
    bool root_one = r >= 0 && spin[r] == 1;
    (root_one ? out.first : out.second).add_term(m, w);
  }
  return out;
}

template <class C>
struct NodePair {
  PolyT<C> z1, z0;
};

// (Z_T(root=1) / lambda_root, Z_T(root=0))
template <class C>
std::pair<PolyT<C>, PolyT<C>> tree_split(const SawTree& t, const EdgeW<C>& W) {
  const int N = static_cast<int>(t.nodes.size());
  std::vector<NodePair<C>> z(N);
  for (int i = N - 1; i >= 0; --i) {
    const auto& nd = t.nodes[i];
    if (nd.fixed_spin) continue;  // folded into the parent below
    PolyT<C> a = PolyT<C>::constant(C(1)), b = PolyT<C>::constant(C(1));
    C ca = 1, cb = 1;
    for (int c : nd.children) {
      const auto& ch = t.nodes[c];
      if (ch.fixed_spin) {
        ca *= W.w(1, *ch.fixed_spin);
        cb *= W.w(0, *ch.fixed_spin);
        continue;
      }
      a = a * (z[c].z1.scaled(W.w11) + z[c].z0.scaled(W.w10));
      b = b * (z[c].z1.scaled(W.w10) + z[c].z0.scaled(W.w00));
      z[c] = {};
    }
    a = a.scaled(ca);
    b = b.scaled(cb);
    if (i != t.root) {
      Mono m;
      m.set(nd.origin, 1);
      PolyT<C> shifted;
      shifted.terms.reserve(a.size());
      for (const auto& [mm, cc] : a.terms) {
        if (mm.exp(nd.origin) >= kMaxExponent)
          throw Error(ErrorKind::CapExceeded, "polynomial exponent exceeds 255");
        shifted.terms.emplace(mm + m, cc);
      }
      a = std::move(shifted);
    }
    z[i].z1 = std::move(a);
    z[i].z0 = std::move(b);
  }
  return {std::move(z[t.root].z1), std::move(z[t.root].z0)};
}

double degree_box(const SawTree& t, int skip) {
  double b = 1;
  for (int v = 0; v < t.graph_n; ++v)
    if (v != skip) b *= static_cast<double>(t.copies[v].size() + 1);
  return b;
}

}  // namespace

MultiPoly poly_partition(const Graph& g, const SpinParams& p, const Boundary& bc, int cap) {
  p.validate(g.n);
  validate_boundary(g, bc);
  auto [one, zero] = graph_split<Rat>(g, bc, -1, rational_weights(p), cap, nullptr);
  return zero;
}

MultiPoly poly_partition(const SawTree& t, const SpinParams& p, int cap) {
  if (t.free_count() > cap)
    throw Error(ErrorKind::CapExceeded, std::to_string(t.free_count()) +
                                            " free tree nodes exceeds cap " + std::to_string(cap));
  if (t.graph_n > kMaxVars) throw Error(ErrorKind::CapExceeded, "too many polynomial variables");
  auto [x, y] = tree_split<Rat>(t, rational_weights(p));
  int r = t.nodes[t.root].origin;
  return x * MultiPoly::variable(r) + y;
}

// ---- divisibility ----

namespace {

using UPoly = std::vector<mpz_class>;  // dense, index = power of t

UPoly umul(const UPoly& a, const UPoly& b) {
  if (a.empty() || b.empty()) return {};
  UPoly r(a.size() + b.size() - 1, mpz_class(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

UPoly ucomb(const UPoly& a, const mpz_class& x, const UPoly& b, const mpz_class& y) {
  UPoly r(std::max(a.size(), b.size()), mpz_class(0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i] * x;
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i] * y;
  return r;
}

void utrim(UPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

// fields: value per vertex, with vertex u replaced by the variable t
std::pair<UPoly, UPoly> tree_split_line(const SawTree& t, const EdgeW<mpz_class>& W,
                                        const std::vector<mpz_class>& field, int u) {
  const int N = static_cast<int>(t.nodes.size());
  std::vector<UPoly> z1(N), z0(N);
  for (int i = N - 1; i >= 0; --i) {
    const auto& nd = t.nodes[i];
    if (nd.fixed_spin) continue;
    UPoly a{mpz_class(1)}, b{mpz_class(1)};
    for (int c : nd.children) {
      const auto& ch = t.nodes[c];
      if (ch.fixed_spin) {
        for (auto& x : a) x *= W.w(1, *ch.fixed_spin);
        for (auto& x : b) x *= W.w(0, *ch.fixed_spin);
        continue;
      }
      a = umul(a, ucomb(z1[c], W.w11, z0[c], W.w10));
      b = umul(b, ucomb(z1[c], W.w10, z0[c], W.w00));
      z1[c].clear();
      z0[c].clear();
    }
    if (i != t.root) {
      if (nd.origin == u) a.insert(a.begin(), mpz_class(0));
      else
        for (auto& x : a) x *= field[nd.origin];
    }
    utrim(a);
    utrim(b);
    z1[i] = std::move(a);
    z0[i] = std::move(b);
  }
  return {std::move(z1[t.root]), std::move(z0[t.root])};
}

std::pair<UPoly, UPoly> graph_split_line(const Graph& g, const Boundary& bc, int r,
                                         const EdgeW<mpz_class>& W,
                                         const std::vector<mpz_class>& field, int u) {
  auto fv = free_vertices(g, bc);
  const int k = static_cast<int>(fv.size());
  std::vector<int> spin(g.n, 0), idx(g.n, -1);
  for (auto [v, s] : bc) spin[v] = s;
  for (int i = 0; i < k; ++i) idx[fv[i]] = i;
  std::vector<std::pair<int, int>> es;
  for (auto [a, b] : g.edges())
    if (idx[a] >= 0 || idx[b] >= 0) es.emplace_back(a, b);
  UPoly one(2, mpz_class(0)), zero(2, mpz_class(0));
  mpz_class w;
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << k); ++s) {
    for (int i = 0; i < k; ++i) spin[fv[i]] = s >> i & 1;
    w = 1;
    for (auto [a, b] : es) w *= W.w(spin[a], spin[b]);
    if (w == 0) continue;
    int power = 0;
    for (int i = 0; i < k; ++i)
      if ((s >> i & 1) && fv[i] != r) {
        if (fv[i] == u) power = 1;
        else w *= field[fv[i]];
      }
    (spin[r] ? one : zero)[power] += w;
  }
  utrim(one);
  utrim(zero);
  return {one, zero};
}

// exact quotient of a by b (b nonzero) over Q; empty optional when not divisible
std::optional<std::vector<Rat>> udiv_exact(const UPoly& a, const UPoly& b) {
  if (a.empty()) return std::vector<Rat>{};
  if (a.size() < b.size()) return std::nullopt;
  std::vector<Rat> rem(a.begin(), a.end());
  std::vector<Rat> q(a.size() - b.size() + 1);
  const Rat lc(b.back());
  for (std::size_t i = q.size(); i-- > 0;) {
    q[i] = rem[i + b.size() - 1] / lc;
    if (q[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) rem[i + j] -= q[i] * b[j];
  }
  for (const auto& x : rem)
    if (x != 0) return std::nullopt;
  return q;
}

}  // namespace

namespace {

// Polynomials over a fixed degree box, stored as (mixed-radix index, coefficient).
// Index arithmetic is exact while exponent sums stay inside the box.
struct BoxSpace {
  std::vector<int> vars;            // most significant first
  std::vector<int> radix;           // degree + 1
  std::vector<std::uint64_t> stride;
  std::vector<int> slot;            // vertex -> position in vars, -1 if absent
  std::uint64_t size = 1;

  BoxSpace(const std::vector<int>& vs, const std::vector<int>& deg, int n)
      : vars(vs), slot(n, -1) {
    radix.resize(vars.size());
    stride.resize(vars.size());
    for (std::size_t i = vars.size(); i-- > 0;) {
      radix[i] = deg[vars[i]] + 1;
      stride[i] = size;
      size *= static_cast<std::uint64_t>(radix[i]);
      slot[vars[i]] = static_cast<int>(i);
    }
  }
  int digit(std::uint64_t idx, std::size_t i) const {
    return static_cast<int>(idx / stride[i] % static_cast<std::uint64_t>(radix[i]));
  }
};

using Sparse = std::vector<std::pair<std::uint64_t, mpz_class>>;

// scratch accumulator reused across products
struct Accum {
  std::vector<mpz_class> cell;
  std::vector<std::uint8_t> hit;
  std::vector<std::uint64_t> touched;
  explicit Accum(std::uint64_t n) : cell(n), hit(n, 0) {}
  mpz_class& at(std::uint64_t i) {
    if (!hit[i]) {
      hit[i] = 1;
      touched.push_back(i);
      cell[i] = 0;
    }
    return cell[i];
  }
  Sparse drain() {
    Sparse out;
    out.reserve(touched.size());
    for (auto i : touched) {
      hit[i] = 0;
      if (cell[i] != 0) out.emplace_back(i, std::move(cell[i]));
    }
    touched.clear();
    return out;
  }
};

Sparse smul(const Sparse& a, const Sparse& b, Accum& acc) {
  for (const auto& [ia, ca] : a)
    for (const auto& [ib, cb] : b) mpz_addmul(acc.at(ia + ib).get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
  return acc.drain();
}

Sparse scomb(const Sparse& a, const mpz_class& x, const Sparse& b, const mpz_class& y, Accum& acc) {
  for (const auto& [i, c] : a) mpz_addmul(acc.at(i).get_mpz_t(), c.get_mpz_t(), x.get_mpz_t());
  for (const auto& [i, c] : b) mpz_addmul(acc.at(i).get_mpz_t(), c.get_mpz_t(), y.get_mpz_t());
  return acc.drain();
}

std::pair<Sparse, Sparse> tree_split_box(const SawTree& t, const EdgeW<mpz_class>& W,
                                         const BoxSpace& box, Accum& acc) {
  const int N = static_cast<int>(t.nodes.size());
  std::vector<Sparse> z1(N), z0(N);
  for (int i = N - 1; i >= 0; --i) {
    const auto& nd = t.nodes[i];
    if (nd.fixed_spin) continue;
    Sparse a{{0, mpz_class(1)}}, b{{0, mpz_class(1)}};
    mpz_class ca = 1, cb = 1;
    for (int c : nd.children) {
      const auto& ch = t.nodes[c];
      if (ch.fixed_spin) {
        ca *= W.w(1, *ch.fixed_spin);
        cb *= W.w(0, *ch.fixed_spin);
        continue;
      }
      Sparse fa = scomb(z1[c], W.w11, z0[c], W.w10, acc);
      Sparse fb = scomb(z1[c], W.w10, z0[c], W.w00, acc);
      a = a.size() == 1 && a[0].first == 0 && a[0].second == 1 ? std::move(fa) : smul(a, fa, acc);
      b = b.size() == 1 && b[0].first == 0 && b[0].second == 1 ? std::move(fb) : smul(b, fb, acc);
      Sparse().swap(z1[c]);
      Sparse().swap(z0[c]);
    }
    if (ca != 1)
      for (auto& [k, x] : a) x *= ca;
    if (cb != 1)
      for (auto& [k, x] : b) x *= cb;
    if (i != t.root) {
      const std::uint64_t sh = box.stride[box.slot[nd.origin]];
      for (auto& [k, x] : a) k += sh;
    }
    z1[i] = std::move(a);
    z0[i] = std::move(b);
  }
  return {std::move(z1[t.root]), std::move(z0[t.root])};
}

std::pair<Sparse, Sparse> graph_split_box(const Graph& g, const Boundary& bc, int r,
                                          const EdgeW<mpz_class>& W, const BoxSpace& box,
                                          int* edges_counted) {
  auto fv = free_vertices(g, bc);
  const int k = static_cast<int>(fv.size());
  std::vector<int> spin(g.n, 0), idx(g.n, -1);
  for (auto [v, s] : bc) spin[v] = s;
  for (int i = 0; i < k; ++i) idx[fv[i]] = i;
  std::vector<std::pair<int, int>> es;
  for (auto [a, b] : g.edges())
    if (idx[a] >= 0 || idx[b] >= 0) es.emplace_back(a, b);
  *edges_counted = static_cast<int>(es.size());
  Sparse one, zero;
  mpz_class w;
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << k); ++s) {
    for (int i = 0; i < k; ++i) spin[fv[i]] = s >> i & 1;
    w = 1;
    for (auto [a, b] : es) {
      w *= W.w(spin[a], spin[b]);
      if (w == 0) break;
    }
    if (w == 0) continue;
    std::uint64_t key = 0;
    for (int i = 0; i < k; ++i)
      if ((s >> i & 1) && fv[i] != r) key += box.stride[box.slot[fv[i]]];
    (spin[r] ? one : zero).emplace_back(key, w);
  }
  return {one, zero};
}

// Dense lex division X / A over the box; the quotient is integral on the fast path and
// falls back to rationals otherwise. Empty optional: not divisible.
std::optional<std::vector<std::pair<std::uint64_t, Rat>>> box_divide(const Sparse& X,
                                                                      Sparse A,
                                                                      const BoxSpace& box) {
  const std::size_t nv = box.vars.size();
  std::sort(A.begin(), A.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  // lex descending equals index descending when every digit stays below its radix
  std::vector<int> degA(nv, 0), lead(nv);
  for (const auto& [k, c] : A)
    for (std::size_t i = 0; i < nv; ++i) degA[i] = std::max(degA[i], box.digit(k, i));
  for (std::size_t i = 0; i < nv; ++i) lead[i] = box.digit(A[0].first, i);
  const std::uint64_t lead_key = A[0].first;
  std::vector<Rat> R(box.size);
  for (const auto& [k, c] : X) R[k] = c;
  const Rat lc(A[0].second);
  std::vector<std::pair<std::uint64_t, Rat>> Q;
  Rat q;
  for (std::uint64_t i = box.size; i-- > 0;) {
    if (R[i] == 0) continue;
    for (std::size_t v = 0; v < nv; ++v) {
      int e = box.digit(i, v) - lead[v];
      if (e < 0 || e + degA[v] >= box.radix[v]) return std::nullopt;
    }
    const std::uint64_t qk = i - lead_key;
    q = R[i] / lc;
    for (const auto& [k, c] : A) R[qk + k] -= q * c;
    Q.emplace_back(qk, q);
  }
  return Q;
}

// integer fast path of box_divide; empty optional when some step is not integral
std::optional<Sparse> box_divide_int(const Sparse& X, Sparse A, const BoxSpace& box,
                                     bool* divisible) {
  const std::size_t nv = box.vars.size();
  std::sort(A.begin(), A.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<int> degA(nv, 0), lead(nv);
  for (const auto& [k, c] : A)
    for (std::size_t i = 0; i < nv; ++i) degA[i] = std::max(degA[i], box.digit(k, i));
  for (std::size_t i = 0; i < nv; ++i) lead[i] = box.digit(A[0].first, i);
  const std::uint64_t lead_key = A[0].first;
  std::vector<mpz_class> R(box.size);
  for (const auto& [k, c] : X) R[k] = c;
  const mpz_class& lc = A[0].second;
  Sparse Q;
  mpz_class q;
  *divisible = true;
  for (std::uint64_t i = box.size; i-- > 0;) {
    if (R[i] == 0) continue;
    for (std::size_t v = 0; v < nv; ++v) {
      int e = box.digit(i, v) - lead[v];
      if (e < 0 || e + degA[v] >= box.radix[v]) {
        *divisible = false;
        return std::nullopt;
      }
    }
    if (!mpz_divisible_p(R[i].get_mpz_t(), lc.get_mpz_t())) return std::nullopt;
    mpz_divexact(q.get_mpz_t(), R[i].get_mpz_t(), lc.get_mpz_t());
    const std::uint64_t qk = i - lead_key;
    for (const auto& [k, c] : A) mpz_submul(R[qk + k].get_mpz_t(), q.get_mpz_t(), c.get_mpz_t());
    Q.emplace_back(qk, q);
  }
  return Q;
}

MultiPoly box_to_poly(const std::vector<std::pair<std::uint64_t, Rat>>& terms, const BoxSpace& box,
                      const Rat& scale) {
  MultiPoly p;
  p.terms.reserve(terms.size());
  for (const auto& [k, c] : terms) {
    Mono m;
    for (std::size_t i = 0; i < box.vars.size(); ++i) m.set(box.vars[i], box.digit(k, i));
    p.terms.emplace(m, c * scale);
  }
  return p;
}

}  // namespace

DivisibilityReport verify_divisibility(const Graph& g, const SpinParams& p, int r,
                                       const Boundary& bc, const DivisibilityOptions& opt) {
  p.validate(g.n);
  if (g.n > kMaxVars) throw Error(ErrorKind::CapExceeded, "too many polynomial variables");
  ConditionedSawTree ct = build_conditioned_saw(g, r, bc);  // checks connectivity
  const SawTree& T = ct.tree;
  DivisibilityReport rep;
  rep.tree_nodes = T.size();
  rep.monomial_box = degree_box(T, r);
  const auto W = integer_weights(p);
  const mpz_class s = p.beta.get_den() * p.gamma.get_den();
  int eg = 0;
  const int et = static_cast<int>(T.size()) - 1;
  std::vector<int> vars, deg(g.n, 0);
  int max_copies = 0;
  for (int v = 0; v < g.n; ++v) {
    deg[v] = static_cast<int>(T.copies[v].size());
    max_copies = std::max(max_copies, deg[v]);
    if (v != r && deg[v] > 0) vars.push_back(v);
  }
  // only the root node carries lambda_r, so Z_T is affine in lambda_r
  rep.root_degree_one = deg[r] == 1;
  const bool fits = rep.monomial_box <= opt.monomial_budget && max_copies <= kMaxExponent;

  if (fits) {
    BoxSpace box(vars, deg, g.n);
    Accum acc(box.size);
    auto [X, Y] = tree_split_box(T, W, box, acc);
    auto [A, B] = graph_split_box(g, bc, r, W, box, &eg);
    // a root forced to 0 by a pinned neighbour: divide the r=0 halves instead, and the
    // cross identity then demands that Z_T(r=1) vanish too
    if (A.empty()) {
      if (B.empty()) throw Error(ErrorKind::ZeroPartition, "Z_G vanishes");
      std::swap(A, B);
      std::swap(X, Y);
    }
    rep.root_degree_one = rep.root_degree_one && !X.empty();
    std::vector<std::pair<std::uint64_t, Rat>> P;
    bool divisible = true;
    auto Pi = box_divide_int(X, A, box, &divisible);
    if (Pi) {
      // given X = A P with A != 0, the cross identity X B = Y A reduces to Y = B P
      for (const auto& [k, c] : Y) acc.at(k) = c;
      for (const auto& [kb, cb] : B)
        for (const auto& [kp, cp] : *Pi)
          mpz_submul(acc.at(kb + kp).get_mpz_t(), cb.get_mpz_t(), cp.get_mpz_t());
      rep.cross_identity = acc.drain().empty();
      if (opt.keep_quotient)
        for (auto& [k, c] : *Pi) P.emplace_back(k, Rat(c));
    } else if (divisible) {
      auto Pr = box_divide(X, A, box);
      if (Pr) {
        P = std::move(*Pr);
        std::unordered_map<std::uint64_t, Rat> diff;
        for (const auto& [k, c] : Y) diff[k] += Rat(c);
        for (const auto& [kb, cb] : B)
          for (const auto& [kp, cp] : P) diff[kb + kp] -= cp * cb;
        rep.cross_identity = std::all_of(diff.begin(), diff.end(),
                                         [](const auto& e) { return e.second == 0; });
      } else {
        divisible = false;
      }
    }
    rep.remainder_zero = divisible;
    if (divisible) {
      // r is not a box variable, so P cannot involve lambda_r
      rep.root_independent = box.slot[r] < 0;
      mpz_class sp;
      mpz_pow_ui(sp.get_mpz_t(), s.get_mpz_t(), static_cast<unsigned long>(std::abs(eg - et)));
      rep.quotient = box_to_poly(P, box, eg >= et ? Rat(sp) : Rat(mpz_class(1), sp));
    }
  } else {
    if (!opt.allow_lines)
      throw Error(ErrorKind::CapExceeded, "SAW polynomial exceeds the monomial budget");
    rep.full = false;
    CounterRng rng(opt.seed ^ (std::uint64_t(r) << 32));
    rep.remainder_zero = rep.cross_identity = rep.root_independent = true;
    for (int line = 0; line < opt.lines; ++line) {
      for (int u : vars) {
        std::vector<mpz_class> field(g.n);
        for (int v = 0; v < g.n; ++v) field[v] = 1 + static_cast<long>(rng.below(9));
        auto [X, Y] = tree_split_line(T, W, field, u);
        auto [A, B] = graph_split_line(g, bc, r, W, field, u);
        if (A.empty()) {
          if (B.empty()) throw Error(ErrorKind::ZeroPartition, "Z_G vanishes");
          std::swap(A, B);
          std::swap(X, Y);
        }
        auto P1 = udiv_exact(X, A);
        if (!P1) {
          rep.remainder_zero = false;
        } else if (B.empty()) {
          rep.cross_identity = rep.cross_identity && Y.empty();
        } else {
          auto P0 = udiv_exact(Y, B);
          rep.cross_identity = rep.cross_identity && P0 && *P0 == *P1;
        }
        ++rep.lines_checked;
      }
    }
  }
  if (!rep.remainder_zero || !rep.cross_identity)
    throw Error(ErrorKind::NotDivisible, rep.remainder_zero ? "cross identity fails"
                                                            : "Z_G(r=1) does not divide Z_T(r=1)");
  return rep;
}

}  // namespace spinlab
