#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "spinlab/model.hpp"
#include "spinlab/saw.hpp"

namespace spinlab {

constexpr int kMaxVars = 24;
constexpr int kMaxExponent = 255;
constexpr int kPolyFreeCap = 20;

// Exponent vector packed 8 bits per variable; adding monomials is word addition.
struct Mono {
  std::array<std::uint64_t, 3> w{};
  int exp(int v) const { return static_cast<int>(w[v >> 3] >> ((v & 7) * 8) & 0xff); }
  void set(int v, int e) {
    const int s = (v & 7) * 8;
    w[v >> 3] = (w[v >> 3] & ~(0xffULL << s)) | (std::uint64_t(e) << s);
  }
  Mono operator+(const Mono& o) const {
    return Mono{{w[0] + o.w[0], w[1] + o.w[1], w[2] + o.w[2]}};
  }
  bool operator==(const Mono& o) const { return w == o.w; }
  bool is_one() const { return !(w[0] | w[1] | w[2]); }
};

struct MonoHash {
  std::size_t operator()(const Mono& m) const {
    std::uint64_t h = m.w[0] * 0x9e3779b97f4a7c15ULL;
    h ^= (m.w[1] + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2));
    h ^= (m.w[2] * 0xbf58476d1ce4e5b9ULL + (h << 6) + (h >> 2));
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Sparse multivariate polynomial; C is mpq_class or mpz_class.
template <class C>
class PolyT {
 public:
  using Map = std::unordered_map<Mono, C, MonoHash>;
  Map terms;

  PolyT() = default;
  static PolyT constant(const C& c);
  static PolyT variable(int v);

  bool is_zero() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }
  int degree(int v) const;
  std::array<int, kMaxVars> degrees() const;
  void add_term(const Mono& m, const C& c);

  PolyT operator+(const PolyT& o) const;
  PolyT operator-(const PolyT& o) const;
  PolyT operator*(const PolyT& o) const;
  PolyT scaled(const C& c) const;
  bool operator==(const PolyT& o) const;
};

using MultiPoly = PolyT<Rat>;
using IntPoly = PolyT<mpz_class>;

MultiPoly to_rational(const IntPoly& p, const Rat& scale = Rat(1));
Rat poly_eval(const MultiPoly& p, const std::vector<Rat>& values);
// terms sorted by exponent vector (lexicographic on variables 0,1,2,...)
std::vector<std::pair<Mono, Rat>> canonical_terms(const MultiPoly& p);
nlohmann::json poly_to_json(const MultiPoly& p, int nvars);
std::string poly_to_string(const MultiPoly& p, int nvars);

// Z_G with per-vertex field variables lambda_v (variable index = vertex).
MultiPoly poly_partition(const Graph& g, const SpinParams& p, const Boundary& bc = {},
                         int cap = kPolyFreeCap);
// Z_T for a SAW tree; copies of v share the variable lambda_v.
MultiPoly poly_partition(const SawTree& t, const SpinParams& p, int cap = kPolyFreeCap);

// Lex division with the given variable priority (first = most significant).
// Default priority: ascending index with `last_var` moved to the end.
MultiPoly poly_div_exact(const MultiPoly& A, const MultiPoly& B,
                         const std::vector<int>& priority);
MultiPoly poly_div_exact(const MultiPoly& A, const MultiPoly& B, int nvars, int last_var = -1);

struct DivisibilityReport {
  MultiPoly quotient;
  bool remainder_zero = false;   // Z_T(r=1) = Z_G(r=1) P (the r=0 halves when r is forced to 0)
  bool cross_identity = false;   // Z_T(r=1) Z_G(r=0) = Z_T(r=0) Z_G(r=1)
  bool root_independent = false; // no lambda_r in P
  bool root_degree_one = false;  // lambda_r has degree 1 in Z_T
  bool full = true;              // false: checked on random lines only (tree too large)
  int lines_checked = 0;
  std::size_t tree_nodes = 0;
  double monomial_box = 0;       // product over variables of (degree + 1)
  bool ok() const { return remainder_zero && cross_identity && root_independent && root_degree_one; }
};

struct DivisibilityOptions {
  // expand polynomials fully only while the degree box stays below this size
  double monomial_budget = 2.0e5;
  int lines = 3;                 // random lines when the budget is exceeded
  std::uint64_t seed = 1;
  bool allow_lines = true;       // otherwise throw CapExceeded above budget
  bool keep_quotient = true;     // sweeps skip materializing P
};

DivisibilityReport verify_divisibility(const Graph& g, const SpinParams& p, int r,
                                       const Boundary& bc = {},
                                       const DivisibilityOptions& opt = {});

}  // namespace spinlab
