#pragma once
#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "spinlab/model.hpp"

namespace spinlab {

constexpr int kEnumerationCap = 24;
constexpr int kProfileCap = 8;

// Rational that may be +infinity (a ratio with M = 1).
struct ExtRat {
  Rat value;
  bool infinite = false;
};

struct GibbsSummary {
  Rat Z;
  std::vector<int> free;      // free vertices, ascending
  std::vector<Rat> M;         // indexed like free
  std::vector<ExtRat> R;
  int index_of(int v) const;  // position of v in free, -1 if pinned
};

// Sums over configurations with weights scaled to integers by a common
// denominator. Every probability is a ratio of these sums.
struct Moments {
  std::vector<int> free;
  mpz_class Z;
  std::vector<mpz_class> S;   // S[i]   = sum of weights with spin 1 at free[i]
  std::vector<mpz_class> S2;  // S2[i*k+j] = sum with spin 1 at both (symmetric, diag = S)
  mpz_class denominator;      // true Z = Z / denominator
};

enum class MomentLevel { Partition = 0, Marginals = 1, Pairs = 2 };

Moments enumerate_moments(const Graph& g, const SpinParams& p, const Boundary& bc,
                          MomentLevel level, int cap = kEnumerationCap);
// single-threaded reference implementation of the same reduction
Moments enumerate_moments_serial(const Graph& g, const SpinParams& p, const Boundary& bc,
                                 MomentLevel level, int cap = kEnumerationCap);

// Floating-point counterpart (weights evaluated directly in long double).
struct MomentsF {
  std::vector<int> free;
  long double Z = 0;
  std::vector<long double> S, S2;
};
MomentsF enumerate_moments_f(const Graph& g, const std::vector<long double>& lambda,
                             long double beta, long double gamma, const Boundary& bc,
                             MomentLevel level, int cap = kEnumerationCap);

GibbsSummary gibbs_summary(const Graph& g, const SpinParams& p, const Boundary& bc = {},
                           int cap = kEnumerationCap);

struct InfluenceMatrix {
  std::vector<int> vertices;            // rows/cols: free vertices with 0 < M < 1
  std::vector<int> excluded;            // free vertices with deterministic marginal
  std::vector<std::vector<Rat>> exact;  // exact[i][j] = I(vertices[i] -> vertices[j])
  std::vector<Rat> self_cov;            // K(u,u) per row
  Eigen::MatrixXd values() const;
  int index_of(int v) const;
  const Rat& at(int u, int v) const;    // by vertex label
};

InfluenceMatrix influence_matrix(const Graph& g, const SpinParams& p, const Boundary& bc = {},
                                 int cap = kEnumerationCap);
InfluenceMatrix influence_matrix(const Moments& m);

// I(u -> v) for every free v (indexed like Moments::free); u given by free index,
// requires 0 < M(u) < 1
std::vector<Rat> influence_row(const Moments& m, int u_index);

Rat covariance(const Graph& g, const SpinParams& p, const Boundary& bc, int u, int v);
// full covariance matrix over the free vertices (indexed like Moments::free)
std::vector<std::vector<Rat>> covariance_matrix(const Moments& m);

struct DerivativeReport {
  double eps = 0;
  double dev_log_partition = 0;  // part 1: d log Z / d log lambda_v vs M(v)
  double dev_covariance = 0;     // part 2: d M(u) / d log lambda_v vs K(u,v)
  double dev_influence = 0;      // part 3: d log R(u) / d log lambda_v vs I(u->v)
  bool exact_identity = true;    // I(u->v) K(u,u) == K(u,v) in rationals
  int degenerate_rows = 0;       // rows with K(u,u) = 0, skipped in part 3
  double tolerance = 0;          // 10 eps^2
  bool passed() const;
};

// strict: throw DegenerateRow instead of skipping rows with K(u,u) = 0
DerivativeReport derivative_identity_check(const Graph& g, const SpinParams& p,
                                           const Boundary& bc = {}, double eps = 1e-5,
                                           bool strict = false);

// largest eigenvalue via the symmetric similarity D^{1/2} I D^{-1/2}
double influence_lambda_max(const InfluenceMatrix& I);
// general (nonsymmetric) eigensolve: returns (largest real part, max |imag part|)
std::pair<double, double> influence_eigen_general(const InfluenceMatrix& I);

struct SpectralIndependenceProfile {
  std::vector<double> eta;  // eta[k], k = 0..n-2
  std::vector<Boundary> witness;
  long pinnings_evaluated = 0;
};

SpectralIndependenceProfile spectral_independence_profile(const Graph& g, const SpinParams& p,
                                                          int cap = kProfileCap);
SpectralIndependenceProfile spectral_independence_profile_serial(const Graph& g,
                                                                 const SpinParams& p,
                                                                 int cap = kProfileCap);

}  // namespace spinlab
