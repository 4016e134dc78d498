#pragma once
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spinlab/model.hpp"
#include "spinlab/potential.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

constexpr int kChainCap = 12;  // free vertices for exact chain analysis

// Spins of all n vertices; pinned vertices carry their boundary spin.
struct ChainState {
  std::vector<std::uint8_t> spins;
};

ChainState boundary_state(const Graph& g, const Boundary& bc, int fill);
// free vertices set to 1 in ascending order whenever the weight stays positive
ChainState greedy_one_state(const Graph& g, const SpinParams& p, const Boundary& bc);

// probability that v takes spin 1 given its neighbours
double heat_bath_prob(const ChainState& s, const Graph& g, const SpinParams& p, int v);
// one heat-bath update at a uniformly random free vertex (listed in free_list)
void glauber_step(ChainState& s, const Graph& g, const SpinParams& p,
                  const std::vector<int>& free_list, CounterRng& rng);

struct SpectralReport {
  std::vector<int> free;               // bit i of a state is free[i]
  std::vector<std::uint32_t> states;   // feasible states, ascending
  std::vector<double> mu;
  Eigen::MatrixXd P;
  std::vector<double> eigenvalues;     // descending
  double gap = 0;                      // 1 - lambda_2
  double abs_gap = 0;                  // 1 - max(|lambda_2|, |lambda_min|)
  double min_eigenvalue = 0;
  bool psd = false;                    // min eigenvalue >= -1e-10
  double reversibility_residual = 0;
  bool irreducible = true;
  double min_mu = 0;
  long t_mix_exact = -1;               // -1 when not computed
  double t_mix_bound = 0;              // (1/abs_gap) log(4 / min mu)
  int index_of(std::uint32_t state) const;
};

struct ChainOptions {
  bool compute_t_mix = true;
  int cap = kChainCap;
};

SpectralReport transition_matrix(const Graph& g, const SpinParams& p, const Boundary& bc = {},
                                 const ChainOptions& opt = {});
// rows assembled sequentially; reference for the parallel path
SpectralReport transition_matrix_serial(const Graph& g, const SpinParams& p,
                                        const Boundary& bc = {}, const ChainOptions& opt = {});

// max over starts of the TV distance of P^t(x, .) from mu
double worst_tv(const SpectralReport& r, const Eigen::MatrixXd& Pt);
// least t with worst_tv(P^t) <= 1/4, by doubling then bisection over stored powers
long exact_mixing_time(const SpectralReport& r, long t_cap = 1L << 40);

// (1/n) prod_{i=0}^{n-2} (1 - eta_i/(n-i-1)); a nonpositive factor gives 0
double alo_gap_bound(const std::vector<double>& eta, int n);
Rat alo_gap_bound_exact(const std::vector<Rat>& eta, int n);

// Two-phase product with threshold c = 1 - a/(bn): factors 1 - a/(n-k-1) for
// k = 0..K where K = floor(cn), then (1 - b) for each of the remaining n-2-K steps.
// Throws InvalidThreshold when bn < a.
Rat capped_gap_bound_exact(const Rat& a, const Rat& b, int n);
double capped_gap_bound(double a, double b, int n);

// (1-C)^{2 ceil(q) - 1} e^{-q^2} n^{-(1+q)} with q = c/alpha
double asymptotic_gap_floor(double q, double C, int n);

struct EndToEndReport {
  std::vector<double> eta;
  std::vector<double> eta_cap;     // min{q, C (n-i-1)}
  double q = 0;                    // c/alpha, or 2c/alpha for a general-mode certificate
  double C = 0;
  double alo = 0;
  double gap = 0;
  long t_mix = 0;
  double t_mix_bound = 0;
  double reversibility_residual = 0;
  double min_eigenvalue = 0;
  bool eta_within_q = true;        // eta_i <= q
  bool eta_within_cap = true;      // eta_i <= min{q, C(n-i-1)}
  bool gap_ok = false, t_mix_ok = false, reversible = false, psd = false;
  bool ok() const { return eta_within_cap && gap_ok && t_mix_ok && reversible && psd; }
};

EndToEndReport end_to_end_check(const Graph& g, const SpinParams& p,
                                const PotentialCertificate& cert);

struct MixingTracePoint {
  int start = 0;  // 0: all-zero start, 1: greedy all-one start
  long t = 0;
  double tv_exact = 0;
  double tv_empirical = 0;
  double ci = 0;  // 3-sigma half width of the empirical TV
};

std::vector<MixingTracePoint> simulate_mixing(const Graph& g, const SpinParams& p,
                                              const Boundary& bc, long t_max, long reps,
                                              std::uint64_t seed);

// raw state counts at time t from start, one chain per replica; used for stationarity tests
std::vector<long> sample_histogram(const Graph& g, const SpinParams& p, const Boundary& bc,
                                   const SpectralReport& r, int start, long t, long reps,
                                   std::uint64_t seed);

nlohmann::json spectral_to_json(const SpectralReport& r);

}  // namespace spinlab
