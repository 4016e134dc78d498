#include "spinlab/glauber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "spinlab/errors.hpp"
#include "spinlab/gibbs.hpp"

namespace spinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint32_t encode(const ChainState& s, const std::vector<int>& free) {
  std::uint32_t x = 0;
  for (std::size_t i = 0; i < free.size(); ++i)
    if (s.spins[free[i]]) x |= 1u << i;
  return x;
}

Configuration decode(std::uint32_t x, std::size_t k) {
  Configuration c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = (x >> i) & 1u;
  return c;
}
}  // namespace

ChainState boundary_state(const Graph& g, const Boundary& bc, int fill) {
  ChainState s;
  s.spins.assign(g.n, static_cast<std::uint8_t>(fill ? 1 : 0));
  for (auto [v, sp] : bc) s.spins[v] = static_cast<std::uint8_t>(sp);
  return s;
}

ChainState greedy_one_state(const Graph& g, const SpinParams& p, const Boundary& bc) {
  ChainState s = boundary_state(g, bc, 0);
  for (int v : free_vertices(g, bc)) {
    bool ok = true;
    if (p.beta == 0)
      for (int u : g.adj[v])
        if (s.spins[u]) ok = false;
    if (ok) s.spins[v] = 1;
  }
  return s;
}

double heat_bath_prob(const ChainState& s, const Graph& g, const SpinParams& p, int v) {
  int n1 = 0, n0 = 0;
  for (int u : g.adj[v]) (s.spins[u] ? n1 : n0)++;
  long double b = to_long_double(p.beta), gm = to_long_double(p.gamma);
  long double w1 = to_long_double(p.lambda[v]) * std::pow(b, n1);
  long double w0 = std::pow(gm, n0);
  if (n1 == 0) w1 = to_long_double(p.lambda[v]);  // 0^0 = 1 for the hardcore case
  return static_cast<double>(w1 / (w1 + w0));
}

void glauber_step(ChainState& s, const Graph& g, const SpinParams& p,
                  const std::vector<int>& free_list, CounterRng& rng) {
  if (free_list.empty()) return;
  int v = free_list[rng.below(free_list.size())];
  double q = heat_bath_prob(s, g, p, v);
  s.spins[v] = rng.uniform() < q ? 1 : 0;
}

int SpectralReport::index_of(std::uint32_t state) const {
  auto it = std::lower_bound(states.begin(), states.end(), state);
  if (it == states.end() || *it != state) return -1;
  return static_cast<int>(it - states.begin());
}

double worst_tv(const SpectralReport& r, const Eigen::MatrixXd& Pt) {
  double worst = 0;
  for (Eigen::Index i = 0; i < Pt.rows(); ++i) {
    double tv = 0;
    for (Eigen::Index j = 0; j < Pt.cols(); ++j) tv += std::abs(Pt(i, j) - r.mu[j]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

long exact_mixing_time(const SpectralReport& r, long t_cap) {
  const Eigen::Index N = r.P.rows();
  if (N == 0) return 0;
  if (worst_tv(r, Eigen::MatrixXd::Identity(N, N)) <= 0.25) return 0;
  // powers[j] = P^{2^j}
  std::vector<Eigen::MatrixXd> powers{r.P};
  while (worst_tv(r, powers.back()) > 0.25) {
    if ((1L << powers.size()) > t_cap) return -1;
    powers.push_back(powers.back() * powers.back());
  }
  // largest t with d(t) > 1/4, built greedily from high bits
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
  long t = 0;
  for (int j = static_cast<int>(powers.size()) - 1; j >= 0; --j) {
    Eigen::MatrixXd cand = M * powers[j];
    if (worst_tv(r, cand) > 0.25) {
      M = std::move(cand);
      t += 1L << j;
    }
  }
  return t + 1;
}

namespace {

SpectralReport chain_impl(const Graph& g, const SpinParams& p, const Boundary& bc,
                          const ChainOptions& opt, bool parallel) {
  p.validate(g.n);
  validate_boundary(g, bc);
  SpectralReport r;
  r.free = free_vertices(g, bc);
  const std::size_t k = r.free.size();
  if (static_cast<int>(k) > opt.cap)
    throw Error(ErrorKind::CapExceeded, std::to_string(k) + " free vertices exceed the chain cap " +
                                            std::to_string(opt.cap));
  const std::uint32_t total = 1u << k;
  std::vector<Rat> all_w(total);
  Rat Z = 0;
  for (std::uint32_t x = 0; x < total; ++x) {
    all_w[x] = config_weight(g, p, bc, decode(x, k));
    Z += all_w[x];
  }
  if (Z == 0) throw Error(ErrorKind::ZeroPartition, "no configuration has positive weight");
  std::vector<Rat> w;
  for (std::uint32_t x = 0; x < total; ++x)
    if (all_w[x] > 0) {
      r.states.push_back(x);
      w.push_back(all_w[x]);
      r.mu.push_back(to_double(all_w[x] / Z));
    }
  const int N = static_cast<int>(r.states.size());
  r.min_mu = *std::min_element(r.mu.begin(), r.mu.end());
  r.P = Eigen::MatrixXd::Zero(N, N);
  const double inv_k = k ? 1.0 / k : 0;
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < N; ++i) {
    double stay = 1;
    for (std::size_t b = 0; b < k; ++b) {
      int j = r.index_of(r.states[i] ^ (1u << b));
      if (j < 0) continue;
      Rat q = w[j] / (w[i] + w[j]);
      double pij = inv_k * to_double(q);
      r.P(i, j) = pij;
      stay -= pij;
    }
    r.P(i, i) = stay;
  }
  // reversibility and the symmetrized matrix
  Eigen::MatrixXd S(N, N);
  double res = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      res = std::max(res, std::abs(r.mu[i] * r.P(i, j) - r.mu[j] * r.P(j, i)));
      S(i, j) = std::sqrt(r.mu[i] / r.mu[j]) * r.P(i, j);
    }
  r.reversibility_residual = res;
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  for (int i = N - 1; i >= 0; --i) r.eigenvalues.push_back(es.eigenvalues()(i));
  r.min_eigenvalue = r.eigenvalues.back();
  r.psd = r.min_eigenvalue >= -1e-10;
  double l2 = N > 1 ? r.eigenvalues[1] : 0;
  r.gap = 1 - l2;
  r.abs_gap = 1 - std::max(std::abs(l2), N > 1 ? std::abs(r.min_eigenvalue) : 0.0);
  // irreducibility over the feasible states
  std::vector<char> seen(N, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < N; ++j)
      if (!seen[j] && r.P(i, j) > 0) seen[j] = 1, stack.push_back(j);
  }
  r.irreducible = std::all_of(seen.begin(), seen.end(), [](char c) { return c; });
  r.t_mix_bound = r.abs_gap > 0 ? std::log(4 / r.min_mu) / r.abs_gap : kInf;
  if (opt.compute_t_mix) r.t_mix_exact = exact_mixing_time(r);
  return r;
}

}  // namespace

SpectralReport transition_matrix(const Graph& g, const SpinParams& p, const Boundary& bc,
                                 const ChainOptions& opt) {
  return chain_impl(g, p, bc, opt, true);
}

SpectralReport transition_matrix_serial(const Graph& g, const SpinParams& p, const Boundary& bc,
                                        const ChainOptions& opt) {
  return chain_impl(g, p, bc, opt, false);
}

// ---------------------------------------------------------------- gap bounds

double alo_gap_bound(const std::vector<double>& eta, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidParams, "n must be positive");
  long double prod = 1.0L / n;
  for (int i = 0; i <= n - 2; ++i) {
    long double e = i < static_cast<int>(eta.size()) ? eta[i] : 0;
    long double f = 1 - e / (n - i - 1);
    if (f <= 0) return 0;
    prod *= f;
  }
  return static_cast<double>(prod);
}

Rat alo_gap_bound_exact(const std::vector<Rat>& eta, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidParams, "n must be positive");
  Rat prod(1, n);
  for (int i = 0; i <= n - 2; ++i) {
    Rat e = i < static_cast<int>(eta.size()) ? eta[i] : Rat(0);
    Rat f = 1 - e / (n - i - 1);
    if (f <= 0) return 0;
    prod *= f;
  }
  prod.canonicalize();
  return prod;
}

Rat capped_gap_bound_exact(const Rat& a, const Rat& b, int n) {
  if (n < 2) throw Error(ErrorKind::InvalidParams, "n must be at least 2");
  if (a < 0 || b < 0 || b > 1) throw Error(ErrorKind::InvalidParams, "need a >= 0 and 0 <= b <= 1");
  if (b * n < a) throw Error(ErrorKind::InvalidThreshold, "bn < a: no threshold in [0, 1]");
  if (a == 0) return Rat(1, n);
  Rat cn = n - a / b;  // c n with c = 1 - a/(bn)
  mpz_class K;
  mpz_fdiv_q(K.get_mpz_t(), cn.get_num_mpz_t(), cn.get_den_mpz_t());
  long Kl = std::min<long>(K.get_si(), n - 2);
  Rat prod(1, n);
  for (long k = 0; k <= Kl; ++k) {
    Rat f = 1 - a / (n - k - 1);
    if (f <= 0) return 0;
    prod *= f;
  }
  for (long k = Kl + 1; k <= n - 2; ++k) prod *= (1 - b);
  prod.canonicalize();
  return prod;
}

double capped_gap_bound(double a, double b, int n) {
  return to_double(capped_gap_bound_exact(approx_rat(a, 1L << 40), approx_rat(b, 1L << 40), n));
}

double asymptotic_gap_floor(double q, double C, int n) {
  return std::pow(1 - C, 2 * std::ceil(q) - 1) * std::exp(-q * q) * std::pow(double(n), -(1 + q));
}

EndToEndReport end_to_end_check(const Graph& g, const SpinParams& p,
                                const PotentialCertificate& cert) {
  if (g.n > kProfileCap)
    throw Error(ErrorKind::CapExceeded, "end-to-end checks are limited to n <= 8");
  EndToEndReport rep;
  SpectralIndependenceProfile prof = spectral_independence_profile(g, p);
  rep.eta = prof.eta;
  SpectralReport sr = transition_matrix(g, p);
  const int n = g.n;
  rep.q = (cert.mode == BoundednessMode::General ? 2 * cert.c : cert.c) / cert.alpha;
  rep.C = pair_influence_cap(ScalarParams::from(p), cert.Delta);
  const double tol = 1e-9;
  for (int i = 0; i < static_cast<int>(rep.eta.size()); ++i) {
    double cap = std::min(rep.q, rep.C * (n - i - 1));
    rep.eta_cap.push_back(cap);
    if (rep.eta[i] > rep.q + tol) rep.eta_within_q = false;
    if (rep.eta[i] > cap + tol) rep.eta_within_cap = false;
  }
  rep.alo = alo_gap_bound(rep.eta, n);
  rep.gap = sr.gap;
  rep.gap_ok = sr.gap >= rep.alo - 1e-12;
  rep.t_mix = sr.t_mix_exact;
  rep.t_mix_bound = sr.t_mix_bound;
  rep.t_mix_ok = rep.t_mix >= 0 && rep.t_mix <= rep.t_mix_bound;
  rep.reversibility_residual = sr.reversibility_residual;
  rep.reversible = sr.reversibility_residual <= 1e-12;
  rep.min_eigenvalue = sr.min_eigenvalue;
  rep.psd = sr.psd;
  return rep;
}

// ---------------------------------------------------------------- simulation

namespace {

struct Replicas {
  std::vector<ChainState> state;
  std::vector<CounterRng> rng;
};

Replicas make_replicas(const ChainState& x0, long reps, std::uint64_t seed, int start) {
  Replicas R;
  R.state.assign(reps, x0);
  CounterRng base(seed);
  base = base.split(static_cast<std::uint64_t>(start) + 1);
  R.rng.reserve(reps);
  for (long i = 0; i < reps; ++i) R.rng.push_back(base.split(static_cast<std::uint64_t>(i)));
  return R;
}

// heat-bath probabilities indexed by [v][number of neighbours at spin 1]; same arithmetic as
// heat_bath_prob, computed once so the hot loop never touches rationals
struct HeatTable {
  std::vector<std::vector<double>> q;
  HeatTable(const Graph& g, const SpinParams& p, const std::vector<int>& free) : q(g.n) {
    for (int v : free) {
      int d = g.degree(v);
      ChainState s;
      s.spins.assign(g.n, 0);
      for (int k = 0; k <= d; ++k) {
        if (k > 0) s.spins[g.adj[v][k - 1]] = 1;
        q[v].push_back(heat_bath_prob(s, g, p, v));
      }
    }
  }
};

// runs every replica forward by `steps` updates
void advance(Replicas& R, const Graph& g, const HeatTable& H, const std::vector<int>& free,
             long steps = 1) {
  if (free.empty()) return;
  const long reps = static_cast<long>(R.state.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < reps; ++i) {
    auto& s = R.state[i].spins;
    auto& rng = R.rng[i];
    for (long k = 0; k < steps; ++k) {
      int v = free[rng.below(free.size())];
      int n1 = 0;
      for (int u : g.adj[v]) n1 += s[u];
      s[v] = rng.uniform() < H.q[v][n1] ? 1 : 0;
    }
  }
}

std::vector<long> histogram(const Replicas& R, const SpectralReport& r) {
  std::vector<long> h(r.states.size(), 0);
  for (const auto& s : R.state) {
    int j = r.index_of(encode(s, r.free));
    if (j >= 0) ++h[j];
  }
  return h;
}

ChainState start_state(int start, const Graph& g, const SpinParams& p, const Boundary& bc) {
  return start == 0 ? boundary_state(g, bc, 0) : greedy_one_state(g, p, bc);
}

}  // namespace

std::vector<long> sample_histogram(const Graph& g, const SpinParams& p, const Boundary& bc,
                                   const SpectralReport& r, int start, long t, long reps,
                                   std::uint64_t seed) {
  Replicas R = make_replicas(start_state(start, g, p, bc), reps, seed, start);
  advance(R, g, HeatTable(g, p, r.free), r.free, t);
  return histogram(R, r);
}

std::vector<MixingTracePoint> simulate_mixing(const Graph& g, const SpinParams& p,
                                              const Boundary& bc, long t_max, long reps,
                                              std::uint64_t seed) {
  if (reps < 1 || t_max < 0) throw Error(ErrorKind::InvalidParams, "need reps >= 1 and t >= 0");
  ChainOptions opt;
  opt.compute_t_mix = false;
  SpectralReport r = transition_matrix(g, p, bc, opt);
  std::vector<MixingTracePoint> out;
  const int N = static_cast<int>(r.states.size());
  const HeatTable H(g, p, r.free);
  for (int start = 0; start < 2; ++start) {
    ChainState x0 = start_state(start, g, p, bc);
    int i0 = r.index_of(encode(x0, r.free));
    if (i0 < 0) throw Error(ErrorKind::ZeroPartition, "start state has zero weight");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(N);
    row(i0) = 1;
    Replicas R = make_replicas(x0, reps, seed, start);
    for (long t = 0; t <= t_max; ++t) {
      if (t > 0) {
        row = row * r.P;
        advance(R, g, H, r.free);
      }
      std::vector<long> h = histogram(R, r);
      MixingTracePoint pt;
      pt.start = start;
      pt.t = t;
      for (int j = 0; j < N; ++j) {
        double pe = double(h[j]) / reps;
        pt.tv_exact += std::abs(row(j) - r.mu[j]);
        pt.tv_empirical += std::abs(pe - r.mu[j]);
        double pj = std::clamp(row(j), 0.0, 1.0);
        pt.ci += 3 * std::sqrt(pj * (1 - pj) / reps);
      }
      pt.tv_exact *= 0.5;
      pt.tv_empirical *= 0.5;
      pt.ci *= 0.5;
      out.push_back(pt);
    }
  }
  return out;
}

nlohmann::json spectral_to_json(const SpectralReport& r) {
  nlohmann::json j;
  j["free"] = r.free;
  j["states"] = r.states;
  j["mu"] = r.mu;
  j["eigenvalues"] = r.eigenvalues;
  j["gap"] = r.gap;
  j["abs_gap"] = r.abs_gap;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["psd"] = r.psd;
  j["reversibility_residual"] = r.reversibility_residual;
  j["irreducible"] = r.irreducible;
  j["min_mu"] = r.min_mu;
  j["t_mix_exact"] = r.t_mix_exact;
  if (std::isfinite(r.t_mix_bound)) j["t_mix_bound"] = r.t_mix_bound;
  else j["t_mix_bound"] = nullptr;
  return j;
}

}  // namespace spinlab
