#include "spinlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinlab/errors.hpp"

namespace spinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

ScalarParams scalar_at(const SpinParams& p, double lambda) {
  return {to_double(p.beta), to_double(p.gamma), lambda};
}

// children after parents
std::vector<int> bfs_order(const SawTree& t) {
  std::vector<int> order{t.root};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int c : t.nodes[order[i]].children) order.push_back(c);
  return order;
}
}  // namespace

TreeRatios tree_log_ratios(const SawTree& t, const SpinParams& p) {
  const double beta = to_double(p.beta), gamma = to_double(p.gamma);
  const ScalarParams base{beta, gamma, 1};
  const std::size_t N = t.size();
  TreeRatios r;
  r.y.assign(N, 0);
  r.d.assign(N, 0);
  r.lambda.assign(N, 0);
  const double log_beta = beta > 0 ? std::log(beta) : -kInf;
  const double log_inv_gamma = -std::log(gamma);
  auto order = bfs_order(t);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    const SawNode& nd = t.nodes[v];
    r.lambda[v] = to_double(p.lambda[nd.origin]);
    r.d[v] = static_cast<int>(nd.children.size());
    if (nd.fixed_spin) {
      r.y[v] = *nd.fixed_spin ? kInf : -kInf;
      continue;
    }
    double y = std::log(r.lambda[v]);
    for (int c : nd.children) {
      const SawNode& cn = t.nodes[c];
      if (cn.fixed_spin)
        y += *cn.fixed_spin ? log_beta : log_inv_gamma;
      else
        y += log_edge_factor(r.y[c], base);
    }
    if (std::isnan(y))
      throw Error(ErrorKind::HardConstraintInfeasible,
                  "pinned children force a zero partition function at node " + std::to_string(v));
    r.y[v] = y;
  }
  return r;
}

bool ratios_in_J(const TreeRatios& r, const SawTree& t, const SpinParams& p, double tol) {
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (t.nodes[v].fixed_spin) continue;
    Interval J = J_d(r.d[v], scalar_at(p, r.lambda[v]));
    if (!J.contains(r.y[v], tol)) return false;
  }
  return true;
}

std::vector<double> tree_influences(const SawTree& t, const TreeRatios& r, const SpinParams& p) {
  const ScalarParams base{to_double(p.beta), to_double(p.gamma), 1};
  std::vector<double> I(t.size(), 0);
  I[t.root] = 1;
  for (int v : bfs_order(t)) {
    if (v == t.root) continue;
    const SawNode& nd = t.nodes[v];
    I[v] = nd.fixed_spin ? 0 : I[nd.parent] * h_func(r.y[v], base);
  }
  return I;
}

double tree_influence(const SawTree& t, const SpinParams& p, int v) {
  if (v < 0 || static_cast<std::size_t>(v) >= t.size())
    throw Error(ErrorKind::InvalidParams, "node out of range");
  if (t.nodes[v].fixed_spin) throw Error(ErrorKind::InvalidParams, "influence on a fixed node");
  TreeRatios r = tree_log_ratios(t, p);
  const ScalarParams base{to_double(p.beta), to_double(p.gamma), 1};
  double prod = 1;
  for (int u = v; u != t.root; u = t.nodes[u].parent) prod *= h_func(r.y[u], base);
  return prod;
}

bool DecayProfile::bounds_hold(double tol) const {
  for (const auto& l : levels) {
    if (!l.bound_defined) continue;
    if (l.s > l.bound * (1 + tol) + tol) return false;
    if (l.s_weighted > l.bound_weighted * (1 + tol) + tol) return false;
  }
  return true;
}

DecayProfile decay_profile(const SawTree& t, const SpinParams& p, const Potential& pot,
                           double kappa, int K) {
  TreeRatios r = tree_log_ratios(t, p);
  std::vector<double> I = tree_influences(t, r, p);
  DecayProfile prof;
  prof.kappa = kappa;
  prof.Delta_r = static_cast<int>(t.nodes[t.root].children.size());
  auto lv = t.levels();
  // A over the free children of the root; an empty first level leaves the bound undefined
  bool have_A = false;
  if (lv.size() > 1)
    for (int u : lv[1]) {
      if (t.nodes[u].fixed_spin) continue;
      prof.A = std::max(prof.A, pot.h_over_psi(r.y[u]));
      have_A = true;
    }
  for (int k = 1; k <= K; ++k) {
    DecayLevel L;
    L.k = k;
    bool any = false;
    if (static_cast<std::size_t>(k) < lv.size())
      for (int v : lv[k]) {
        if (t.nodes[v].fixed_spin) continue;
        any = true;
        double deg = static_cast<double>(t.nodes[v].children.size() + 1);
        double a = std::abs(I[v]);
        L.s += a;
        L.s_weighted += deg * a;
        double ps = pot.psi(r.y[v]);
        L.B = std::max(L.B, ps);
        L.B_weighted = std::max(L.B_weighted, deg * ps);
      }
    if (have_A && any) {
      double geo = std::pow(kappa, k - 1);
      L.bound = prof.Delta_r * prof.A * L.B * geo;
      L.bound_weighted = prof.Delta_r * prof.A * L.B_weighted * geo;
      L.bound_defined = true;
    }
    prof.levels.push_back(L);
  }
  return prof;
}

bool TotalInfluence::holds() const {
  const double tol = 1e-9;
  return plain <= cap_plain * (1 + tol) && weighted <= cap_weighted * (1 + tol);
}

TotalInfluence total_influence_bound(const Graph& g, const SpinParams& p, const Boundary& bc,
                                     int r, double alpha, double c) {
  if (bc.count(r)) throw Error(ErrorKind::InvalidParams, "root is pinned");
  if (!(alpha > 0)) throw Error(ErrorKind::InvalidParams, "alpha must be positive");
  TotalInfluence out;
  out.cap_plain = c / alpha;
  out.cap_weighted = 2 * c / alpha;
  Moments m = enumerate_moments(g, p, bc, MomentLevel::Pairs);
  if (m.Z == 0) throw Error(ErrorKind::ZeroPartition, "zero partition function");
  int ri = static_cast<int>(std::find(m.free.begin(), m.free.end(), r) - m.free.begin());
  if (m.S[ri] == 0 || m.S[ri] == m.Z) return out;  // deterministic root: no influence
  std::vector<Rat> row = influence_row(m, ri);
  for (std::size_t j = 0; j < m.free.size(); ++j) {
    if (static_cast<int>(j) == ri) continue;
    double a = std::abs(to_double(row[j]));
    out.plain += a;
    out.weighted += g.degree(m.free[j]) * a;
  }
  if (g.degree(r) > 0) out.weighted /= g.degree(r);
  return out;
}

}  // namespace spinlab
