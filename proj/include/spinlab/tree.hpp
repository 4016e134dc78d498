#pragma once
#include <optional>
#include <vector>

#include "spinlab/model.hpp"
#include "spinlab/potential.hpp"
#include "spinlab/recursion.hpp"
#include "spinlab/saw.hpp"

namespace spinlab {

// Log-ratios of every node of a rooted tree with its own subtree as the system.
// Fixed nodes hold +inf / -inf; their factors beta or 1/gamma are folded into the
// parent directly.
struct TreeRatios {
  std::vector<double> y;
  std::vector<int> d;           // child count, fixed children included
  std::vector<double> lambda;   // field of each node
};

// Doubles are taken from the rational parameters; per-vertex fields follow origins.
TreeRatios tree_log_ratios(const SawTree& t, const SpinParams& p);

// true when every free node satisfies y_v in J_{d_v} (with its own field)
bool ratios_in_J(const TreeRatios& r, const SawTree& t, const SpinParams& p,
                 double tol = 1e-9);

// I(root -> v) for every node by one DFS: the product of h(y_u) along the path,
// root excluded. Fixed nodes get 0.
std::vector<double> tree_influences(const SawTree& t, const TreeRatios& r, const SpinParams& p);
double tree_influence(const SawTree& t, const SpinParams& p, int v);

struct DecayLevel {
  int k = 0;
  double s = 0;           // sum over free nodes at depth k of |I(r -> v)|
  double s_weighted = 0;  // same with weights Delta_v (tree degree)
  double B = 0;           // max psi over the level
  double B_weighted = 0;  // max Delta_v psi over the level
  double bound = 0;       // Delta_r A B kappa^{k-1}
  double bound_weighted = 0;
  bool bound_defined = false;
};

struct DecayProfile {
  std::vector<DecayLevel> levels;  // k = 1 .. K
  int Delta_r = 0;
  double A = 0;
  double kappa = 0;  // contraction factor the bounds use
  bool bounds_hold(double tol = 1e-9) const;
};

// kappa: the contraction supremum of pot (e.g. from contraction_sup); levels K
DecayProfile decay_profile(const SawTree& t, const SpinParams& p, const Potential& pot,
                           double kappa, int K);

struct TotalInfluence {
  double plain = 0;          // sum_{v != r} |I_G(r -> v)|
  double weighted = 0;       // sum_{v != r} Delta_v |I_G(r -> v)| / Delta_r
  double cap_plain = 0;      // c / alpha
  double cap_weighted = 0;   // 2c / alpha
  bool holds() const;
};

// empirical row sums from exact enumeration on G, capped by the certificate
TotalInfluence total_influence_bound(const Graph& g, const SpinParams& p, const Boundary& bc,
                                     int r, double alpha, double c);

}  // namespace spinlab
