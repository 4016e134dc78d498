#pragma once
#include <vector>

#include "spinlab/uniqueness.hpp"

namespace spinlab {

// Primitives of the log-ratio tree recursion
//   H_d(y) = log lambda + sum_i log((beta e^{y_i} + 1)/(e^{y_i} + gamma)),
// whose partial derivatives are h(y_i). Infinite arguments are limits.

double h_func(double y, const ScalarParams& p);
double log_edge_factor(double y, const ScalarParams& p);
double H_d(const std::vector<double>& ys, const ScalarParams& p);

// maximizer of |h|: log sqrt(gamma/beta), +inf when beta = 0
double h_argmax(const ScalarParams& p);
// |1 - sqrt(beta gamma)| / (1 + sqrt(beta gamma))
double h_abs_max(const ScalarParams& p);

struct Interval {
  double lo, hi;
  bool contains(double y, double tol = 1e-9) const;
};

// log-ratio range of a vertex with d children, order-corrected for the regime
Interval J_d(int d, const ScalarParams& p);
// hull of J_0 .. J_{Delta-1}
Interval J_union(int Delta, const ScalarParams& p);
// sup of |h| on [a, b]; |h| is unimodal around h_argmax
double h_abs_sup(const Interval& I, const ScalarParams& p);

}  // namespace spinlab
