#include "spinlab/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// log(e^a + e^b) without overflow
double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}
}  // namespace

double h_func(double y, const ScalarParams& p) {
  const double k = -(1 - p.beta * p.gamma);
  if (y == -kInf) return 0;
  if (y <= 0) {
    double e = std::exp(y);
    return k * e / ((p.beta * e + 1) * (e + p.gamma));
  }
  // divide through by e^{2y}
  double t = std::exp(-y);
  if (p.beta == 0) return k / (1 + p.gamma * t);
  return k * t / ((p.beta + t) * (1 + p.gamma * t));
}

double log_edge_factor(double y, const ScalarParams& p) {
  if (y == kInf) return std::log(p.beta);
  double num = p.beta > 0 ? log_add(std::log(p.beta) + y, 0.0) : 0.0;
  double den = log_add(y, std::log(p.gamma));
  return num - den;
}

double H_d(const std::vector<double>& ys, const ScalarParams& p) {
  double s = std::log(p.lambda);
  for (double y : ys) s += log_edge_factor(y, p);
  return s;
}

double h_argmax(const ScalarParams& p) {
  if (p.beta == 0) return kInf;
  return 0.5 * std::log(p.gamma / p.beta);
}

double h_abs_max(const ScalarParams& p) {
  double s = p.sqrt_bg();
  return std::abs(1 - s) / (1 + s);
}

bool Interval::contains(double y, double tol) const {
  if (y == lo || y == hi) return true;
  return y >= lo - tol * (1 + std::abs(lo)) && y <= hi + tol * (1 + std::abs(hi));
}

Interval J_d(int d, const ScalarParams& p) {
  double a = p.beta > 0 ? std::log(p.lambda) + d * std::log(p.beta) : (d == 0 ? std::log(p.lambda) : -kInf);
  double b = std::log(p.lambda) - d * std::log(p.gamma);
  return a <= b ? Interval{a, b} : Interval{b, a};
}

Interval J_union(int Delta, const ScalarParams& p) {
  Interval u = J_d(0, p);
  for (int d = 1; d < Delta; ++d) {
    Interval j = J_d(d, p);
    u.lo = std::min(u.lo, j.lo);
    u.hi = std::max(u.hi, j.hi);
  }
  return u;
}

double h_abs_sup(const Interval& I, const ScalarParams& p) {
  double y = std::clamp(h_argmax(p), I.lo, I.hi);
  return std::abs(h_func(y, p));
}

}  // namespace spinlab
