#include "spinlab/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "spinlab/errors.hpp"

namespace spinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ScalarParams ScalarParams::from(const SpinParams& p) {
  if (!p.uniform_field())
    throw Error(ErrorKind::InvalidParams, "analytic operations need a uniform field");
  if (p.lambda.empty()) throw Error(ErrorKind::InvalidParams, "no field given");
  return {to_double(p.beta), to_double(p.gamma), to_double(p.lambda[0])};
}

double ScalarParams::sqrt_bg() const { return std::sqrt(beta * gamma); }

ScalarParams ScalarParams::normalized() const {
  if (beta <= gamma) return *this;
  return {gamma, beta, 1.0 / lambda};
}

double f_d(int d, double R, const ScalarParams& p) {
  if (std::isinf(R)) return p.lambda * std::pow(p.beta, d);
  return p.lambda * std::pow((p.beta * R + 1) / (R + p.gamma), d);
}

double fprime_abs(int d, double R, const ScalarParams& p) {
  if (std::isinf(R)) return 0;
  return d * std::abs(1 - p.beta * p.gamma) * f_d(d, R, p) / ((p.beta * R + 1) * (R + p.gamma));
}

double fixed_point(int d, const ScalarParams& p) {
  if (d < 0) throw Error(ErrorKind::InvalidParams, "negative child count");
  if (!(p.gamma > 0) || !(p.lambda > 0) || p.beta < 0)
    throw Error(ErrorKind::InvalidParams, "need beta >= 0, gamma > 0, lambda > 0");
  if (d == 0) return p.lambda;
  const double bg = p.beta * p.gamma;
  if (bg == 1) return p.lambda * std::pow(p.beta, d);
  double lo = p.lambda * std::pow(std::min(p.beta, 1 / p.gamma), d);
  double hi = p.lambda * std::pow(std::max(p.beta, 1 / p.gamma), d);
  auto g = [&](double R) { return f_d(d, R, p) - R; };
  if (bg > 1) {
    // increasing map: several fixed points are possible, look for extra sign changes
    const int N = 4000;
    int changes = 0;
    double prev = g(lo);
    const double l0 = std::log(std::max(lo, 1e-300)), l1 = std::log(hi);
    for (int i = 1; i <= N; ++i) {
      double R = std::exp(l0 + (l1 - l0) * i / N);
      double v = g(R);
      if ((prev > 0 && v <= 0) || (prev < 0 && v >= 0)) ++changes;
      if (v != 0) prev = v;
    }
    if (changes > 1)
      throw Error(ErrorKind::NoBracket, "f_" + std::to_string(d) + " has several fixed points");
  }
  if (g(lo) == 0) return lo;
  if (g(hi) == 0) return hi;
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::bisect(g, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                           iters);
  double R = 0.5 * (a + b);
  if (std::abs(g(R)) > 1e-12 * (1 + R)) {
    // the bracket may stall one ulp short; pick the better endpoint
    R = std::abs(g(a)) < std::abs(g(b)) ? a : b;
  }
  return R;
}

UniquenessReport uniqueness_gap(int Delta, const ScalarParams& p) {
  if (Delta < 3) throw Error(ErrorKind::InvalidParams, "Delta must be at least 3");
  UniquenessReport rep;
  double worst = 0;
  for (int d = 1; d < Delta; ++d) {
    double R = fixed_point(d, p);
    double fp = fprime_abs(d, R, p);
    rep.records.push_back({d, R, fp});
    worst = std::max(worst, fp);
  }
  rep.gap = 1 - worst;
  rep.unique = rep.gap > 0;
  return rep;
}

bool CriticalFields::in_uniqueness(double lambda) const {
  if (hard) return lambda < lambda_c;
  for (const auto& r : per_d)
    if (!(lambda < r.lambda1 || lambda > r.lambda2)) return false;
  return true;
}

CriticalFields critical_fields(int Delta, const ScalarParams& p) {
  if (Delta < 3) throw Error(ErrorKind::InvalidParams, "Delta must be at least 3");
  if (!(p.beta * p.gamma < 1))
    throw Error(ErrorKind::RegimeInapplicable, "critical fields need beta*gamma < 1");
  if (p.beta > p.gamma) throw Error(ErrorKind::InvalidParams, "critical fields need beta <= gamma");
  CriticalFields cf;
  const double s = p.sqrt_bg();
  if (p.beta == 0) {
    cf.hard = true;
    cf.lambda_c = kInf;
    cf.lambda_c_bar = kInf;
    cf.Delta_bar = 1;
    for (int d = 2; d < Delta; ++d) {
      double x = p.gamma / (d - 1);
      double l1 = std::pow(p.gamma, d + 1) * std::pow(double(d), d) / std::pow(double(d - 1), d + 1);
      cf.per_d.push_back({d, double(d - 1), x, kInf, l1, kInf});
      cf.lambda_c = std::min(cf.lambda_c, l1);
    }
    return cf;
  }
  if (s > double(Delta - 2) / Delta)
    throw Error(ErrorKind::RegimeInapplicable,
                "sqrt(beta*gamma) > (Delta-2)/Delta: unique for every lambda");
  cf.Delta_bar = (1 + s) / (1 - s);
  cf.lambda_c = kInf;
  cf.lambda_c_bar = 0;
  const double bg = p.beta * p.gamma;
  for (int d = std::max(1, int(std::ceil(cf.Delta_bar - 1e-12))); d < Delta; ++d) {
    double theta = d * (1 - bg) - (1 + bg);
    double disc = std::sqrt(std::max(0.0, theta * theta - 4 * bg));
    double x1 = (theta - disc) / (2 * p.beta), x2 = (theta + disc) / (2 * p.beta);
    auto lam = [&](double x) { return x * std::pow((x + p.gamma) / (p.beta * x + 1), d); };
    double l1 = lam(x1), l2 = lam(x2);
    cf.per_d.push_back({d, theta, x1, x2, l1, l2});
    cf.lambda_c = std::min(cf.lambda_c, l1);
    cf.lambda_c_bar = std::max(cf.lambda_c_bar, l2);
  }
  return cf;
}

Rat hardcore_critical_field(int Delta, const Rat& gamma) {
  if (Delta < 3) throw Error(ErrorKind::InvalidParams, "Delta must be at least 3");
  if (gamma <= 0) throw Error(ErrorKind::InvalidParams, "gamma must be positive");
  Rat best;
  for (int d = 2; d < Delta; ++d) {
    Rat v = rat_pow(gamma, d + 1) * rat_pow(Rat(d), d) / rat_pow(Rat(d - 1), d + 1);
    if (d == 2 || v < best) best = v;
  }
  return best;
}

ParamGapCheck hardcore_param_gap(int Delta, double gamma, double delta) {
  double lc = to_double(hardcore_critical_field(Delta, approx_rat(gamma, 1 << 30)));
  ScalarParams p{0, gamma, (1 - delta) * lc};
  auto rep = uniqueness_gap(Delta, p);
  return {delta, p.lambda, rep.gap, delta / 4};
}

ParamGapCheck large_bg_param_gap(int Delta, double delta, double ratio, double lambda) {
  double s = (Delta - 2 * (1 - delta)) / Delta;
  double r = std::sqrt(ratio);
  ScalarParams p{s * r, s / r, lambda};
  auto rep = uniqueness_gap(Delta, p);
  return {delta, lambda, rep.gap, delta};
}

bool ThresholdBoundCheck::holds() const {
  return lambda1 <= cap1 * (1 + 1e-9) && lambda2 >= floor2 * (1 - 1e-9);
}

std::vector<ThresholdBoundCheck> threshold_bounds(int Delta, const ScalarParams& p) {
  if (!(p.beta > 0)) throw Error(ErrorKind::RegimeInapplicable, "threshold bounds need beta > 0");
  auto cf = critical_fields(Delta, p);
  std::vector<ThresholdBoundCheck> out;
  for (const auto& r : cf.per_d) {
    double cap1 = 18 * std::pow(p.gamma, r.d + 1) / r.theta;
    double floor2 = r.theta / (18 * std::pow(p.beta, r.d + 1));
    out.push_back({r.d, r.theta, r.lambda1, r.lambda2, cap1, floor2});
  }
  return out;
}

}  // namespace spinlab
