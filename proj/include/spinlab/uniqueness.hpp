#pragma once
#include <vector>

#include "spinlab/model.hpp"
#include "spinlab/rational.hpp"

namespace spinlab {

// Uniform parameters in floating point; the analytic side works in doubles.
struct ScalarParams {
  double beta = 0;
  double gamma = 1;
  double lambda = 1;

  static ScalarParams from(const SpinParams& p);  // requires a uniform field
  double sqrt_bg() const;
  bool antiferro() const { return beta * gamma < 1; }
  // swap the spin roles so that beta <= gamma: (gamma, beta, 1/lambda)
  ScalarParams normalized() const;
};

// f_d(R) = lambda ((beta R + 1)/(R + gamma))^d and |f_d'(R)|
double f_d(int d, double R, const ScalarParams& p);
double fprime_abs(int d, double R, const ScalarParams& p);

// Unique fixed point of f_d by bisection. Ferromagnetic inputs with several
// fixed points throw NoBracket.
double fixed_point(int d, const ScalarParams& p);

struct UniquenessRecord {
  int d;
  double R_star;
  double fprime_abs;
};

struct UniquenessReport {
  std::vector<UniquenessRecord> records;  // d = 1 .. Delta-1
  double gap = 0;
  bool unique = false;
};

UniquenessReport uniqueness_gap(int Delta, const ScalarParams& p);

struct CriticalFieldsPerD {
  int d;
  double theta, x1, x2, lambda1, lambda2;
};

struct CriticalFields {
  double lambda_c = 0;
  double lambda_c_bar = 0;  // +inf when there is no upper window (beta = 0)
  double Delta_bar = 0;
  std::vector<CriticalFieldsPerD> per_d;  // soft constraints only
  // membership in the uniqueness regime: the intersection over d of
  // (0, lambda1(d)) U (lambda2(d), inf); for beta = 0 simply lambda < lambda_c
  bool in_uniqueness(double lambda) const;
  bool hard = false;
};

// Throws RegimeInapplicable unless beta gamma < 1 and, for beta > 0,
// sqrt(beta gamma) <= (Delta-2)/Delta.
CriticalFields critical_fields(int Delta, const ScalarParams& p);

// Exact hard-constraint threshold min_{1<d<Delta} gamma^{d+1} d^d / (d-1)^{d+1}.
Rat hardcore_critical_field(int Delta, const Rat& gamma);

// Parameter gap to uniqueness gap.
struct ParamGapCheck {
  double delta;     // parameter gap
  double lambda;    // field used
  double gap;       // computed uniqueness gap
  double required;  // claimed lower bound on the gap
  bool holds() const { return gap >= required - 1e-9 * (1 + required); }
};
// lambda = (1 - delta) lambda_c(gamma, Delta) with beta = 0; claims gap >= delta/4
ParamGapCheck hardcore_param_gap(int Delta, double gamma, double delta);
// sqrt(beta gamma) = (Delta - 2(1-delta))/Delta with beta/gamma = ratio <= 1;
// claims gap >= delta for every lambda
ParamGapCheck large_bg_param_gap(int Delta, double delta, double ratio, double lambda);

struct ThresholdBoundCheck {
  int d;
  double theta, lambda1, lambda2, cap1, floor2;  // cap1 = 18 g^{d+1}/theta, floor2 = theta/(18 b^{d+1})
  bool holds() const;
};
std::vector<ThresholdBoundCheck> threshold_bounds(int Delta, const ScalarParams& p);

}  // namespace spinlab
