#include "spinlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "spinlab/errors.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double quad(const auto& f, double a, double b) {
  if (a == b) return 0;
  double err = 0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-12, &err);
}

// maximize f on [a, b] by a grid followed by Brent on the best cell
double max_on_interval(const auto& f, double a, double b, int grid = 2048) {
  if (a == b) return f(a);
  a = std::max(a, -745.0);
  b = std::min(b, 745.0);
  double best = -kInf;
  int bi = 0;
  for (int i = 0; i < grid; ++i) {
    double v = f(a + (b - a) * i / (grid - 1));
    if (v > best) best = v, bi = i;
  }
  double l = a + (b - a) * std::max(bi - 1, 0) / (grid - 1);
  double r = a + (b - a) * std::min(bi + 1, grid - 1) / (grid - 1);
  auto r2 = boost::math::tools::brent_find_minima([&](double t) { return -f(t); }, l, r, 50);
  return std::max(best, -r2.second);
}
}  // namespace

const char* potential_name(PotentialKind k) {
  switch (k) {
    case PotentialKind::LLY: return "lly";
    case PotentialKind::Identity: return "identity";
    case PotentialKind::GL18: return "gl18";
  }
  return "?";
}

PotentialKind parse_potential_kind(const std::string& s) {
  if (s == "lly") return PotentialKind::LLY;
  if (s == "identity") return PotentialKind::Identity;
  if (s == "gl18") return PotentialKind::GL18;
  throw Error(ErrorKind::MalformedInput, "unknown potential '" + s + "'");
}

Potential::Potential(PotentialKind k, const ScalarParams& p, double interp)
    : kind_(k), p_(p), interp_(interp) {}

Potential Potential::lly(const ScalarParams& p) {
  if (!(p.beta * p.gamma < 1))
    throw Error(ErrorKind::RegimeInapplicable, "the sqrt|h| potential needs beta gamma < 1");
  Potential pot(PotentialKind::LLY, p, 1);
  pot.lo_ = -pot.integrate(-kInf, 0);
  pot.hi_ = p.beta > 0 ? pot.integrate(0, kInf) : kInf;
  return pot;
}

Potential Potential::identity(const ScalarParams& p) {
  if (p.beta * p.gamma == 1)
    throw Error(ErrorKind::RegimeInapplicable, "beta gamma = 1 is a product measure");
  Potential pot(PotentialKind::Identity, p, 1);
  pot.lo_ = -kInf;
  pot.hi_ = kInf;
  return pot;
}

Potential Potential::gl18(const ScalarParams& p, double interp) {
  if (!(p.beta * p.gamma > 1))
    throw Error(ErrorKind::RegimeInapplicable, "the GL18 potential needs beta gamma > 1");
  if (!(interp > 0) || interp > 1)
    throw Error(ErrorKind::InvalidParams, "GL18 interpolation constant must lie in (0, 1]");
  double L = std::log((p.lambda + p.gamma) / (p.beta * p.lambda + 1));
  if (!(L > 0))
    throw Error(ErrorKind::RegimeInapplicable, "GL18 potential needs lambda + gamma > beta lambda + 1");
  Potential pot(PotentialKind::GL18, p, interp);
  pot.gl_K_ = (p.beta * p.gamma - 1) / (interp * p.gamma * L);
  pot.lo_ = -pot.integrate(-kInf, 0);
  pot.hi_ = kInf;
  return pot;
}

Potential Potential::make(PotentialKind k, const ScalarParams& p, double interp) {
  switch (k) {
    case PotentialKind::LLY: return lly(p);
    case PotentialKind::Identity: return identity(p);
    case PotentialKind::GL18: return gl18(p, interp);
  }
  throw Error(ErrorKind::InvalidParams, "unknown potential kind");
}

double Potential::psi(double y) const {
  switch (kind_) {
    case PotentialKind::LLY: return std::sqrt(std::abs(h_func(y, p_)));
    case PotentialKind::Identity: return 1;
    case PotentialKind::GL18: {
      double a = gl_K_ * std::exp(y);
      double ll = std::log(p_.lambda) - y;
      if (ll <= 0) return a;
      return std::min(a, 1 / ll);
    }
  }
  return kNaN;
}

double Potential::h_over_psi(double y) const {
  double h = std::abs(h_func(y, p_));
  switch (kind_) {
    case PotentialKind::LLY: return std::sqrt(h);
    case PotentialKind::Identity: return h;
    case PotentialKind::GL18: {
      double s = psi(y);
      // both vanish like e^y on the left
      if (s == 0 || h == 0) return (p_.beta * p_.gamma - 1) / (p_.gamma * gl_K_);
      return h / s;
    }
  }
  return kNaN;
}

double Potential::integrate(double a, double b) const {
  if (kind_ == PotentialKind::Identity) return b - a;
  auto f = [this](double y) { return psi(y); };
  if (kind_ == PotentialKind::GL18 && a < b) {
    // split at the kink where the two branches of the min cross
    double lam = std::log(p_.lambda);
    auto g = [&](double y) { return gl_K_ * std::exp(y) * (lam - y) - 1; };
    double lo = lam - 60, hi = lam - 1e-12;
    if (g(lo) < 0 && g(hi) > 0) {
      std::uintmax_t it = 200;
      auto [x0, x1] = boost::math::tools::bisect(g, lo, hi,
                                                 boost::math::tools::eps_tolerance<double>(50), it);
      double k = 0.5 * (x0 + x1);
      if (a < k && k < b) return quad(f, a, k) + quad(f, k, b);
    }
  }
  return quad(f, a, b);
}

double Potential::Psi(double y) const {
  if (kind_ == PotentialKind::Identity) return y;
  if (y == kInf) return hi_;
  if (y == -kInf) return lo_;
  return y >= 0 ? integrate(0, y) : -integrate(y, 0);
}

double Potential::Psi_inv(double s) const {
  if (kind_ == PotentialKind::Identity) return s;
  if (!(s > lo_ && s < hi_))
    throw Error(ErrorKind::OutOfImage, "value " + std::to_string(s) + " outside the image (" +
                                           std::to_string(lo_) + ", " + std::to_string(hi_) + ")");
  double a = -1, b = 1;
  for (int i = 0; i < 16 && Psi(a) > s; ++i) a *= 2;
  for (int i = 0; i < 16 && Psi(b) < s; ++i) b *= 2;
  auto g = [&](double y) { return Psi(y) - s; };
  double ga = g(a), gb = g(b);
  if (ga > 0 || gb < 0)
    throw Error(ErrorKind::OutOfImage, "value " + std::to_string(s) + " is numerically at the image edge");
  if (ga == 0) return a;
  if (gb == 0) return b;
  std::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(g, a, b, ga, gb,
                                             boost::math::tools::eps_tolerance<double>(45), it);
  return 0.5 * (r.first + r.second);
}

double Potential::Psi_via_Phi(double y) const {
  if (kind_ != PotentialKind::LLY)
    throw Error(ErrorKind::RegimeInapplicable, "the Phi form exists for the sqrt|h| potential only");
  // x = u^2 turns dx / sqrt(x(bx+1)(x+g)) into 2 du / sqrt((b u^2+1)(u^2+g)), smooth at 0
  const double b = p_.beta, g = p_.gamma;
  auto f = [&](double u) { return 2 / std::sqrt((b * u * u + 1) * (u * u + g)); };
  double U = y == kInf ? kInf : std::exp(y / 2);
  double Phi = U >= 1 ? quad(f, 1, U) : -quad(f, U, 1);
  return std::sqrt(1 - b * g) * Phi;
}

double Potential::tail_mass(double Y) const {
  if (kind_ == PotentialKind::Identity) return kInf;
  double right = hi_ == kInf ? kInf : integrate(Y, kInf);
  return right + integrate(-kInf, -Y);
}

// ---------------------------------------------------------------- contraction

double contraction_objective(const Potential& pot, const std::vector<double>& ys) {
  const ScalarParams& p = pot.params();
  double y = H_d(ys, p);
  double s = 0;
  for (double yi : ys) s += pot.h_over_psi(yi);
  return s == 0 ? 0 : pot.psi(y) * s;
}

std::pair<double, double> contraction_domain(const ScalarParams& p, int Delta) {
  if (p.beta * p.gamma > 1) {
    Interval J = J_union(Delta, p);
    return {J.lo, J.hi};
  }
  double spread = std::abs(std::log(p.gamma));
  if (p.beta > 0) spread += std::abs(std::log(p.beta));
  double Y = std::max(50.0, std::abs(std::log(p.lambda)) + Delta * spread + 50);
  return {-Y, Y};
}

namespace {

struct StartResult {
  double value = -kInf;
  std::vector<double> x;
  long evals = 0;
};

StartResult ascend(const Potential& pot, std::vector<double> x, double lo, double hi,
                   int max_sweeps) {
  StartResult r;
  auto f = [&](const std::vector<double>& v) {
    ++r.evals;
    return contraction_objective(pot, v);
  };
  double cur = f(x);
  const int coarse = 48;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double before = cur;
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::vector<double> v = x;
      auto fi = [&](double t) {
        v[i] = t;
        return f(v);
      };
      double bt = x[i], bv = cur;
      int bj = -1;
      for (int j = 0; j < coarse; ++j) {
        double t = lo + (hi - lo) * j / (coarse - 1);
        double val = fi(t);
        if (val > bv) bv = val, bt = t, bj = j;
      }
      double l, rr;
      if (bj >= 0) {
        l = lo + (hi - lo) * std::max(bj - 1, 0) / (coarse - 1);
        rr = lo + (hi - lo) * std::min(bj + 1, coarse - 1) / (coarse - 1);
      } else {
        double w = (hi - lo) / (coarse - 1);
        l = std::max(lo, x[i] - w);
        rr = std::min(hi, x[i] + w);
      }
      if (rr > l) {
        std::uintmax_t it = 60;
        auto m = boost::math::tools::brent_find_minima([&](double t) { return -fi(t); }, l, rr, 40, it);
        if (-m.second > bv) bv = -m.second, bt = m.first;
      }
      if (bv > cur) cur = bv, x[i] = bt;
    }
    if (cur - before <= 1e-14 * (1 + std::abs(cur))) break;
  }
  r.value = cur;
  r.x = std::move(x);
  return r;
}

ContractionResult contraction_impl(const Potential& pot, int Delta, const ContractionOptions& opt,
                                   bool parallel) {
  if (Delta < 2) throw Error(ErrorKind::InvalidParams, "contraction needs Delta >= 2");
  auto [lo, hi] = contraction_domain(pot.params(), Delta);
  ContractionResult res;
  res.domain_lo = lo;
  res.domain_hi = hi;
  res.grid = opt.grid;
  res.multistarts = opt.multistarts;
  res.seed = opt.seed;
  res.sup = -kInf;
  CounterRng base(opt.seed);
  for (int d = 1; d < Delta; ++d) {
    // symmetric sweep
    double sym_best = -kInf, sym_t = lo;
    for (int j = 0; j < opt.grid; ++j) {
      double t = opt.grid > 1 ? lo + (hi - lo) * j / (opt.grid - 1) : 0.5 * (lo + hi);
      double v = contraction_objective(pot, std::vector<double>(d, t));
      if (v > sym_best) sym_best = v, sym_t = t;
    }
    res.evaluations += opt.grid;
    const int S = opt.multistarts + 1;
    std::vector<StartResult> out(S);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int s = 0; s < S; ++s) {
      std::vector<double> x(d, sym_t);
      if (s > 0) {
        CounterRng rng = base.split(static_cast<std::uint64_t>(d) * 100003 + s);
        for (double& xi : x) xi = lo + (hi - lo) * rng.uniform();
      }
      out[s] = ascend(pot, std::move(x), lo, hi, opt.max_sweeps);
    }
    double best = sym_best;
    std::vector<double> arg(d, sym_t);
    for (auto& o : out) {
      res.evaluations += o.evals;
      if (o.value > best) best = o.value, arg = o.x;
    }
    res.per_d.push_back(best);
    if (best > res.sup) {
      res.sup = best;
      res.d_at_max = d;
      res.argmax = arg;
    }
  }
  return res;
}

}  // namespace

ContractionResult contraction_sup(const Potential& pot, int Delta, const ContractionOptions& opt) {
  return contraction_impl(pot, Delta, opt, true);
}

ContractionResult contraction_sup_serial(const Potential& pot, int Delta,
                                         const ContractionOptions& opt) {
  return contraction_impl(pot, Delta, opt, false);
}

// ---------------------------------------------------------------- boundedness

const char* boundedness_mode_name(BoundednessMode m) {
  return m == BoundednessMode::Boundedness ? "boundedness" : "general";
}

BoundednessResult boundedness_constant(const Potential& pot, int Delta, BoundednessMode mode) {
  if (Delta < 1) throw Error(ErrorKind::InvalidParams, "boundedness needs Delta >= 1");
  const ScalarParams& p = pot.params();
  BoundednessResult r;
  r.mode = mode;
  for (int d = 0; d < Delta; ++d) {
    Interval J = J_d(d, p);
    double sp, sr;
    switch (pot.kind()) {
      case PotentialKind::LLY:
        sp = sr = std::sqrt(h_abs_sup(J, p));
        break;
      case PotentialKind::Identity:
        sp = 1;
        sr = h_abs_sup(J, p);
        break;
      default:
        sp = max_on_interval([&](double y) { return pot.psi(y); }, J.lo, J.hi);
        sr = max_on_interval([&](double y) { return pot.h_over_psi(y); }, J.lo, J.hi);
    }
    r.sup_psi.push_back(sp);
    r.sup_ratio.push_back(sr);
  }
  if (mode == BoundednessMode::Boundedness) {
    // the objective separates, so the sup over J x J is a product of sups
    double a = *std::max_element(r.sup_ratio.begin(), r.sup_ratio.end());
    double b = *std::max_element(r.sup_psi.begin(), r.sup_psi.end());
    r.c = Delta * a * b;
    r.lemma_quantity = r.c;
  } else {
    double best = -1;
    for (int d1 = 0; d1 < Delta; ++d1)
      for (int d2 = 0; d2 < Delta; ++d2) {
        double q = (d1 + d2 + 2) * r.sup_ratio[d1] * r.sup_psi[d2];
        if (q > best) best = q, r.d1 = d1, r.d2 = d2;
      }
    r.lemma_quantity = best;
    r.c = best / 2;
  }
  return r;
}

// ---------------------------------------------------------------- certification

double pair_influence_cap(const ScalarParams& q, int Delta) {
  ScalarParams p = q.normalized();
  const double l = p.lambda, b = p.beta, g = p.gamma;
  if (p.antiferro()) {
    if (g <= 1)
      return l * (1 - std::pow(b * g, Delta)) / ((l + std::pow(g, Delta)) * (1 + l * std::pow(b, Delta)));
    return l * (1 - std::pow(b, Delta)) / ((l + 1) * (1 + l * std::pow(b, Delta)));
  }
  // the ratio of a vertex lies in lambda [min, max]^Delta of the edge factor range [1/g, b]
  double rlo = l * std::pow(std::min(b, 1 / g), Delta), rhi = l * std::pow(std::max(b, 1 / g), Delta);
  return rhi / (1 + rhi) - rlo / (1 + rlo);
}

PotentialCertificate certify(const ScalarParams& input, int Delta, const CertifyOptions& opt) {
  if (Delta < 3) throw Error(ErrorKind::InvalidParams, "certification needs Delta >= 3");
  if (!(input.gamma > 0) || !(input.lambda > 0) || input.beta < 0)
    throw Error(ErrorKind::InvalidParams, "need beta >= 0, gamma > 0, lambda > 0");
  if (input.beta * input.gamma == 1)
    throw Error(ErrorKind::RegimeInapplicable, "beta gamma = 1 is a product measure");
  PotentialCertificate c;
  c.Delta = Delta;
  c.swapped = input.beta > input.gamma;
  c.params = input.normalized();
  const ScalarParams& p = c.params;
  const double s = p.sqrt_bg();
  c.contraction_target = kNaN;
  c.alpha_floor = kNaN;
  c.lemma_reference = kNaN;

  if (p.antiferro()) {
    UniquenessReport u = uniqueness_gap(Delta, p);
    c.gap = u.gap;
    const double thr = double(Delta - 2) / Delta;
    if (p.beta == 0) {
      c.regime = p.gamma <= 1 ? "H.1" : "H.2";
    } else if (s > thr) {
      c.regime = "S.1";
    } else {
      c.regime = p.gamma <= 1 ? "S.2" : "S.3";
    }
    if (!u.unique)
      throw Error(ErrorKind::OutsideUniqueness,
                  "parameters are not up-to-Delta unique (gap " + std::to_string(u.gap) + ")");
    if (c.regime == "S.1") {
      c.potential = PotentialKind::Identity;
      c.mode = BoundednessMode::Boundedness;
      c.lemma_reference = 1.5;
    } else {
      c.potential = PotentialKind::LLY;
      bool general = c.regime == "H.2" || c.regime == "S.3";
      c.mode = general ? BoundednessMode::General : BoundednessMode::Boundedness;
      c.lemma_reference = c.regime == "H.1" ? 4 : c.regime == "H.2" ? 8 : c.regime == "S.2" ? 18 : 36;
    }
  } else {
    const double thr = double(Delta) / (Delta - 2);
    const double k = (Delta - 2) * p.beta * p.gamma - Delta;
    if (s < thr) {
      c.regime = "ferro-1";
      c.gap = std::min(1.0, (Delta - s * (Delta - 2)) / (1 + s));
      c.lemma_reference = 1.5;
    } else {
      double d2 = 1 - p.lambda * std::max(1.0, std::pow(p.beta, Delta - 1)) * k / p.gamma;
      double d3 = 1 - k / (p.lambda * p.beta * std::min(1.0, std::pow(p.gamma, -(Delta - 1))));
      if (d2 > 0) {
        c.regime = "ferro-2", c.gap = d2;
      } else if (d3 > 0) {
        c.regime = "ferro-3", c.gap = d3;
      } else if (p.beta <= 1 && 1 <= p.gamma &&
                 p.lambda < std::pow(p.gamma / p.beta, s / (s - 1))) {
        c.regime = "GL18";
        c.gap = kNaN;
      } else {
        throw Error(ErrorKind::OutsideUniqueness,
                    "ferromagnetic parameters outside every supported condition");
      }
      if (c.regime != "GL18")
        c.lemma_reference = Delta * (p.beta * p.gamma - 1) / ((Delta - 2) * (p.beta * p.gamma - 1) - 1);
    }
    c.potential = c.regime == "GL18" ? PotentialKind::GL18 : PotentialKind::Identity;
    c.mode = BoundednessMode::Boundedness;
  }
  if (opt.potential != "auto") c.potential = parse_potential_kind(opt.potential);
  if (opt.mode == "boundedness") c.mode = BoundednessMode::Boundedness;
  else if (opt.mode == "general") c.mode = BoundednessMode::General;
  else if (opt.mode != "auto") throw Error(ErrorKind::MalformedInput, "unknown mode '" + opt.mode + "'");

  Potential pot = Potential::make(c.potential, p, opt.gl18_interp);
  c.trace = contraction_sup(pot, Delta, opt.contraction);
  c.contraction = c.trace.sup;
  c.alpha = 1 - c.contraction;

  // closed-form targets for the default pairings
  if (c.potential == PotentialKind::LLY && p.antiferro()) {
    c.contraction_target = std::sqrt(1 - c.gap);
    c.alpha_floor = c.gap / 2;
  } else if (c.potential == PotentialKind::Identity) {
    double q = p.beta * p.gamma;
    if (p.antiferro() || c.regime == "ferro-1") {
      c.contraction_target = (Delta - 1) * h_abs_max(p);
      if (c.regime == "S.1") {
        // largest margin allowed by the antiferromagnetic side of condition 1
        double dm = std::min(1.0, (2 - Delta * (1 - s)) / (1 + s));
        c.alpha_floor = dm;
      } else if (c.regime == "ferro-1") {
        c.alpha_floor = c.gap;
      }
    } else {
      // (q-1)/(1+q+((Delta-2)q-Delta)/(1-delta)) simplified; the denominator carries -2 delta
      double dl = c.gap;
      c.contraction_target = (Delta - 1) * (1 - dl) * (q - 1) / ((Delta - 1 - dl) * (q - 1) - 2 * dl);
    }
  }
  double tol = 1e-6;
  c.contraction_ok = c.contraction < 1 &&
                     (std::isnan(c.contraction_target) || c.contraction <= c.contraction_target + tol);

  c.bound = boundedness_constant(pot, Delta, c.mode);
  c.c = c.bound.c;
  c.lemma_quantity = c.bound.lemma_quantity;
  c.bounded_ok = std::isnan(c.lemma_reference) ? std::isfinite(c.c)
                                               : c.lemma_quantity <= c.lemma_reference;
  return c;
}

nlohmann::json certificate_to_json(const PotentialCertificate& c) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
  };
  nlohmann::json j;
  j["regime"] = c.regime;
  j["swapped"] = c.swapped;
  j["beta"] = c.params.beta;
  j["gamma"] = c.params.gamma;
  j["lambda"] = c.params.lambda;
  j["Delta"] = c.Delta;
  j["potential"] = potential_name(c.potential);
  j["mode"] = boundedness_mode_name(c.mode);
  j["gap"] = num(c.gap);
  j["contraction"] = num(c.contraction);
  j["contraction_target"] = num(c.contraction_target);
  j["alpha"] = num(c.alpha);
  j["alpha_floor"] = num(c.alpha_floor);
  j["c"] = num(c.c);
  j["lemma_quantity"] = num(c.lemma_quantity);
  j["lemma_reference"] = num(c.lemma_reference);
  j["contraction_ok"] = c.contraction_ok;
  j["bounded_ok"] = c.bounded_ok;
  j["passed"] = c.passed();
  nlohmann::json t;
  t["grid"] = c.trace.grid;
  t["multistarts"] = c.trace.multistarts;
  t["seed"] = c.trace.seed;
  t["evaluations"] = c.trace.evaluations;
  t["domain"] = {num(c.trace.domain_lo), num(c.trace.domain_hi)};
  t["d_at_max"] = c.trace.d_at_max;
  t["argmax"] = c.trace.argmax;
  t["per_d"] = c.trace.per_d;
  j["search"] = t;
  nlohmann::json b;
  b["sup_psi"] = c.bound.sup_psi;
  b["sup_ratio"] = c.bound.sup_ratio;
  if (c.mode == BoundednessMode::General) b["argmax_pair"] = {c.bound.d1, c.bound.d2};
  j["boundedness"] = b;
  return j;
}

}  // namespace spinlab
