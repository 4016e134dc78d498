#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinlab/recursion.hpp"
#include "spinlab/uniqueness.hpp"

namespace spinlab {

enum class PotentialKind { LLY, Identity, GL18 };

const char* potential_name(PotentialKind k);
PotentialKind parse_potential_kind(const std::string& s);  // lly | identity | gl18

// Psi with Psi(0) = 0 and derivative psi > 0.
//   LLY:      psi = sqrt|h|
//   Identity: psi = 1
//   GL18:     psi = min{K e^y, 1/log(lambda/e^y)}, K = (bg-1)/(a gamma log((lambda+gamma)/(beta lambda+1)))
//             where a is the interpolation constant (default 1); K e^y alone for y >= log lambda
class Potential {
 public:
  static Potential lly(const ScalarParams& p);
  static Potential identity(const ScalarParams& p);
  static Potential gl18(const ScalarParams& p, double interp = 1.0);
  static Potential make(PotentialKind k, const ScalarParams& p, double interp = 1.0);

  PotentialKind kind() const { return kind_; }
  const ScalarParams& params() const { return p_; }
  double interp() const { return interp_; }

  double psi(double y) const;
  // |h(y)| / psi(y), evaluated without forming 0/0 in the tails
  double h_over_psi(double y) const;
  double Psi(double y) const;       // adaptive quadrature from 0, tolerance 1e-10
  double Psi_inv(double s) const;   // throws OutOfImage outside (image_lo, image_hi)
  double image_lo() const { return lo_; }
  double image_hi() const { return hi_; }

  // LLY only: sqrt(1 - beta gamma) * integral_1^{e^y} dx / sqrt(x (beta x + 1)(x + gamma))
  double Psi_via_Phi(double y) const;
  // mass of psi outside [-Y, Y]; finite for LLY when beta > 0
  double tail_mass(double Y) const;

 private:
  Potential(PotentialKind k, const ScalarParams& p, double interp);
  double integrate(double a, double b) const;

  PotentialKind kind_;
  ScalarParams p_;
  double interp_ = 1;
  double gl_K_ = 0;
  double lo_ = 0, hi_ = 0;
};

// ---- contraction ----

struct ContractionOptions {
  int grid = 512;        // symmetric sweep points
  int multistarts = 64;  // random starts for coordinate ascent
  std::uint64_t seed = 1;
  int max_sweeps = 40;
};

struct ContractionResult {
  double sup = 0;
  int d_at_max = 0;
  std::vector<double> argmax;
  std::vector<double> per_d;  // per_d[d-1] = estimated sup for d children
  double domain_lo = 0, domain_hi = 0;
  int grid = 0, multistarts = 0;
  std::uint64_t seed = 0;
  long evaluations = 0;
};

// sum_i psi(H_d(y))/psi(y_i) |h(y_i)|
double contraction_objective(const Potential& pot, const std::vector<double>& ys);
// search box: [-Y, Y] with Y = max(50, |log lambda| + Delta(|log beta| + |log gamma|) + 50)
// in the antiferromagnetic case, the hull of J_0..J_{Delta-1} otherwise
std::pair<double, double> contraction_domain(const ScalarParams& p, int Delta);

ContractionResult contraction_sup(const Potential& pot, int Delta,
                                  const ContractionOptions& opt = {});
ContractionResult contraction_sup_serial(const Potential& pot, int Delta,
                                         const ContractionOptions& opt = {});

// ---- boundedness ----

enum class BoundednessMode { Boundedness, General };
const char* boundedness_mode_name(BoundednessMode m);

struct BoundednessResult {
  BoundednessMode mode = BoundednessMode::Boundedness;
  // smallest c with psi(y2)/psi(y1)|h(y1)| <= c/Delta over J x J (Boundedness), or
  // <= 2c/(d1+d2+2) over J_{d1} x J_{d2} (General)
  double c = 0;
  // the quantity the case lemma bounds: Delta sup (Boundedness) or
  // max (d1+d2+2) sup over J_{d1} x J_{d2} = 2c (General)
  double lemma_quantity = 0;
  int d1 = 0, d2 = 0;  // maximizing pair (General)
  std::vector<double> sup_psi, sup_ratio;  // per d on J_d
};

BoundednessResult boundedness_constant(const Potential& pot, int Delta, BoundednessMode mode);

// ---- certification ----

struct CertifyOptions {
  std::string potential = "auto";  // auto | lly | identity | gl18
  std::string mode = "auto";       // auto | boundedness | general
  double gl18_interp = 1.0;
  ContractionOptions contraction;
};

struct PotentialCertificate {
  std::string regime;  // H.1 H.2 S.1 S.2 S.3 ferro-1 ferro-2 ferro-3 GL18
  bool swapped = false;  // spin roles swapped so that beta <= gamma
  ScalarParams params;   // after normalization
  int Delta = 0;
  PotentialKind potential = PotentialKind::LLY;
  BoundednessMode mode = BoundednessMode::Boundedness;
  double gap = 0;                  // uniqueness gap (antiferro) or largest admissible margin (ferro)
  double contraction = 0;          // measured sup
  double contraction_target = 0;   // closed-form cap the search is compared to; NaN if none
  double alpha = 0;                // 1 - contraction
  double alpha_floor = 0;          // the margin the theory guarantees; NaN if none
  double c = 0;
  double lemma_quantity = 0;
  double lemma_reference = 0;      // 4, 1.5, 18, 8, 36 or a closed form; NaN if none
  bool contraction_ok = false;
  bool bounded_ok = false;
  ContractionResult trace;
  BoundednessResult bound;
  bool passed() const { return contraction_ok && bounded_ok; }
};

PotentialCertificate certify(const ScalarParams& p, int Delta, const CertifyOptions& opt = {});
nlohmann::json certificate_to_json(const PotentialCertificate& c);

// Cap C on |I(r -> v)| for distinct free vertices of a graph of maximum degree Delta,
// from the range of a vertex's marginal under any pinning of its neighbours.
double pair_influence_cap(const ScalarParams& p, int Delta);

}  // namespace spinlab
