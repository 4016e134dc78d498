#include "spinlab/rational.hpp"

#include <cmath>
#include <string>

#include "spinlab/errors.hpp"

namespace spinlab {

namespace {

bool is_int_token(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

std::string trimmed(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

Rat parse_rat(std::string_view raw) {
  std::string s = trimmed(raw);
  if (s.size() && s[0] == '+') s.erase(0, 1);
  auto bad = [&] { return Error(ErrorKind::MalformedInput, "not a rational: '" + s + "'"); };
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string p = s.substr(0, slash), q = s.substr(slash + 1);
    if (!is_int_token(p) || !is_int_token(q)) throw bad();
    mpz_class num(p, 10), den(q, 10);
    if (den == 0) throw Error(ErrorKind::MalformedInput, "zero denominator in '" + s + "'");
    Rat r(num, den);
    r.canonicalize();
    return r;
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (neg) ip.erase(0, 1);
    if (ip.empty()) ip = "0";
    if (!is_int_token(ip) || (!fp.empty() && !is_int_token(fp)) || (!fp.empty() && fp[0] == '-'))
      throw bad();
    mpz_class den = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    Rat r(mpz_class(ip + fp, 10), den);
    r.canonicalize();
    return neg ? Rat(-r) : r;
  }
  if (!is_int_token(s)) throw bad();
  return Rat(mpz_class(s, 10));
}

std::string rat_str(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

double to_double(const Rat& r) { return r.get_d(); }

long double to_long_double(const Rat& r) {
  // mpq_get_d truncates to double; split for a few extra bits
  mpz_class q, rem;
  mpz_tdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  long double hi = q.get_d();
  Rat frac(rem, r.get_den());
  frac.canonicalize();
  mpz_class scaled = (frac.get_num() << 64) / frac.get_den();
  long double lo = std::ldexp(static_cast<long double>(scaled.get_d()), -64);
  return hi + lo;
}

Rat rat_pow(const Rat& base, unsigned e) {
  Rat out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), e);
  out.canonicalize();
  return out;
}

Rat approx_rat(double x, long max_den) {
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidParams, "cannot approximate a non-finite value");
  bool neg = x < 0;
  double v = std::fabs(x);
  mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rem = v;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(rem);
    mpz_class ai(a);
    mpz_class h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    double frac = rem - a;
    if (frac < 1e-15) break;
    rem = 1.0 / frac;
  }
  if (k1 == 0) return Rat(0);
  Rat r(h1, k1);
  r.canonicalize();
  return neg ? Rat(-r) : r;
}

}  // namespace spinlab
