#pragma once
#include <gmpxx.h>

#include <string>
#include <string_view>

namespace spinlab {

using Rat = mpq_class;

// Accepts "p/q", an integer, or a finite decimal such as "0.25".
Rat parse_rat(std::string_view s);
std::string rat_str(const Rat& r);
double to_double(const Rat& r);
long double to_long_double(const Rat& r);
Rat rat_pow(const Rat& base, unsigned e);
// Closest rational with denominator at most max_den (continued fractions).
Rat approx_rat(double x, long max_den = 1000000);

}  // namespace spinlab
