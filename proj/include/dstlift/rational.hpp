#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace dstlift {

/// Exact rational scalar used for costs, LP data and the exact moment backend.
using Rational = mpq_class;

/// Parses integers, plain decimals ("2.25") and "p/q". Exponent notation is not
/// accepted. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Canonical text form: "p" for integers, otherwise "p/q" in lowest terms.
std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(double x) { return x; }

}  // namespace dstlift
