#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace mcs {

// Exact arithmetic used at every public boundary. Internal sweeps run on
// scaled int64 ticks (see timebase.hpp).
using Rational = mpq_class;
using Integer = mpz_class;

Rational make_rational(std::int64_t num, std::int64_t den = 1);

// Accepts "p", "-p", "p/q" and finite decimals such as "0.975".
Rational parse_rational(std::string_view text);

// "p" for integers, "p/q" otherwise.
std::string to_string(const Rational& r);

// Exact decimal when the expansion terminates, "p/q" otherwise.
std::string to_decimal_string(const Rational& r);

Integer floor_of(const Rational& r);
Integer ceil_of(const Rational& r);

bool fits_int64(const Integer& z);
// Throws std::overflow_error when z does not fit.
std::int64_t to_int64(const Integer& z);

double to_double(const Rational& r);

}  // namespace mcs
