#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace eoscope {

// Fixed-point mantissa. EOSIO assets are int64, but precision up to 18 digits
// needs more headroom, and balance sums over long histories need more still.
using Mantissa = __int128;

// Exact arithmetic for every detection factor.
using Rational = mpq_class;

std::string mantissa_to_string(Mantissa value);

mpz_class to_mpz(Mantissa value);

inline Rational to_rational(Mantissa numerator, Mantissa denominator) {
  Rational r(to_mpz(numerator), to_mpz(denominator));
  r.canonicalize();
  return r;
}

inline Rational to_rational(std::uint64_t numerator, std::uint64_t denominator) {
  return to_rational(static_cast<Mantissa>(numerator), static_cast<Mantissa>(denominator));
}

// "p/q", or "p" when q == 1.
inline std::string rational_to_string(const Rational& r) { return r.get_str(); }

}  // namespace eoscope
