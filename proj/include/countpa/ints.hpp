#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace countpa {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int gcd_int(const Int& a, const Int& b) { return boost::multiprecision::gcd(a, b); }
inline Int lcm_int(const Int& a, const Int& b) { return boost::multiprecision::lcm(a, b); }

/// Floor division, b != 0.
inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Ceiling division, b != 0.
inline Int ceil_div(const Int& a, const Int& b) {
    Int q = a / b;
    if ((a % b) != 0 && ((a < 0) == (b < 0))) ++q;
    return q;
}

/// Remainder in [0, m), m >= 1.
inline Int mod_floor(const Int& a, const Int& m) {
    Int r = a % m;
    if (r < 0) r += m;
    return r;
}

inline Int floor_rat(const Rat& r) {
    return floor_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

inline Int ceil_rat(const Rat& r) {
    return ceil_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

inline bool is_integer(const Rat& r) { return boost::multiprecision::denominator(r) == 1; }

}  // namespace countpa
