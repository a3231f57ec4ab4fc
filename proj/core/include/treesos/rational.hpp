#ifndef TREESOS_RATIONAL_HPP
#define TREESOS_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace treesos {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational arithmetic. All decision predicates in the engine run on
/// this type; floating point never reaches a comparison.
using Rat = boost::multiprecision::cpp_rational;

inline Rat rat(long long num, long long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return Rat(BigInt(num), BigInt(den));
}

inline std::string rat_str(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

/// Parses "p", "p/q" or a plain integer string.
Rat rat_parse(const std::string& s);

inline BigInt floor_sqrt(const BigInt& x) {
    if (x < 0) throw std::invalid_argument("sqrt of negative");
    return boost::multiprecision::sqrt(x);
}
inline BigInt ceil_sqrt(const BigInt& x) {
    BigInt r = floor_sqrt(x);
    return r * r == x ? r : r + 1;
}

// Rational bracketing of sqrt(x). The scale factor keeps the error below
// 2^-32 of the denominator; callers rely only on the inequality direction.
inline Rat sqrt_upper(const Rat& x) {
    if (x < 0) throw std::invalid_argument("sqrt of negative");
    const BigInt scale = BigInt(1) << 32;
    BigInt p = numerator(x), q = denominator(x);
    return Rat(ceil_sqrt(p * q * scale * scale), q * scale);
}
inline Rat sqrt_lower(const Rat& x) {
    if (x < 0) throw std::invalid_argument("sqrt of negative");
    const BigInt scale = BigInt(1) << 32;
    BigInt p = numerator(x), q = denominator(x);
    return Rat(floor_sqrt(p * q * scale * scale), q * scale);
}
inline Rat root4_upper(const Rat& x) { return sqrt_upper(sqrt_upper(x)); }
inline Rat root4_lower(const Rat& x) { return sqrt_lower(sqrt_lower(x)); }
inline Rat root8_upper(const Rat& x) { return sqrt_upper(root4_upper(x)); }

inline long long floor_rat(const Rat& r) {
    BigInt p = numerator(r), q = denominator(r);
    BigInt f = p / q;
    if (p < 0 && f * q != p) --f;
    return f.convert_to<long long>();
}
inline long long ceil_rat(const Rat& r) {
    BigInt p = numerator(r), q = denominator(r);
    BigInt c = p / q;
    if (p > 0 && c * q != p) ++c;
    return c.convert_to<long long>();
}

}  // namespace treesos

#endif
