#pragma once

#include <gmpxx.h>

#include <compare>
#include <string>

namespace hstv {

/// Arbitrary-precision rational in canonical (reduced, positive denominator) form.
using Rational = mpq_class;

struct RationalPoint {
    Rational x;
    Rational y;

    friend bool operator==(const RationalPoint& a, const RationalPoint& b) { return a.x == b.x && a.y == b.y; }
    /// Lexicographic (x, then y).
    friend bool operator<(const RationalPoint& a, const RationalPoint& b)
    {
        const int c = cmp(a.x, b.x);
        return c < 0 || (c == 0 && cmp(a.y, b.y) < 0);
    }
};

/// Builds num/den from decimal integer strings; throws hstv::Error on a zero
/// denominator or malformed digits.
Rational make_rational(const std::string& num, const std::string& den);
Rational make_rational(long long num, long long den);

inline double to_double(const Rational& r) { return r.get_d(); }
std::string numerator_string(const Rational& r);
std::string denominator_string(const Rational& r);

/// Sign of cross(b - a, c - a): +1 counterclockwise, -1 clockwise, 0 collinear.
/// A floating-point filter settles clear cases; ties fall back to exact arithmetic.
int orient(const RationalPoint& a, const RationalPoint& b, const RationalPoint& c);

/// Exact test: d strictly inside the circumcircle of the counterclockwise triangle abc.
bool in_circle(const RationalPoint& a, const RationalPoint& b, const RationalPoint& c, const RationalPoint& d);

/// Exact test: p lies in the open segment (a, b).
bool strictly_between(const RationalPoint& a, const RationalPoint& b, const RationalPoint& p);

} // namespace hstv
