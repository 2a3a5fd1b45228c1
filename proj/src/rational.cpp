#include <hstv/error.hpp>
#include <hstv/rational.hpp>

#include <algorithm>
#include <cmath>

namespace hstv {

Rational make_rational(const std::string& num, const std::string& den)
{
    mpz_class n, d;
    if (n.set_str(num, 10) != 0 || d.set_str(den, 10) != 0)
        throw Error("malformed rational '" + num + "/" + den + "'");
    if (d == 0)
        throw Error("zero denominator in rational '" + num + "/" + den + "'");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

Rational make_rational(long long num, long long den)
{
    if (den == 0)
        throw Error("zero denominator");
    Rational r{mpz_class(std::to_string(num)), mpz_class(std::to_string(den))};
    r.canonicalize();
    return r;
}

std::string numerator_string(const Rational& r) { return r.get_num().get_str(); }
std::string denominator_string(const Rational& r) { return r.get_den().get_str(); }

int orient(const RationalPoint& a, const RationalPoint& b, const RationalPoint& c)
{
    const double ax = a.x.get_d(), ay = a.y.get_d();
    const double bx = b.x.get_d() - ax, by = b.y.get_d() - ay;
    const double cx = c.x.get_d() - ax, cy = c.y.get_d() - ay;
    const double det = bx * cy - by * cx;
    // Each input carries a relative rounding error of 2^-53; bound the
    // resulting error in det generously by the coordinate magnitudes.
    const double mag = std::max({std::abs(ax), std::abs(ay), std::abs(b.x.get_d()), std::abs(b.y.get_d()),
                                 std::abs(c.x.get_d()), std::abs(c.y.get_d()), 1e-300});
    const double bound = 1e-14 * mag * (std::abs(bx) + std::abs(by) + std::abs(cx) + std::abs(cy) + mag);
    if (det > bound)
        return 1;
    if (det < -bound)
        return -1;
    const Rational ex = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return sgn(ex);
}

bool in_circle(const RationalPoint& a, const RationalPoint& b, const RationalPoint& c, const RationalPoint& d)
{
    const Rational adx = a.x - d.x, ady = a.y - d.y;
    const Rational bdx = b.x - d.x, bdy = b.y - d.y;
    const Rational cdx = c.x - d.x, cdy = c.y - d.y;
    const Rational ad = adx * adx + ady * ady;
    const Rational bd = bdx * bdx + bdy * bdy;
    const Rational cd = cdx * cdx + cdy * cdy;
    const Rational det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
    return sgn(det) > 0;
}

bool strictly_between(const RationalPoint& a, const RationalPoint& b, const RationalPoint& p)
{
    if (orient(a, b, p) != 0)
        return false;
    const Rational t = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    const Rational len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    return sgn(t) > 0 && cmp(t, len2) < 0;
}

} // namespace hstv
