#include <hstv/error.hpp>
#include <hstv/schatten.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hstv {

Mat2::Mat2(double m11, double m12, double m21, double m22) : a_(m11), b_(m12), c_(m21), d_(m22)
{
    if (!std::isfinite(m11) || !std::isfinite(m12) || !std::isfinite(m21) || !std::isfinite(m22))
        throw std::invalid_argument("Mat2: non-finite entry");
}

Mat2 Mat2::rotation(double theta)
{
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
}

Mat2 operator*(const Mat2& m, const Mat2& n)
{
    return {m.a_ * n.a_ + m.b_ * n.c_, m.a_ * n.b_ + m.b_ * n.d_,
            m.c_ * n.a_ + m.d_ * n.c_, m.c_ * n.b_ + m.d_ * n.d_};
}

Mat2 operator+(const Mat2& m, const Mat2& n) { return {m.a_ + n.a_, m.b_ + n.b_, m.c_ + n.c_, m.d_ + n.d_}; }
Mat2 operator-(const Mat2& m, const Mat2& n) { return {m.a_ - n.a_, m.b_ - n.b_, m.c_ - n.c_, m.d_ - n.d_}; }
Mat2 operator*(double s, const Mat2& m) { return {s * m.a_, s * m.b_, s * m.c_, s * m.d_}; }

SchattenP::SchattenP(double p) : p_(p)
{
    if (std::isnan(p) || p < 1.0)
        throw std::invalid_argument("Schatten exponent must satisfy p >= 1");
}

SchattenP SchattenP::parse(const std::string& text)
{
    if (text == "inf" || text == "infinity" || text == "Inf")
        return inf();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid Schatten exponent '" + text + "'");
    }
    if (used != text.size())
        throw std::invalid_argument("invalid Schatten exponent '" + text + "'");
    return SchattenP(v);
}

SchattenP SchattenP::conjugate() const
{
    if (p_ == 1.0)
        return inf();
    if (is_inf())
        return one();
    return SchattenP(p_ / (p_ - 1.0));
}

std::string SchattenP::to_string() const
{
    if (is_inf())
        return "inf";
    if (p_ == std::floor(p_))
        return std::to_string(static_cast<long long>(p_));
    return std::to_string(p_);
}

SingularValues singular_values(const Mat2& m)
{
    // s1 +- s2 = sqrt((a +- d)^2 + (c -+ b)^2); s2 recovered from |det| to
    // avoid cancellation when the matrix is close to rank one.
    const double a = m.m11(), b = m.m12(), c = m.m21(), d = m.m22();
    const double sum = std::hypot(a + d, c - b);
    const double diff = std::hypot(a - d, c + b);
    const double s1 = 0.5 * (sum + diff);
    if (s1 == 0.0)
        return {0.0, 0.0};
    const double s2 = std::min(s1, std::abs(m.det()) / s1);
    return {s1, s2};
}

double lp_norm2(double a, double b, SchattenP p)
{
    a = std::abs(a);
    b = std::abs(b);
    const double hi = std::max(a, b), lo = std::min(a, b);
    if (p.is_inf())
        return hi;
    if (p.value() == 1.0)
        return a + b;
    if (p.value() == 2.0)
        return std::hypot(a, b);
    if (hi == 0.0)
        return 0.0;
    return hi * std::pow(1.0 + std::pow(lo / hi, p.value()), 1.0 / p.value());
}

double schatten_norm(const Mat2& m, SchattenP p)
{
    const auto [s1, s2] = singular_values(m);
    return lp_norm2(s1, s2, p);
}

EigenFrame sym_eigen_frame(const Mat2& m, double tol)
{
    if (std::abs(m.m12() - m.m21()) > tol)
        throw Error("sym_eigen_frame: matrix is not symmetric within tolerance");
    const double a = m.m11(), d = m.m22();
    const double b = 0.5 * (m.m12() + m.m21());
    const double half_gap = std::hypot(0.5 * (a - d), b);
    const double mid = 0.5 * (a + d);
    const double scale = std::max({std::abs(a), std::abs(d), std::abs(b)});

    EigenFrame out;
    if (half_gap <= 1e-12 * scale || half_gap == 0.0) {
        out.diagonal = Mat2::diag(a, d);
        out.theta = 0.0;
        out.isotropic = true;
        return out;
    }
    // Angle of the eigenvector of the larger eigenvalue, in (-pi/2, pi/2].
    double theta = 0.5 * std::atan2(2.0 * b, a - d);
    double first = mid + half_gap, second = mid - half_gap;
    if (theta < 0.0) {
        theta += 0.5 * std::numbers::pi;
        std::swap(first, second);
    } else if (theta >= 0.5 * std::numbers::pi) {
        theta -= 0.5 * std::numbers::pi;
        std::swap(first, second);
    }
    out.diagonal = Mat2::diag(first, second);
    out.theta = theta;
    return out;
}

double dual_norm_estimate(const Mat2& m, SchattenP p, int samples)
{
    if (samples < 1)
        throw std::invalid_argument("dual_norm_estimate: samples must be >= 1");
    const SchattenP dual = p.conjugate();
    int n = std::max(1, static_cast<int>(std::floor(std::cbrt(static_cast<double>(samples)) + 1e-9)));
    // Multiples of 8 put the angles k*pi/4 on the lattice, where the extremal
    // N for diagonal and scalar M sit.
    if (n >= 8)
        n -= n % 8;
    const double step = 2.0 * std::numbers::pi / n;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        const Mat2 left = Mat2::rotation(i * step);
        for (int j = 0; j < n; ++j) {
            const Mat2 right = Mat2::rotation(j * step);
            for (int k = 0; k < n; ++k) {
                const double phi = k * step;
                double t1 = std::cos(phi), t2 = std::sin(phi);
                const double scale = lp_norm2(t1, t2, dual);
                t1 /= scale;
                t2 /= scale;
                const Mat2 candidate = left * Mat2::diag(t1, t2) * right;
                best = std::max(best, m.frobenius_dot(candidate));
            }
        }
    }
    return best;
}

} // namespace hstv
