#pragma once

#include <cmath>

namespace hstv {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Real 2x2 matrix [[m11, m12], [m21, m22]]. Construction rejects NaN/Inf.
class Mat2 {
public:
    constexpr Mat2() = default;
    Mat2(double m11, double m12, double m21, double m22);

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double a, double b) { return {a, 0.0, 0.0, b}; }
    static Mat2 rotation(double theta);
    /// Outer product u v^T.
    static Mat2 outer(Vec2 u, Vec2 v) { return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y}; }

    constexpr double m11() const { return a_; }
    constexpr double m12() const { return b_; }
    constexpr double m21() const { return c_; }
    constexpr double m22() const { return d_; }

    Mat2 transpose() const { return {a_, c_, b_, d_}; }
    double det() const { return a_ * d_ - b_ * c_; }
    double trace() const { return a_ + d_; }
    /// Frobenius (Hilbert-Schmidt) inner product M . N = tr(M^T N).
    double frobenius_dot(const Mat2& n) const { return a_ * n.a_ + b_ * n.b_ + c_ * n.c_ + d_ * n.d_; }

    Vec2 operator*(Vec2 v) const { return {a_ * v.x + b_ * v.y, c_ * v.x + d_ * v.y}; }
    friend Mat2 operator*(const Mat2& m, const Mat2& n);
    friend Mat2 operator+(const Mat2& m, const Mat2& n);
    friend Mat2 operator-(const Mat2& m, const Mat2& n);
    friend Mat2 operator*(double s, const Mat2& m);
    friend bool operator==(const Mat2&, const Mat2&) = default;

private:
    double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
};

} // namespace hstv
