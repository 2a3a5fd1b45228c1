#include "generators.hpp"

#include <hstv/error.hpp>
#include <hstv/field.hpp>
#include <hstv/parallel.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace hstv;

namespace {

std::vector<FieldPtr> zoo()
{
    return {parse_field("quadratic:iso"),
            parse_field("quadratic:1.5,-0.5,2,0.3,-1,2"),
            make_rotated_quadratic(2, 1, std::atan(0.5)),
            make_gaussian_bump(0.2, {0.4, 0.6}),
            make_product_sine(std::numbers::pi),
            make_affine(1, -2, 3),
            extend_reflection(make_gaussian_bump(0.3, {0.2, 0.5}), Side::left),
            extend_reflection(make_product_sine(2.0), Side::top)};
}

double rel_err(double got, double want, double scale) { return std::abs(got - want) / std::max(scale, 1.0); }

} // namespace

TEST(Field, BuiltinExamples)
{
    const auto iso = parse_field("quadratic:iso");
    EXPECT_EQ(iso->hessian({0.3, 0.9}), Mat2::identity());
    EXPECT_DOUBLE_EQ(iso->value({1, 2}), 2.5);

    const auto rq = parse_field("rotated-quadratic:2,1,0.4636476090008061");
    const auto frame = sym_eigen_frame(rq->hessian({0.1, 0.2}));
    EXPECT_NEAR(frame.diagonal.m11(), 2.0, 1e-12);
    EXPECT_NEAR(frame.diagonal.m22(), 1.0, 1e-12);
    EXPECT_NEAR(frame.theta, std::atan(0.5), 1e-12);

    // Laplacian of exp(-r^2/(2 s^2)) is f (r^2/s^4 - 2/s^2).
    const double s = 0.2;
    const auto bump = make_gaussian_bump(s, {0.5, 0.5});
    for (Vec2 x : {Vec2{0.5, 0.5}, Vec2{0.7, 0.4}, Vec2{0.1, 0.95}}) {
        const double r2 = dot(x - Vec2{0.5, 0.5}, x - Vec2{0.5, 0.5});
        const double lap = bump->value(x) * (r2 / (s * s * s * s) - 2 / (s * s));
        EXPECT_NEAR(bump->hessian(x).trace(), lap, 1e-12);
    }
}

TEST(Field, DescriptorErrors)
{
    EXPECT_THROW(parse_field("cubic:1"), Error);
    EXPECT_THROW(parse_field("rotated-quadratic:1,2"), Error);
    EXPECT_THROW(parse_field("affine:1,x,2"), Error);
    EXPECT_THROW(parse_field("gaussian-bump:-1"), Error);
    EXPECT_EQ(parse_field("product_sine")->descriptor(), make_product_sine(std::numbers::pi)->descriptor());
}

TEST(FieldProperty, DerivativesMatchFiniteDifferences)
{
    gen::Gen gen(31);
    const double h = 1e-4;
    for (const auto& f : zoo())
        for (int k = 0; k < 200; ++k) {
            const Vec2 x{gen.uniform(0.05, 0.95), gen.uniform(0.05, 0.95)};
            const Vec2 ex{h, 0}, ey{0, h};
            const Vec2 g = f->gradient(x);
            const double gx = (f->value(x + ex) - f->value(x - ex)) / (2 * h);
            const double gy = (f->value(x + ey) - f->value(x - ey)) / (2 * h);
            const double gs = norm(g);
            EXPECT_LE(rel_err(gx, g.x, gs), 1e-5) << f->descriptor();
            EXPECT_LE(rel_err(gy, g.y, gs), 1e-5) << f->descriptor();

            const Mat2 H = f->hessian(x);
            EXPECT_EQ(H.m12(), H.m21()) << f->descriptor();
            const Vec2 hx = (1 / (2 * h)) * (f->gradient(x + ex) - f->gradient(x - ex));
            const Vec2 hy = (1 / (2 * h)) * (f->gradient(x + ey) - f->gradient(x - ey));
            const double hs = schatten_norm(H, SchattenP::two());
            EXPECT_LE(rel_err(hx.x, H.m11(), hs), 1e-5) << f->descriptor();
            EXPECT_LE(rel_err(hx.y, H.m21(), hs), 1e-5) << f->descriptor();
            EXPECT_LE(rel_err(hy.x, H.m12(), hs), 1e-5) << f->descriptor();
            EXPECT_LE(rel_err(hy.y, H.m22(), hs), 1e-5) << f->descriptor();
        }
}

TEST(Quadrature, ReferenceValues)
{
    const auto iso = parse_field("quadratic:iso");
    EXPECT_NEAR(htv_quadrature(*iso, SchattenP::one(), 256), 2.0, 1e-6);
    EXPECT_NEAR(htv_quadrature(*iso, SchattenP::two(), 256), std::sqrt(2.0), 1e-6);
    EXPECT_NEAR(htv_quadrature(*make_rotated_quadratic(2, 1, std::atan(0.5)), SchattenP::one(), 256), 3.0, 1e-6);
    for (auto p : {SchattenP::one(), SchattenP::two(), SchattenP::inf()})
        EXPECT_EQ(htv_quadrature(*make_affine(2, 3, 4), p, 64), 0.0);
    EXPECT_THROW(htv_quadrature(*iso, SchattenP::one(), 1), Error);
}

TEST(Quadrature, RichardsonRatio)
{
    const auto bump = make_gaussian_bump(0.2, {0.45, 0.55});
    const double q16 = htv_quadrature(*bump, SchattenP::two(), 16);
    const double q32 = htv_quadrature(*bump, SchattenP::two(), 32);
    const double q64 = htv_quadrature(*bump, SchattenP::two(), 64);
    const double q128 = htv_quadrature(*bump, SchattenP::two(), 128);
    const double r1 = std::abs(q32 - q16) / std::abs(q64 - q32);
    const double r2 = std::abs(q64 - q32) / std::abs(q128 - q64);
    EXPECT_GT(r1, 3.0);
    EXPECT_LT(r1, 5.0);
    EXPECT_GT(r2, 3.5);
    EXPECT_LT(r2, 4.5);
}

TEST(Quadrature, NuclearDominatesSpectral)
{
    for (const auto& f : zoo())
        EXPECT_GE(htv_quadrature(*f, SchattenP::one(), 64), htv_quadrature(*f, SchattenP::inf(), 64))
            << f->descriptor();
}

TEST(Quadrature, ParallelMatchesSerialBitwise)
{
    const auto f = make_product_sine(3.0);
    const double ref = reference::htv_quadrature(*f, SchattenP::one(), 200);
    for (int threads : {1, 2, 3, 8}) {
        parallel::set_threads(threads);
        EXPECT_EQ(htv_quadrature(*f, SchattenP::one(), 200), ref);
    }
    parallel::set_threads(0);
}

TEST(Mollify, ConstantStaysConstant)
{
    GridSample u({0, 0}, 0.1, 20, 15);
    std::fill(u.values.begin(), u.values.end(), 2.5);
    const GridSample m = mollify(u, 0.35);
    EXPECT_EQ(m.nx, 14);
    EXPECT_EQ(m.ny, 9);
    EXPECT_NEAR(m.origin.x, 0.3, 1e-15);
    for (double v : m.values)
        EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(Mollify, SpikeKeepsMass)
{
    GridSample u({0, 0}, 0.05, 41, 41);
    u.at(20, 21) = 7.0;
    const GridSample m = mollify(u, 0.2);
    EXPECT_NEAR(m.sum(), 7.0, 1e-10);
    int nonzero = 0;
    for (double v : m.values)
        nonzero += v > 0;
    EXPECT_GT(nonzero, 20);
}

TEST(Mollify, RejectsSmallRadius)
{
    GridSample u({0, 0}, 0.1, 10, 10);
    EXPECT_THROW(mollify(u, 0.05), Error);
}

TEST(Mollify, ParallelMatchesSerialBitwise)
{
    gen::Gen gen(32);
    GridSample u({0, 0}, 0.02, 60, 50);
    u.values = gen.values(u.values.size());
    const GridSample ref = reference::mollify(u, 0.09);
    parallel::set_threads(3);
    const GridSample par = mollify(u, 0.09);
    parallel::set_threads(0);
    EXPECT_EQ(par.values, ref.values);
}

TEST(MollifyProperty, EnergyDoesNotIncrease)
{
    gen::Gen gen(33);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = gen.integer(12, 40);
        GridSample u({0, 0}, 1.0 / n, n, n);
        u.values = gen.values(u.values.size());
        const double radius = u.h * gen.uniform(1.0, 3.5);
        for (auto p : {SchattenP::one(), SchattenP::two(), SchattenP::inf()})
            EXPECT_LE(discrete_htv(mollify(u, radius), p), discrete_htv(u, p) + 1e-6);
    }
    // The smooth quadratic on a window enlarged by the mollifier radius.
    const auto iso = parse_field("quadratic:iso");
    const double h = 1.0 / 64, radius = 4 * h;
    const GridSample u = sample(*iso, {-radius, -radius}, h, 64 + 9, 64 + 9);
    EXPECT_LE(discrete_htv(mollify(u, radius), SchattenP::one()), discrete_htv(u, SchattenP::one()) + 1e-6);
}

TEST(Reflection, Examples)
{
    const auto x = extend_reflection(make_affine(1, 0, 0));
    for (double t : {0.01, 0.2, 0.45})
        EXPECT_NEAR(x->value({-t, 0.3}), -t, 1e-15);
    const auto one = extend_reflection(make_affine(0, 0, 1));
    EXPECT_DOUBLE_EQ(one->value({-0.3, 0.7}), 1.0);
    EXPECT_THROW(x->value({-0.5, 0.2}), Error);
    EXPECT_THROW(extend_reflection(make_affine(0, 0, 1), Side::right)->value({1.6, 0.2}), Error);
}

TEST(Reflection, C1MatchingAcrossTheSide)
{
    const auto f = make_gaussian_bump(0.25, {0.3, 0.4});
    const double h = 1e-5;
    for (Side side : {Side::left, Side::right, Side::bottom, Side::top}) {
        const auto e = extend_reflection(f, side);
        const bool horiz = side == Side::left || side == Side::right;
        const double c = (side == Side::left || side == Side::bottom) ? 0.0 : 1.0;
        for (double t : {0.1, 0.5, 0.8}) {
            const Vec2 on = horiz ? Vec2{c, t} : Vec2{t, c};
            const Vec2 n = horiz ? Vec2{h, 0} : Vec2{0, h};
            // Outer-side value extrapolated to the side.
            EXPECT_NEAR(2 * e->value(on - n) - e->value(on - 2 * n), e->value(on), 1e-5);
            // Second-order one-sided normal derivatives from each side.
            const double plus = (-3 * e->value(on) + 4 * e->value(on + n) - e->value(on + 2 * n)) / (2 * h);
            const double minus = (3 * e->value(on) - 4 * e->value(on - n) + e->value(on - 2 * n)) / (2 * h);
            EXPECT_NEAR(plus, minus, 1e-5);
            EXPECT_NEAR(dot(e->gradient(on - 1e-3 * n), n), dot(e->gradient(on), n), 1e-5 * h);
        }
    }
}

TEST(ReflectionProperty, LinearAndAffineExact)
{
    gen::Gen gen(34);
    const auto f = make_product_sine(2.0), g = make_gaussian_bump(0.3, {0.6, 0.2});
    const auto ef = extend_reflection(f), eg = extend_reflection(g);
    for (int k = 0; k < 200; ++k) {
        const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2), c = gen.uniform(-2, 2);
        const Vec2 x{gen.uniform(-0.49, 1), gen.uniform(0, 1)};
        const auto ea = extend_reflection(make_affine(a, b, c));
        EXPECT_NEAR(ea->value(x), a * x.x + b * x.y + c, 1e-13);
        EXPECT_EQ(ea->hessian(x), Mat2{});
        // Linearity through the defining formula with a sum field.
        const double lhs = a * ef->value(x) + b * eg->value(x);
        const double rhs = x.x >= 0 ? a * f->value(x) + b * g->value(x)
                                    : 3 * (a * f->value({-x.x, x.y}) + b * g->value({-x.x, x.y})) -
                                          2 * (a * f->value({-2 * x.x, x.y}) + b * g->value({-2 * x.x, x.y}));
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Reflection, GridAgreesWithFieldVersion)
{
    const auto f = make_gaussian_bump(0.3, {0.4, 0.5});
    const double h = 1.0 / 32;
    const GridSample u = sample(*f, {0, 0}, h, 33, 33);
    const GridSample e = extend_reflection(u);
    EXPECT_EQ(e.nx, 33 + 15);
    const auto ef = extend_reflection(f);
    for (int j = 0; j < e.ny; ++j)
        for (int i = 0; i < e.nx; ++i)
            EXPECT_NEAR(e.at(i, j), ef->value(e.node(i, j)), 1e-14);
    const GridSample t = transpose(e);
    EXPECT_EQ(t.at(3, 5), e.at(5, 3));
    EXPECT_THROW(extend_reflection(sample(*f, {0.1, 0}, h, 5, 5)), Error);
}
