#include "generators.hpp"

#include <hstv/error.hpp>
#include <hstv/mesh.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace hstv;

namespace {

RationalPoint pt(long long x, long long y, long long den = 1) { return {make_rational(x, den), make_rational(y, den)}; }

Triangulation split_square() { return {{pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)}, {{0, 1, 2}, {0, 2, 3}}}; }

// Corners plus centre, four triangles meeting at the centre.
Triangulation pyramid()
{
    return {{pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1), pt(1, 1, 2)}, {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}}};
}

std::string temp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

} // namespace

TEST(Rational, CanonicalForm)
{
    const Rational r = make_rational("6", "-4");
    EXPECT_EQ(numerator_string(r), "-3");
    EXPECT_EQ(denominator_string(r), "2");
    EXPECT_THROW(make_rational("1", "0"), Error);
    EXPECT_THROW(make_rational("1x", "2"), Error);
}

TEST(Predicates, OrientAndIncircle)
{
    EXPECT_EQ(orient(pt(0, 0), pt(1, 0), pt(0, 1)), 1);
    EXPECT_EQ(orient(pt(0, 0), pt(0, 1), pt(1, 0)), -1);
    EXPECT_EQ(orient(pt(0, 0), pt(1, 1, 3), pt(2, 2, 3)), 0);
    EXPECT_TRUE(in_circle(pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 3, 4)));
    EXPECT_FALSE(in_circle(pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1)));
    EXPECT_TRUE(strictly_between(pt(0, 0), pt(1, 1), pt(1, 1, 3)));
    EXPECT_FALSE(strictly_between(pt(0, 0), pt(1, 1), pt(1, 1)));
}

TEST(Predicates, OrientNearlyCollinearUsesExactFallback)
{
    // Offsets of 1e-30 vanish in double arithmetic.
    const RationalPoint a = pt(0, 0), b = pt(1, 1);
    RationalPoint c{Rational(1, 2), Rational(1, 2)};
    c.y += Rational(mpz_class(1), mpz_class("1000000000000000000000000000000"));
    EXPECT_EQ(orient(a, b, c), 1);
}

TEST(Adjacency, Examples)
{
    const auto sq = split_square();
    EXPECT_EQ(sq.edges().size(), 5u);
    EXPECT_EQ(sq.interior_edge_count(), 1u);
    EXPECT_TRUE(sq.covers_unit_square());

    const Triangulation one({pt(0, 0), pt(1, 0), pt(0, 1)}, {{0, 1, 2}});
    EXPECT_EQ(one.edges().size(), 3u);
    EXPECT_EQ(one.interior_edge_count(), 0u);
    EXPECT_FALSE(one.covers_unit_square());

    const Triangulation bow({pt(0, 0), pt(1, 0), pt(0, 1), pt(-1, 0), pt(0, -1)}, {{0, 1, 2}, {0, 3, 4}});
    EXPECT_EQ(bow.edges().size(), 6u);
    EXPECT_EQ(bow.interior_edge_count(), 0u);
}

TEST(Adjacency, Rejections)
{
    const std::vector<RationalPoint> sq = {pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)};
    EXPECT_THROW(Triangulation(sq, {{0, 2, 1}, {0, 2, 3}}), MeshError);            // clockwise
    EXPECT_THROW(Triangulation(sq, {{0, 1, 2}, {0, 2, 3}, {0, 1, 2}}), MeshError); // duplicate
    EXPECT_THROW(Triangulation(sq, {{0, 1, 2}}), MeshError);                       // unused vertex
    EXPECT_THROW(Triangulation(sq, {{0, 1, 2}, {0, 1, 3}}), MeshError);            // overlap
    EXPECT_THROW(Triangulation(sq, {{0, 1, 5}, {0, 2, 3}}), MeshError);            // bad index

    // Hanging vertex: the left triangle is split at the midpoint of the diagonal.
    EXPECT_THROW(Triangulation({pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1), pt(1, 1, 2)},
                               {{0, 1, 2}, {0, 4, 3}, {4, 2, 3}}),
                 MeshError);
    // Two crossing triangles with no shared vertex or edge.
    EXPECT_THROW(Triangulation({pt(0, 0), pt(4, 0), pt(2, 3), pt(0, 2), pt(2, -1), pt(4, 2)}, {{0, 1, 2}, {3, 4, 5}}),
                 MeshError);
    // Edge shared by three triangles.
    EXPECT_THROW(Triangulation({pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1), pt(0, -1)},
                               {{0, 1, 2}, {1, 3, 2}, {0, 4, 1}, {4, 1, 2}}),
                 MeshError);
}

TEST(Adjacency, PerturbedIndexIsRejected)
{
    gen::Gen gen(21);
    int rejected = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto mesh = gen.delaunay_mesh(12);
        auto tris = mesh->triangles();
        const auto t = static_cast<std::size_t>(gen.integer(0, static_cast<int>(tris.size()) - 1));
        const int slot = gen.integer(0, 2);
        auto v = static_cast<std::uint32_t>(gen.integer(0, static_cast<int>(mesh->vertex_count()) - 1));
        if (v == tris[t][slot])
            v = (v + 1) % static_cast<std::uint32_t>(mesh->vertex_count());
        tris[t][slot] = v;
        try {
            Triangulation bad(mesh->vertices(), tris);
        } catch (const MeshError&) {
            ++rejected;
        }
    }
    EXPECT_EQ(rejected, 60);
}

TEST(Gradient, Examples)
{
    const Triangulation tri({pt(0, 0), pt(1, 0), pt(0, 1)}, {{0, 1, 2}});
    const auto mesh = std::make_shared<const Triangulation>(tri);
    EXPECT_EQ(triangle_gradient(CpwlFunction(mesh, {0, 1, 0}), 0), (Vec2{1, 0}));
    EXPECT_EQ(triangle_gradient(CpwlFunction(mesh, {5, 5, 5}), 0), (Vec2{0, 0}));
}

TEST(Gradient, AffineReproduction)
{
    gen::Gen gen(22);
    for (int trial = 0; trial < 20; ++trial) {
        const auto mesh = gen.delaunay_mesh(20);
        const double a = gen.uniform(-5, 5), b = gen.uniform(-5, 5), c = gen.uniform(-5, 5);
        std::vector<double> v;
        for (const Vec2& p : mesh->points())
            v.push_back(a * p.x + b * p.y + c);
        const CpwlFunction g(mesh, v);
        for (std::size_t t = 0; t < mesh->triangle_count(); ++t) {
            const Vec2 grad = triangle_gradient(g, t);
            EXPECT_NEAR(grad.x, a, 1e-10);
            EXPECT_NEAR(grad.y, b, 1e-10);
        }
    }
}

TEST(MinAngle, Examples)
{
    EXPECT_NEAR(min_angle(split_square()), std::numbers::pi / 4, 1e-15);
    // Equilateral triangle with vertices (0,0), (2,0), (1, sqrt 3) needs an
    // irrational coordinate; a rational approximation stays within 1e-12.
    const Rational h = make_rational("1732050807568877", "1000000000000000");
    const Triangulation eq({pt(0, 0), pt(2, 0), {Rational(1), h}}, {{0, 1, 2}});
    EXPECT_NEAR(min_angle(eq), std::numbers::pi / 3, 1e-12);
}

TEST(GridMesh, CoversSquare)
{
    for (auto d : {Diagonal::right, Diagonal::left}) {
        const auto m = uniform_grid_mesh(5, d);
        EXPECT_EQ(m.vertex_count(), 36u);
        EXPECT_EQ(m.triangle_count(), 50u);
        EXPECT_TRUE(m.covers_unit_square());
        EXPECT_NEAR(min_angle(m), std::numbers::pi / 4, 1e-15);
    }
}

TEST(Delaunay, EmptyCircumcircles)
{
    gen::Gen gen(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto mesh = gen.delaunay_mesh(25);
        EXPECT_TRUE(mesh->covers_unit_square());
        const auto& vs = mesh->vertices();
        for (const auto& t : mesh->triangles())
            for (std::uint32_t v = 0; v < vs.size(); ++v)
                EXPECT_FALSE(in_circle(vs[t[0]], vs[t[1]], vs[t[2]], vs[v]));
    }
}

TEST(Delaunay, RejectsMissingCorner)
{
    EXPECT_THROW(delaunay_triangulation({pt(0, 0), pt(1, 0), pt(1, 1), pt(1, 2, 3)}), MeshError);
}

TEST(PointLocator, EvaluatesInterpolant)
{
    gen::Gen gen(24);
    const auto mesh = gen.delaunay_mesh(30);
    std::vector<double> v;
    for (const Vec2& p : mesh->points())
        v.push_back(2 * p.x - p.y + 0.5);
    const CpwlFunction g(mesh, v);
    const PointLocator loc(*mesh);
    for (int i = 0; i < 500; ++i) {
        const Vec2 p{gen.uniform(0, 1), gen.uniform(0, 1)};
        EXPECT_NEAR(loc.evaluate(g, p), 2 * p.x - p.y + 0.5, 1e-12);
    }
    EXPECT_FALSE(loc.locate({3.0, 3.0}).has_value());
}

TEST(MeshIo, RoundTripIsExact)
{
    const auto mesh = std::make_shared<const Triangulation>(pyramid());
    const CpwlFunction hat(mesh, {0, 0, 0, 0, 1.0 / 3.0});
    const std::string path = temp_path("hstv_roundtrip.json");
    save_mesh(hat, path);
    const CpwlFunction back = load_mesh(path);
    EXPECT_EQ(back.values(), hat.values());
    EXPECT_EQ(back.mesh().vertices(), hat.mesh().vertices());
    EXPECT_EQ(back.mesh().triangles(), hat.mesh().triangles());
    std::filesystem::remove(path);
}

TEST(MeshIo, RejectsBadFiles)
{
    const std::string hanging = R"({"vertices": [["0","1","0","1"],["1","1","0","1"],["1","1","1","1"],
        ["0","1","1","1"],["1","2","1","2"]], "triangles": [[0,1,2],[0,4,3],[4,2,3]]})";
    EXPECT_THROW(parse_mesh_json(hanging), MeshError);
    EXPECT_THROW(parse_mesh_json("{\"vertices\": 3}"), Error);
    EXPECT_THROW(parse_mesh_json("not json"), Error);
    EXPECT_THROW(parse_mesh_json(R"({"vertices": [["0","0","0","1"]], "triangles": []})"), Error);
    EXPECT_THROW(load_mesh(temp_path("hstv_does_not_exist.json")), Error);
}

TEST(MeshIo, SvgHasOnePolygonPerTriangle)
{
    const auto mesh = std::make_shared<const Triangulation>(pyramid());
    const std::string svg = render_svg(CpwlFunction(mesh, {0, 0, 0, 0, 1}), SvgOptions{.fill_values = true});
    std::size_t count = 0;
    for (std::size_t pos = 0; (pos = svg.find("<polygon", pos)) != std::string::npos; ++pos)
        ++count;
    EXPECT_EQ(count, 4u);
}
