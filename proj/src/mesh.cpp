#include "flip_mesh.hpp"

#include <hstv/error.hpp>
#include <hstv/mesh.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hstv {

namespace {

struct HalfEdge {
    std::uint32_t lo, hi;
    std::int32_t tri;
    bool forward; // appears as lo -> hi in its triangle

    auto tie() const { return std::tuple(lo, hi, tri); }
};

std::string point_str(const RationalPoint& p) { return fmt::format("({}, {})", p.x.get_str(), p.y.get_str()); }

// Vertices strictly inside some edge. Candidates come from a bucket grid and a
// loose floating-point test; the verdict is exact.
void reject_hanging_vertices(std::span<const RationalPoint> vertices, std::span<const Vec2> pts,
                             std::span<const MeshEdge> edges)
{
    if (pts.empty())
        return;
    double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
    for (const Vec2& p : pts) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    const int n = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pts.size())))));
    const double w = std::max({x1 - x0, y1 - y0, 1e-300});
    const double cell = w / n;
    auto bucket = [&](double v, double lo) { return std::clamp(static_cast<int>((v - lo) / cell), 0, n - 1); };
    std::vector<std::vector<std::uint32_t>> grid(static_cast<std::size_t>(n) * n);
    for (std::uint32_t v = 0; v < pts.size(); ++v)
        grid[static_cast<std::size_t>(bucket(pts[v].y, y0)) * n + bucket(pts[v].x, x0)].push_back(v);

    for (const MeshEdge& e : edges) {
        const Vec2 a = pts[e.v0], b = pts[e.v1];
        const Vec2 d = b - a;
        const double len2 = dot(d, d);
        const double slack = 1e-9 * std::sqrt(len2);
        const int i0 = bucket(std::min(a.x, b.x) - slack, x0), i1 = bucket(std::max(a.x, b.x) + slack, x0);
        const int j0 = bucket(std::min(a.y, b.y) - slack, y0), j1 = bucket(std::max(a.y, b.y) + slack, y0);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                for (std::uint32_t v : grid[static_cast<std::size_t>(j) * n + i]) {
                    if (v == e.v0 || v == e.v1)
                        continue;
                    const Vec2 r = pts[v] - a;
                    if (std::abs(cross(d, r)) > 1e-9 * len2)
                        continue;
                    const double t = dot(d, r);
                    if (t < -1e-9 * len2 || t > (1 + 1e-9) * len2)
                        continue;
                    if (strictly_between(vertices[e.v0], vertices[e.v1], vertices[v]))
                        throw MeshError(fmt::format("hanging vertex {} {} on edge {}-{}", v, point_str(vertices[v]),
                                                    e.v0, e.v1));
                }
    }
}

// Sign of cross(b - a, c - a) from the double images, exact when unclear.
int orient_filtered(std::span<const RationalPoint> vs, std::span<const Vec2> pts, std::uint32_t a, std::uint32_t b,
                    std::uint32_t c)
{
    if (a == c || b == c)
        return 0;
    const Vec2 u = pts[b] - pts[a], w = pts[c] - pts[a];
    const double det = cross(u, w);
    const double mag = std::abs(pts[a].x) + std::abs(pts[a].y) + 1.0;
    const double bound = 1e-12 * (std::abs(u.x) + std::abs(u.y) + std::abs(w.x) + std::abs(w.y)) * mag;
    if (det > bound)
        return 1;
    if (det < -bound)
        return -1;
    return orient(vs[a], vs[b], vs[c]);
}

// Triangles with intersecting interiors. Nearby pairs come from a bucket grid;
// two counterclockwise triangles are interior-disjoint iff one of their six
// edge lines separates them (no vertex of the other strictly to its left).
void reject_overlaps(std::span<const RationalPoint> vs, std::span<const Vec2> pts,
                     std::span<const TriangleIndices> tris)
{
    double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
    for (const Vec2& p : pts) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    const int n = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(tris.size())))));
    const double cell = std::max({x1 - x0, y1 - y0, 1e-300}) / n;
    auto bucket = [&](double v, double lo) { return std::clamp(static_cast<int>((v - lo) / cell), 0, n - 1); };

    struct Box {
        int i0, i1, j0, j1;
    };
    std::vector<Box> boxes(tris.size());
    std::vector<std::vector<std::uint32_t>> grid(static_cast<std::size_t>(n) * n);
    for (std::size_t t = 0; t < tris.size(); ++t) {
        double bx0 = pts[tris[t][0]].x, bx1 = bx0, by0 = pts[tris[t][0]].y, by1 = by0;
        for (auto v : tris[t]) {
            bx0 = std::min(bx0, pts[v].x), bx1 = std::max(bx1, pts[v].x);
            by0 = std::min(by0, pts[v].y), by1 = std::max(by1, pts[v].y);
        }
        const double slack = 1e-9 * cell;
        boxes[t] = {bucket(bx0 - slack, x0), bucket(bx1 + slack, x0), bucket(by0 - slack, y0), bucket(by1 + slack, y0)};
        for (int j = boxes[t].j0; j <= boxes[t].j1; ++j)
            for (int i = boxes[t].i0; i <= boxes[t].i1; ++i)
                grid[static_cast<std::size_t>(j) * n + i].push_back(static_cast<std::uint32_t>(t));
    }

    auto separated_by = [&](const TriangleIndices& s, const TriangleIndices& o) {
        for (int e = 0; e < 3; ++e) {
            const auto a = s[e], b = s[(e + 1) % 3];
            bool separates = true;
            for (auto v : o)
                if (orient_filtered(vs, pts, a, b, v) > 0) {
                    separates = false;
                    break;
                }
            if (separates)
                return true;
        }
        return false;
    };

    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const auto& cellv = grid[static_cast<std::size_t>(j) * n + i];
            for (std::size_t x = 0; x < cellv.size(); ++x)
                for (std::size_t y = x + 1; y < cellv.size(); ++y) {
                    const auto t = cellv[x], u = cellv[y];
                    // Visit each pair once: in the first bucket both boxes share.
                    if (std::max(boxes[t].i0, boxes[u].i0) != i || std::max(boxes[t].j0, boxes[u].j0) != j)
                        continue;
                    if (!separated_by(tris[t], tris[u]) && !separated_by(tris[u], tris[t]))
                        throw MeshError(fmt::format("triangles {} and {} overlap", t, u));
                }
        }
}

} // namespace

std::vector<MeshEdge> build_adjacency(std::span<const RationalPoint> vertices,
                                      std::span<const TriangleIndices> triangles)
{
    const std::size_t nv = vertices.size();
    std::vector<char> used(nv, 0);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (auto v : tri)
            if (v >= nv)
                throw MeshError(fmt::format("triangle {} references missing vertex {}", t, v));
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw MeshError(fmt::format("triangle {} repeats a vertex", t));
        const int o = orient(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        if (o == 0)
            throw MeshError(fmt::format("triangle {} has zero area", t));
        if (o < 0)
            throw MeshError(fmt::format("triangle {} is clockwise", t));
        for (auto v : tri)
            used[v] = 1;
    }
    for (std::size_t v = 0; v < nv; ++v)
        if (!used[v])
            throw MeshError(fmt::format("vertex {} is not used by any triangle", v));

    std::vector<std::uint32_t> order(nv);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vertices[a] < vertices[b]; });
    for (std::size_t i = 1; i < nv; ++i)
        if (vertices[order[i - 1]] == vertices[order[i]])
            throw MeshError(fmt::format("vertices {} and {} coincide at {}", order[i - 1], order[i],
                                        point_str(vertices[order[i]])));

    std::vector<TriangleIndices> sorted(triangles.begin(), triangles.end());
    for (auto& tri : sorted)
        std::sort(tri.begin(), tri.end());
    std::sort(sorted.begin(), sorted.end());
    if (auto it = std::adjacent_find(sorted.begin(), sorted.end()); it != sorted.end())
        throw MeshError(fmt::format("duplicate triangle {{{}, {}, {}}}", (*it)[0], (*it)[1], (*it)[2]));

    std::vector<HalfEdge> half;
    half.reserve(triangles.size() * 3);
    for (std::size_t t = 0; t < triangles.size(); ++t)
        for (int i = 0; i < 3; ++i) {
            const auto a = triangles[t][i], b = triangles[t][(i + 1) % 3];
            half.push_back({std::min(a, b), std::max(a, b), static_cast<std::int32_t>(t), a < b});
        }
    std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) { return x.tie() < y.tie(); });

    std::vector<MeshEdge> edges;
    edges.reserve(half.size() / 2 + 1);
    for (std::size_t i = 0; i < half.size();) {
        std::size_t j = i;
        while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi)
            ++j;
        const std::size_t count = j - i;
        if (count > 2)
            throw MeshError(fmt::format("edge {}-{} is shared by {} triangles", half[i].lo, half[i].hi, count));
        MeshEdge e{half[i].lo, half[i].hi, half[i].tri, -1};
        if (count == 2) {
            if (half[i].forward == half[i + 1].forward)
                throw MeshError(fmt::format("triangles {} and {} overlap across edge {}-{}", half[i].tri,
                                            half[i + 1].tri, half[i].lo, half[i].hi));
            e.tri1 = half[i + 1].tri;
        }
        edges.push_back(e);
        i = j;
    }

    std::vector<Vec2> pts(nv);
    for (std::size_t v = 0; v < nv; ++v)
        pts[v] = {vertices[v].x.get_d(), vertices[v].y.get_d()};
    reject_hanging_vertices(vertices, pts, edges);
    reject_overlaps(vertices, pts, triangles);
    return edges;
}

Triangulation::Triangulation(std::vector<RationalPoint> vertices, std::vector<TriangleIndices> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles))
{
    if (triangles_.empty())
        throw MeshError("mesh has no triangles");
    edges_ = build_adjacency(vertices_, triangles_);
    points_.resize(vertices_.size());
    for (std::size_t v = 0; v < vertices_.size(); ++v)
        points_[v] = {vertices_[v].x.get_d(), vertices_[v].y.get_d()};
    interior_edges_ = static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](const MeshEdge& e) { return e.interior(); }));

    const Rational zero(0), one(1);
    auto inside = [&](const RationalPoint& p) { return p.x >= zero && p.x <= one && p.y >= zero && p.y <= one; };
    bool covers = std::all_of(vertices_.begin(), vertices_.end(), inside);
    for (std::size_t e = 0; covers && e < edges_.size(); ++e) {
        if (edges_[e].interior())
            continue;
        const auto& a = vertices_[edges_[e].v0];
        const auto& b = vertices_[edges_[e].v1];
        const bool on_side = (a.x == b.x && (a.x == zero || a.x == one)) || (a.y == b.y && (a.y == zero || a.y == one));
        covers = on_side;
    }
    if (covers) {
        std::vector<double> areas(triangles_.size());
        for (std::size_t t = 0; t < triangles_.size(); ++t)
            areas[t] = triangle_area(t);
        double total = 0.0;
        for (double a : areas)
            total += a;
        covers = std::abs(total - 1.0) <= 1e-9;
    }
    covers_unit_square_ = covers;
}

std::optional<std::size_t> Triangulation::find_edge(std::uint32_t a, std::uint32_t b) const
{
    if (a > b)
        std::swap(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(a, b),
                               [](const MeshEdge& e, std::pair<std::uint32_t, std::uint32_t> k) {
                                   return std::pair(e.v0, e.v1) < k;
                               });
    if (it == edges_.end() || it->v0 != a || it->v1 != b)
        return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
}

double Triangulation::edge_length(std::size_t e) const { return norm(points_[edges_[e].v1] - points_[edges_[e].v0]); }

double Triangulation::triangle_area(std::size_t t) const
{
    const auto& [a, b, c] = triangles_[t];
    return 0.5 * cross(points_[b] - points_[a], points_[c] - points_[a]);
}

CpwlFunction::CpwlFunction(std::shared_ptr<const Triangulation> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values))
{
    if (!mesh_)
        throw Error("CPWL function without a mesh");
    if (values_.size() != mesh_->vertex_count())
        throw Error(fmt::format("{} values for {} vertices", values_.size(), mesh_->vertex_count()));
    for (double v : values_)
        if (!std::isfinite(v))
            throw Error("non-finite vertex value");
}

Vec2 triangle_gradient(const Triangulation& mesh, std::span<const double> values, std::size_t t)
{
    const auto& [ia, ib, ic] = mesh.triangles()[t];
    const auto& pts = mesh.points();
    const Vec2 e1 = pts[ib] - pts[ic], e2 = pts[ia] - pts[ic];
    const double r1 = values[ib] - values[ic], r2 = values[ia] - values[ic];
    const double det = cross(e1, e2);
    if (det == 0.0)
        throw MeshError(fmt::format("triangle {} is degenerate", t));
    return {(r1 * e2.y - r2 * e1.y) / det, (e1.x * r2 - e2.x * r1) / det};
}

Vec2 triangle_gradient(const CpwlFunction& g, std::size_t t) { return triangle_gradient(g.mesh(), g.values(), t); }

double min_angle(const Triangulation& mesh)
{
    const auto& pts = mesh.points();
    const auto& tris = mesh.triangles();
    auto corner_angles = [&](std::size_t t) {
        std::array<double, 3> out{};
        for (int i = 0; i < 3; ++i) {
            const Vec2 u = pts[tris[t][(i + 1) % 3]] - pts[tris[t][i]];
            const Vec2 w = pts[tris[t][(i + 2) % 3]] - pts[tris[t][i]];
            out[i] = std::atan2(std::abs(cross(u, w)), dot(u, w));
        }
        return out;
    };
    double approx = std::numbers::pi;
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (double a : corner_angles(t))
            approx = std::min(approx, a);

    // Refine exactly: the smallest angle maximises cos^2 among acute corners.
    // Similar triangles then give bit-identical results.
    const auto& vs = mesh.vertices();
    std::optional<Rational> best;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto angles = corner_angles(t);
        for (int i = 0; i < 3; ++i) {
            if (angles[i] > approx + 1e-9)
                continue;
            const auto& o = vs[tris[t][i]];
            const auto& b = vs[tris[t][(i + 1) % 3]];
            const auto& c = vs[tris[t][(i + 2) % 3]];
            const Rational ux = b.x - o.x, uy = b.y - o.y, wx = c.x - o.x, wy = c.y - o.y;
            const Rational d = ux * wx + uy * wy;
            if (sgn(d) <= 0)
                continue;
            Rational cos2 = d * d / ((ux * ux + uy * uy) * (wx * wx + wy * wy));
            if (!best || cos2 > *best)
                best = std::move(cos2);
        }
    }
    if (!best)
        return approx;
    return std::acos(std::sqrt(best->get_d()));
}

Triangulation uniform_grid_mesh(int n, Diagonal diagonal)
{
    if (n < 1)
        throw Error("grid mesh needs n >= 1");
    std::vector<RationalPoint> vs;
    vs.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vs.push_back({make_rational(i, n), make_rational(j, n)});
    auto id = [n](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
    std::vector<TriangleIndices> ts;
    ts.reserve(static_cast<std::size_t>(2) * n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const auto v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
            if (diagonal == Diagonal::right) {
                ts.push_back({v00, v10, v11});
                ts.push_back({v00, v11, v01});
            } else {
                ts.push_back({v00, v10, v01});
                ts.push_back({v10, v11, v01});
            }
        }
    return {std::move(vs), std::move(ts)};
}

Triangulation delaunay_triangulation(std::vector<RationalPoint> points)
{
    if (points.size() < 4)
        throw MeshError("Delaunay input needs the four rectangle corners");
    Rational x0 = points[0].x, x1 = x0, y0 = points[0].y, y1 = y0;
    for (const auto& p : points) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    const RationalPoint corners[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    std::uint32_t cid[4];
    for (int c = 0; c < 4; ++c) {
        auto it = std::find(points.begin(), points.end(), corners[c]);
        if (it == points.end())
            throw MeshError("Delaunay input lacks a bounding-box corner");
        cid[c] = static_cast<std::uint32_t>(it - points.begin());
    }
    if (x0 == x1 || y0 == y1)
        throw MeshError("Delaunay input is degenerate");

    detail::FlipMesh fm;
    fm.points = std::move(points);
    fm.tris = {{cid[0], cid[1], cid[2]}, {cid[0], cid[2], cid[3]}};
    fm.rebuild_neighbors();
    for (std::uint32_t v = 0; v < fm.points.size(); ++v)
        if (std::find(std::begin(cid), std::end(cid), v) == std::end(cid))
            fm.insert(v);
    fm.make_delaunay();
    return {std::move(fm.points), std::move(fm.tris)};
}

std::array<double, 3> barycentric(const Triangulation& mesh, std::size_t t, Vec2 p)
{
    const auto& [ia, ib, ic] = mesh.triangles()[t];
    const auto& pts = mesh.points();
    const Vec2 a = pts[ia], b = pts[ib], c = pts[ic];
    const double det = cross(b - a, c - a);
    const double l1 = cross(p - a, c - a) / det;
    const double l2 = cross(b - a, p - a) / det;
    return {1.0 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(const Triangulation& mesh) : mesh_(&mesh)
{
    const auto& pts = mesh.points();
    double x1 = pts[0].x, y1 = pts[0].y;
    x0_ = x1, y0_ = y1;
    for (const Vec2& p : pts) {
        x0_ = std::min(x0_, p.x), x1 = std::max(x1, p.x);
        y0_ = std::min(y0_, p.y), y1 = std::max(y1, p.y);
    }
    const double span = std::max({x1 - x0_, y1 - y0_, 1e-300});
    const int n = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(mesh.triangle_count())))));
    cell_ = span / n;
    nx_ = std::max(1, static_cast<int>(std::ceil((x1 - x0_) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((y1 - y0_) / cell_)));
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        double bx0 = pts[tri[0]].x, bx1 = bx0, by0 = pts[tri[0]].y, by1 = by0;
        for (auto v : tri) {
            bx0 = std::min(bx0, pts[v].x), bx1 = std::max(bx1, pts[v].x);
            by0 = std::min(by0, pts[v].y), by1 = std::max(by1, pts[v].y);
        }
        const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / cell_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / cell_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((by0 - y0_) / cell_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((by1 - y0_) / cell_), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<std::uint32_t>(t));
    }
}

std::optional<std::size_t> PointLocator::locate(Vec2 p) const
{
    const int i = static_cast<int>(std::floor((p.x - x0_) / cell_));
    const int j = static_cast<int>(std::floor((p.y - y0_) / cell_));
    std::optional<std::size_t> best;
    double best_min = -1e-10;
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            const int bi = i + di, bj = j + dj;
            if (bi < 0 || bj < 0 || bi >= nx_ || bj >= ny_)
                continue;
            for (auto t : buckets_[static_cast<std::size_t>(bj) * nx_ + bi]) {
                const auto l = barycentric(*mesh_, t, p);
                const double m = std::min({l[0], l[1], l[2]});
                if (m >= 0.0)
                    return t;
                if (m > best_min) {
                    best_min = m;
                    best = t;
                }
            }
        }
    return best;
}

double PointLocator::evaluate(const CpwlFunction& g, Vec2 p) const
{
    const auto t = locate(p);
    if (!t)
        throw Error(fmt::format("point ({}, {}) is outside the mesh", p.x, p.y));
    const auto l = barycentric(*mesh_, *t, p);
    const auto& tri = mesh_->triangles()[*t];
    const auto& v = g.values();
    return l[0] * v[tri[0]] + l[1] * v[tri[1]] + l[2] * v[tri[2]];
}

} // namespace hstv
