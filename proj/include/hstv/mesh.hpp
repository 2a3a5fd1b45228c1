#pragma once

#include <hstv/mat2.hpp>
#include <hstv/rational.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hstv {

using TriangleIndices = std::array<std::uint32_t, 3>;

/// Undirected edge v0 < v1 with its incident triangles; tri1 = -1 on the boundary.
struct MeshEdge {
    std::uint32_t v0 = 0;
    std::uint32_t v1 = 0;
    std::int32_t tri0 = -1;
    std::int32_t tri1 = -1;

    bool interior() const { return tri1 >= 0; }
};

/// Validates a vertex/triangle array and returns its edge table, sorted by
/// (v0, v1). Throws MeshError on a hanging vertex, an edge with more than two
/// incident triangles, overlapping or duplicate triangles, clockwise or
/// degenerate triangles, duplicate or unreferenced vertices.
std::vector<MeshEdge> build_adjacency(std::span<const RationalPoint> vertices,
                                      std::span<const TriangleIndices> triangles);

/// Conforming triangle mesh with exact coordinates. Immutable once built.
class Triangulation {
public:
    Triangulation(std::vector<RationalPoint> vertices, std::vector<TriangleIndices> triangles);

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }
    std::size_t interior_edge_count() const { return interior_edges_; }

    const std::vector<RationalPoint>& vertices() const { return vertices_; }
    const std::vector<Vec2>& points() const { return points_; }
    const std::vector<TriangleIndices>& triangles() const { return triangles_; }
    const std::vector<MeshEdge>& edges() const { return edges_; }

    /// Index of edge {a, b} in edges(), if present.
    std::optional<std::size_t> find_edge(std::uint32_t a, std::uint32_t b) const;
    double edge_length(std::size_t e) const;
    double triangle_area(std::size_t t) const;

    /// True when the mesh tiles exactly [0,1]^2: vertices inside the square,
    /// boundary edges on its sides, total area one.
    bool covers_unit_square() const { return covers_unit_square_; }

private:
    std::vector<RationalPoint> vertices_;
    std::vector<Vec2> points_;
    std::vector<TriangleIndices> triangles_;
    std::vector<MeshEdge> edges_;
    std::size_t interior_edges_ = 0;
    bool covers_unit_square_ = false;
};

/// Continuous piecewise-linear function: a shared mesh plus vertex values.
class CpwlFunction {
public:
    CpwlFunction(std::shared_ptr<const Triangulation> mesh, std::vector<double> values);

    const Triangulation& mesh() const { return *mesh_; }
    const std::shared_ptr<const Triangulation>& mesh_ptr() const { return mesh_; }
    const std::vector<double>& values() const { return values_; }

    /// Same mesh, new values.
    CpwlFunction with_values(std::vector<double> values) const { return {mesh_, std::move(values)}; }

private:
    std::shared_ptr<const Triangulation> mesh_;
    std::vector<double> values_;
};

/// Constant gradient a of g on triangle t: a.(B-C) = g(B)-g(C), a.(A-C) = g(A)-g(C).
Vec2 triangle_gradient(const CpwlFunction& g, std::size_t t);
/// Gradient from raw vertex values, for callers holding only a mesh.
Vec2 triangle_gradient(const Triangulation& mesh, std::span<const double> values, std::size_t t);

/// Smallest interior angle over all triangles, in radians.
double min_angle(const Triangulation& mesh);

enum class Diagonal {
    right, ///< cells split along (1, 1)
    left,  ///< cells split along (1, -1)
};

/// n x n cell grid of [0,1]^2, each cell split by one diagonal.
Triangulation uniform_grid_mesh(int n, Diagonal diagonal = Diagonal::right);

/// Delaunay triangulation of points inside an axis-aligned rectangle whose four
/// corners are among the points. Exact predicates; co-circular ties keep the
/// first triangulation reached, so the output is deterministic.
Triangulation delaunay_triangulation(std::vector<RationalPoint> points);

/// Bucket grid over triangles for point location.
class PointLocator {
public:
    explicit PointLocator(const Triangulation& mesh);

    /// Triangle containing p (closed, with a small tolerance), if any.
    std::optional<std::size_t> locate(Vec2 p) const;
    /// Value of g at p; throws hstv::Error outside the mesh.
    double evaluate(const CpwlFunction& g, Vec2 p) const;

private:
    const Triangulation* mesh_;
    double x0_ = 0, y0_ = 0, cell_ = 1;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<std::uint32_t>> buckets_;
};

/// Barycentric coordinates of p in triangle t.
std::array<double, 3> barycentric(const Triangulation& mesh, std::size_t t, Vec2 p);

// --- serialization ---------------------------------------------------------

/// JSON: {"vertices": [[num_x, den_x, num_y, den_y], ...], "triangles": [[i,j,k], ...],
/// "values": ["0.5", ...]}. Missing values load as zeros.
CpwlFunction load_mesh(const std::string& path);
CpwlFunction parse_mesh_json(const std::string& text);
void save_mesh(const CpwlFunction& g, const std::string& path);
std::string mesh_json(const CpwlFunction& g);

struct SvgOptions {
    double size = 800.0;      ///< pixels per unit length
    bool fill_values = false; ///< grey-scale fill by mean vertex value
    double stroke = 0.6;
};

std::string render_svg(const CpwlFunction& g, const SvgOptions& options = {});
void render_svg(const CpwlFunction& g, const std::string& path, const SvgOptions& options = {});

} // namespace hstv
