#pragma once

// Mutable triangle soup with neighbour links, used while building meshes:
// point insertion by splitting and Lawson edge flips with exact predicates.

#include <hstv/mesh.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace hstv::detail {

struct FlipMesh {
    std::vector<RationalPoint> points;
    std::vector<TriangleIndices> tris; // counterclockwise
    // nbrs[t][i]: triangle across the edge opposite tris[t][i], or -1.
    std::vector<std::array<std::int32_t, 3>> nbrs;

    void rebuild_neighbors();
    /// Flips the edge opposite tris[t][i] when it is not locally Delaunay.
    bool flip_if_illegal(std::size_t t, int i);
    /// Lawson sweeps until every interior edge is locally Delaunay.
    void make_delaunay();
    /// Inserts points[v] by splitting the triangle (or edge) containing it.
    void insert(std::uint32_t v);
};

} // namespace hstv::detail
