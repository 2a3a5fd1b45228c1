#include "flip_mesh.hpp"

#include <hstv/error.hpp>

#include <fmt/format.h>

#include <unordered_map>

namespace hstv::detail {

namespace {

std::uint64_t key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

void repoint(std::vector<std::array<std::int32_t, 3>>& nbrs, std::int32_t tri, std::int32_t from, std::int32_t to)
{
    if (tri < 0)
        return;
    for (auto& n : nbrs[static_cast<std::size_t>(tri)])
        if (n == from) {
            n = to;
            return;
        }
}

} // namespace

void FlipMesh::rebuild_neighbors()
{
    std::unordered_map<std::uint64_t, std::int32_t> owner;
    owner.reserve(tris.size() * 3);
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (int i = 0; i < 3; ++i)
            owner[key(tris[t][(i + 1) % 3], tris[t][(i + 2) % 3])] = static_cast<std::int32_t>(t);
    nbrs.assign(tris.size(), {-1, -1, -1});
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (int i = 0; i < 3; ++i) {
            auto it = owner.find(key(tris[t][(i + 2) % 3], tris[t][(i + 1) % 3]));
            if (it != owner.end())
                nbrs[t][i] = it->second;
        }
}

bool FlipMesh::flip_if_illegal(std::size_t t, int i)
{
    const std::int32_t u = nbrs[t][i];
    if (u < 0)
        return false;
    const auto us = static_cast<std::size_t>(u);
    const std::uint32_t a = tris[t][i], b = tris[t][(i + 1) % 3], c = tris[t][(i + 2) % 3];
    int j = 0;
    while (tris[us][j] == b || tris[us][j] == c)
        ++j;
    const std::uint32_t d = tris[us][j];
    if (!in_circle(points[a], points[b], points[c], points[d]))
        return false;
    if (orient(points[a], points[b], points[d]) <= 0 || orient(points[a], points[d], points[c]) <= 0)
        return false;

    const auto ti = static_cast<std::int32_t>(t);
    const std::int32_t n_ca = nbrs[t][(i + 1) % 3];
    const std::int32_t n_ab = nbrs[t][(i + 2) % 3];
    const std::int32_t n_bd = nbrs[us][(j + 1) % 3];
    const std::int32_t n_dc = nbrs[us][(j + 2) % 3];

    tris[t] = {a, b, d};
    nbrs[t] = {n_bd, u, n_ab};
    tris[us] = {a, d, c};
    nbrs[us] = {n_dc, n_ca, ti};
    repoint(nbrs, n_bd, u, ti);
    repoint(nbrs, n_ca, ti, u);
    return true;
}

void FlipMesh::make_delaunay()
{
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t t = 0; t < tris.size(); ++t)
            for (int i = 0; i < 3; ++i)
                if (flip_if_illegal(t, i))
                    changed = true;
    }
}

void FlipMesh::insert(std::uint32_t v)
{
    const RationalPoint& p = points[v];
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto [a, b, c] = tris[t];
        const int o[3] = {orient(points[b], points[c], p), orient(points[c], points[a], p),
                          orient(points[a], points[b], p)};
        if (o[0] < 0 || o[1] < 0 || o[2] < 0)
            continue;
        const int zeros = (o[0] == 0) + (o[1] == 0) + (o[2] == 0);
        if (zeros >= 2)
            throw MeshError(fmt::format("duplicate point {} ({}, {})", v, p.x.get_str(), p.y.get_str()));
        if (zeros == 0) {
            tris[t] = {a, b, v};
            tris.push_back({b, c, v});
            tris.push_back({c, a, v});
        } else {
            const int i = o[0] == 0 ? 0 : (o[1] == 0 ? 1 : 2);
            const std::uint32_t ta = tris[t][i], tb = tris[t][(i + 1) % 3], tc = tris[t][(i + 2) % 3];
            const std::int32_t u = nbrs[t][i];
            tris[t] = {ta, tb, v};
            tris.push_back({ta, v, tc});
            if (u >= 0) {
                auto& tu = tris[static_cast<std::size_t>(u)];
                int j = 0;
                while (tu[j] == tb || tu[j] == tc)
                    ++j;
                const std::uint32_t d = tu[j];
                tu = {d, tc, v};
                tris.push_back({d, v, tb});
            }
        }
        rebuild_neighbors();
        return;
    }
    throw MeshError(fmt::format("point {} lies outside the triangulated region", v));
}

} // namespace hstv::detail
