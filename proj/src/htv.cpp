#include <hstv/error.hpp>
#include <hstv/htv.hpp>
#include <hstv/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hstv {

namespace {

void require_cover(const CpwlFunction& g)
{
    if (!g.mesh().covers_unit_square())
        throw Error("HTV needs a mesh covering [0,1]^2");
}

std::vector<std::size_t> interior_edges(const Triangulation& mesh)
{
    std::vector<std::size_t> ids;
    ids.reserve(mesh.interior_edge_count());
    for (std::size_t e = 0; e < mesh.edges().size(); ++e)
        if (mesh.edges()[e].interior())
            ids.push_back(e);
    return ids;
}

EdgeContribution contribution(const Triangulation& mesh, const std::vector<Vec2>& grads, std::size_t e)
{
    const MeshEdge& edge = mesh.edges()[e];
    EdgeContribution c;
    c.edge = e;
    c.jump = grads[static_cast<std::size_t>(edge.tri1)] - grads[static_cast<std::size_t>(edge.tri0)];
    c.length = mesh.edge_length(e);
    c.contribution = norm(c.jump) * c.length;
    return c;
}

double total_of(const std::vector<EdgeContribution>& per_edge)
{
    std::vector<double> parts(per_edge.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
        parts[i] = per_edge[i].contribution;
    return parallel::pairwise_sum(parts);
}

std::vector<Vec2> gradients(const CpwlFunction& g)
{
    std::vector<Vec2> grads(g.mesh().triangle_count());
    parallel::for_each_index(grads.size(), [&](std::size_t t) { grads[t] = triangle_gradient(g, t); });
    return grads;
}

} // namespace

HtvReport htv_cpwl(const CpwlFunction& g, SchattenP p)
{
    require_cover(g);
    const Triangulation& mesh = g.mesh();
    const auto grads = gradients(g);
    const auto ids = interior_edges(mesh);
    HtvReport r;
    r.p = p;
    r.per_edge.resize(ids.size());
    parallel::for_each_index(ids.size(), [&](std::size_t i) { r.per_edge[i] = contribution(mesh, grads, ids[i]); });
    r.total = total_of(r.per_edge);
    return r;
}

HtvReport reference::htv_cpwl(const CpwlFunction& g, SchattenP p)
{
    require_cover(g);
    const Triangulation& mesh = g.mesh();
    std::vector<Vec2> grads(mesh.triangle_count());
    for (std::size_t t = 0; t < grads.size(); ++t)
        grads[t] = triangle_gradient(g, t);
    HtvReport r;
    r.p = p;
    for (std::size_t e = 0; e < mesh.edges().size(); ++e)
        if (mesh.edges()[e].interior())
            r.per_edge.push_back(contribution(mesh, grads, e));
    r.total = total_of(r.per_edge);
    return r;
}

std::vector<double> signed_jumps(const CpwlFunction& g)
{
    const Triangulation& mesh = g.mesh();
    const auto grads = gradients(g);
    std::vector<double> out(mesh.edges().size(), 0.0);
    for (std::size_t e = 0; e < out.size(); ++e) {
        const MeshEdge& edge = mesh.edges()[e];
        if (!edge.interior())
            continue;
        const Vec2 d = mesh.points()[edge.v1] - mesh.points()[edge.v0];
        const Vec2 nu = (1 / norm(d)) * Vec2{d.y, -d.x};
        out[e] = dot(grads[static_cast<std::size_t>(edge.tri1)] - grads[static_cast<std::size_t>(edge.tri0)], nu);
    }
    return out;
}

EdgeSupport htv_support(const CpwlFunction& g, double tol)
{
    if (tol < 0)
        throw Error("support tolerance must be non-negative");
    const HtvReport r = htv_cpwl(g);
    EdgeSupport s;
    for (const auto& c : r.per_edge)
        if (c.contribution > tol) {
            s.edges.push_back(c.edge);
            s.total_length += c.length;
        }
    return s;
}

EdgeSupport relative_support(const CpwlFunction& g, double rel)
{
    const HtvReport r = htv_cpwl(g);
    double biggest = 0;
    for (const auto& c : r.per_edge)
        biggest = std::max(biggest, norm(c.jump));
    // Rounding level of the gradients: |v| times the largest weight
    // |opposite edge| / (2 area) of any triangle.
    const Triangulation& mesh = g.mesh();
    double weight = 0, vmax = 0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const auto& p = mesh.points();
        const double perimeter = norm(p[tri[1]] - p[tri[0]]) + norm(p[tri[2]] - p[tri[1]]) + norm(p[tri[0]] - p[tri[2]]);
        weight = std::max(weight, perimeter / (2 * mesh.triangle_area(t)));
    }
    for (double v : g.values())
        vmax = std::max(vmax, std::abs(v));
    const double noise = 256 * std::numeric_limits<double>::epsilon() * vmax * weight;
    EdgeSupport s;
    if (biggest <= noise)
        return s;
    for (const auto& c : r.per_edge)
        if (norm(c.jump) > std::max(rel * biggest, noise)) {
            s.edges.push_back(c.edge);
            s.total_length += c.length;
        }
    return s;
}

double p_independence_check(const CpwlFunction& g)
{
    const HtvReport r = htv_cpwl(g);
    const Triangulation& mesh = g.mesh();
    const SchattenP ps[] = {SchattenP::one(), SchattenP::two(), SchattenP::inf()};
    double totals[3];
    for (int k = 0; k < 3; ++k) {
        std::vector<double> parts(r.per_edge.size());
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const auto& c = r.per_edge[i];
            const MeshEdge& edge = mesh.edges()[c.edge];
            const Vec2 d = mesh.points()[edge.v1] - mesh.points()[edge.v0];
            const Vec2 nu = (1 / norm(d)) * Vec2{d.y, -d.x};
            parts[i] = schatten_norm(Mat2::outer(c.jump, nu), ps[k]) * c.length;
        }
        totals[k] = parallel::pairwise_sum(parts);
    }
    const double hi = std::max({totals[0], totals[1], totals[2]});
    const double lo = std::min({totals[0], totals[1], totals[2]});
    return hi == 0 ? 0.0 : (hi - lo) / hi;
}

} // namespace hstv
