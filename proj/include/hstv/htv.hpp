#pragma once

#include <hstv/mesh.hpp>
#include <hstv/schatten.hpp>

#include <vector>

namespace hstv {

struct EdgeContribution {
    std::size_t edge = 0; ///< index into Triangulation::edges()
    Vec2 jump;            ///< a(tri1) - a(tri0)
    double length = 0;
    double contribution = 0; ///< |jump| * length
};

struct HtvReport {
    double total = 0;
    std::vector<EdgeContribution> per_edge; ///< interior edges, ascending edge id
    SchattenP p = SchattenP::one();
};

/// HTV of a CPWL function on (0,1)^2: the sum over interior edges of
/// |a' - a| times the edge length. Jumps are rank one, so the value is the same
/// for every p. Boundary edges contribute nothing. Throws hstv::Error unless
/// the mesh covers [0,1]^2.
HtvReport htv_cpwl(const CpwlFunction& g, SchattenP p = SchattenP::one());

/// Per-edge jump of the normal derivative, dot(a(tri1) - a(tri0), nu) with
/// nu the unit normal of (v0 -> v1) rotated clockwise. Zero on boundary edges.
std::vector<double> signed_jumps(const CpwlFunction& g);

struct EdgeSupport {
    std::vector<std::size_t> edges; ///< interior edge ids, ascending
    double total_length = 0;
};

/// Interior edges with |jump| * length > tol (tol = 0: any nonzero jump).
EdgeSupport htv_support(const CpwlFunction& g, double tol = 0.0);

/// Interior edges with |jump| > rel * max |jump| and above the rounding level
/// of the gradients; empty when g is affine.
EdgeSupport relative_support(const CpwlFunction& g, double rel = 1e-9);

/// Largest relative spread of the totals computed as sum |jump (x) nu|_p * length
/// for p in {1, 2, inf}. 0 when all totals vanish.
double p_independence_check(const CpwlFunction& g);

namespace reference {

HtvReport htv_cpwl(const CpwlFunction& g, SchattenP p = SchattenP::one());

} // namespace reference

} // namespace hstv
