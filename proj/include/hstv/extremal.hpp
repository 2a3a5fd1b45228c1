#pragma once

// Extreme points of the HTV unit ball among CPWL functions, modulo affine
// functions, and decomposition of a CPWL function into such points.

#include <hstv/htv.hpp>
#include <hstv/mesh.hpp>

#include <array>
#include <memory>
#include <vector>

namespace hstv {

/// g with its least-squares affine part (over the vertex values) removed.
struct QuotientRep {
    CpwlFunction g;
    std::array<double, 3> affine{}; ///< a0 + a1 x + a2 y
};

QuotientRep normalize_mod_affine(const CpwlFunction& g);

/// Vertex-value vectors h, orthogonal to the affine functions, whose gradient
/// jumps vanish on every interior edge outside the support.
struct JumpSpaceBasis {
    std::shared_ptr<const Triangulation> mesh;
    EdgeSupport support;
    std::vector<std::vector<double>> basis; ///< orthonormal
    std::size_t dim = 0;
};

/// Nullspace of the zero-jump constraints off `support`, by SVD with singular
/// values below rel_threshold * sigma_max treated as zero.
JumpSpaceBasis constrained_space(std::shared_ptr<const Triangulation> mesh, const EdgeSupport& support,
                                 double rel_threshold = 1e-10);

struct ExtremalityResult {
    bool extremal = false;
    std::size_t dim = 0;
    JumpSpaceBasis certificate;
    /// When not extremal: a vector of the space orthogonal to g.
    std::vector<double> witness;
};

/// g is extremal iff its constrained space is spanned by g. Throws when g is
/// affine.
ExtremalityResult is_extremal(const CpwlFunction& g, double rel_threshold = 1e-10);

/// |htv(g + eps h) + htv(g - eps h) - 2 htv(g)| with eps = delta / Delta, delta
/// the least nonzero jump of g and Delta the largest jump of h. h must not
/// jump outside the support of g.
double perturbation_identity_check(const CpwlFunction& g, std::span<const double> h);

struct ReductionStep {
    std::vector<double> h;
    double lambda = 0;
    CpwlFunction next; ///< g - lambda h, one support edge fewer at least
};

/// One step of support reduction for a non-extremal g. The ratio with the
/// smallest |lambda| keeps every remaining jump of the same sign as in g.
ReductionStep support_reduce(const CpwlFunction& g);

/// Repeated support reduction down to an extremal function, normalized to
/// htv 1 and with jumps of the same sign as g wherever it jumps.
QuotientRep find_extremal_in_support(const CpwlFunction& g);

struct DecompositionTerm {
    QuotientRep t; ///< extremal, htv 1
    double c = 0;  ///< > 0
};

struct Decomposition {
    std::vector<DecompositionTerm> terms;
    double residual = 0; ///< max vertex error of sum c_i t_i against g mod affine
    double htv = 0;
    double coefficient_sum() const;
};

/// g mod affine as sum c_i t_i with t_i extremal and c_i > 0. Throws when the
/// residual exceeds tol.
Decomposition decompose(const CpwlFunction& g, double tol = 1e-8);

/// Per-edge additivity of the HTV contributions of f and g. Throws unless
/// htv(f + g) = htv(f) + htv(g) within 1e-10 and both share a mesh.
bool rigidity_check(const CpwlFunction& f, const CpwlFunction& g);

/// Lawson-Hanson non-negative least squares: argmin |A x - b| over x >= 0.
/// A is column-major with `rows` rows.
std::vector<double> nnls(const std::vector<double>& a, std::size_t rows, const std::vector<double>& b);

} // namespace hstv
