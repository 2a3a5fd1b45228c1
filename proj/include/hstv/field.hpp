#pragma once

#include <hstv/mat2.hpp>
#include <hstv/schatten.hpp>

#include <memory>
#include <string>
#include <vector>

namespace hstv {

/// Scalar field on R^2 with analytic first and second derivatives.
/// Implementations must be safe for concurrent calls.
class SmoothField {
public:
    virtual ~SmoothField() = default;
    virtual double value(Vec2 x) const = 0;
    virtual Vec2 gradient(Vec2 x) const = 0;
    virtual Mat2 hessian(Vec2 x) const = 0;
    /// Descriptor in the CLI mini-language, e.g. "rotated-quadratic:2,1,0.4636".
    virtual std::string descriptor() const = 0;
};

using FieldPtr = std::shared_ptr<const SmoothField>;

/// f = x^T A x / 2 + b.x + c with A symmetric.
FieldPtr make_quadratic(const Mat2& a, Vec2 b = {}, double c = 0.0);
/// f = (l1 u^2 + l2 v^2) / 2 where (u, v) = R(theta)^T x; Hessian R diag(l1,l2) R^T.
FieldPtr make_rotated_quadratic(double l1, double l2, double theta);
/// f = exp(-|x - c|^2 / (2 sigma^2)).
FieldPtr make_gaussian_bump(double sigma, Vec2 centre);
/// f = sin(w x) sin(w y).
FieldPtr make_product_sine(double omega);
/// f = a x + b y + c.
FieldPtr make_affine(double a, double b, double c);

/// Builtin by name ("quadratic", "rotated-quadratic", "gaussian-bump",
/// "product-sine", "affine"; underscores accepted) and numeric parameters.
/// Throws hstv::Error on an unknown name or wrong parameter count.
FieldPtr builtin_field(const std::string& name, const std::vector<double>& params);

/// Parses "name:p1,p2,..." (or just "name" for defaults). "quadratic:iso" is
/// (x^2 + y^2)/2.
FieldPtr parse_field(const std::string& descriptor);

/// Midpoint rule for the integral of |hess f|_p over (0,1)^2 on a
/// resolution x resolution grid. Rows run in parallel; the reduction order is
/// fixed, so the result does not depend on the thread count.
double htv_quadrature(const SmoothField& f, SchattenP p, int resolution = 512);

/// Samples on the nodes origin + (i h, j h), 0 <= i < nx, 0 <= j < ny.
struct GridSample {
    Vec2 origin;
    double h = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> values; ///< row-major, index j * nx + i

    GridSample() = default;
    GridSample(Vec2 origin, double h, int nx, int ny);

    double& at(int i, int j) { return values[static_cast<std::size_t>(j) * nx + i]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
    Vec2 node(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
    double sum() const;
};

GridSample sample(const SmoothField& f, Vec2 origin, double h, int nx, int ny);

/// Discrete convolution with the normalised bump (1 - r^2)^3, r = |x|/radius.
/// Only nodes whose full stencil lies inside the input are returned, so the
/// output is smaller by floor(radius/h) nodes on each side. Mass is preserved
/// for inputs vanishing within 2 radius of the border.
/// Throws hstv::Error if radius < h.
GridSample mollify(const GridSample& u, double radius);

/// Sum over interior nodes of |H|_p h^2 with H the central-difference Hessian.
double discrete_htv(const GridSample& u, SchattenP p);

enum class Side { left, right, bottom, top };

/// Extension across one side of the unit square: with s the distance to the
/// side measured inwards, F(s) = f(s) for s >= 0 and 3 f(-s) - 2 f(-2 s) for
/// -1/2 < s < 0. C^1 across the side. Evaluation at s <= -1/2 throws.
FieldPtr extend_reflection(FieldPtr f, Side side = Side::left);

/// Grid version for the left side: the input must have a node column on x = 0
/// (origin.x == 0). Columns x = -m h are added for every m with 2m < nx - 1,
/// keeping the extension inside the open domain x > -1/2 of the input width.
GridSample extend_reflection(const GridSample& u);

/// Transposed copy (x <-> y), used to extend along the other axis.
GridSample transpose(const GridSample& u);

namespace reference {

/// Serial loops with the same arithmetic as the parallel kernels.
double htv_quadrature(const SmoothField& f, SchattenP p, int resolution = 512);
GridSample mollify(const GridSample& u, double radius);

} // namespace reference

} // namespace hstv
