#include <hstv/error.hpp>
#include <hstv/field.hpp>
#include <hstv/parallel.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace hstv {

namespace {

std::string join(const std::vector<double>& ps)
{
    std::string out;
    for (std::size_t i = 0; i < ps.size(); ++i)
        out += fmt::format("{}{}", i ? "," : "", ps[i]);
    return out;
}

class Quadratic final : public SmoothField {
public:
    Quadratic(const Mat2& a, Vec2 b, double c) : a_(a), b_(b), c_(c)
    {
        if (a.m12() != a.m21())
            throw Error("quadratic: matrix must be symmetric");
    }
    double value(Vec2 x) const override { return 0.5 * dot(x, a_ * x) + dot(b_, x) + c_; }
    Vec2 gradient(Vec2 x) const override { return a_ * x + b_; }
    Mat2 hessian(Vec2) const override { return a_; }
    std::string descriptor() const override
    {
        if (a_ == Mat2::identity() && b_ == Vec2{} && c_ == 0.0)
            return "quadratic:iso";
        return "quadratic:" + join({a_.m11(), a_.m12(), a_.m22(), b_.x, b_.y, c_});
    }

private:
    Mat2 a_;
    Vec2 b_;
    double c_;
};

class RotatedQuadratic final : public SmoothField {
public:
    RotatedQuadratic(double l1, double l2, double theta)
        : l1_(l1), l2_(l2), theta_(theta), r_(Mat2::rotation(theta)), h_(r_ * Mat2::diag(l1, l2) * r_.transpose())
    {
    }
    double value(Vec2 x) const override
    {
        const Vec2 uv = r_.transpose() * x;
        return 0.5 * (l1_ * uv.x * uv.x + l2_ * uv.y * uv.y);
    }
    Vec2 gradient(Vec2 x) const override { return h_ * x; }
    Mat2 hessian(Vec2) const override { return h_; }
    std::string descriptor() const override { return "rotated-quadratic:" + join({l1_, l2_, theta_}); }

private:
    double l1_, l2_, theta_;
    Mat2 r_, h_;
};

class GaussianBump final : public SmoothField {
public:
    GaussianBump(double sigma, Vec2 c) : s_(sigma), c_(c)
    {
        if (!(sigma > 0))
            throw Error("gaussian-bump: sigma must be positive");
    }
    double value(Vec2 x) const override
    {
        const Vec2 d = x - c_;
        return std::exp(-dot(d, d) / (2 * s_ * s_));
    }
    Vec2 gradient(Vec2 x) const override { return (-value(x) / (s_ * s_)) * (x - c_); }
    Mat2 hessian(Vec2 x) const override
    {
        const Vec2 d = x - c_;
        const double f = value(x), s2 = s_ * s_;
        return f * ((1 / (s2 * s2)) * Mat2::outer(d, d) - (1 / s2) * Mat2::identity());
    }
    std::string descriptor() const override { return "gaussian-bump:" + join({s_, c_.x, c_.y}); }

private:
    double s_;
    Vec2 c_;
};

class ProductSine final : public SmoothField {
public:
    explicit ProductSine(double w) : w_(w) {}
    double value(Vec2 x) const override { return std::sin(w_ * x.x) * std::sin(w_ * x.y); }
    Vec2 gradient(Vec2 x) const override
    {
        const double sx = std::sin(w_ * x.x), sy = std::sin(w_ * x.y);
        const double cx = std::cos(w_ * x.x), cy = std::cos(w_ * x.y);
        return {w_ * cx * sy, w_ * sx * cy};
    }
    Mat2 hessian(Vec2 x) const override
    {
        const double ss = std::sin(w_ * x.x) * std::sin(w_ * x.y);
        const double cc = std::cos(w_ * x.x) * std::cos(w_ * x.y);
        const double w2 = w_ * w_;
        return {-w2 * ss, w2 * cc, w2 * cc, -w2 * ss};
    }
    std::string descriptor() const override { return "product-sine:" + join({w_}); }

private:
    double w_;
};

class Affine final : public SmoothField {
public:
    Affine(double a, double b, double c) : a_(a), b_(b), c_(c) {}
    double value(Vec2 x) const override { return a_ * x.x + b_ * x.y + c_; }
    Vec2 gradient(Vec2) const override { return {a_, b_}; }
    Mat2 hessian(Vec2) const override { return {}; }
    std::string descriptor() const override { return "affine:" + join({a_, b_, c_}); }

private:
    double a_, b_, c_;
};

class Reflected final : public SmoothField {
public:
    Reflected(FieldPtr f, Side side) : f_(std::move(f)), side_(side)
    {
        if (!f_)
            throw Error("extend_reflection: null field");
    }

    double value(Vec2 x) const override
    {
        const double s = inward(x);
        if (s >= 0)
            return f_->value(x);
        return 3 * f_->value(mirror(x, 1)) - 2 * f_->value(mirror(x, 2));
    }
    Vec2 gradient(Vec2 x) const override
    {
        const double s = inward(x);
        if (s >= 0)
            return f_->gradient(x);
        const Mat2 j1 = jacobian(1), j2 = jacobian(2);
        return 3 * (j1 * f_->gradient(mirror(x, 1))) - 2 * (j2 * f_->gradient(mirror(x, 2)));
    }
    Mat2 hessian(Vec2 x) const override
    {
        const double s = inward(x);
        if (s >= 0)
            return f_->hessian(x);
        const Mat2 j1 = jacobian(1), j2 = jacobian(2);
        return 3 * (j1 * f_->hessian(mirror(x, 1)) * j1) - 2 * (j2 * f_->hessian(mirror(x, 2)) * j2);
    }
    std::string descriptor() const override
    {
        static const char* names[] = {"left", "right", "bottom", "top"};
        return fmt::format("reflect-{}({})", names[static_cast<int>(side_)], f_->descriptor());
    }

private:
    bool horizontal() const { return side_ == Side::left || side_ == Side::right; }

    double inward(Vec2 x) const
    {
        double s = 0;
        switch (side_) {
        case Side::left: s = x.x; break;
        case Side::right: s = 1 - x.x; break;
        case Side::bottom: s = x.y; break;
        case Side::top: s = 1 - x.y; break;
        }
        if (s <= -0.5)
            throw Error(fmt::format("extend_reflection: ({}, {}) is outside the extended domain", x.x, x.y));
        return s;
    }
    // Point at inward distance -k s on the same normal line.
    Vec2 mirror(Vec2 x, int k) const
    {
        switch (side_) {
        case Side::left: return {-k * x.x, x.y};
        case Side::right: return {1 + k * (1 - x.x), x.y};
        case Side::bottom: return {x.x, -k * x.y};
        case Side::top: return {x.x, 1 + k * (1 - x.y)};
        }
        return x;
    }
    Mat2 jacobian(int k) const { return horizontal() ? Mat2::diag(-k, 1) : Mat2::diag(1, -k); }

    FieldPtr f_;
    Side side_;
};

void expect_params(const std::string& name, const std::vector<double>& ps, std::initializer_list<std::size_t> counts)
{
    for (auto c : counts)
        if (ps.size() == c)
            return;
    throw Error(fmt::format("field '{}' does not take {} parameters", name, ps.size()));
}

// Shared by the parallel kernel and the serial reference: the integrand of
// one row of midpoint cells, summed pairwise.
double quadrature_row(const SmoothField& f, SchattenP p, int res, int j, std::vector<double>& scratch)
{
    const double h = 1.0 / res;
    scratch.resize(static_cast<std::size_t>(res));
    for (int i = 0; i < res; ++i)
        scratch[static_cast<std::size_t>(i)] = schatten_norm(f.hessian({(i + 0.5) * h, (j + 0.5) * h}), p);
    return parallel::pairwise_sum(scratch);
}

struct Kernel {
    int r = 0;
    std::vector<double> w; // (2r+1)^2, row-major
};

Kernel bump_kernel(double h, double radius)
{
    if (!(radius >= h) || !(h > 0))
        throw Error(fmt::format("mollify: radius {} is smaller than the grid spacing {}", radius, h));
    Kernel k;
    k.r = static_cast<int>(std::floor(radius / h + 1e-12));
    const int n = 2 * k.r + 1;
    k.w.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int b = -k.r; b <= k.r; ++b)
        for (int a = -k.r; a <= k.r; ++a) {
            const double rho2 = (a * a + b * b) * h * h / (radius * radius);
            if (rho2 < 1) {
                const double t = 1 - rho2;
                k.w[static_cast<std::size_t>(b + k.r) * n + (a + k.r)] = t * t * t;
            }
        }
    const double total = parallel::pairwise_sum(k.w);
    for (double& x : k.w)
        x /= total;
    return k;
}

void mollify_row(const GridSample& u, const Kernel& k, GridSample& out, int j)
{
    const int n = 2 * k.r + 1;
    for (int i = 0; i < out.nx; ++i) {
        double acc = 0;
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a)
                acc += k.w[static_cast<std::size_t>(b) * n + a] * u.at(i + a, j + b);
        out.at(i, j) = acc;
    }
}

GridSample mollify_output(const GridSample& u, const Kernel& k)
{
    const int nx = u.nx - 2 * k.r, ny = u.ny - 2 * k.r;
    if (nx < 1 || ny < 1)
        throw Error("mollify: grid is smaller than the kernel");
    return {{u.origin.x + k.r * u.h, u.origin.y + k.r * u.h}, u.h, nx, ny};
}

} // namespace

FieldPtr make_quadratic(const Mat2& a, Vec2 b, double c) { return std::make_shared<Quadratic>(a, b, c); }
FieldPtr make_rotated_quadratic(double l1, double l2, double theta)
{
    return std::make_shared<RotatedQuadratic>(l1, l2, theta);
}
FieldPtr make_gaussian_bump(double sigma, Vec2 centre) { return std::make_shared<GaussianBump>(sigma, centre); }
FieldPtr make_product_sine(double omega) { return std::make_shared<ProductSine>(omega); }
FieldPtr make_affine(double a, double b, double c) { return std::make_shared<Affine>(a, b, c); }

FieldPtr builtin_field(const std::string& raw, const std::vector<double>& ps)
{
    std::string name = raw;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "quadratic") {
        expect_params(name, ps, {0, 3, 6});
        if (ps.empty())
            return make_quadratic(Mat2::identity());
        const Mat2 a{ps[0], ps[1], ps[1], ps[2]};
        if (ps.size() == 3)
            return make_quadratic(a);
        return make_quadratic(a, {ps[3], ps[4]}, ps[5]);
    }
    if (name == "rotated-quadratic") {
        expect_params(name, ps, {3});
        return make_rotated_quadratic(ps[0], ps[1], ps[2]);
    }
    if (name == "gaussian-bump") {
        expect_params(name, ps, {0, 1, 3});
        const double sigma = ps.empty() ? 0.2 : ps[0];
        const Vec2 c = ps.size() == 3 ? Vec2{ps[1], ps[2]} : Vec2{0.5, 0.5};
        return make_gaussian_bump(sigma, c);
    }
    if (name == "product-sine") {
        expect_params(name, ps, {0, 1});
        return make_product_sine(ps.empty() ? std::numbers::pi : ps[0]);
    }
    if (name == "affine") {
        expect_params(name, ps, {3});
        return make_affine(ps[0], ps[1], ps[2]);
    }
    throw Error("unknown field '" + raw + "'");
}

FieldPtr parse_field(const std::string& descriptor)
{
    const auto colon = descriptor.find(':');
    const std::string name = descriptor.substr(0, colon);
    if (colon == std::string::npos)
        return builtin_field(name, {});
    const std::string rest = descriptor.substr(colon + 1);
    if (rest == "iso") {
        if (name != "quadratic")
            throw Error("'iso' applies to quadratic only");
        return make_quadratic(Mat2::identity());
    }
    std::vector<double> ps;
    std::size_t start = 0;
    while (start <= rest.size()) {
        const auto comma = rest.find(',', start);
        const std::string tok = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw Error("field descriptor: bad number '" + tok + "'");
        }
        if (used != tok.size() || !std::isfinite(v))
            throw Error("field descriptor: bad number '" + tok + "'");
        ps.push_back(v);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return builtin_field(name, ps);
}

double htv_quadrature(const SmoothField& f, SchattenP p, int resolution)
{
    if (resolution < 2)
        throw Error("htv_quadrature: resolution must be at least 2");
    std::vector<double> rows(static_cast<std::size_t>(resolution));
    parallel::for_each_index(rows.size(), [&](std::size_t j) {
        thread_local std::vector<double> scratch;
        rows[j] = quadrature_row(f, p, resolution, static_cast<int>(j), scratch);
    });
    const double h = 1.0 / resolution;
    return parallel::pairwise_sum(rows) * h * h;
}

double reference::htv_quadrature(const SmoothField& f, SchattenP p, int resolution)
{
    if (resolution < 2)
        throw Error("htv_quadrature: resolution must be at least 2");
    std::vector<double> rows(static_cast<std::size_t>(resolution)), scratch;
    for (int j = 0; j < resolution; ++j)
        rows[static_cast<std::size_t>(j)] = quadrature_row(f, p, resolution, j, scratch);
    const double h = 1.0 / resolution;
    return parallel::pairwise_sum(rows) * h * h;
}

GridSample::GridSample(Vec2 origin_, double h_, int nx_, int ny_) : origin(origin_), h(h_), nx(nx_), ny(ny_)
{
    if (!(h > 0) || nx < 1 || ny < 1)
        throw Error("grid needs positive spacing and size");
    values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
}

double GridSample::sum() const { return parallel::pairwise_sum(values); }

GridSample sample(const SmoothField& f, Vec2 origin, double h, int nx, int ny)
{
    GridSample g(origin, h, nx, ny);
    parallel::for_each_index(static_cast<std::size_t>(ny), [&](std::size_t j) {
        for (int i = 0; i < nx; ++i)
            g.at(i, static_cast<int>(j)) = f.value(g.node(i, static_cast<int>(j)));
    });
    return g;
}

GridSample mollify(const GridSample& u, double radius)
{
    const Kernel k = bump_kernel(u.h, radius);
    GridSample out = mollify_output(u, k);
    parallel::for_each_index(static_cast<std::size_t>(out.ny),
                             [&](std::size_t j) { mollify_row(u, k, out, static_cast<int>(j)); });
    return out;
}

GridSample reference::mollify(const GridSample& u, double radius)
{
    const Kernel k = bump_kernel(u.h, radius);
    GridSample out = mollify_output(u, k);
    for (int j = 0; j < out.ny; ++j)
        mollify_row(u, k, out, j);
    return out;
}

double discrete_htv(const GridSample& u, SchattenP p)
{
    if (u.nx < 3 || u.ny < 3)
        return 0.0;
    const double h2 = u.h * u.h;
    std::vector<double> rows(static_cast<std::size_t>(u.ny - 2));
    parallel::for_each_index(rows.size(), [&](std::size_t r) {
        const int j = static_cast<int>(r) + 1;
        std::vector<double> cells(static_cast<std::size_t>(u.nx - 2));
        for (int i = 1; i + 1 < u.nx; ++i) {
            const double c = u.at(i, j);
            const double hxx = (u.at(i + 1, j) - 2 * c + u.at(i - 1, j)) / h2;
            const double hyy = (u.at(i, j + 1) - 2 * c + u.at(i, j - 1)) / h2;
            const double hxy =
                (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) + u.at(i - 1, j - 1)) / (4 * h2);
            cells[static_cast<std::size_t>(i - 1)] = schatten_norm({hxx, hxy, hxy, hyy}, p);
        }
        rows[r] = parallel::pairwise_sum(cells);
    });
    return parallel::pairwise_sum(rows) * h2;
}

FieldPtr extend_reflection(FieldPtr f, Side side) { return std::make_shared<Reflected>(std::move(f), side); }

GridSample extend_reflection(const GridSample& u)
{
    if (u.origin.x != 0.0)
        throw Error("extend_reflection: grid must have a node column on x = 0");
    const int m = std::max(0, (u.nx - 2) / 2);
    GridSample out({-m * u.h, u.origin.y}, u.h, u.nx + m, u.ny);
    for (int j = 0; j < u.ny; ++j) {
        for (int i = 0; i < u.nx; ++i)
            out.at(i + m, j) = u.at(i, j);
        for (int k = 1; k <= m; ++k)
            out.at(m - k, j) = 3 * u.at(k, j) - 2 * u.at(2 * k, j);
    }
    return out;
}

GridSample transpose(const GridSample& u)
{
    GridSample out({u.origin.y, u.origin.x}, u.h, u.ny, u.nx);
    for (int j = 0; j < u.ny; ++j)
        for (int i = 0; i < u.nx; ++i)
            out.at(j, i) = u.at(i, j);
    return out;
}

} // namespace hstv
