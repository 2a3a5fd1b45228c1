#include "flip_mesh.hpp"

#include <hstv/approx.hpp>
#include <hstv/error.hpp>
#include <hstv/htv.hpp>
#include <hstv/parallel.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace hstv {

namespace {

using I64 = std::int64_t;

// Local lattice coordinates of a square, in units of h/q^ along
// v^ = (p^, q^)/r and w^ = (-q^, p^)/r, origin at the top-left corner.
struct LPoint {
    I64 a = 0, b = 0;
    friend bool operator==(LPoint, LPoint) = default;
    friend LPoint operator+(LPoint x, LPoint y) { return {x.a + y.a, x.b + y.b}; }
    friend LPoint operator-(LPoint x, LPoint y) { return {x.a - y.a, x.b - y.b}; }
};

struct LPointHash {
    std::size_t operator()(LPoint x) const
    {
        return std::hash<I64>()(x.a) ^ (std::hash<I64>()(x.b) * 0x9E3779B97F4A7C15ull);
    }
};

I64 floor_div(I64 a, I64 b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

// Transition triangle A = (0,0), E = (0, -q^2 Pi), B = (p q Pi, -q^2 Pi) with
// its boundary points: pitch-spaced on the legs, s-spaced on the hypotenuse.
struct Template {
    I64 p = 0, q = 0, pi = 0;
    std::vector<LPoint> pts;
    std::vector<TriangleIndices> tris;
};

Template build_template(I64 p, I64 q, I64 pi)
{
    Template t{p, q, pi, {}, {}};
    std::unordered_map<LPoint, std::uint32_t, LPointHash> ids;
    auto id = [&](LPoint x) {
        auto [it, fresh] = ids.try_emplace(x, static_cast<std::uint32_t>(t.pts.size()));
        if (fresh)
            t.pts.push_back(x);
        return it->second;
    };
    const I64 n = q * pi, m = q * pi, l = p * pi;
    std::vector<std::uint32_t> hyp, ae, be;
    for (I64 i = 0; i <= n; ++i)
        hyp.push_back(id({i * p, -i * q}));
    for (I64 i = 0; i <= m; ++i)
        ae.push_back(id({0, -i * q}));
    for (I64 i = 0; i <= l; ++i)
        be.push_back(id({p * q * pi - i * q, -q * q * pi}));
    const std::uint32_t e = ae.back();

    detail::FlipMesh fm;
    for (const LPoint& x : t.pts)
        fm.points.push_back({Rational(x.a), Rational(x.b)});
    auto add = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
        if (orient(fm.points[a], fm.points[b], fm.points[c]) < 0)
            std::swap(b, c);
        fm.tris.push_back({a, b, c});
    };
    for (I64 i = 1; i + 1 < n; ++i)
        add(e, hyp[static_cast<std::size_t>(i)], hyp[static_cast<std::size_t>(i + 1)]);
    for (I64 i = 0; i < m; ++i)
        add(hyp[1], ae[static_cast<std::size_t>(i)], ae[static_cast<std::size_t>(i + 1)]);
    for (I64 i = 0; i < l; ++i)
        add(hyp[static_cast<std::size_t>(n - 1)], be[static_cast<std::size_t>(i)], be[static_cast<std::size_t>(i + 1)]);
    fm.rebuild_neighbors();
    fm.make_delaunay();
    t.tris = std::move(fm.tris);
    return t;
}

struct TemplateKey {
    I64 p, q, pi;
    friend auto operator<=>(const TemplateKey&, const TemplateKey&) = default;
};

struct Geometry {
    I64 p, q, r2, pi, big_p, copies;
    LPoint b; // top-right corner
};

Geometry geometry(const MeshPlan& plan, std::size_t k)
{
    const RationalAngle& ang = plan.frames[k].angle;
    Geometry g{};
    g.p = ang.p_hat();
    g.q = ang.q_hat();
    g.r2 = ang.r2();
    if (plan.period % g.q != 0)
        throw PlanError(fmt::format("square {}: q = {} does not divide the plan period {}", k, g.q, plan.period));
    if (plan.scaled_pitch.size() != plan.frames.size() || plan.scaled_pitch[k] != plan.s * g.q)
        throw PlanError(fmt::format("square {}: pitch does not match the boundary spacing of the plan", k));
    g.pi = plan.period / g.q;
    g.copies = I64{1} << plan.k;
    g.big_p = g.pi * g.copies;
    g.b = {g.p * g.q * g.big_p, -g.q * g.q * g.big_p};
    return g;
}

struct RawSquare {
    std::vector<RationalPoint> verts;
    std::vector<TriangleIndices> tris;
    std::vector<std::uint8_t> band;
};

RawSquare build_square(const MeshPlan& plan, std::size_t k, const Template& tpl)
{
    const Geometry g = geometry(plan, k);
    const SquareFrame& fr = plan.frames[k];

    std::vector<LPoint> local;
    std::unordered_map<LPoint, std::uint32_t, LPointHash> ids;
    auto id = [&](LPoint x) {
        auto [it, fresh] = ids.try_emplace(x, static_cast<std::uint32_t>(local.size()));
        if (fresh)
            local.push_back(x);
        return it->second;
    };
    // Quarter turn clockwise about the centre: X -> rot_cw(X) + B.
    auto turn = [&](LPoint x) { return LPoint{x.b + g.b.a, -x.a + g.b.b}; };

    RawSquare out;
    const LPoint step{g.p * g.q * g.pi, -g.q * g.q * g.pi};
    for (int side = 0; side < 4; ++side)
        for (I64 j = 0; j < g.copies; ++j)
            for (const auto& tri : tpl.tris) {
                TriangleIndices t{};
                for (int c = 0; c < 3; ++c) {
                    LPoint x = tpl.pts[tri[c]] + LPoint{j * step.a, j * step.b};
                    for (int s = 0; s < side; ++s)
                        x = turn(x);
                    t[c] = id(x);
                }
                out.tris.push_back(t);
                out.band.push_back(static_cast<std::uint8_t>(side + 1));
            }

    // Inner cells: centre strictly inside Q and outside every band triangle.
    // Doubled coordinates keep the centres integral.
    const I64 width2 = 2 * g.q * g.r2 * g.big_p;   // side of Q, scaled
    const I64 tooth2 = 2 * g.q * g.r2 * g.pi;      // one band triangle, scaled
    const LPoint b2{2 * g.b.a, 2 * g.b.b};
    auto in_band = [&](LPoint x2) {
        LPoint y = x2;
        for (int side = 0; side < 4; ++side) {
            if (side > 0)
                y = LPoint{-(y.b - b2.b), y.a - b2.a};
            const I64 xs = y.a * g.p - y.b * g.q;
            const I64 j = floor_div(xs, tooth2);
            if (j < 0 || j >= g.copies)
                continue;
            const LPoint z{y.a - 2 * j * step.a, y.b - 2 * j * step.b};
            if (z.a > 0 && z.b > -2 * g.q * g.q * g.pi && g.q * z.a + g.p * z.b < 0)
                return true;
        }
        return false;
    };
    const bool flip_diagonal = fr.angle.reflected();
    for (I64 a = -g.q * g.big_p; a < g.p * g.big_p; ++a)
        for (I64 b = -(g.q + g.p) * g.big_p; b < 0; ++b) {
            const LPoint c2{g.q * (2 * a + 1), g.q * (2 * b + 1)};
            const I64 xs = c2.a * g.p - c2.b * g.q;
            const I64 ys = c2.a * g.q + c2.b * g.p;
            if (xs <= 0 || xs >= width2 || ys >= 0 || ys <= -width2)
                continue;
            if (in_band(c2))
                continue;
            const auto p00 = id({g.q * a, g.q * b}), p10 = id({g.q * (a + 1), g.q * b});
            const auto p01 = id({g.q * a, g.q * (b + 1)}), p11 = id({g.q * (a + 1), g.q * (b + 1)});
            // Diagonal along v - w once the reflection (if any) is applied.
            if (flip_diagonal) {
                out.tris.push_back({p00, p10, p11});
                out.tris.push_back({p00, p11, p01});
            } else {
                out.tris.push_back({p00, p10, p01});
                out.tris.push_back({p10, p11, p01});
            }
            out.band.push_back(0);
            out.band.push_back(0);
        }

    const Rational factor = plan.scaled_pitch[k] / Rational(g.q * g.r2);
    const Rational ax = fr.x0, ay = fr.y0 + fr.side;
    const Rational csum = fr.x0 + fr.y0 + fr.side; // cx + cy
    out.verts.reserve(local.size());
    for (const LPoint& x : local) {
        RationalPoint v{ax + factor * Rational(x.a * g.p - x.b * g.q), ay + factor * Rational(x.a * g.q + x.b * g.p)};
        if (fr.angle.reflected())
            v = RationalPoint{csum - v.y, csum - v.x};
        out.verts.push_back(std::move(v));
    }
    if (fr.angle.reflected())
        for (auto& t : out.tris)
            std::swap(t[1], t[2]);
    return out;
}

std::map<TemplateKey, Template> templates_for(const MeshPlan& plan, const std::vector<std::size_t>& squares)
{
    std::map<TemplateKey, Template> out;
    for (auto k : squares) {
        const Geometry g = geometry(plan, k);
        const TemplateKey key{g.p, g.q, g.pi};
        if (!out.contains(key))
            out.emplace(key, build_template(g.p, g.q, g.pi));
    }
    return out;
}

const Template& template_of(const std::map<TemplateKey, Template>& ts, const MeshPlan& plan, std::size_t k)
{
    const auto& a = plan.frames[k].angle;
    return ts.at({a.p_hat(), a.q_hat(), plan.period / a.q_hat()});
}

double lattice_max(const SmoothField& f, const CpwlFunction& g, std::size_t t, int order)
{
    const auto& tri = g.mesh().triangles()[t];
    const auto& pts = g.mesh().points();
    const auto& v = g.values();
    double worst = 0;
    for (int i = 0; i <= order; ++i)
        for (int j = 0; i + j <= order; ++j) {
            const double l1 = static_cast<double>(i) / order, l2 = static_cast<double>(j) / order;
            const double l0 = 1 - l1 - l2;
            const Vec2 x = l0 * pts[tri[0]] + l1 * pts[tri[1]] + l2 * pts[tri[2]];
            const double gx = l0 * v[tri[0]] + l1 * v[tri[1]] + l2 * v[tri[2]];
            worst = std::max(worst, std::abs(f.value(x) - gx));
        }
    return worst;
}

} // namespace

double RationalAngle::theta() const { return std::atan2(static_cast<double>(q), static_cast<double>(p)); }

double rotation_distance(double a, double b) { return 4 * std::abs(std::sin(0.5 * (a - b))); }

RationalAngle rational_angle_approx(double theta_hat, double eps)
{
    if (!(eps > 0))
        throw Error("rational_angle_approx: eps must be positive");
    if (!(theta_hat >= 0 && theta_hat < std::numbers::pi / 2))
        throw Error(fmt::format("rational_angle_approx: angle {} outside [0, pi/2)", theta_hat));
    // Fractions q/p between lo and hi.
    I64 lq = 0, lp = 1, hq = 1, hp = 0;
    for (long iter = 0; iter < (1L << 28); ++iter) {
        const I64 mq = lq + hq, mp = lp + hp;
        const double mth = std::atan2(static_cast<double>(mq), static_cast<double>(mp));
        const bool diagonal = mq == 1 && mp == 1;
        if (!diagonal && rotation_distance(mth, theta_hat) <= eps)
            return {mp, mq};
        if (theta_hat < mth || (diagonal && theta_hat == mth)) {
            hq = mq;
            hp = mp;
        } else {
            lq = mq;
            lp = mp;
        }
    }
    throw Error("rational_angle_approx: no angle found within the iteration cap");
}

int levels_for_eps(double eps)
{
    if (!(eps > 0) || eps > 1)
        throw Error("eps must lie in (0, 1]");
    int n = 0;
    while (std::ldexp(1.0, -n) > eps)
        ++n;
    return n;
}

std::vector<SquareFrame> build_frames(const SmoothField& f, int n, int samples_per_square, std::optional<double> eps_in)
{
    if (n < 0 || n > 12)
        throw Error("build_frames: N must lie in [0, 12]");
    if (samples_per_square < 1)
        throw Error("build_frames: need at least one sample per square");
    const int m = 1 << n;
    const double eps = eps_in.value_or(1.0 / std::max(n, 1));
    if (!(eps > 0))
        throw Error("build_frames: eps must be positive");
    const double side = 1.0 / m;
    std::vector<SquareFrame> frames(static_cast<std::size_t>(m) * m);
    parallel::for_each_index(frames.size(), [&](std::size_t k) {
        SquareFrame& fr = frames[k];
        fr.k = k;
        fr.ix = static_cast<int>(k % static_cast<std::size_t>(m));
        fr.iy = static_cast<int>(k / static_cast<std::size_t>(m));
        fr.x0 = make_rational(fr.ix, m);
        fr.y0 = make_rational(fr.iy, m);
        fr.side = make_rational(1, m);
        fr.centre = {(fr.ix + 0.5) * side, (fr.iy + 0.5) * side};
        const Mat2 h = f.hessian(fr.centre);
        const double scale = std::max(1.0, schatten_norm(h, SchattenP::inf()));
        const EigenFrame ef = sym_eigen_frame(h, 1e-12 * scale);
        fr.d = ef.diagonal;
        fr.theta_hat = ef.theta;
        fr.isotropic = ef.isotropic;
        fr.angle = ef.isotropic ? RationalAngle{2, 1} : rational_angle_approx(ef.theta, eps);
        const Mat2 u = Mat2::rotation(fr.angle.theta());
        const int s = samples_per_square;
        for (int j = 0; j < s; ++j)
            for (int i = 0; i < s; ++i) {
                const double ti = s == 1 ? 0.5 : static_cast<double>(i) / (s - 1);
                const double tj = s == 1 ? 0.5 : static_cast<double>(j) / (s - 1);
                const Vec2 x{(fr.ix + ti) * side, (fr.iy + tj) * side};
                const Mat2 dev = u.transpose() * f.hessian(x) * u - fr.d;
                fr.deviation = std::max(fr.deviation, schatten_norm(dev, SchattenP::one()));
            }
    });
    return frames;
}

PlanMode parse_plan_mode(const std::string& text)
{
    if (text == "lcm")
        return PlanMode::lcm;
    if (text == "paper")
        return PlanMode::paper;
    throw Error("unknown plan mode '" + text + "' (expected lcm or paper)");
}

std::string to_string(PlanMode mode) { return mode == PlanMode::lcm ? "lcm" : "paper"; }

double MeshPlan::pitch(std::size_t k) const
{
    return scaled_pitch[k].get_d() / std::sqrt(static_cast<double>(frames[k].angle.r2()));
}

MeshPlan plan_mesh(std::vector<SquareFrame> frames, int n, int k, PlanMode mode, const PlanLimits& limits)
{
    if (frames.empty())
        throw PlanError("plan_mesh: no frames");
    if (n < 0 || k < 0)
        throw PlanError("plan_mesh: N and K must be non-negative");
    if (frames.size() != (std::size_t{1} << (2 * n)))
        throw PlanError(fmt::format("plan_mesh: {} frames for N = {}", frames.size(), n));
    constexpr int kMinExponent = 40;

    mpz_class product = 1;
    I64 lcm = 1;
    for (const auto& fr : frames) {
        const auto& a = fr.angle;
        if (a.p < 1 || a.q < 1 || std::gcd(a.p, a.q) != 1 || (a.p == 1 && a.q == 1))
            throw PlanError(fmt::format("square {}: invalid rational angle ({}, {})", fr.k, a.p, a.q));
        product *= static_cast<long>(a.q_hat());
        lcm = std::lcm(lcm, a.q_hat());
        if (lcm > (I64{1} << kMinExponent))
            throw PlanError(fmt::format("lcm of q over squares exceeds 2^{}", kMinExponent));
    }
    const mpz_class period = mode == PlanMode::paper ? product : mpz_class(static_cast<long>(lcm));
    const mpz_class denom = period << static_cast<unsigned>(n + k);
    if (denom > (mpz_class(1) << kMinExponent))
        throw PlanError(fmt::format("boundary spacing 2^-{} / {} is below 2^-{} ({} of q over squares = {})", n + k,
                                    period.get_str(), kMinExponent, mode == PlanMode::paper ? "product" : "lcm",
                                    period.get_str()));

    MeshPlan plan;
    plan.n = n;
    plan.k = k;
    plan.mode = mode;
    plan.period = period.get_si();
    plan.s = Rational(mpz_class(1), denom);
    for (const auto& fr : frames) {
        plan.scaled_pitch.push_back(plan.s * Rational(fr.angle.q_hat()));
        const double big_p = std::ldexp(static_cast<double>(plan.period / fr.angle.q_hat()), k);
        plan.estimated_triangles += 2.0 * static_cast<double>(fr.angle.r2()) * big_p * big_p;
    }
    if (plan.estimated_triangles > limits.max_triangles)
        throw PlanError(fmt::format("plan needs about {:.3g} triangles, above the limit {:.3g}",
                                    plan.estimated_triangles, limits.max_triangles));
    plan.frames = std::move(frames);
    return plan;
}

SquareMesh triangulate_square(const MeshPlan& plan, std::size_t k)
{
    if (k >= plan.frames.size())
        throw PlanError(fmt::format("square {} is not in the plan", k));
    const auto ts = templates_for(plan, {k});
    RawSquare raw = build_square(plan, k, template_of(ts, plan, k));
    return {Triangulation(std::move(raw.verts), std::move(raw.tris)), std::move(raw.band), k};
}

Triangulation assemble_global(const MeshPlan& plan)
{
    std::vector<std::size_t> all(plan.frames.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto ts = templates_for(plan, all);
    std::vector<RawSquare> raws(all.size());
    parallel::for_each_index(all.size(), [&](std::size_t k) { raws[k] = build_square(plan, k, template_of(ts, plan, k)); });

    std::vector<RationalPoint> verts;
    std::vector<TriangleIndices> tris;
    std::map<RationalPoint, std::uint32_t> shared;
    for (std::size_t k = 0; k < raws.size(); ++k) {
        const SquareFrame& fr = plan.frames[k];
        const Rational x1 = fr.x0 + fr.side, y1 = fr.y0 + fr.side;
        std::vector<std::uint32_t> remap(raws[k].verts.size());
        for (std::size_t v = 0; v < raws[k].verts.size(); ++v) {
            RationalPoint& x = raws[k].verts[v];
            const bool on_boundary = x.x == fr.x0 || x.x == x1 || x.y == fr.y0 || x.y == y1;
            if (on_boundary) {
                auto [it, fresh] = shared.try_emplace(x, static_cast<std::uint32_t>(verts.size()));
                if (fresh)
                    verts.push_back(std::move(x));
                remap[v] = it->second;
            } else {
                remap[v] = static_cast<std::uint32_t>(verts.size());
                verts.push_back(std::move(x));
            }
        }
        for (const auto& t : raws[k].tris)
            tris.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
        raws[k] = {};
    }
    Triangulation mesh(std::move(verts), std::move(tris));
    if (!mesh.covers_unit_square())
        throw MeshError("assembled mesh does not cover [0,1]^2");
    return mesh;
}

CpwlFunction interpolate(const SmoothField& f, std::shared_ptr<const Triangulation> mesh)
{
    std::vector<double> values(mesh->vertex_count());
    const auto& pts = mesh->points();
    parallel::for_each_index(values.size(), [&](std::size_t v) { values[v] = f.value(pts[v]); });
    return {std::move(mesh), std::move(values)};
}

double sup_error(const SmoothField& f, const CpwlFunction& g, int order)
{
    if (order < 1)
        throw Error("sup_error: lattice order must be positive");
    std::vector<double> per(g.mesh().triangle_count());
    parallel::for_each_index(per.size(), [&](std::size_t t) { per[t] = lattice_max(f, g, t, order); });
    return per.empty() ? 0.0 : *std::max_element(per.begin(), per.end());
}

double reference::sup_error(const SmoothField& f, const CpwlFunction& g, int order)
{
    if (order < 1)
        throw Error("sup_error: lattice order must be positive");
    double worst = 0;
    for (std::size_t t = 0; t < g.mesh().triangle_count(); ++t)
        worst = std::max(worst, lattice_max(f, g, t, order));
    return worst;
}

double sup_error_probe(const SmoothField& f, const CpwlFunction& g, int n)
{
    if (n < 2)
        throw Error("sup_error_probe: need n >= 2");
    const PointLocator loc(g.mesh());
    std::vector<double> rows(static_cast<std::size_t>(n));
    parallel::for_each_index(rows.size(), [&](std::size_t j) {
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            const Vec2 x{static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1)};
            worst = std::max(worst, std::abs(f.value(x) - loc.evaluate(g, x)));
        }
        rows[j] = worst;
    });
    return *std::max_element(rows.begin(), rows.end());
}

std::vector<ConvergenceRow> convergence_experiment(const SmoothField& f, int n, int k_first, int k_last,
                                                   const ExperimentOptions& options)
{
    if (k_first < 0 || k_last < k_first)
        throw Error("convergence_experiment: K range must be non-empty and ascending");
    const auto frames = build_frames(f, n, options.samples_per_square, options.eps);
    const double reference_value = htv_quadrature(f, options.p, options.quadrature_resolution);
    std::vector<ConvergenceRow> rows;
    for (int k = k_first; k <= k_last; ++k) {
        const MeshPlan plan = plan_mesh(frames, n, k, options.mode, options.limits);
        auto mesh = std::make_shared<const Triangulation>(assemble_global(plan));
        const CpwlFunction g = interpolate(f, mesh);
        ConvergenceRow row;
        row.k = k;
        row.vertices = mesh->vertex_count();
        row.triangles = mesh->triangle_count();
        row.min_angle = min_angle(*mesh);
        row.sup_error = sup_error(f, g);
        row.htv_cpwl = htv_cpwl(g, options.p).total;
        row.htv_reference = reference_value;
        if (options.on_mesh)
            options.on_mesh(k, g);
        rows.push_back(row);
    }
    return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows)
{
    std::string out = "K,vertices,triangles,min_angle,sup_error,htv_cpwl,htv_reference\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.k, r.vertices, r.triangles, r.min_angle,
                           r.sup_error, r.htv_cpwl, r.htv_reference);
    return out;
}

} // namespace hstv
