#include <hstv/error.hpp>
#include <hstv/extremal.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hstv {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double max_abs(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

// Weights w with a = sum w_i v_i for the gradient a on triangle t.
std::array<Vec2, 3> gradient_weights(const Triangulation& mesh, std::size_t t)
{
    const auto& tri = mesh.triangles()[t];
    const auto& p = mesh.points();
    const Vec2 d1 = p[tri[1]] - p[tri[0]], d2 = p[tri[2]] - p[tri[0]];
    const double det = cross(d1, d2);
    const Vec2 w1{d2.y / det, -d2.x / det};
    const Vec2 w2{-d1.y / det, d1.x / det};
    return {Vec2{-w1.x - w2.x, -w1.y - w2.y}, w1, w2};
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

ReductionStep reduce(const CpwlFunction& g, const ExtremalityResult& res)
{
    const std::vector<double> sg = signed_jumps(g);
    const std::vector<double> sh = signed_jumps(g.with_values(res.witness));
    double shmax = 0;
    for (auto e : res.certificate.support.edges)
        shmax = std::max(shmax, std::abs(sh[e]));
    if (shmax == 0)
        throw Error("support_reduce: witness has no jump on the support");
    double lambda = std::numeric_limits<double>::infinity();
    for (auto e : res.certificate.support.edges)
        if (std::abs(sh[e]) > 1e-9 * shmax) {
            const double l = sg[e] / sh[e];
            if (std::abs(l) < std::abs(lambda))
                lambda = l;
        }
    std::vector<double> next = g.values();
    for (std::size_t v = 0; v < next.size(); ++v)
        next[v] -= lambda * res.witness[v];
    return {res.witness, lambda, g.with_values(std::move(next))};
}

} // namespace

QuotientRep normalize_mod_affine(const CpwlFunction& g)
{
    const auto& pts = g.mesh().points();
    const auto n = static_cast<Eigen::Index>(pts.size());
    MatrixXd m(n, 3);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = pts[static_cast<std::size_t>(i)];
        m.row(i) << 1.0, p.x, p.y;
        v(i) = g.values()[static_cast<std::size_t>(i)];
    }
    const auto qr = m.colPivHouseholderQr();
    VectorXd c = qr.solve(v);
    VectorXd r = v - m * c;
    const VectorXd dc = qr.solve(r); // one refinement pass
    c += dc;
    r -= m * dc;
    return {g.with_values(std::vector<double>(r.data(), r.data() + n)), {c(0), c(1), c(2)}};
}

JumpSpaceBasis constrained_space(std::shared_ptr<const Triangulation> mesh, const EdgeSupport& support,
                                 double rel_threshold)
{
    const Triangulation& m = *mesh;
    const auto nv = static_cast<Eigen::Index>(m.vertex_count());
    std::vector<bool> in_support(m.edges().size(), false);
    for (auto e : support.edges) {
        if (e >= m.edges().size() || !m.edges()[e].interior())
            throw Error(fmt::format("constrained_space: edge {} is not an interior edge", e));
        in_support[e] = true;
    }
    std::vector<std::size_t> excluded;
    for (std::size_t e = 0; e < m.edges().size(); ++e)
        if (m.edges()[e].interior() && !in_support[e])
            excluded.push_back(e);

    MatrixXd a = MatrixXd::Zero(static_cast<Eigen::Index>(2 * excluded.size() + 3), nv);
    Eigen::Index row = 0;
    for (auto e : excluded) {
        const MeshEdge& edge = m.edges()[e];
        const double len = m.edge_length(e);
        const auto w0 = gradient_weights(m, static_cast<std::size_t>(edge.tri0));
        const auto w1 = gradient_weights(m, static_cast<std::size_t>(edge.tri1));
        const auto& t0 = m.triangles()[static_cast<std::size_t>(edge.tri0)];
        const auto& t1 = m.triangles()[static_cast<std::size_t>(edge.tri1)];
        for (int i = 0; i < 3; ++i) {
            a(row, t1[i]) += len * w1[i].x;
            a(row + 1, t1[i]) += len * w1[i].y;
            a(row, t0[i]) -= len * w0[i].x;
            a(row + 1, t0[i]) -= len * w0[i].y;
        }
        row += 2;
    }
    for (Eigen::Index v = 0; v < nv; ++v) {
        const Vec2 p = m.points()[static_cast<std::size_t>(v)];
        a(row, v) = 1.0;
        a(row + 1, v) = p.x;
        a(row + 2, v) = p.y;
    }
    for (Eigen::Index r = row; r < row + 3; ++r)
        a.row(r).normalize();

    Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
    const VectorXd& sigma = svd.singularValues();
    const double cut = rel_threshold * sigma(0);
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > cut)
        ++rank;

    JumpSpaceBasis out;
    out.mesh = std::move(mesh);
    out.support = support;
    for (Eigen::Index c = rank; c < nv; ++c) {
        const VectorXd col = svd.matrixV().col(c);
        out.basis.emplace_back(col.data(), col.data() + nv);
    }
    out.dim = out.basis.size();
    return out;
}

ExtremalityResult is_extremal(const CpwlFunction& g, double rel_threshold)
{
    const EdgeSupport support = relative_support(g);
    if (support.edges.empty())
        throw Error("is_extremal: g is affine, so it is not on the unit sphere");
    ExtremalityResult res;
    res.certificate = constrained_space(g.mesh_ptr(), support, rel_threshold);
    res.dim = res.certificate.dim;
    if (res.dim == 0)
        throw Error("is_extremal: constrained space lost g itself (numerical rank failure)");
    res.extremal = res.dim == 1;
    if (res.extremal)
        return res;

    std::vector<double> r = normalize_mod_affine(g).g.values();
    const double rn = std::sqrt(dot(r, r));
    for (double& x : r)
        x /= rn;
    double best = -1;
    for (const auto& b : res.certificate.basis) {
        std::vector<double> w = b;
        const double c = dot(b, r);
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] -= c * r[i];
        const double n = std::sqrt(dot(w, w));
        if (n > best) {
            best = n;
            for (double& x : w)
                x /= n;
            res.witness = std::move(w);
        }
    }
    return res;
}

double perturbation_identity_check(const CpwlFunction& g, std::span<const double> h)
{
    if (h.size() != g.values().size())
        throw Error("perturbation_identity_check: h has the wrong length");
    const CpwlFunction hf = g.with_values({h.begin(), h.end()});
    const std::vector<double> sg = signed_jumps(g), sh = signed_jumps(hf);
    const double big_delta = max_abs(sh);
    if (big_delta == 0)
        return 0;
    const EdgeSupport support = relative_support(g);
    if (support.edges.empty())
        throw Error("perturbation_identity_check: g is affine");
    std::vector<bool> in_support(sg.size(), false);
    double delta = std::numeric_limits<double>::infinity();
    for (auto e : support.edges) {
        in_support[e] = true;
        delta = std::min(delta, std::abs(sg[e]));
    }
    for (std::size_t e = 0; e < sh.size(); ++e)
        if (!in_support[e] && std::abs(sh[e]) > 1e-9 * big_delta)
            throw Error(fmt::format("perturbation_identity_check: h jumps on edge {} outside the support of g", e));
    const double eps = delta / big_delta;
    std::vector<double> plus = g.values(), minus = g.values();
    for (std::size_t v = 0; v < plus.size(); ++v) {
        plus[v] += eps * h[v];
        minus[v] -= eps * h[v];
    }
    const double base = htv_cpwl(g).total;
    return std::abs(htv_cpwl(g.with_values(std::move(plus))).total +
                    htv_cpwl(g.with_values(std::move(minus))).total - 2 * base);
}

ReductionStep support_reduce(const CpwlFunction& g)
{
    const ExtremalityResult res = is_extremal(g);
    if (res.extremal)
        throw Error("support_reduce: g is already extremal");
    return reduce(g, res);
}

QuotientRep find_extremal_in_support(const CpwlFunction& g)
{
    CpwlFunction cur = g;
    const std::size_t cap = g.mesh().interior_edge_count() + 1;
    for (std::size_t i = 0; i <= cap; ++i) {
        const ExtremalityResult res = is_extremal(cur);
        if (res.extremal) {
            QuotientRep t = normalize_mod_affine(cur);
            const double h = htv_cpwl(t.g).total;
            std::vector<double> v = t.g.values();
            for (double& x : v)
                x /= h;
            for (double& a : t.affine)
                a /= h;
            t.g = t.g.with_values(std::move(v));
            return t;
        }
        cur = reduce(cur, res).next;
    }
    throw Error("find_extremal_in_support: support reduction did not terminate");
}

double Decomposition::coefficient_sum() const
{
    double s = 0;
    for (const auto& t : terms)
        s += t.c;
    return s;
}

Decomposition decompose(const CpwlFunction& g, double tol)
{
    const QuotientRep rep = normalize_mod_affine(g);
    if (relative_support(g).edges.empty())
        throw Error("decompose: g is affine");
    const double gmax = max_abs(signed_jumps(g));

    // Peel off sign-compatible extremal pieces; each step clears one edge.
    std::vector<QuotientRep> pieces;
    CpwlFunction r = rep.g;
    const std::size_t cap = g.mesh().interior_edge_count() + 1;
    for (std::size_t it = 0; it < cap; ++it) {
        const std::vector<double> sr = signed_jumps(r);
        if (max_abs(sr) <= 1e-11 * gmax)
            break;
        QuotientRep t = find_extremal_in_support(r);
        const std::vector<double> st = signed_jumps(t.g);
        const double stmax = max_abs(st);
        double c = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < st.size(); ++e)
            if (std::abs(st[e]) > 1e-9 * stmax)
                c = std::min(c, sr[e] / st[e]);
        std::vector<double> next = r.values();
        for (std::size_t v = 0; v < next.size(); ++v)
            next[v] -= c * t.g.values()[v];
        r = r.with_values(std::move(next));
        pieces.push_back(std::move(t));
    }

    const std::size_t rows = g.values().size();
    std::vector<double> a;
    a.reserve(2 * pieces.size() * rows);
    for (const auto& t : pieces) {
        a.insert(a.end(), t.g.values().begin(), t.g.values().end());
        for (double x : t.g.values())
            a.push_back(-x);
    }
    const std::vector<double> x = nnls(a, rows, rep.g.values());

    Decomposition out;
    out.htv = htv_cpwl(g).total;
    std::vector<double> fit(rows, 0.0);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const double c = x[2 * i] - x[2 * i + 1];
        if (c == 0)
            continue;
        QuotientRep t = pieces[i];
        if (c < 0) {
            std::vector<double> v = t.g.values();
            for (double& y : v)
                y = -y;
            for (double& y : t.affine)
                y = -y;
            t.g = t.g.with_values(std::move(v));
        }
        for (std::size_t v = 0; v < rows; ++v)
            fit[v] += std::abs(c) * t.g.values()[v];
        out.terms.push_back({std::move(t), std::abs(c)});
    }
    for (std::size_t v = 0; v < rows; ++v)
        out.residual = std::max(out.residual, std::abs(fit[v] - rep.g.values()[v]));
    if (out.residual > tol)
        throw Error(fmt::format("decompose: residual {:.3g} above tolerance {:.3g}", out.residual, tol));
    return out;
}

bool rigidity_check(const CpwlFunction& f, const CpwlFunction& g)
{
    if (f.mesh_ptr() != g.mesh_ptr())
        throw Error("rigidity_check: f and g must share a mesh");
    std::vector<double> sum = f.values();
    for (std::size_t v = 0; v < sum.size(); ++v)
        sum[v] += g.values()[v];
    const HtvReport rf = htv_cpwl(f), rg = htv_cpwl(g), rs = htv_cpwl(f.with_values(std::move(sum)));
    if (std::abs(rs.total - rf.total - rg.total) > 1e-10 * std::max(1.0, rf.total + rg.total))
        throw Error(fmt::format("rigidity_check: htv(f + g) = {} differs from htv(f) + htv(g) = {}", rs.total,
                                rf.total + rg.total));
    for (std::size_t i = 0; i < rs.per_edge.size(); ++i)
        if (std::abs(rs.per_edge[i].contribution - rf.per_edge[i].contribution - rg.per_edge[i].contribution) > 1e-9)
            return false;
    return true;
}

std::vector<double> nnls(const std::vector<double>& a_data, std::size_t rows, const std::vector<double>& b_data)
{
    if (rows == 0 || a_data.size() % rows != 0 || b_data.size() != rows)
        throw Error("nnls: inconsistent dimensions");
    const auto m = static_cast<Eigen::Index>(rows);
    const auto n = static_cast<Eigen::Index>(a_data.size() / rows);
    const Eigen::Map<const MatrixXd> a(a_data.data(), m, n);
    const Eigen::Map<const VectorXd> b(b_data.data(), m);
    VectorXd x = VectorXd::Zero(n);
    if (n == 0)
        return {};
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());

    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[static_cast<std::size_t>(j)])
                idx.push_back(j);
        MatrixXd sub(m, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
        const VectorXd zs = sub.colPivHouseholderQr().solve(b);
        VectorXd z = VectorXd::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k)
            z(idx[k]) = zs(static_cast<Eigen::Index>(k));
        return z;
    };

    for (Eigen::Index outer = 0; outer < 3 * n; ++outer) {
        const VectorXd w = a.transpose() * (b - a * x);
        Eigen::Index j = -1;
        double best = tol;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!passive[static_cast<std::size_t>(i)] && w(i) > best) {
                best = w(i);
                j = i;
            }
        if (j < 0)
            break;
        passive[static_cast<std::size_t>(j)] = true;
        for (Eigen::Index inner = 0; inner < 3 * n; ++inner) {
            const VectorXd z = solve_passive();
            double alpha = 1.0;
            bool feasible = true;
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0) {
                    feasible = false;
                    alpha = std::min(alpha, x(i) / (x(i) - z(i)));
                }
            if (feasible) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && x(i) <= 1e-15) {
                    passive[static_cast<std::size_t>(i)] = false;
                    x(i) = 0;
                }
        }
    }
    return {x.data(), x.data() + n};
}

} // namespace hstv
