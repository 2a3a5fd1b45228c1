#include "generators.hpp"

#include <hstv/error.hpp>
#include <hstv/extremal.hpp>

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace hstv;

namespace {

std::shared_ptr<const Triangulation> grid(int n) { return std::make_shared<const Triangulation>(uniform_grid_mesh(n)); }

std::vector<double> hat_values(int n, int i, int j, double height = 1.0)
{
    std::vector<double> v(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0);
    v[static_cast<std::size_t>(j * (n + 1) + i)] = height;
    return v;
}

CpwlFunction hat(double height = 1.0) { return {grid(4), hat_values(4, 2, 2, height)}; }

std::vector<double> add(std::vector<double> a, const std::vector<double>& b, double s = 1.0)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] += s * b[i];
    return a;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

struct TwoHats {
    std::shared_ptr<const Triangulation> mesh = grid(6);
    std::vector<double> a = hat_values(6, 2, 2), b = hat_values(6, 4, 4);
    CpwlFunction g{mesh, add(a, b)};
};

// Scale s minimizing |x - s y|; the distance after removing that multiple.
double distance_to_span(const std::vector<double>& x, const std::vector<double>& y)
{
    double xy = 0, yy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xy += x[i] * y[i];
        yy += y[i] * y[i];
    }
    return max_diff(x, add(std::vector<double>(x.size(), 0.0), y, xy / yy));
}

CpwlFunction random_cpwl(gen::Gen& g)
{
    auto mesh = g.delaunay_mesh(8);
    return {mesh, g.values(mesh->vertex_count())};
}

// Least-squares over every subset of columns; the feasible one with the
// smallest residual is the NNLS optimum.
std::vector<double> nnls_brute(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
{
    const auto n = a.cols();
    std::vector<double> best(static_cast<std::size_t>(n), 0.0);
    double best_res = b.norm();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (mask & (1u << j))
                idx.push_back(j);
        Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
        const Eigen::VectorXd z = sub.colPivHouseholderQr().solve(b);
        if ((z.array() < 0).any())
            continue;
        const double res = (sub * z - b).norm();
        if (res < best_res - 1e-12) {
            best_res = res;
            std::fill(best.begin(), best.end(), 0.0);
            for (std::size_t k = 0; k < idx.size(); ++k)
                best[static_cast<std::size_t>(idx[k])] = z(static_cast<Eigen::Index>(k));
        }
    }
    return best;
}

} // namespace

TEST(Nnls, MatchesSubsetEnumeration)
{
    gen::Gen g(41);
    for (int it = 0; it < 200; ++it) {
        const int m = g.integer(3, 8), n = g.integer(1, 5);
        Eigen::MatrixXd a(m, n);
        Eigen::VectorXd b(m);
        for (int i = 0; i < m; ++i) {
            b(i) = g.uniform(-1, 1);
            for (int j = 0; j < n; ++j)
                a(i, j) = g.uniform(-1, 1);
        }
        const std::vector<double> x =
            nnls(std::vector<double>(a.data(), a.data() + a.size()), static_cast<std::size_t>(m),
                 std::vector<double>(b.data(), b.data() + m));
        const std::vector<double> ref = nnls_brute(a, b);
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n), rv(ref.data(), n);
        EXPECT_NEAR((a * xv - b).norm(), (a * rv - b).norm(), 1e-10) << "case " << it;
        EXPECT_GE(*std::min_element(x.begin(), x.end()), 0.0);
        // Full column rank: the minimizer is unique.
        if (m >= n)
            EXPECT_LE(max_diff(x, ref), 1e-9) << "case " << it;
    }
    EXPECT_THROW(nnls({1, 2, 3}, 2, {1, 1}), Error);
}

TEST(Quotient, AffineVanishesAndShiftInvariance)
{
    auto mesh = grid(3);
    std::vector<double> lin;
    for (const Vec2& p : mesh->points())
        lin.push_back(2 - 0.5 * p.x + 3 * p.y);
    const QuotientRep zero = normalize_mod_affine({mesh, lin});
    for (double v : zero.g.values())
        EXPECT_LE(std::abs(v), 1e-12);
    EXPECT_NEAR(zero.affine[0], 2, 1e-12);
    EXPECT_NEAR(zero.affine[2], 3, 1e-12);

    gen::Gen g(42);
    for (int it = 0; it < 20; ++it) {
        const CpwlFunction f = random_cpwl(g);
        const QuotientRep a = normalize_mod_affine(f);
        std::vector<double> shifted = f.values();
        const double c0 = g.uniform(-2, 2), c1 = g.uniform(-2, 2), c2 = g.uniform(-2, 2);
        for (std::size_t v = 0; v < shifted.size(); ++v)
            shifted[v] += c0 + c1 * f.mesh().points()[v].x + c2 * f.mesh().points()[v].y;
        const QuotientRep b = normalize_mod_affine(f.with_values(shifted));
        EXPECT_LE(max_diff(a.g.values(), b.g.values()), 1e-12);
        double m0 = 0, mx = 0, my = 0;
        for (std::size_t v = 0; v < shifted.size(); ++v) {
            m0 += a.g.values()[v];
            mx += a.g.values()[v] * f.mesh().points()[v].x;
            my += a.g.values()[v] * f.mesh().points()[v].y;
        }
        EXPECT_LE(std::max({std::abs(m0), std::abs(mx), std::abs(my)}), 1e-12);
        EXPECT_NEAR(htv_cpwl(a.g).total, htv_cpwl(f).total, 1e-12);
    }
}

TEST(Quotient, HatKeepsApexDominant)
{
    const QuotientRep r = normalize_mod_affine(hat());
    const auto& v = r.g.values();
    EXPECT_EQ(std::max_element(v.begin(), v.end()) - v.begin(), 12);
}

TEST(ConstrainedSpace, Extremes)
{
    auto mesh = grid(4);
    EdgeSupport all;
    for (std::size_t e = 0; e < mesh->edges().size(); ++e)
        if (mesh->edges()[e].interior())
            all.edges.push_back(e);
    EXPECT_EQ(constrained_space(mesh, all).dim, mesh->vertex_count() - 3);
    EXPECT_EQ(constrained_space(mesh, {}).dim, 0u);
    const JumpSpaceBasis hat_space = constrained_space(mesh, relative_support(hat()));
    EXPECT_EQ(hat_space.dim, 1u);
    EdgeSupport bad;
    bad.edges.push_back(0);
    EXPECT_THROW(constrained_space(mesh, bad), Error);
}

TEST(ConstrainedSpace, BasisSatisfiesConstraintsProperty)
{
    gen::Gen g(43);
    for (int it = 0; it < 30; ++it) {
        const CpwlFunction f = random_cpwl(g);
        EdgeSupport s = relative_support(f);
        // Keep a random half of the support.
        std::erase_if(s.edges, [&](std::size_t) { return g.integer(0, 1) == 0; });
        const JumpSpaceBasis space = constrained_space(f.mesh_ptr(), s);
        std::vector<bool> keep(f.mesh().edges().size(), false);
        for (auto e : s.edges)
            keep[e] = true;
        for (const auto& b : space.basis) {
            const std::vector<double> j = signed_jumps(f.with_values(b));
            for (std::size_t e = 0; e < j.size(); ++e)
                if (!keep[e])
                    EXPECT_LE(std::abs(j[e]), 1e-10);
            double m0 = 0;
            for (double x : b)
                m0 += x;
            EXPECT_LE(std::abs(m0), 1e-10);
        }
    }
}

TEST(Extremal, HatIsExtremal)
{
    for (double s : {1.0, -1.0, 3.5}) {
        const ExtremalityResult r = is_extremal(hat(s));
        EXPECT_TRUE(r.extremal);
        EXPECT_EQ(r.dim, 1u);
        EXPECT_TRUE(r.witness.empty());
    }
    auto mesh = grid(4);
    std::vector<double> lin;
    for (const Vec2& p : mesh->points())
        lin.push_back(p.x - p.y);
    EXPECT_THROW(is_extremal({mesh, lin}), Error);
}

TEST(Extremal, TwoHatsAreNot)
{
    const TwoHats t;
    const ExtremalityResult r = is_extremal(t.g);
    EXPECT_FALSE(r.extremal);
    EXPECT_EQ(r.dim, 2u);
    // The witness is a hat difference: orthogonal to g, inside span(a, b) mod affine.
    const QuotientRep qa = normalize_mod_affine({t.mesh, t.a}), qb = normalize_mod_affine({t.mesh, t.b});
    const std::vector<double> diff = add(qa.g.values(), qb.g.values(), -1.0);
    EXPECT_LE(distance_to_span(r.witness, diff), 1e-9);
    EXPECT_LE(perturbation_identity_check(t.g, r.witness), 1e-10);
}

TEST(Extremal, ScaleSymmetryProperty)
{
    gen::Gen g(44);
    for (int it = 0; it < 30; ++it) {
        const CpwlFunction f = random_cpwl(g);
        std::vector<double> neg = f.values();
        for (double& x : neg)
            x = -x;
        EXPECT_EQ(is_extremal(f).extremal, is_extremal(f.with_values(neg)).extremal);
    }
}

TEST(Perturbation, Examples)
{
    const CpwlFunction h = hat();
    EXPECT_LE(perturbation_identity_check(h, h.values()), 1e-12);
    const ExtremalityResult r = is_extremal(h);
    EXPECT_LE(perturbation_identity_check(h, r.certificate.basis[0]), 1e-10);
    const TwoHats t;
    EXPECT_LE(perturbation_identity_check(t.g, t.a), 1e-10);
    EXPECT_EQ(perturbation_identity_check(t.g, std::vector<double>(t.a.size(), 0.0)), 0.0);
    EXPECT_THROW(perturbation_identity_check(h, hat_values(4, 1, 1)), Error);
}

TEST(SupportReduce, TwoHatsGiveOneHat)
{
    const TwoHats t;
    const ReductionStep step = support_reduce(t.g);
    EXPECT_TRUE(is_extremal(step.next).extremal);
    const QuotientRep n = normalize_mod_affine(step.next);
    const QuotientRep qa = normalize_mod_affine({t.mesh, t.a}), qb = normalize_mod_affine({t.mesh, t.b});
    const double da = distance_to_span(n.g.values(), qa.g.values());
    const double db = distance_to_span(n.g.values(), qb.g.values());
    EXPECT_LE(std::min(da, db), 1e-9);
    EXPECT_THROW(support_reduce(hat()), Error);
}

TEST(SupportReduce, StrictDecreaseProperty)
{
    gen::Gen g(45);
    for (int it = 0; it < 30; ++it) {
        CpwlFunction f = random_cpwl(g);
        double min_len = INFINITY;
        for (std::size_t e = 0; e < f.mesh().edges().size(); ++e)
            if (f.mesh().edges()[e].interior())
                min_len = std::min(min_len, f.mesh().edge_length(e));
        EdgeSupport s = relative_support(f);
        std::size_t steps = 0;
        while (!is_extremal(f).extremal) {
            const ReductionStep step = support_reduce(f);
            const EdgeSupport next = relative_support(step.next);
            EXPECT_LE(next.total_length, s.total_length - min_len + 1e-12);
            EXPECT_TRUE(std::includes(s.edges.begin(), s.edges.end(), next.edges.begin(), next.edges.end()));
            f = step.next;
            s = next;
            ++steps;
        }
        EXPECT_LE(steps, f.mesh().interior_edge_count());
    }
}

TEST(FindExtremal, Examples)
{
    const QuotientRep t = find_extremal_in_support(hat(3.0));
    const QuotientRep h = normalize_mod_affine(hat(1.0 / htv_cpwl(hat()).total));
    EXPECT_LE(max_diff(t.g.values(), h.g.values()), 1e-12);
    EXPECT_NEAR(htv_cpwl(t.g).total, 1.0, 1e-12);

    const TwoHats two;
    const QuotientRep u = find_extremal_in_support(two.g);
    const QuotientRep qa = normalize_mod_affine({two.mesh, two.a}), qb = normalize_mod_affine({two.mesh, two.b});
    const double scale = 1.0 / htv_cpwl(qa.g).total;
    const double da = max_diff(u.g.values(), add(std::vector<double>(qa.g.values().size(), 0.0), qa.g.values(), scale));
    const double db = max_diff(u.g.values(), add(std::vector<double>(qb.g.values().size(), 0.0), qb.g.values(), scale));
    EXPECT_LE(std::min(da, db), 1e-9);
}

TEST(FindExtremal, SignCompatibleProperty)
{
    gen::Gen g(46);
    for (int it = 0; it < 30; ++it) {
        const CpwlFunction f = random_cpwl(g);
        const QuotientRep t = find_extremal_in_support(f);
        EXPECT_TRUE(is_extremal(t.g).extremal);
        EXPECT_NEAR(htv_cpwl(t.g).total, 1.0, 1e-10);
        const std::vector<double> jf = signed_jumps(f), jt = signed_jumps(t.g);
        const EdgeSupport sf = relative_support(f), st = relative_support(t.g);
        EXPECT_TRUE(std::includes(sf.edges.begin(), sf.edges.end(), st.edges.begin(), st.edges.end()));
        for (auto e : st.edges)
            EXPECT_GT(jf[e] * jt[e], 0.0);
    }
}

TEST(Decompose, Hats)
{
    const Decomposition one = decompose(hat(3.0));
    ASSERT_EQ(one.terms.size(), 1u);
    EXPECT_NEAR(one.terms[0].c, 3.0 * htv_cpwl(hat()).total, 1e-12);

    const TwoHats t;
    const Decomposition two = decompose({t.mesh, add(add(std::vector<double>(t.a.size(), 0.0), t.a, 2.0), t.b, 5.0)});
    ASSERT_EQ(two.terms.size(), 2u);
    const double unit = htv_cpwl({t.mesh, t.a}).total;
    std::vector<double> cs = {two.terms[0].c, two.terms[1].c};
    std::sort(cs.begin(), cs.end());
    EXPECT_NEAR(cs[0], 2 * unit, 1e-10);
    EXPECT_NEAR(cs[1], 5 * unit, 1e-10);
    EXPECT_LE(two.residual, 1e-12);
}

TEST(Decompose, RandomTwelveVertexProperty)
{
    gen::Gen g(47);
    for (int it = 0; it < 25; ++it) {
        const CpwlFunction f = random_cpwl(g);
        ASSERT_EQ(f.mesh().vertex_count(), 12u);
        const Decomposition d = decompose(f);
        EXPECT_LE(d.residual, 1e-8);
        EXPECT_NEAR(d.coefficient_sum(), htv_cpwl(f).total, 1e-8);
        for (const auto& term : d.terms) {
            EXPECT_GT(term.c, 0.0);
            const ExtremalityResult r = is_extremal(term.t.g);
            EXPECT_TRUE(r.extremal);
            EXPECT_LE(perturbation_identity_check(term.t.g, r.certificate.basis[0]), 1e-10);
        }
    }
    auto mesh = grid(2);
    EXPECT_THROW(decompose({mesh, std::vector<double>(mesh->vertex_count(), 1.0)}), Error);
}

TEST(Rigidity, Examples)
{
    const CpwlFunction h = hat();
    EXPECT_TRUE(rigidity_check(h, h.with_values(add(std::vector<double>(h.values().size(), 0.0), h.values(), 2.0))));
    const TwoHats t;
    EXPECT_TRUE(rigidity_check({t.mesh, t.a}, {t.mesh, t.b}));
    EXPECT_THROW(rigidity_check(h, h.with_values(add(std::vector<double>(h.values().size(), 0.0), h.values(), -1.0))),
                 Error);
    EXPECT_THROW(rigidity_check(h, hat()), Error);
}
