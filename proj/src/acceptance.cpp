#include <hstv/acceptance.hpp>
#include <hstv/approx.hpp>
#include <hstv/error.hpp>
#include <hstv/extremal.hpp>
#include <hstv/field.hpp>
#include <hstv/htv.hpp>
#include <hstv/schatten.hpp>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace hstv {

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string join(const std::vector<double>& v, const char* spec = "{:.6f}")
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + fmt::format(fmt::runtime(spec), v[i]);
    return out;
}

std::shared_ptr<const Triangulation> pipeline_mesh(const SmoothField& f, int n, int k)
{
    return std::make_shared<const Triangulation>(assemble_global(plan_mesh(build_frames(f, n), n, k)));
}

Outcome isotropic_density()
{
    const auto t0 = Clock::now();
    const auto f = parse_field("quadratic:iso");
    ExperimentOptions opt;
    opt.mode = PlanMode::lcm;
    opt.p = SchattenP::one();
    const auto rows = convergence_experiment(*f, 1, 1, 6, opt);
    const double elapsed = seconds_since(t0);
    std::vector<double> late;
    bool htv_ok = true;
    for (const auto& r : rows)
        if (r.k >= 4) {
            late.push_back(r.htv_cpwl);
            htv_ok = htv_ok && r.htv_cpwl >= 1.9 && r.htv_cpwl <= 2.1;
        }
    const double rate = std::pow(rows.front().sup_error / rows.back().sup_error, 1.0 / (rows.size() - 1));
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        monotone = monotone && rows[i].sup_error <= 1.05 * rows[i - 1].sup_error;
    const bool pass = htv_ok && rate >= 3.0 && monotone && elapsed <= 60.0;
    return {pass, fmt::format("htv K=4..6 = [{}] in [1.9, 2.1]; mean sup-error ratio {:.3f} >= 3; runtime {:.1f} s <= 60",
                              join(late), rate, elapsed)};
}

Outcome seminorm_gap()
{
    const auto f = parse_field("quadratic:iso");
    const double frobenius = htv_quadrature(*f, SchattenP::two());
    bool pass = std::abs(frobenius - std::sqrt(2.0)) <= 1e-4;
    double worst_gap = 0, worst_outer = 0, least = INFINITY;
    for (int k = 4; k <= 6; ++k) {
        const CpwlFunction g = interpolate(*f, pipeline_mesh(*f, 1, k));
        const double h1 = htv_cpwl(g, SchattenP::one()).total;
        const double h2 = htv_cpwl(g, SchattenP::two()).total;
        worst_gap = std::max(worst_gap, std::abs(h1 - h2));
        worst_outer = std::max(worst_outer, p_independence_check(g) * h1);
        least = std::min(least, h2);
    }
    pass = pass && worst_gap <= 1e-12 && worst_outer <= 1e-12 && least >= 1.9 && least > frobenius;
    return {pass, fmt::format("|htv_2 - htv_1| <= {:.2e}, outer-product spread {:.2e} (<= 1e-12); min htv_2 {:.6f} >= 1.9 "
                              "> smooth Frobenius {:.6f} (sqrt 2 within 1e-4)",
                              worst_gap, worst_outer, least, frobenius)};
}

Outcome anisotropic_alignment()
{
    const auto f = make_rotated_quadratic(2, 1, std::atan(0.5));
    const double ref = htv_quadrature(*f, SchattenP::one());
    bool pass = std::abs(ref - 3.0) <= 1e-6;
    const auto rows = convergence_experiment(*f, 1, 4, 6);
    std::vector<double> aligned, right, left;
    for (const auto& r : rows) {
        aligned.push_back(r.htv_cpwl);
        pass = pass && std::abs(r.htv_cpwl - 3.0) <= 0.05 * 3.0;
        const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r.vertices)))) - 1;
        const auto grid_r = std::make_shared<const Triangulation>(uniform_grid_mesh(n, Diagonal::right));
        const auto grid_l = std::make_shared<const Triangulation>(uniform_grid_mesh(n, Diagonal::left));
        right.push_back(htv_cpwl(interpolate(*f, grid_r)).total);
        left.push_back(htv_cpwl(interpolate(*f, grid_l)).total);
        pass = pass && right.back() >= 1.02 * r.htv_cpwl;
    }
    return {pass, fmt::format("reference {:.8f}; aligned K=4..6 [{}] within 5% of 3; (1,1)-diagonal grid [{}] >= 2% above; "
                              "(1,-1)-diagonal grid [{}] (reported only)",
                              ref, join(aligned), join(right), join(left))};
}

// Every vertex on a square boundary sits at a multiple of s along it.
bool on_spacing_lattice(const Triangulation& mesh, const MeshPlan& plan)
{
    const long m = 1L << plan.n;
    for (const auto& v : mesh.vertices()) {
        const Rational gx = v.x * m, gy = v.y * m;
        const bool vertical = gx.get_den() == 1, horizontal = gy.get_den() == 1;
        if (vertical && Rational(v.y / plan.s).get_den() != 1)
            return false;
        if (horizontal && Rational(v.x / plan.s).get_den() != 1)
            return false;
    }
    return true;
}

Outcome alignment_exactness(std::mt19937_64& rng)
{
    const std::vector<RationalAngle> pool = {{2, 1}, {1, 2}, {3, 1}, {1, 3}, {3, 2}, {2, 3}};
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    int runs = 0;
    bool pass = true;
    std::string failure;
    const auto f = parse_field("quadratic:iso");
    for (int n = 1; n <= 2; ++n)
        for (int set = 0; set < 3; ++set) {
            auto frames = build_frames(*f, n, 1);
            for (auto& fr : frames)
                fr.angle = pool[pick(rng)];
            double angle0 = -1;
            for (int k = 0; k <= 3; ++k) {
                ++runs;
                const MeshPlan plan = plan_mesh(frames, n, k);
                const Triangulation mesh = assemble_global(plan);
                const double a = min_angle(mesh);
                if (angle0 < 0)
                    angle0 = a;
                if (!mesh.covers_unit_square() || !on_spacing_lattice(mesh, plan) || a != angle0) {
                    pass = false;
                    failure = fmt::format("; failed at N={} set {} K={}", n, set, k);
                }
            }
        }
    return {pass, fmt::format("{} assemblies (N in {{1,2}}, K in 0..3, random angle sets) conforming, boundary vertices on "
                              "the s-lattice, min angle constant in K{}",
                              runs, failure)};
}

Outcome extremality_suite(std::mt19937_64& rng)
{
    const auto t0 = Clock::now();
    bool pass = true;
    // Hat on a 4x4 grid.
    const auto g4 = std::make_shared<const Triangulation>(uniform_grid_mesh(4));
    std::vector<double> hat(g4->vertex_count(), 0.0);
    hat[12] = 1.0;
    const ExtremalityResult h = is_extremal({g4, hat});
    pass = pass && h.extremal && h.dim == 1;
    // Two hats with disjoint edge supports on a 6x6 grid.
    const auto g6 = std::make_shared<const Triangulation>(uniform_grid_mesh(6));
    std::vector<double> two(g6->vertex_count(), 0.0);
    two[2 * 7 + 2] = 1.0;
    two[4 * 7 + 4] = 1.0;
    const CpwlFunction tg(g6, two);
    const ExtremalityResult t = is_extremal(tg);
    const double witness_check = t.extremal ? INFINITY : perturbation_identity_check(tg, t.witness);
    pass = pass && !t.extremal && witness_check <= 1e-10;

    double worst_res = 0, worst_sum = 0, worst_pert = 0;
    int extremal_fail = 0, terms = 0;
    std::uniform_int_distribution<int> coord(1, 96);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    for (int it = 0; it < 100; ++it) {
        std::vector<RationalPoint> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        std::set<std::pair<int, int>> seen;
        while (seen.size() < 8) {
            const int i = coord(rng), j = coord(rng);
            if (seen.insert({i, j}).second)
                pts.push_back({make_rational(i, 97), make_rational(j, 97)});
        }
        auto mesh = std::make_shared<const Triangulation>(delaunay_triangulation(std::move(pts)));
        std::vector<double> vals(mesh->vertex_count());
        for (double& v : vals)
            v = value(rng);
        const CpwlFunction g(mesh, vals);
        const Decomposition d = decompose(g, 1e-8);
        worst_res = std::max(worst_res, d.residual);
        worst_sum = std::max(worst_sum, std::abs(d.coefficient_sum() - htv_cpwl(g).total));
        for (const auto& term : d.terms) {
            ++terms;
            const ExtremalityResult r = is_extremal(term.t.g);
            if (!r.extremal) {
                ++extremal_fail;
                continue;
            }
            worst_pert = std::max(worst_pert, perturbation_identity_check(term.t.g, r.certificate.basis[0]));
        }
    }
    const double elapsed = seconds_since(t0);
    pass = pass && worst_res <= 1e-8 && worst_sum <= 1e-8 && extremal_fail == 0 && worst_pert <= 1e-10 && elapsed <= 30;
    return {pass, fmt::format("hat dim {}; two-hat dim {}, witness identity {:.1e}; 100 random: residual {:.1e}, "
                              "|sum c - htv| {:.1e}, {} terms, {} non-extremal, perturbation {:.1e}; runtime {:.1f} s <= 30",
                              h.dim, t.dim, witness_check, worst_res, worst_sum, terms, extremal_fail, worst_pert,
                              elapsed)};
}

Outcome schatten_suite(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-3.0, 3.0), ang(0.0, 2 * std::numbers::pi);
    const SchattenP ps[] = {SchattenP::one(), SchattenP(1.5), SchattenP::two(), SchattenP(3.0), SchattenP::inf()};
    double unitary = 0, submult = 0, dual = 0, rank_one = 0, eigen = 0;
    for (int i = 0; i < 10000; ++i) {
        const Mat2 m{u(rng), u(rng), u(rng), u(rng)}, n{u(rng), u(rng), u(rng), u(rng)};
        const Mat2 r1 = Mat2::rotation(ang(rng)), r2 = Mat2::rotation(ang(rng));
        const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
        const double off = u(rng);
        const Mat2 s{u(rng), off, off, u(rng)};
        Eigen::Matrix2d se;
        se << s.m11(), s.m12(), s.m21(), s.m22();
        const Eigen::Vector2d lam = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(se).eigenvalues();
        for (auto p : ps) {
            const double nm = schatten_norm(m, p);
            unitary = std::max(unitary, std::abs(schatten_norm(r1 * m * r2, p) - nm));
            submult = std::max(submult, schatten_norm(m * n, p) - nm * schatten_norm(n, p));
            dual = std::max(dual, dual_norm_estimate(m, p, 64) - nm);
            rank_one = std::max(rank_one, std::abs(schatten_norm(Mat2::outer(a, b), p) - norm(a) * norm(b)));
            eigen = std::max(eigen, std::abs(schatten_norm(s, p) - lp_norm2(lam(0), lam(1), p)));
        }
    }
    const bool pass = unitary <= 1e-10 && submult <= 1e-10 && dual <= 1e-10 && rank_one <= 1e-10 && eigen <= 1e-10;
    return {pass, fmt::format("10^4 matrices x 5 exponents, worst violations: unitary {:.1e}, submultiplicative {:.1e}, "
                              "dual bound {:.1e}, rank-one {:.1e}, eigenvalue {:.1e} (<= 1e-10)",
                              unitary, submult, dual, rank_one, eigen)};
}

Outcome field_calculus(std::mt19937_64& rng)
{
    // One-sided second-order differences on both sides of each side of the square.
    const double h = 1e-5;
    double c0 = 0, c1 = 0;
    for (const FieldPtr& f : {make_gaussian_bump(0.25, {0.3, 0.4}), make_product_sine(std::numbers::pi)})
        for (Side side : {Side::left, Side::right, Side::bottom, Side::top}) {
            const auto e = extend_reflection(f, side);
            const bool horiz = side == Side::left || side == Side::right;
            const double c = (side == Side::left || side == Side::bottom) ? 0.0 : 1.0;
            for (int i = 1; i <= 9; ++i) {
                const double t = 0.1 * i;
                const Vec2 on = horiz ? Vec2{c, t} : Vec2{t, c};
                const Vec2 n = horiz ? Vec2{h, 0} : Vec2{0, h};
                c0 = std::max(c0, std::abs(2 * e->value(on - n) - e->value(on - 2 * n) - e->value(on)));
                const double plus = (-3 * e->value(on) + 4 * e->value(on + n) - e->value(on + 2 * n)) / (2 * h);
                const double minus = (3 * e->value(on) - 4 * e->value(on - n) + e->value(on - 2 * n)) / (2 * h);
                c1 = std::max(c1, std::abs(plus - minus));
            }
        }
    std::uniform_int_distribution<int> size(12, 40);
    std::uniform_real_distribution<double> val(-1.0, 1.0), rad(1.0, 3.5);
    double worst = -INFINITY;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = size(rng);
        GridSample g({0, 0}, 1.0 / n, n, n);
        for (double& v : g.values)
            v = val(rng);
        const double radius = g.h * rad(rng);
        for (auto p : {SchattenP::one(), SchattenP::two(), SchattenP::inf()})
            worst = std::max(worst, discrete_htv(mollify(g, radius), p) - discrete_htv(g, p));
    }
    const bool pass = c0 <= 1e-5 && c1 <= 1e-5 && worst <= 1e-6;
    return {pass, fmt::format("reflection jump in value {:.1e}, in normal derivative {:.1e} (<= 1e-5); mollify energy "
                              "increase {:.1e} over 20 random grids (<= 1e-6)",
                              c0, c1, worst)};
}

const char* title(int id)
{
    static const char* titles[] = {"isotropic quadratic density",   "seminorm gap",
                                   "anisotropic rotated quadratic", "alignment exactness",
                                   "extremality suite",             "Schatten property suite",
                                   "field calculus"};
    return titles[id - 1];
}

} // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options)
{
    if (id < 1 || id > kCriterionCount)
        throw Error(fmt::format("no acceptance criterion {}", id));
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(id));
    CriterionResult r;
    r.id = id;
    r.title = title(id);
    const auto t0 = Clock::now();
    try {
        Outcome o{false, ""};
        switch (id) {
        case 1: o = isotropic_density(); break;
        case 2: o = seminorm_gap(); break;
        case 3: o = anisotropic_alignment(); break;
        case 4: o = alignment_exactness(rng); break;
        case 5: o = extremality_suite(rng); break;
        case 6: o = schatten_suite(rng); break;
        case 7: o = field_calculus(rng); break;
        }
        r.pass = o.pass;
        r.detail = std::move(o.detail);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = seconds_since(t0);
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options)
{
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id)
        out.push_back(run_criterion(id, options));
    return out;
}

std::string format_result(const CriterionResult& r)
{
    return fmt::format("{} [{}] {}: {} ({:.2f} s)", r.pass ? "PASS" : "FAIL", r.id, r.title, r.detail, r.seconds);
}

} // namespace hstv
