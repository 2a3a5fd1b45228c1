#include "cli.hpp"

#include <hstv/acceptance.hpp>
#include <hstv/approx.hpp>
#include <hstv/error.hpp>
#include <hstv/extremal.hpp>
#include <hstv/field.hpp>
#include <hstv/htv.hpp>
#include <hstv/mesh.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#ifndef HSTV_VERSION
#define HSTV_VERSION "0.0.0"
#endif
#ifndef HSTV_BUILD_ID
#define HSTV_BUILD_ID "unknown"
#endif

namespace hstv::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<int, int> parse_k_range(const std::string& text)
{
    try {
        std::size_t used = 0;
        const auto dots = text.find("..");
        if (dots == std::string::npos) {
            const int k = std::stoi(text, &used);
            if (used != text.size())
                throw UsageError("");
            return {k, k};
        }
        const int a = std::stoi(text.substr(0, dots), &used);
        if (used != dots)
            throw UsageError("");
        const std::string rest = text.substr(dots + 2);
        const int b = std::stoi(rest, &used);
        if (used != rest.size())
            throw UsageError("");
        return {a, b};
    } catch (const std::exception&) {
        throw UsageError("--K expects an integer or a range a..b, got '" + text + "'");
    }
}

SchattenP parse_p(const std::string& text)
{
    try {
        return SchattenP::parse(text);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--p: ") + e.what());
    }
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot write " + path);
    f << text;
    if (!f)
        throw Error("failed writing " + path);
}

void emit(std::ostream& out, const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
        out << text;
    else
        write_text(path, text);
}

std::shared_ptr<const Triangulation> grid_mesh(int n)
{
    return std::make_shared<const Triangulation>(uniform_grid_mesh(n));
}

struct HtvArgs {
    std::string mesh;
    std::string p = "1";
    std::string report = "text";
    std::string out;
};

struct ApproxArgs {
    std::string field = "quadratic:iso";
    std::optional<int> n;
    std::optional<double> eps;
    std::string k = "0..4";
    std::string mode = "lcm";
    std::string p = "1";
    std::string out;
    std::string emit_mesh, emit_svg;
    int resolution = 512;
    double max_triangles = 4e6;
};

struct ExtremalArgs {
    std::string mesh;
    double threshold = 1e-10;
    double tol = 1e-8;
    std::string out;
};

struct MeshArgs {
    std::string mesh;
    std::string out;
    int size = 800;
    bool fill = false;
    std::string kind = "hat";
    int n = 4;
    std::string field = "quadratic:iso";
    int levels = 0;
    int k = 0;
};

int do_htv(const HtvArgs& a, std::ostream& out)
{
    const SchattenP p = parse_p(a.p);
    const CpwlFunction g = load_mesh(a.mesh);
    const HtvReport r = htv_cpwl(g, p);
    std::string text;
    if (a.report == "csv") {
        text = "edge,x1,y1,x2,y2,jump_norm,length,contribution\n";
        const auto& pts = g.mesh().points();
        for (const auto& c : r.per_edge) {
            const MeshEdge& e = g.mesh().edges()[c.edge];
            const Vec2 a0 = pts[e.v0], a1 = pts[e.v1];
            text += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", c.edge, a0.x, a0.y, a1.x,
                                a1.y, norm(c.jump), c.length, c.contribution);
        }
    } else {
        text = fmt::format("htv = {:.17g} (p = {}, {} interior edges, {} with nonzero jump)\n", r.total, p.to_string(),
                           r.per_edge.size(), htv_support(g).edges.size());
    }
    emit(out, a.out, text);
    return 0;
}

int do_approx(const ApproxArgs& a, std::ostream& out)
{
    const auto [k0, k1] = parse_k_range(a.k);
    if (k0 < 0 || k1 < k0)
        throw UsageError("--K range must be non-negative and ascending");
    int n = 1;
    if (a.eps) {
        if (!(*a.eps > 0) || *a.eps > 1)
            throw UsageError("--eps must lie in (0, 1]");
        const int needed = levels_for_eps(*a.eps);
        if (a.n && *a.n < needed)
            throw UsageError(fmt::format("--N {} is too coarse for --eps {}: need 2^-N <= eps, N >= {}", *a.n, *a.eps,
                                         needed));
        n = a.n.value_or(needed);
    } else if (a.n) {
        n = *a.n;
    }
    if (n < 0 || n > 8)
        throw UsageError("--N must lie in [0, 8]");
    ExperimentOptions opt;
    try {
        opt.mode = parse_plan_mode(a.mode);
    } catch (const Error& e) {
        throw UsageError(std::string("--mode: ") + e.what());
    }
    opt.p = parse_p(a.p);
    opt.quadrature_resolution = a.resolution;
    opt.eps = a.eps;
    opt.limits.max_triangles = a.max_triangles;
    FieldPtr f;
    try {
        f = parse_field(a.field);
    } catch (const Error& e) {
        throw UsageError(std::string("--field: ") + e.what());
    }
    for (const std::string& dir : {a.emit_mesh, a.emit_svg})
        if (!dir.empty())
            fs::create_directories(dir);
    if (!a.emit_mesh.empty() || !a.emit_svg.empty())
        opt.on_mesh = [&](int k, const CpwlFunction& g) {
            if (!a.emit_mesh.empty())
                save_mesh(g, (fs::path(a.emit_mesh) / fmt::format("mesh_K{}.json", k)).string());
            if (!a.emit_svg.empty())
                render_svg(g, (fs::path(a.emit_svg) / fmt::format("mesh_K{}.svg", k)).string());
        };
    const auto rows = convergence_experiment(*f, n, k0, k1, opt);
    emit(out, a.out, convergence_csv(rows));
    return 0;
}

int do_extremal_test(const ExtremalArgs& a, std::ostream& out)
{
    const CpwlFunction g = load_mesh(a.mesh);
    const ExtremalityResult r = is_extremal(g, a.threshold);
    out << (r.extremal ? "extremal" : "not extremal") << " (dim=" << r.dim << ")\n";
    return 0;
}

int do_extremal_decompose(const ExtremalArgs& a, std::ostream& out)
{
    const CpwlFunction g = load_mesh(a.mesh);
    const Decomposition d = decompose(g, a.tol);
    nlohmann::ordered_json j;
    j["htv"] = d.htv;
    j["coefficient_sum"] = d.coefficient_sum();
    j["residual"] = d.residual;
    j["terms"] = nlohmann::ordered_json::array();
    for (const auto& t : d.terms) {
        nlohmann::ordered_json term;
        term["c"] = t.c;
        term["affine"] = t.t.affine;
        term["mesh"] = nlohmann::ordered_json::parse(mesh_json(t.t.g));
        j["terms"].push_back(std::move(term));
    }
    emit(out, a.out, j.dump(2) + "\n");
    return 0;
}

int do_mesh_render(const MeshArgs& a, std::ostream& out)
{
    const CpwlFunction g = load_mesh(a.mesh);
    SvgOptions opt;
    opt.size = a.size;
    opt.fill_values = a.fill;
    emit(out, a.out, render_svg(g, opt));
    return 0;
}

int do_mesh_example(const MeshArgs& a, std::ostream& out)
{
    std::optional<CpwlFunction> g;
    if (a.kind == "hat" || a.kind == "two-hat") {
        if (a.n < 2 || (a.kind == "two-hat" && a.n < 4))
            throw UsageError("--n too small for " + a.kind);
        auto mesh = grid_mesh(a.n);
        std::vector<double> v(mesh->vertex_count(), 0.0);
        const int c = a.n / 2, w = a.n + 1;
        if (a.kind == "hat") {
            v[static_cast<std::size_t>(c * w + c)] = 1.0;
        } else {
            const int lo = a.n / 3, hi = a.n - a.n / 3;
            v[static_cast<std::size_t>(lo * w + lo)] = 1.0;
            v[static_cast<std::size_t>(hi * w + hi)] = 1.0;
        }
        g.emplace(mesh, std::move(v));
    } else if (a.kind == "approx") {
        FieldPtr f;
        try {
            f = parse_field(a.field);
        } catch (const Error& e) {
            throw UsageError(std::string("--field: ") + e.what());
        }
        const MeshPlan plan = plan_mesh(build_frames(*f, a.levels), a.levels, a.k);
        g.emplace(interpolate(*f, std::make_shared<const Triangulation>(assemble_global(plan))));
    } else {
        throw UsageError("unknown example '" + a.kind + "' (expected hat, two-hat or approx)");
    }
    emit(out, a.out, mesh_json(*g));
    return 0;
}

int do_selftest(std::uint64_t seed, int only, std::ostream& out)
{
    AcceptanceOptions opt;
    opt.seed = seed;
    int failed = 0;
    for (int id = 1; id <= kCriterionCount; ++id) {
        if (only != 0 && id != only)
            continue;
        const CriterionResult r = run_criterion(id, opt);
        out << format_result(r) << '\n' << std::flush;
        failed += !r.pass;
    }
    return failed == 0 ? 0 : 1;
}

} // namespace

std::string version_string() { return fmt::format("hstv {} ({})", HSTV_VERSION, HSTV_BUILD_ID); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hessian-Schatten total variation: CPWL approximation and extreme points"};
    app.name("hstv");
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());
    app.footer("Environment: HTV_THREADS caps the worker count.");

    HtvArgs ha;
    auto* htv = app.add_subcommand("htv", "HTV of a CPWL mesh file");
    htv->add_option("mesh", ha.mesh, "mesh JSON")->required();
    htv->add_option("--p", ha.p, "Schatten exponent: 1, 2, inf or a real >= 1")->capture_default_str();
    htv->add_option("--report", ha.report, "text or csv (per-edge rows)")
        ->check(CLI::IsMember({"text", "csv"}))
        ->capture_default_str();
    htv->add_option("--out", ha.out, "output file (default stdout)");

    ApproxArgs aa;
    auto* approx = app.add_subcommand("approx", "CPWL approximation convergence experiment (CSV)");
    approx->add_option("--field", aa.field, "field descriptor name[:p1,p2,...]")->capture_default_str();
    approx->add_option("--N", aa.n, "dyadic level of the squares (default 1, or from --eps)");
    approx->add_option("--eps", aa.eps, "angle tolerance; needs 2^-N <= eps (default 1/max(N,1))");
    approx->add_option("--K", aa.k, "refinement level or range a..b")->capture_default_str();
    approx->add_option("--mode", aa.mode, "pitch plan: lcm or paper")->capture_default_str();
    approx->add_option("--p", aa.p, "Schatten exponent of the reference and report")->capture_default_str();
    approx->add_option("--quadrature-resolution", aa.resolution, "midpoint cells per side for the reference")
        ->check(CLI::Range(2, 8192))
        ->capture_default_str();
    approx->add_option("--max-triangles", aa.max_triangles, "refuse plans above this estimate")->capture_default_str();
    approx->add_option("--out", aa.out, "CSV file (default stdout)");
    approx->add_option("--emit-mesh", aa.emit_mesh, "directory for mesh_K<k>.json");
    approx->add_option("--emit-svg", aa.emit_svg, "directory for mesh_K<k>.svg");

    ExtremalArgs ea;
    auto* extremal = app.add_subcommand("extremal", "extreme points of the HTV ball");
    extremal->require_subcommand(1);
    auto* ext_test = extremal->add_subcommand("test", "Is the function extremal mod affine?");
    ext_test->add_option("mesh", ea.mesh, "mesh JSON")->required();
    ext_test->add_option("--threshold", ea.threshold, "relative singular value cut-off")->capture_default_str();
    auto* ext_dec = extremal->add_subcommand("decompose", "Decompose into extremal CPWL functions (JSON)");
    ext_dec->add_option("mesh", ea.mesh, "mesh JSON")->required();
    ext_dec->add_option("--tol", ea.tol, "maximum vertex residual")->capture_default_str();
    ext_dec->add_option("--out", ea.out, "JSON file (default stdout)");

    MeshArgs ma;
    auto* mesh = app.add_subcommand("mesh", "mesh utilities");
    mesh->require_subcommand(1);
    auto* render = mesh->add_subcommand("render", "SVG drawing of a mesh");
    render->add_option("mesh", ma.mesh, "mesh JSON")->required();
    render->add_option("--out", ma.out, "SVG file (default stdout)");
    render->add_option("--size", ma.size, "image size in pixels")->check(CLI::Range(16, 20000))->capture_default_str();
    render->add_flag("--fill", ma.fill, "shade triangles by mean vertex value");
    auto* example = mesh->add_subcommand("example", "write an example CPWL mesh");
    example->add_option("kind", ma.kind, "hat, two-hat or approx")->capture_default_str();
    example->add_option("--n", ma.n, "grid cells per side for hat and two-hat")->capture_default_str();
    example->add_option("--field", ma.field, "field for approx")->capture_default_str();
    example->add_option("--N", ma.levels, "dyadic level for approx")->check(CLI::Range(0, 6))->capture_default_str();
    example->add_option("--K", ma.k, "refinement level for approx")->check(CLI::Range(0, 8))->capture_default_str();
    example->add_option("--out", ma.out, "JSON file (default stdout)");

    std::uint64_t seed = AcceptanceOptions{}.seed;
    int criterion = 0;
    auto* selftest = app.add_subcommand("selftest", "run the acceptance criteria");
    selftest->add_option("--seed", seed, "seed of the randomized criteria")->capture_default_str();
    selftest->add_option("--criterion", criterion, "run only this criterion (1-7)")->check(CLI::Range(0, 7));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*htv)
            return do_htv(ha, out);
        if (*approx)
            return do_approx(aa, out);
        if (*ext_test)
            return do_extremal_test(ea, out);
        if (*ext_dec)
            return do_extremal_decompose(ea, out);
        if (*render)
            return do_mesh_render(ma, out);
        if (*example)
            return do_mesh_example(ma, out);
        if (*selftest)
            return do_selftest(seed, criterion, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

int run(int argc, char** argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace hstv::cli
