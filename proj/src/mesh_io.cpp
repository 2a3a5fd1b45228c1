#include <hstv/error.hpp>
#include <hstv/mesh.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hstv {

namespace {

using nlohmann::json;

std::string as_integer_text(const json& j)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_number_integer())
        return std::to_string(j.get<long long>());
    throw Error("mesh JSON: rational components must be integer strings");
}

double parse_value(const json& j)
{
    if (j.is_number())
        return j.get<double>();
    if (!j.is_string())
        throw Error("mesh JSON: values must be decimal strings");
    const std::string s = j.get<std::string>();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error("mesh JSON: malformed value '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v))
        throw Error("mesh JSON: malformed value '" + s + "'");
    return v;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    out << text;
    if (!out)
        throw Error("write failed: " + path);
}

} // namespace

CpwlFunction parse_mesh_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("mesh JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("triangles"))
        throw Error("mesh JSON: expected an object with 'vertices' and 'triangles'");
    const json& jv = doc["vertices"];
    const json& jt = doc["triangles"];
    if (!jv.is_array() || !jt.is_array())
        throw Error("mesh JSON: 'vertices' and 'triangles' must be arrays");

    std::vector<RationalPoint> vertices;
    vertices.reserve(jv.size());
    for (const json& v : jv) {
        if (!v.is_array() || v.size() != 4)
            throw Error("mesh JSON: each vertex is [num_x, den_x, num_y, den_y]");
        vertices.push_back({make_rational(as_integer_text(v[0]), as_integer_text(v[1])),
                            make_rational(as_integer_text(v[2]), as_integer_text(v[3]))});
    }
    std::vector<TriangleIndices> triangles;
    triangles.reserve(jt.size());
    for (const json& t : jt) {
        if (!t.is_array() || t.size() != 3)
            throw Error("mesh JSON: each triangle is [i, j, k]");
        TriangleIndices tri{};
        for (int i = 0; i < 3; ++i) {
            if (!t[i].is_number_integer() || t[i].get<long long>() < 0)
                throw Error("mesh JSON: triangle indices must be non-negative integers");
            tri[i] = static_cast<std::uint32_t>(t[i].get<long long>());
        }
        triangles.push_back(tri);
    }
    std::vector<double> values(vertices.size(), 0.0);
    if (doc.contains("values")) {
        const json& jval = doc["values"];
        if (!jval.is_array() || jval.size() != vertices.size())
            throw Error("mesh JSON: 'values' must have one entry per vertex");
        for (std::size_t i = 0; i < values.size(); ++i)
            values[i] = parse_value(jval[i]);
    }
    auto mesh = std::make_shared<const Triangulation>(std::move(vertices), std::move(triangles));
    return {std::move(mesh), std::move(values)};
}

CpwlFunction load_mesh(const std::string& path) { return parse_mesh_json(read_file(path)); }

std::string mesh_json(const CpwlFunction& g)
{
    json doc;
    json jv = json::array();
    for (const auto& p : g.mesh().vertices())
        jv.push_back({numerator_string(p.x), denominator_string(p.x), numerator_string(p.y), denominator_string(p.y)});
    json jt = json::array();
    for (const auto& t : g.mesh().triangles())
        jt.push_back({t[0], t[1], t[2]});
    json jval = json::array();
    for (double v : g.values())
        jval.push_back(fmt::format("{:.17g}", v));
    doc["vertices"] = std::move(jv);
    doc["triangles"] = std::move(jt);
    doc["values"] = std::move(jval);
    return doc.dump() + "\n";
}

void save_mesh(const CpwlFunction& g, const std::string& path) { write_file(path, mesh_json(g)); }

std::string render_svg(const CpwlFunction& g, const SvgOptions& options)
{
    const auto& pts = g.mesh().points();
    double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
    for (const Vec2& p : pts) {
        x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    const double s = options.size;
    const double pad = 0.02 * s;
    const double w = (x1 - x0) * s + 2 * pad, h = (y1 - y0) * s + 2 * pad;
    const auto [vmin, vmax] = std::minmax_element(g.values().begin(), g.values().end());
    const double lo = *vmin, range = *vmax - *vmin;

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.1f}\" height=\"{:.1f}\" viewBox=\"0 0 {:.1f} {:.1f}\">\n",
        w, h, w, h);
    for (std::size_t t = 0; t < g.mesh().triangle_count(); ++t) {
        const auto& tri = g.mesh().triangles()[t];
        std::string fill = "none";
        if (options.fill_values) {
            const double mean = (g.values()[tri[0]] + g.values()[tri[1]] + g.values()[tri[2]]) / 3.0;
            const int level = range > 0 ? static_cast<int>(std::lround(55 + 200 * (mean - lo) / range)) : 200;
            fill = fmt::format("rgb({0},{0},{0})", level);
        }
        out += "<polygon points=\"";
        for (int i = 0; i < 3; ++i) {
            const Vec2 p = pts[tri[i]];
            out += fmt::format("{}{:.3f},{:.3f}", i ? " " : "", pad + (p.x - x0) * s, pad + (y1 - p.y) * s);
        }
        out += fmt::format("\" fill=\"{}\" stroke=\"black\" stroke-width=\"{}\"/>\n", fill, options.stroke);
    }
    out += "</svg>\n";
    return out;
}

void render_svg(const CpwlFunction& g, const std::string& path, const SvgOptions& options)
{
    write_file(path, render_svg(g, options));
}

} // namespace hstv
