#include "dmtz/msc_export.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"

namespace dmtz {

namespace {

using json = nlohmann::ordered_json;

const char* type_name(int dim, int top) {
    if (dim == 0) return "minimum";
    if (dim == top) return "maximum";
    return dim == 1 ? "1-saddle" : "2-saddle";
}

json coord(const CellComplex& cx, std::int64_t v) {
    const Coord c = cx.vertex_coord(v);
    return json::array({c.x, c.y, c.z});
}

json center(const CellComplex& cx, CellId cell) {
    const auto vs = cx.cell_vertices(cell);
    double s[3] = {0, 0, 0};
    for (const auto v : vs) {
        const Coord c = cx.vertex_coord(v);
        s[0] += static_cast<double>(c.x);
        s[1] += static_cast<double>(c.y);
        s[2] += static_cast<double>(c.z);
    }
    const double n = static_cast<double>(vs.size());
    return json::array({s[0] / n, s[1] / n, s[2] / n});
}

json cell_ref(CellId c) { return {{"dim", c.dim}, {"index", c.index}}; }

}  // namespace

std::string msc_to_json(const MorseSmaleComplex& msc, const CellComplex& cx, std::span<const double> values) {
    const GridDims& d = cx.dims();
    json out;
    out["format"] = "dmtz-msc";
    out["version"] = 1;
    out["dims"] = json::array({d.nx, d.ny, d.nz});
    json crit = json::array();
    for (const CellId c : msc.critical.all()) {
        json verts = json::array();
        double value = -std::numeric_limits<double>::infinity();
        for (const auto v : cx.cell_vertices(c)) {
            verts.push_back(coord(cx, v));
            value = std::max(value, values[v]);
        }
        crit.push_back({{"type", type_name(c.dim, cx.top_dim())},
                        {"dim", c.dim},
                        {"index", c.index},
                        {"center", center(cx, c)},
                        {"vertices", verts},
                        {"value", value}});
    }
    out["critical"] = crit;
    json seps = json::array();
    for (const Separatrix& s : msc.separatrices) {
        json e{{"kind", to_string(s.kind)}, {"origin", cell_ref(s.origin)}, {"boundary_exits", s.boundary_exits}};
        json reached = json::array();
        for (const CellId c : s.reached) reached.push_back(cell_ref(c));
        e["reached"] = reached;
        json lines = json::array();
        for (const auto& branch : s.branches) {
            json line = json::array();
            for (const CellId c : branch) line.push_back(center(cx, c));
            lines.push_back(line);
        }
        // A connector record is a visit set, not a path.
        e[s.kind == SeparatrixKind::connector ? "points" : "polylines"] =
            s.kind == SeparatrixKind::connector ? (lines.empty() ? json::array() : lines.front()) : lines;
        seps.push_back(e);
    }
    out["separatrices"] = seps;
    return out.dump() + "\n";
}

}  // namespace dmtz
