#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "serialize.hpp"

// Layered SVG rendering. Entities and activities are placed by longest-path
// depth in the derivation graph (final products in row 0 at the top, inputs
// below); agents, descriptions, and parameters each get their own row under
// the core graph. Deterministic: rows are sorted by id, geometry is integer.

namespace provkit {

namespace {

struct Geometry {
    static constexpr int node_w = 150, node_h = 40, hgap = 40, vgap = 70, margin = 30;

    static int cx(int col) { return margin + col * (node_w + hgap) + node_w / 2; }
    static int cy(int row) { return margin + row * (node_h + vgap) + node_h / 2; }
};

std::string xml_escaped(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

enum class Glyph { entity, activity, agent, description, parameter };

struct Node {
    Glyph glyph;
    int row = 0, col = 0;
    bool stub = false;
    std::string label2; // optional second label line
};

} // namespace

std::string to_svg(const ProvenanceDocument& doc) {
    // core derivation graph: arcs point from a record to what it depends on
    std::set<std::string> entity_ids, activity_ids;
    for (const auto& [id, _] : doc.entities) entity_ids.insert(id);
    for (const auto& [id, _] : doc.activities) activity_ids.insert(id);
    for (const auto& r : doc.used) {
        activity_ids.insert(r.activity.str());
        entity_ids.insert(r.entity.str());
    }
    for (const auto& r : doc.generated) {
        entity_ids.insert(r.entity.str());
        activity_ids.insert(r.activity.str());
    }

    std::map<std::string, std::vector<std::string>> depends; // u -> things u depends on
    std::map<std::string, int> in_degree;
    for (const std::string& id : entity_ids) in_degree.emplace(id, 0);
    for (const std::string& id : activity_ids) in_degree.emplace(id, 0);
    for (const auto& r : doc.used) {
        depends[r.activity.str()].push_back(r.entity.str());
        ++in_degree[r.entity.str()];
    }
    for (const auto& r : doc.generated) {
        depends[r.entity.str()].push_back(r.activity.str());
        ++in_degree[r.activity.str()];
    }

    // longest path from the depended-upon-by-nobody layer (final products)
    std::map<std::string, int> depth;
    std::deque<std::string> ready;
    for (const auto& [id, deg] : in_degree)
        if (deg == 0) {
            ready.push_back(id);
            depth[id] = 0;
        }
    std::size_t processed = 0;
    while (!ready.empty()) {
        const std::string u = ready.front();
        ready.pop_front();
        ++processed;
        auto it = depends.find(u);
        if (it == depends.end()) continue;
        for (const std::string& v : it->second) {
            depth[v] = std::max(depth[v], depth[u] + 1);
            if (--in_degree[v] == 0) ready.push_back(v);
        }
    }
    if (processed != in_degree.size())
        fail(Errc::cyclic_graph, "derivation graph has a cycle; cannot compute layers");

    // row assembly: core rows by depth, then agents, descriptions, parameters
    int core_rows = 0;
    for (const auto& [id, d] : depth) core_rows = std::max(core_rows, d + 1);

    std::map<int, std::vector<std::string>> rows;
    std::map<std::string, Node> nodes;
    auto is_stub = [&doc](const std::string& id) { return doc.incomplete_ids.contains(id); };

    for (const std::string& id : entity_ids) {
        auto it = doc.entities.find(id);
        nodes[id] = {Glyph::entity, depth.at(id), 0,
                     is_stub(id) || it == doc.entities.end(),
                     it != doc.entities.end() && it->second.name ? *it->second.name : ""};
        rows[depth.at(id)].push_back(id);
    }
    for (const std::string& id : activity_ids) {
        auto it = doc.activities.find(id);
        nodes[id] = {Glyph::activity, depth.at(id), 0,
                     is_stub(id) || it == doc.activities.end(),
                     it != doc.activities.end() && it->second.name ? *it->second.name : ""};
        rows[depth.at(id)].push_back(id);
    }

    std::set<std::string> agent_ids, description_ids;
    for (const auto& [id, _] : doc.agents) agent_ids.insert(id);
    for (const auto& r : doc.associations) agent_ids.insert(r.agent.str());
    for (const auto& r : doc.attributions) agent_ids.insert(r.agent.str());
    for (const auto& [id, _] : doc.descriptions) description_ids.insert(id);
    for (const auto& [id, a] : doc.activities)
        if (a.description_ref) description_ids.insert(a.description_ref->str());

    int next_row = core_rows;
    if (!agent_ids.empty()) {
        for (const std::string& id : agent_ids) {
            auto it = doc.agents.find(id);
            nodes[id] = {Glyph::agent, next_row, 0, is_stub(id) || it == doc.agents.end(),
                         it != doc.agents.end() ? it->second.name : ""};
            rows[next_row].push_back(id);
        }
        ++next_row;
    }
    if (!description_ids.empty()) {
        for (const std::string& id : description_ids) {
            auto it = doc.descriptions.find(id);
            nodes[id] = {Glyph::description, next_row, 0,
                         is_stub(id) || it == doc.descriptions.end(),
                         it != doc.descriptions.end() ? it->second.name : ""};
            rows[next_row].push_back(id);
        }
        ++next_row;
    }
    if (!doc.parameters.empty()) {
        for (const auto& p : doc.parameters) {
            const std::string key = "param:" + p.activity.str() + ":" + p.name;
            nodes[key] = {Glyph::parameter, next_row, 0, false, p.name + " = " + p.value};
            rows[next_row].push_back(key);
        }
        ++next_row;
    }

    std::size_t widest = 1;
    for (auto& [row, ids] : rows) {
        std::sort(ids.begin(), ids.end());
        widest = std::max(widest, ids.size());
        for (std::size_t col = 0; col < ids.size(); ++col) nodes[ids[col]].col = int(col);
    }

    const int total_rows = std::max(next_row, 1);
    const int width = 2 * Geometry::margin + int(widest) * (Geometry::node_w + Geometry::hgap) -
                      Geometry::hgap;
    const int height = 2 * Geometry::margin +
                       total_rows * (Geometry::node_h + Geometry::vgap) - Geometry::vgap;

    auto center = [&nodes](const std::string& id) {
        const Node& n = nodes.at(id);
        return std::pair<int, int>{Geometry::cx(n.col), Geometry::cy(n.row)};
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"Helvetica, Arial, sans-serif\">\n"
        << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" "
           "markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\">"
           "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#555555\"/></marker></defs>\n";

    auto edge = [&](const std::string& from, const std::string& to, const std::string& label,
                    bool dashed) {
        auto [x1, y1] = center(from);
        auto [x2, y2] = center(to);
        svg << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
            << "\" stroke=\"#555555\"" << (dashed ? " stroke-dasharray=\"5 3\"" : "")
            << " marker-end=\"url(#arrow)\"/>\n";
        svg << "<text x=\"" << (x1 + x2) / 2 << "\" y=\"" << (y1 + y2) / 2 - 4
            << "\" text-anchor=\"middle\" font-size=\"9\" fill=\"#555555\">" << xml_escaped(label)
            << "</text>\n";
    };

    for (const auto& r : doc.used)
        edge(r.activity.str(), r.entity.str(), r.role ? "used (" + *r.role + ")" : "used", false);
    for (const auto& r : doc.generated)
        edge(r.entity.str(), r.activity.str(),
             r.role ? "wasGeneratedBy (" + *r.role + ")" : "wasGeneratedBy", false);
    for (const auto& r : doc.associations)
        edge(r.activity.str(), r.agent.str(),
             r.role ? "wasAssociatedWith (" + *r.role + ")" : "wasAssociatedWith", false);
    for (const auto& r : doc.attributions)
        edge(r.entity.str(), r.agent.str(),
             r.role ? "wasAttributedTo (" + *r.role + ")" : "wasAttributedTo", false);
    for (const auto& [id, a] : doc.activities)
        if (a.description_ref) edge(id, a.description_ref->str(), "describedBy", true);
    for (const auto& p : doc.parameters)
        edge(p.activity.str(), "param:" + p.activity.str() + ":" + p.name, "parameter", true);

    for (const auto& [row, ids] : rows) {
        for (const std::string& id : ids) {
            const Node& n = nodes.at(id);
            const int cx = Geometry::cx(n.col), cy = Geometry::cy(n.row);
            const int x = cx - Geometry::node_w / 2, y = cy - Geometry::node_h / 2;
            const std::string dash = n.stub ? " stroke-dasharray=\"4 2\"" : "";
            const std::string layer = " data-layer=\"" + std::to_string(n.row) + "\"";
            switch (n.glyph) {
            case Glyph::entity:
                svg << "<ellipse" << layer << " cx=\"" << cx << "\" cy=\"" << cy << "\" rx=\""
                    << Geometry::node_w / 2 << "\" ry=\"" << Geometry::node_h / 2
                    << "\" fill=\"#FFFC87\" stroke=\"#808080\"" << dash << "/>\n";
                break;
            case Glyph::activity:
                svg << "<rect" << layer << " x=\"" << x << "\" y=\"" << y << "\" width=\""
                    << Geometry::node_w << "\" height=\"" << Geometry::node_h
                    << "\" fill=\"#9FB1FC\" stroke=\"#808080\"" << dash << "/>\n";
                break;
            case Glyph::agent:
                svg << "<polygon" << layer << " points=\"" << cx << "," << (y - 8) << " "
                    << (x + Geometry::node_w) << "," << (y + 10) << " "
                    << (x + Geometry::node_w) << "," << (y + Geometry::node_h) << " " << x << ","
                    << (y + Geometry::node_h) << " " << x << "," << (y + 10)
                    << "\" fill=\"#FDB266\" stroke=\"#808080\"" << dash << "/>\n";
                break;
            case Glyph::description:
                svg << "<rect" << layer << " rx=\"10\" x=\"" << x << "\" y=\"" << y
                    << "\" width=\"" << Geometry::node_w << "\" height=\"" << Geometry::node_h
                    << "\" fill=\"#DDDDDD\" stroke=\"#808080\"" << dash << "/>\n";
                break;
            case Glyph::parameter:
                svg << "<rect" << layer << " rx=\"10\" x=\"" << x << "\" y=\"" << y
                    << "\" width=\"" << Geometry::node_w << "\" height=\"" << Geometry::node_h
                    << "\" fill=\"#EEEEEE\" stroke=\"#808080\" stroke-dasharray=\"2 2\"/>\n";
                break;
            }
            const bool has_second = !n.label2.empty() && n.label2 != id;
            svg << "<text x=\"" << cx << "\" y=\"" << (cy + (has_second ? 0 : 4))
                << "\" text-anchor=\"middle\" font-size=\"11\">"
                << xml_escaped(n.glyph == Glyph::parameter ? n.label2 : id) << "</text>\n";
            if (has_second && n.glyph != Glyph::parameter)
                svg << "<text x=\"" << cx << "\" y=\"" << (cy + 13)
                    << "\" text-anchor=\"middle\" font-size=\"9\" fill=\"#404040\">"
                    << xml_escaped(n.label2) << "</text>\n";
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace provkit
