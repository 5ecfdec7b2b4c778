#include <algorithm>
#include <sstream>
#include <vector>

#include "serialize.hpp"

// Graphviz rendering with the usual PROV shape/color conventions:
// entities yellow ellipses, activities blue boxes, agents orange houses.
// Descriptions and parameters are auxiliary gray nodes hanging off their
// activity with dashed edges. Stubs are drawn dashed.

namespace provkit {

namespace {

std::string escaped(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    return out;
}

std::string node_line(const std::string& id, const char* shape, const char* fill,
                      const std::string& label, bool stub) {
    return "  \"" + escaped(id) + "\" [shape=" + shape + ",style=\"filled" +
           (stub ? ",dashed" : "") + "\",fillcolor=\"" + fill + "\",label=\"" + escaped(label) +
           "\"];";
}

std::string edge_line(const std::string& from, const std::string& to, const std::string& label,
                      bool dashed) {
    return "  \"" + escaped(from) + "\" -> \"" + escaped(to) + "\" [label=\"" + escaped(label) +
           "\"" + (dashed ? ",style=dashed" : "") + "];";
}

std::string relation_label(const char* name, const std::optional<std::string>& role) {
    return role ? std::string(name) + " (" + *role + ")" : std::string(name);
}

} // namespace

std::string to_dot(const ProvenanceDocument& doc) {
    auto is_stub = [&doc](const std::string& id) { return doc.incomplete_ids.contains(id); };
    auto titled = [](const std::string& id, const std::optional<std::string>& name) {
        return name && !name->empty() ? id + "\n" + *name : id;
    };

    std::vector<std::string> nodes;
    for (const auto& [id, e] : doc.entities)
        nodes.push_back(node_line(id, "ellipse", "#FFFC87", titled(id, e.name), is_stub(id)));
    for (const auto& [id, a] : doc.activities)
        nodes.push_back(node_line(id, "box", "#9FB1FC", titled(id, a.name), is_stub(id)));
    for (const auto& [id, a] : doc.agents)
        nodes.push_back(node_line(id, "house", "#FDB266",
                                  a.name.empty() ? id : id + "\n" + a.name, is_stub(id)));
    for (const auto& [id, d] : doc.descriptions)
        nodes.push_back(node_line(id, "note", "#DDDDDD",
                                  d.name.empty() ? id : id + "\n" + d.name, is_stub(id)));
    for (const auto& p : doc.parameters)
        nodes.push_back(node_line("param:" + p.activity.str() + ":" + p.name, "note", "#EEEEEE",
                                  p.name + " = " + p.value, false));

    std::vector<std::string> edges;
    for (const auto& r : doc.used)
        edges.push_back(edge_line(r.activity.str(), r.entity.str(),
                                  relation_label("used", r.role), false));
    for (const auto& r : doc.generated)
        edges.push_back(edge_line(r.entity.str(), r.activity.str(),
                                  relation_label("wasGeneratedBy", r.role), false));
    for (const auto& r : doc.associations)
        edges.push_back(edge_line(r.activity.str(), r.agent.str(),
                                  relation_label("wasAssociatedWith", r.role), false));
    for (const auto& r : doc.attributions)
        edges.push_back(edge_line(r.entity.str(), r.agent.str(),
                                  relation_label("wasAttributedTo", r.role), false));
    for (const auto& [id, a] : doc.activities)
        if (a.description_ref)
            edges.push_back(edge_line(id, a.description_ref->str(), "describedBy", true));
    for (const auto& p : doc.parameters)
        edges.push_back(edge_line(p.activity.str(), "param:" + p.activity.str() + ":" + p.name,
                                  "parameter", true));

    std::sort(nodes.begin(), nodes.end());
    std::sort(edges.begin(), edges.end());

    std::ostringstream out;
    out << "digraph provenance {\n  rankdir=BT;\n  node [fontname=\"Helvetica\"];\n";
    for (const auto& line : nodes) out << line << "\n";
    for (const auto& line : edges) out << line << "\n";
    out << "}\n";
    return out.str();
}

} // namespace provkit
