#include <algorithm>
#include <sstream>
#include <vector>

#include "serialize.hpp"

// PROV-N rendering: one statement per line inside document/endDocument,
// lines ordered by (statement kind, first id). IVOA content maps the same
// way as in PROV-JSON: descriptions become typed entity statements,
// parameters become typed voprov:parameter_* literals on their activity.

namespace provkit {

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    out += '"';
    return out;
}

using AttrList = std::vector<std::pair<std::string, std::string>>; // key, rendered literal

void add_plain(AttrList& attrs, const std::string& key, const std::string& value) {
    attrs.emplace_back(key, quoted(value));
}

void add_opt(AttrList& attrs, const std::string& key, const std::optional<std::string>& value) {
    if (value) add_plain(attrs, key, *value);
}

std::string attr_suffix(AttrList attrs) {
    if (attrs.empty()) return "";
    std::stable_sort(attrs.begin(), attrs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out = ", [";
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (i) out += ", ";
        out += attrs[i].first + "=" + attrs[i].second;
    }
    out += ']';
    return out;
}

std::string slot(const std::optional<std::string>& v) { return v ? *v : "-"; }

} // namespace

std::string to_prov_n(const ProvenanceDocument& doc) {
    std::ostringstream out;
    out << "document\n";
    for (const auto& [prefix, uri] : doc.namespaces)
        out << "  prefix " << prefix << " <" << uri << ">\n";

    auto is_stub = [&doc](const std::string& id) { return doc.incomplete_ids.contains(id); };

    // entity statements: entities and descriptions interleaved in id order
    std::vector<std::string> lines;
    for (const auto& [id, e] : doc.entities) {
        AttrList attrs;
        if (is_stub(id)) {
            add_plain(attrs, "voprov:stub", "true");
        } else {
            for (const auto& [k, v] : e.attributes) add_plain(attrs, k, v);
            add_opt(attrs, "prov:label", e.name);
            add_opt(attrs, "prov:location", e.location);
            add_opt(attrs, "prov:generatedAtTime", e.generated_at);
            add_opt(attrs, "voprov:comment", e.comment);
        }
        lines.push_back("entity(" + id + attr_suffix(std::move(attrs)) + ")");
    }
    for (const auto& [id, d] : doc.descriptions) {
        AttrList attrs;
        attrs.emplace_back("prov:type", "'voprov:ActivityDescription'");
        if (is_stub(id)) {
            add_plain(attrs, "voprov:stub", "true");
        } else {
            if (!d.name.empty()) add_plain(attrs, "prov:label", d.name);
            add_opt(attrs, "voprov:version", d.version);
            add_opt(attrs, "voprov:doc", d.doc);
            add_opt(attrs, "voprov:docurl", d.docurl);
            if (d.code_reference) {
                add_plain(attrs, "voprov:code_url", d.code_reference->url);
                add_opt(attrs, "voprov:code_revision", d.code_reference->revision);
            }
        }
        lines.push_back("entity(" + id + attr_suffix(std::move(attrs)) + ")");
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& line : lines) out << "  " << line << "\n";

    for (const auto& [id, a] : doc.activities) {
        AttrList attrs;
        if (is_stub(id)) {
            out << "  activity(" << id << ", -, -"
                << attr_suffix({{"voprov:stub", quoted("true")}}) << ")\n";
            continue;
        }
        for (const auto& [k, v] : a.attributes) add_plain(attrs, k, v);
        add_opt(attrs, "prov:label", a.name);
        add_opt(attrs, "voprov:comment", a.comment);
        if (a.description_ref) add_plain(attrs, "voprov:description", a.description_ref->str());
        for (const auto& p : doc.parameters)
            if (p.activity.str() == id)
                attrs.emplace_back("voprov:parameter_" + p.name,
                                   quoted(p.value) + " %% xsd:" +
                                       (p.value_type == ValueType::integer    ? "integer"
                                        : p.value_type == ValueType::real     ? "double"
                                        : p.value_type == ValueType::boolean  ? "boolean"
                                        : p.value_type == ValueType::timestamp ? "dateTime"
                                                                               : "string"));
        out << "  activity(" << id << ", " << slot(a.start_time) << ", " << slot(a.end_time)
            << attr_suffix(std::move(attrs)) << ")\n";
    }

    for (const auto& [id, a] : doc.agents) {
        AttrList attrs;
        if (is_stub(id)) {
            add_plain(attrs, "voprov:stub", "true");
        } else {
            if (!a.name.empty()) add_plain(attrs, "prov:label", a.name);
            attrs.emplace_back("prov:type", std::string("'prov:") + agent_kind_name(a.kind) + "'");
            add_opt(attrs, "voprov:email", a.email);
        }
        out << "  agent(" << id << attr_suffix(std::move(attrs)) << ")\n";
    }

    for (const auto& r : doc.used) {
        AttrList attrs;
        add_opt(attrs, "prov:role", r.role);
        out << "  used(" << r.activity.str() << ", " << r.entity.str() << ", " << slot(r.time)
            << attr_suffix(std::move(attrs)) << ")\n";
    }
    for (const auto& r : doc.generated) {
        AttrList attrs;
        add_opt(attrs, "prov:role", r.role);
        out << "  wasGeneratedBy(" << r.entity.str() << ", " << r.activity.str() << ", "
            << slot(r.time) << attr_suffix(std::move(attrs)) << ")\n";
    }
    for (const auto& r : doc.associations) {
        AttrList attrs;
        add_opt(attrs, "prov:role", r.role);
        out << "  wasAssociatedWith(" << r.activity.str() << ", " << r.agent.str() << ", -"
            << attr_suffix(std::move(attrs)) << ")\n";
    }
    for (const auto& r : doc.attributions) {
        AttrList attrs;
        add_opt(attrs, "prov:role", r.role);
        out << "  wasAttributedTo(" << r.entity.str() << ", " << r.agent.str()
            << attr_suffix(std::move(attrs)) << ")\n";
    }

    out << "endDocument\n";
    return out.str();
}

} // namespace provkit
