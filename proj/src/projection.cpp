#include "serialize.hpp"

#include "errors.hpp"
#include "util.hpp"

namespace provkit {

const char* model_name(Model m) { return m == Model::ivoa ? "IVOA" : "W3C"; }

std::optional<Model> parse_model_name(std::string_view name) {
    if (iequals(name, "IVOA")) return Model::ivoa;
    if (iequals(name, "W3C")) return Model::w3c;
    return std::nullopt;
}

const char* format_name(SerializationFormat f) {
    switch (f) {
    case SerializationFormat::prov_json: return "PROV-JSON";
    case SerializationFormat::prov_n: return "PROV-N";
    case SerializationFormat::prov_dot: return "PROV-DOT";
    case SerializationFormat::prov_svg: return "PROV-SVG";
    }
    return "PROV-JSON";
}

const char* mime_type(SerializationFormat f) {
    switch (f) {
    case SerializationFormat::prov_json: return "application/json";
    case SerializationFormat::prov_n: return "text/provenance-notation";
    case SerializationFormat::prov_dot: return "text/vnd.graphviz";
    case SerializationFormat::prov_svg: return "image/svg+xml";
    }
    return "application/json";
}

std::optional<SerializationFormat> parse_format_name(std::string_view name) {
    if (iequals(name, "PROV-JSON")) return SerializationFormat::prov_json;
    if (iequals(name, "PROV-N")) return SerializationFormat::prov_n;
    if (iequals(name, "PROV-DOT")) return SerializationFormat::prov_dot;
    if (iequals(name, "PROV-SVG")) return SerializationFormat::prov_svg;
    return std::nullopt;
}

namespace {

// drop the stub flags of ids that no longer have a record
void prune_incomplete(ProvenanceDocument& doc) {
    for (auto it = doc.incomplete_ids.begin(); it != doc.incomplete_ids.end();)
        if (!doc.has_record(*it))
            it = doc.incomplete_ids.erase(it);
        else
            ++it;
}

} // namespace

ProvenanceDocument apply_projection(const ProvenanceDocument& doc, const ProjectionOptions& opts) {
    ProvenanceDocument out = doc;

    if (!opts.agents) {
        out.agents.clear();
        out.associations.clear();
        out.attributions.clear();
    }
    if (!opts.configuration) out.parameters.clear();

    if (opts.descriptions == 0)
        for (auto& [id, act] : out.activities) act.description_ref.reset();

    if (opts.model == Model::w3c) {
        // IVOA-only content becomes plain "voprov:" attributes
        for (const auto& p : out.parameters) {
            auto it = out.activities.find(p.activity.str());
            if (it != out.activities.end())
                it->second.attributes["voprov:parameter_" + p.name] = p.value;
        }
        out.parameters.clear();

        for (auto& [id, act] : out.activities) {
            if (!act.description_ref) continue;
            if (opts.descriptions >= 2) {
                auto it = out.descriptions.find(act.description_ref->str());
                if (it != out.descriptions.end() &&
                    !out.incomplete_ids.contains(it->first)) {
                    const ActivityDescription& d = it->second;
                    act.attributes["voprov:desc_name"] = d.name;
                    if (d.version) act.attributes["voprov:desc_version"] = *d.version;
                    if (d.docurl) act.attributes["voprov:desc_docurl"] = *d.docurl;
                    if (d.code_reference)
                        act.attributes["voprov:code_ref"] =
                            d.code_reference->revision
                                ? d.code_reference->url + "@" + *d.code_reference->revision
                                : d.code_reference->url;
                }
            }
            if (opts.descriptions >= 1)
                act.attributes["voprov:description"] = act.description_ref->str();
            act.description_ref.reset();
        }
        out.descriptions.clear();
    } else if (opts.descriptions <= 1) {
        out.descriptions.clear();
    }

    if (!opts.attributes) {
        for (auto& [id, e] : out.entities) e.attributes.clear();
        for (auto& [id, a] : out.activities) a.attributes.clear();
    }

    prune_incomplete(out);
    return out;
}

std::string serialize_document(const ProvenanceDocument& doc, SerializationFormat format) {
    switch (format) {
    case SerializationFormat::prov_json: return to_prov_json(doc);
    case SerializationFormat::prov_n: return to_prov_n(doc);
    case SerializationFormat::prov_dot: return to_dot(doc);
    case SerializationFormat::prov_svg: return to_svg(doc);
    }
    fail(Errc::bad_value, "unknown serialization format");
}

} // namespace provkit
