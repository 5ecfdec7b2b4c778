#include <functional>
#include <set>

#include <json.hpp>

#include "errors.hpp"
#include "serialize.hpp"

// PROV-JSON mapping. IVOA-specific content rides on "voprov:" attribute keys:
// activity descriptions are entities typed voprov:ActivityDescription,
// parameters are typed values under voprov:parameter_<name>, and records that
// are known only by reference carry the marker voprov:stub="true".

namespace provkit {

using nlohmann::json;

namespace {

constexpr const char* kStubKey = "voprov:stub";
constexpr const char* kDescriptionType = "voprov:ActivityDescription";
constexpr const char* kParameterKeyPrefix = "voprov:parameter_";

const char* xsd_type_name(ValueType type) {
    switch (type) {
    case ValueType::string: return "xsd:string";
    case ValueType::integer: return "xsd:integer";
    case ValueType::real: return "xsd:double";
    case ValueType::boolean: return "xsd:boolean";
    case ValueType::timestamp: return "xsd:dateTime";
    }
    return "xsd:string";
}

std::optional<ValueType> value_type_of_xsd(const std::string& name) {
    if (name == "xsd:string") return ValueType::string;
    if (name == "xsd:integer") return ValueType::integer;
    if (name == "xsd:double") return ValueType::real;
    if (name == "xsd:boolean") return ValueType::boolean;
    if (name == "xsd:dateTime") return ValueType::timestamp;
    return std::nullopt;
}

void put(json& rec, const char* key, const std::optional<std::string>& v) {
    if (v) rec[key] = *v;
}

json entity_json(const Entity& e, bool stub) {
    json rec = json::object();
    if (stub) {
        rec[kStubKey] = "true";
        return rec;
    }
    for (const auto& [k, v] : e.attributes) rec[k] = v;
    put(rec, "prov:label", e.name);
    put(rec, "prov:location", e.location);
    put(rec, "prov:generatedAtTime", e.generated_at);
    put(rec, "voprov:comment", e.comment);
    return rec;
}

json description_json(const ActivityDescription& d, bool stub) {
    json rec = json::object();
    rec["prov:type"] = kDescriptionType;
    if (stub) {
        rec[kStubKey] = "true";
        return rec;
    }
    if (!d.name.empty()) rec["prov:label"] = d.name;
    put(rec, "voprov:version", d.version);
    put(rec, "voprov:doc", d.doc);
    put(rec, "voprov:docurl", d.docurl);
    if (d.code_reference) {
        rec["voprov:code_url"] = d.code_reference->url;
        put(rec, "voprov:code_revision", d.code_reference->revision);
    }
    return rec;
}

json activity_json(const Activity& a, bool stub, const ProvenanceDocument& doc) {
    json rec = json::object();
    if (stub) {
        rec[kStubKey] = "true";
        return rec;
    }
    for (const auto& [k, v] : a.attributes) rec[k] = v;
    put(rec, "prov:label", a.name);
    put(rec, "prov:startTime", a.start_time);
    put(rec, "prov:endTime", a.end_time);
    put(rec, "voprov:comment", a.comment);
    if (a.description_ref) rec["voprov:description"] = a.description_ref->str();
    const std::string id = a.id.str();
    for (const auto& p : doc.parameters) {
        if (p.activity.str() != id) continue;
        json value = json::object();
        value["$"] = p.value;
        value["type"] = xsd_type_name(p.value_type);
        rec[kParameterKeyPrefix + p.name] = value;
    }
    return rec;
}

json agent_json(const Agent& a, bool stub) {
    json rec = json::object();
    if (stub) {
        rec[kStubKey] = "true";
        return rec;
    }
    if (!a.name.empty()) rec["prov:label"] = a.name;
    rec["prov:type"] = std::string("prov:") + agent_kind_name(a.kind);
    put(rec, "voprov:email", a.email);
    return rec;
}

} // namespace

std::string to_prov_json(const ProvenanceDocument& doc) {
    json root = json::object();

    json prefix = json::object();
    for (const auto& [p, uri] : doc.namespaces) prefix[p] = uri;
    if (auto it = doc.namespaces.find(doc.default_prefix); it != doc.namespaces.end())
        prefix["default"] = it->second;
    root["prefix"] = prefix;

    auto is_stub = [&doc](const std::string& id) { return doc.incomplete_ids.contains(id); };

    if (!doc.entities.empty() || !doc.descriptions.empty()) {
        json section = json::object();
        for (const auto& [id, e] : doc.entities) section[id] = entity_json(e, is_stub(id));
        for (const auto& [id, d] : doc.descriptions) section[id] = description_json(d, is_stub(id));
        root["entity"] = section;
    }
    if (!doc.activities.empty()) {
        json section = json::object();
        for (const auto& [id, a] : doc.activities) section[id] = activity_json(a, is_stub(id), doc);
        root["activity"] = section;
    }
    if (!doc.agents.empty()) {
        json section = json::object();
        for (const auto& [id, a] : doc.agents) section[id] = agent_json(a, is_stub(id));
        root["agent"] = section;
    }

    if (!doc.used.empty()) {
        json section = json::object();
        int n = 0;
        for (const auto& r : doc.used) {
            json rec = json::object();
            rec["prov:activity"] = r.activity.str();
            rec["prov:entity"] = r.entity.str();
            put(rec, "prov:role", r.role);
            put(rec, "prov:time", r.time);
            section["_:u" + std::to_string(++n)] = rec;
        }
        root["used"] = section;
    }
    if (!doc.generated.empty()) {
        json section = json::object();
        int n = 0;
        for (const auto& r : doc.generated) {
            json rec = json::object();
            rec["prov:entity"] = r.entity.str();
            rec["prov:activity"] = r.activity.str();
            put(rec, "prov:role", r.role);
            put(rec, "prov:time", r.time);
            section["_:g" + std::to_string(++n)] = rec;
        }
        root["wasGeneratedBy"] = section;
    }
    if (!doc.associations.empty()) {
        json section = json::object();
        int n = 0;
        for (const auto& r : doc.associations) {
            json rec = json::object();
            rec["prov:activity"] = r.activity.str();
            rec["prov:agent"] = r.agent.str();
            put(rec, "prov:role", r.role);
            section["_:as" + std::to_string(++n)] = rec;
        }
        root["wasAssociatedWith"] = section;
    }
    if (!doc.attributions.empty()) {
        json section = json::object();
        int n = 0;
        for (const auto& r : doc.attributions) {
            json rec = json::object();
            rec["prov:entity"] = r.entity.str();
            rec["prov:agent"] = r.agent.str();
            put(rec, "prov:role", r.role);
            section["_:at" + std::to_string(++n)] = rec;
        }
        root["wasAttributedTo"] = section;
    }

    return root.dump();
}

namespace {

[[noreturn]] void bad_record(const std::string& id, const std::string& detail) {
    fail(Errc::bad_record, id + ": " + detail);
}

std::string field_string(const json& rec, const std::string& id, const std::string& key) {
    const json& v = rec.at(key);
    if (!v.is_string()) bad_record(id, "value of '" + key + "' must be a string");
    return v.get<std::string>();
}

// scalar → canonical string, matching the capture module's convention
std::string scalar_string(const json& v, const std::string& id, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    bad_record(id, "value of '" + key + "' must be a scalar");
}

struct Parsing {
    ProvenanceDocument& doc;

    QualifiedId qualify(const std::string& raw, const std::string& id) const {
        try {
            return parse_qualified_id(raw, doc.namespaces, doc.default_prefix);
        } catch (const Error& e) {
            bad_record(id, e.what());
        }
    }

    // true when the record was a stub marker and has been registered
    bool take_stub(const json& rec, const std::string& id, RecordClass cls) {
        auto it = rec.find(kStubKey);
        if (it == rec.end()) return false;
        if (!it->is_string() || it->get<std::string>() != "true")
            bad_record(id, std::string(kStubKey) + " must be the string \"true\"");
        for (const auto& [k, v] : rec.items())
            if (k != kStubKey && k != "prov:type")
                bad_record(id, "stub records carry no field '" + k + "'");
        add_stub(doc, qualify(id, id), cls);
        return true;
    }

    void parse_description(const std::string& id, const json& rec) {
        if (take_stub(rec, id, RecordClass::description)) return;
        ActivityDescription d;
        d.id = qualify(id, id);
        std::optional<std::string> code_url, code_revision;
        for (const auto& [key, value] : rec.items()) {
            if (key == "prov:type") continue;
            if (!value.is_string()) bad_record(id, "value of '" + key + "' must be a string");
            const std::string s = value.get<std::string>();
            if (key == "prov:label") d.name = s;
            else if (key == "voprov:version") d.version = s;
            else if (key == "voprov:doc") d.doc = s;
            else if (key == "voprov:docurl") d.docurl = s;
            else if (key == "voprov:code_url") code_url = s;
            else if (key == "voprov:code_revision") code_revision = s;
            else bad_record(id, "descriptions hold no attribute '" + key + "'");
        }
        if (code_revision && !code_url) bad_record(id, "code revision without code url");
        if (code_url) d.code_reference = CodeReference{*code_url, code_revision};
        doc.descriptions.emplace(d.id.str(), std::move(d));
    }

    void parse_entity(const std::string& id, const json& rec) {
        if (!rec.is_object()) bad_record(id, "record must be an object");
        if (auto it = rec.find("prov:type");
            it != rec.end() && it->is_string() && it->get<std::string>() == kDescriptionType) {
            parse_description(id, rec);
            return;
        }
        if (take_stub(rec, id, RecordClass::entity)) return;
        Entity e;
        e.id = qualify(id, id);
        for (const auto& [key, value] : rec.items()) {
            if (!value.is_string()) bad_record(id, "value of '" + key + "' must be a string");
            const std::string s = value.get<std::string>();
            if (key == "prov:label") e.name = s;
            else if (key == "prov:location") e.location = s;
            else if (key == "prov:generatedAtTime") e.generated_at = s;
            else if (key == "voprov:comment") e.comment = s;
            else e.attributes[key] = s;
        }
        doc.entities.emplace(e.id.str(), std::move(e));
    }

    void parse_activity(const std::string& id, const json& rec) {
        if (!rec.is_object()) bad_record(id, "record must be an object");
        if (take_stub(rec, id, RecordClass::activity)) return;
        Activity a;
        a.id = qualify(id, id);
        std::vector<Parameter> params;
        for (const auto& [key, value] : rec.items()) {
            if (value.is_object()) {
                if (key.rfind(kParameterKeyPrefix, 0) != 0)
                    bad_record(id, "typed value under unexpected key '" + key + "'");
                if (value.size() != 2 || !value.contains("$") || !value.contains("type"))
                    bad_record(id, "typed values carry exactly \"$\" and \"type\"");
                auto type = value_type_of_xsd(field_string(value, id, "type"));
                if (!type) bad_record(id, "unknown value type in '" + key + "'");
                Parameter p;
                p.activity = a.id;
                p.name = key.substr(std::string(kParameterKeyPrefix).size());
                p.value = scalar_string(value.at("$"), id, key);
                p.value_type = *type;
                params.push_back(std::move(p));
                continue;
            }
            if (!value.is_string()) bad_record(id, "value of '" + key + "' must be a string");
            const std::string s = value.get<std::string>();
            if (key == "prov:label") a.name = s;
            else if (key == "prov:startTime") a.start_time = s;
            else if (key == "prov:endTime") a.end_time = s;
            else if (key == "voprov:comment") a.comment = s;
            else if (key == "voprov:description") a.description_ref = qualify(s, id);
            else a.attributes[key] = s;
        }
        doc.activities.emplace(a.id.str(), std::move(a));
        for (auto& p : params) add_with_wrap(id, [&] { add_parameter(doc, std::move(p)); });
    }

    void parse_agent(const std::string& id, const json& rec) {
        if (!rec.is_object()) bad_record(id, "record must be an object");
        if (take_stub(rec, id, RecordClass::agent)) return;
        Agent a;
        a.id = qualify(id, id);
        for (const auto& [key, value] : rec.items()) {
            if (!value.is_string()) bad_record(id, "value of '" + key + "' must be a string");
            const std::string s = value.get<std::string>();
            if (key == "prov:label") a.name = s;
            else if (key == "voprov:email") a.email = s;
            else if (key == "prov:type") {
                if (s.rfind("prov:", 0) != 0) bad_record(id, "unknown agent type '" + s + "'");
                auto kind = parse_agent_kind(std::string_view(s).substr(5));
                if (!kind) bad_record(id, "unknown agent type '" + s + "'");
                a.kind = *kind;
            } else bad_record(id, "agents hold no attribute '" + key + "'");
        }
        doc.agents.emplace(a.id.str(), std::move(a));
    }

    template <class Fn> void add_with_wrap(const std::string& id, Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            bad_record(id, e.what());
        }
    }

    void parse_relations(const json& section, bool needs_time_slot,
                         const char* subject_key, const char* object_key,
                         const std::function<void(QualifiedId, QualifiedId,
                                                  std::optional<std::string>,
                                                  std::optional<std::string>)>& sink) {
        for (const auto& [key, rec] : section.items()) {
            if (!rec.is_object()) bad_record(key, "relation must be an object");
            std::optional<std::string> subject, object, role, time;
            for (const auto& [k, v] : rec.items()) {
                if (!v.is_string()) bad_record(key, "value of '" + k + "' must be a string");
                const std::string s = v.get<std::string>();
                if (k == subject_key) subject = s;
                else if (k == object_key) object = s;
                else if (k == "prov:role") role = s;
                else if (k == "prov:time" && needs_time_slot) time = s;
                else bad_record(key, "relations hold no attribute '" + k + "'");
            }
            if (!subject) bad_record(key, std::string("missing '") + subject_key + "'");
            if (!object) bad_record(key, std::string("missing '") + object_key + "'");
            add_with_wrap(key, [&] {
                sink(qualify(*subject, key), qualify(*object, key), std::move(role),
                     std::move(time));
            });
        }
    }
};

} // namespace

ProvenanceDocument from_prov_json(const std::string& text, const NamespaceMap& defaults,
                                  const std::string& default_prefix) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        fail(Errc::malformed_json, e.what());
    }
    if (!root.is_object()) fail(Errc::malformed_json, "top level must be an object");

    static const std::set<std::string> kSections{
        "prefix", "entity", "activity", "agent",
        "used",   "wasGeneratedBy", "wasAssociatedWith", "wasAttributedTo"};
    for (const auto& [key, value] : root.items())
        if (!kSections.contains(key)) fail(Errc::unknown_section, key);
    for (const auto& section : kSections)
        if (root.contains(section) && !root.at(section).is_object())
            fail(Errc::malformed_json, "section '" + section + "' must be an object");

    ProvenanceDocument doc;
    doc.namespaces.clear();
    doc.default_prefix = default_prefix;

    if (auto it = root.find("prefix"); it != root.end()) {
        std::optional<std::string> default_uri;
        for (const auto& [p, uri] : it->items()) {
            if (!uri.is_string()) fail(Errc::malformed_json, "prefix values must be strings");
            if (p == "default")
                default_uri = uri.get<std::string>();
            else
                doc.namespaces[p] = uri.get<std::string>();
        }
        if (default_uri)
            for (const auto& [p, uri] : doc.namespaces) // first match = smallest prefix
                if (uri == *default_uri) {
                    doc.default_prefix = p;
                    break;
                }
    } else {
        doc.namespaces = defaults;
    }

    Parsing parsing{doc};

    if (auto it = root.find("entity"); it != root.end())
        for (const auto& [id, rec] : it->items()) parsing.parse_entity(id, rec);
    if (auto it = root.find("activity"); it != root.end())
        for (const auto& [id, rec] : it->items()) parsing.parse_activity(id, rec);
    if (auto it = root.find("agent"); it != root.end())
        for (const auto& [id, rec] : it->items()) parsing.parse_agent(id, rec);

    if (auto it = root.find("used"); it != root.end())
        parsing.parse_relations(*it, true, "prov:activity", "prov:entity",
                                [&doc](QualifiedId s, QualifiedId o, auto role, auto time) {
                                    add_used(doc, {std::move(s), std::move(o), std::move(role),
                                                   std::move(time)});
                                });
    if (auto it = root.find("wasGeneratedBy"); it != root.end())
        parsing.parse_relations(*it, true, "prov:entity", "prov:activity",
                                [&doc](QualifiedId s, QualifiedId o, auto role, auto time) {
                                    add_generated(doc, {std::move(s), std::move(o),
                                                        std::move(role), std::move(time)});
                                });
    if (auto it = root.find("wasAssociatedWith"); it != root.end())
        parsing.parse_relations(*it, false, "prov:activity", "prov:agent",
                                [&doc](QualifiedId s, QualifiedId o, auto role, auto) {
                                    add_association(doc,
                                                    {std::move(s), std::move(o), std::move(role)});
                                });
    if (auto it = root.find("wasAttributedTo"); it != root.end())
        parsing.parse_relations(*it, false, "prov:entity", "prov:agent",
                                [&doc](QualifiedId s, QualifiedId o, auto role, auto) {
                                    add_attribution(doc,
                                                    {std::move(s), std::move(o), std::move(role)});
                                });

    return doc;
}

} // namespace provkit
