#include "model.hpp"

#include <algorithm>
#include <cstdlib>

#include "errors.hpp"
#include "util.hpp"

namespace provkit {

const char* agent_kind_name(AgentKind kind) {
    switch (kind) {
    case AgentKind::person: return "Person";
    case AgentKind::organization: return "Organization";
    case AgentKind::software_agent: return "SoftwareAgent";
    }
    return "Person";
}

std::optional<AgentKind> parse_agent_kind(std::string_view name) {
    if (name == "Person") return AgentKind::person;
    if (name == "Organization") return AgentKind::organization;
    if (name == "SoftwareAgent") return AgentKind::software_agent;
    return std::nullopt;
}

const char* value_type_name(ValueType type) {
    switch (type) {
    case ValueType::string: return "string";
    case ValueType::integer: return "integer";
    case ValueType::real: return "real";
    case ValueType::boolean: return "boolean";
    case ValueType::timestamp: return "timestamp";
    }
    return "string";
}

std::optional<ValueType> parse_value_type(std::string_view name) {
    if (name == "string") return ValueType::string;
    if (name == "integer") return ValueType::integer;
    if (name == "real") return ValueType::real;
    if (name == "boolean") return ValueType::boolean;
    if (name == "timestamp") return ValueType::timestamp;
    return std::nullopt;
}

bool value_parses_as(std::string_view value, ValueType type) {
    switch (type) {
    case ValueType::string:
        return true;
    case ValueType::integer: {
        size_t i = (!value.empty() && (value[0] == '+' || value[0] == '-')) ? 1 : 0;
        if (i >= value.size()) return false;
        for (; i < value.size(); ++i)
            if (value[i] < '0' || value[i] > '9') return false;
        return true;
    }
    case ValueType::real: {
        if (value.empty()) return false;
        const std::string copy(value);
        char* end = nullptr;
        std::strtod(copy.c_str(), &end);
        return end && *end == '\0' && end != copy.c_str();
    }
    case ValueType::boolean:
        return value == "true" || value == "false";
    case ValueType::timestamp:
        return is_iso8601_utc(value);
    }
    return false;
}

const char* record_class_name(RecordClass cls) {
    switch (cls) {
    case RecordClass::entity: return "entity";
    case RecordClass::activity: return "activity";
    case RecordClass::agent: return "agent";
    case RecordClass::description: return "description";
    }
    return "entity";
}

bool ProvenanceDocument::has_record(const std::string& id) const {
    return entities.contains(id) || activities.contains(id) || agents.contains(id) ||
           descriptions.contains(id);
}

bool ProvenanceDocument::declared(const std::string& id) const {
    return has_record(id) && !incomplete_ids.contains(id);
}

std::size_t ProvenanceDocument::record_count() const {
    return entities.size() + activities.size() + agents.size() + descriptions.size() +
           parameters.size() + used.size() + generated.size() + associations.size() +
           attributions.size();
}

ProvenanceDocument make_document(const std::string& default_prefix, const std::string& default_uri) {
    ProvenanceDocument doc;
    doc.default_prefix = default_prefix;
    doc.namespaces = standard_namespaces(default_prefix, default_uri);
    return doc;
}

namespace {

[[noreturn]] void conflict(const std::string& id, const std::string& field) {
    fail(Errc::conflicting_record, "record '" + id + "' differs in field " + field);
}

// Join an optional field: absent takes the incoming value, equal values
// collapse, differing values conflict. Returns true if `dst` changed.
template <typename T>
bool join_field(std::optional<T>& dst, const std::optional<T>& src, const std::string& id,
                const char* field) {
    if (!src) return false;
    if (!dst) {
        dst = src;
        return true;
    }
    if (*dst != *src) conflict(id, field);
    return false;
}

bool join_attributes(AttributeMap& dst, const AttributeMap& src, const std::string& id) {
    bool changed = false;
    for (const auto& [key, value] : src) {
        auto [it, inserted] = dst.emplace(key, value);
        if (inserted)
            changed = true;
        else if (it->second != value)
            conflict(id, "attributes[" + key + "]");
    }
    return changed;
}

bool join_record(Entity& dst, const Entity& src, const std::string& id) {
    bool changed = false;
    changed |= join_field(dst.name, src.name, id, "name");
    changed |= join_field(dst.location, src.location, id, "location");
    changed |= join_field(dst.generated_at, src.generated_at, id, "generated_at");
    changed |= join_field(dst.comment, src.comment, id, "comment");
    changed |= join_attributes(dst.attributes, src.attributes, id);
    return changed;
}

bool join_record(Activity& dst, const Activity& src, const std::string& id) {
    bool changed = false;
    changed |= join_field(dst.name, src.name, id, "name");
    changed |= join_field(dst.start_time, src.start_time, id, "start_time");
    changed |= join_field(dst.end_time, src.end_time, id, "end_time");
    changed |= join_field(dst.description_ref, src.description_ref, id, "description_ref");
    changed |= join_field(dst.comment, src.comment, id, "comment");
    changed |= join_attributes(dst.attributes, src.attributes, id);
    return changed;
}

bool join_record(Agent& dst, const Agent& src, const std::string& id) {
    bool changed = false;
    if (!src.name.empty()) {
        if (dst.name.empty()) {
            dst.name = src.name;
            dst.kind = src.kind;
            changed = true;
        } else if (dst.name != src.name) {
            conflict(id, "name");
        } else if (dst.kind != src.kind) {
            conflict(id, "kind");
        }
    }
    changed |= join_field(dst.email, src.email, id, "email");
    return changed;
}

bool join_record(ActivityDescription& dst, const ActivityDescription& src, const std::string& id) {
    bool changed = false;
    if (!src.name.empty()) {
        if (dst.name.empty()) {
            dst.name = src.name;
            changed = true;
        } else if (dst.name != src.name) {
            conflict(id, "name");
        }
    }
    changed |= join_field(dst.version, src.version, id, "version");
    changed |= join_field(dst.doc, src.doc, id, "doc");
    changed |= join_field(dst.docurl, src.docurl, id, "docurl");
    changed |= join_field(dst.code_reference, src.code_reference, id, "code_reference");
    return changed;
}

template <typename Record>
UpsertOutcome upsert_into(ProvenanceDocument& doc, std::map<std::string, Record>& records,
                          const Record& record) {
    const std::string id = record.id.str();
    auto [it, inserted] = records.emplace(id, record);
    if (inserted) {
        doc.incomplete_ids.erase(id);
        return UpsertOutcome::inserted;
    }
    bool changed = join_record(it->second, record, id);
    if (doc.incomplete_ids.erase(id) > 0) changed = true; // stub became declared
    return changed ? UpsertOutcome::updated : UpsertOutcome::unchanged;
}

void normalize_role(std::optional<std::string>& role) {
    if (role && role->empty()) role.reset();
}

} // namespace

UpsertOutcome upsert(ProvenanceDocument& doc, const Entity& record) {
    return upsert_into(doc, doc.entities, record);
}
UpsertOutcome upsert(ProvenanceDocument& doc, const Activity& record) {
    return upsert_into(doc, doc.activities, record);
}
UpsertOutcome upsert(ProvenanceDocument& doc, const Agent& record) {
    return upsert_into(doc, doc.agents, record);
}
UpsertOutcome upsert(ProvenanceDocument& doc, const ActivityDescription& record) {
    return upsert_into(doc, doc.descriptions, record);
}

UpsertOutcome add_stub(ProvenanceDocument& doc, const QualifiedId& id, RecordClass cls) {
    const std::string key = id.str();
    if (doc.has_record(key)) return UpsertOutcome::unchanged;
    switch (cls) {
    case RecordClass::entity: doc.entities.emplace(key, Entity{.id = id}); break;
    case RecordClass::activity: doc.activities.emplace(key, Activity{.id = id}); break;
    case RecordClass::agent: doc.agents.emplace(key, Agent{.id = id}); break;
    case RecordClass::description: doc.descriptions.emplace(key, ActivityDescription{.id = id}); break;
    }
    doc.incomplete_ids.insert(key);
    return UpsertOutcome::inserted;
}

namespace {

// Sorted-unique insertion for relation vectors. `key_less` orders by the
// de-duplication key (endpoints + role); `join` merges payload fields of an
// existing element.
template <typename Rel, typename KeyLess, typename Join>
UpsertOutcome add_relation(std::vector<Rel>& relations, Rel rel, KeyLess key_less, Join join) {
    auto it = std::lower_bound(relations.begin(), relations.end(), rel, key_less);
    if (it != relations.end() && !key_less(rel, *it)) return join(*it, rel);
    relations.insert(it, std::move(rel));
    return UpsertOutcome::inserted;
}

bool join_time(std::optional<std::string>& dst, const std::optional<std::string>& src,
               const std::string& subject) {
    if (!src) return false;
    if (!dst) {
        dst = src;
        return true;
    }
    if (*dst != *src) conflict(subject, "time");
    return false;
}

} // namespace

UpsertOutcome add_used(ProvenanceDocument& doc, UsedRelation rel) {
    normalize_role(rel.role);
    auto key_less = [](const UsedRelation& a, const UsedRelation& b) {
        if (int c = compare_rendered(a.activity, b.activity)) return c < 0;
        if (int c = compare_rendered(a.entity, b.entity)) return c < 0;
        return a.role < b.role;
    };
    return add_relation(doc.used, std::move(rel), key_less,
                        [](UsedRelation& dst, const UsedRelation& src) {
                            const std::string subject =
                                "used(" + src.activity.str() + ", " + src.entity.str() + ")";
                            return join_time(dst.time, src.time, subject)
                                       ? UpsertOutcome::updated
                                       : UpsertOutcome::unchanged;
                        });
}

UpsertOutcome add_generated(ProvenanceDocument& doc, GenerationRelation rel) {
    normalize_role(rel.role);
    auto key_less = [](const GenerationRelation& a, const GenerationRelation& b) {
        if (int c = compare_rendered(a.entity, b.entity)) return c < 0;
        if (int c = compare_rendered(a.activity, b.activity)) return c < 0;
        return a.role < b.role;
    };
    return add_relation(doc.generated, std::move(rel), key_less,
                        [](GenerationRelation& dst, const GenerationRelation& src) {
                            const std::string subject = "wasGeneratedBy(" + src.entity.str() +
                                                        ", " + src.activity.str() + ")";
                            return join_time(dst.time, src.time, subject)
                                       ? UpsertOutcome::updated
                                       : UpsertOutcome::unchanged;
                        });
}

UpsertOutcome add_association(ProvenanceDocument& doc, AssociationRelation rel) {
    normalize_role(rel.role);
    auto key_less = [](const AssociationRelation& a, const AssociationRelation& b) {
        if (int c = compare_rendered(a.activity, b.activity)) return c < 0;
        if (int c = compare_rendered(a.agent, b.agent)) return c < 0;
        return a.role < b.role;
    };
    return add_relation(doc.associations, std::move(rel), key_less,
                        [](AssociationRelation&, const AssociationRelation&) {
                            return UpsertOutcome::unchanged;
                        });
}

UpsertOutcome add_attribution(ProvenanceDocument& doc, AttributionRelation rel) {
    normalize_role(rel.role);
    auto key_less = [](const AttributionRelation& a, const AttributionRelation& b) {
        if (int c = compare_rendered(a.entity, b.entity)) return c < 0;
        if (int c = compare_rendered(a.agent, b.agent)) return c < 0;
        return a.role < b.role;
    };
    return add_relation(doc.attributions, std::move(rel), key_less,
                        [](AttributionRelation&, const AttributionRelation&) {
                            return UpsertOutcome::unchanged;
                        });
}

UpsertOutcome add_parameter(ProvenanceDocument& doc, Parameter param) {
    auto key_less = [](const Parameter& a, const Parameter& b) {
        if (int c = compare_rendered(a.activity, b.activity)) return c < 0;
        return a.name < b.name;
    };
    return add_relation(doc.parameters, std::move(param), key_less,
                        [](Parameter& dst, const Parameter& src) {
                            const std::string subject =
                                "parameter(" + src.activity.str() + ", " + src.name + ")";
                            if (dst.value != src.value) conflict(subject, "value");
                            if (dst.value_type != src.value_type) conflict(subject, "value_type");
                            return UpsertOutcome::unchanged;
                        });
}

ProvenanceDocument merge_documents(const ProvenanceDocument& a, const ProvenanceDocument& b) {
    ProvenanceDocument out = a;
    for (const auto& [prefix, uri] : b.namespaces) {
        auto [it, inserted] = out.namespaces.emplace(prefix, uri);
        if (!inserted && it->second != uri)
            fail(Errc::conflicting_namespace,
                 "prefix '" + prefix + "' bound to both <" + it->second + "> and <" + uri + ">");
    }
    auto merge_records = [&out, &b](const auto& records, RecordClass cls) {
        for (const auto& [id, record] : records) {
            if (b.incomplete_ids.contains(id))
                add_stub(out, record.id, cls);
            else
                upsert(out, record);
        }
    };
    merge_records(b.entities, RecordClass::entity);
    merge_records(b.activities, RecordClass::activity);
    merge_records(b.agents, RecordClass::agent);
    merge_records(b.descriptions, RecordClass::description);
    for (const auto& rel : b.used) add_used(out, rel);
    for (const auto& rel : b.generated) add_generated(out, rel);
    for (const auto& rel : b.associations) add_association(out, rel);
    for (const auto& rel : b.attributions) add_attribution(out, rel);
    for (const auto& param : b.parameters) add_parameter(out, param);
    return out;
}

std::vector<std::pair<std::string, std::string>> derive_progenitor_pairs(
    const ProvenanceDocument& doc) {
    // used relations indexed by activity
    std::map<std::string, std::vector<std::string>> inputs;
    for (const auto& rel : doc.used) inputs[rel.activity.str()].push_back(rel.entity.str());
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& gen : doc.generated) {
        auto it = inputs.find(gen.activity.str());
        if (it == inputs.end()) continue;
        for (const auto& source : it->second) pairs.emplace_back(gen.entity.str(), source);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

} // namespace provkit
