#ifndef PROVKIT_MODEL_HPP
#define PROVKIT_MODEL_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ids.hpp"

namespace provkit {

// Free-form key/value annotations, iterated in key order.
using AttributeMap = std::map<std::string, std::string>;

struct Entity {
    QualifiedId id;
    std::optional<std::string> name;
    std::optional<std::string> location;
    std::optional<std::string> generated_at; // ISO-8601 UTC
    std::optional<std::string> comment;
    AttributeMap attributes;

    bool operator==(const Entity&) const = default;
};

struct Activity {
    QualifiedId id;
    std::optional<std::string> name;
    std::optional<std::string> start_time;
    std::optional<std::string> end_time;
    std::optional<QualifiedId> description_ref;
    std::optional<std::string> comment;
    AttributeMap attributes;

    bool operator==(const Activity&) const = default;
};

enum class AgentKind { person, organization, software_agent };

const char* agent_kind_name(AgentKind kind); // "Person" / "Organization" / "SoftwareAgent"
std::optional<AgentKind> parse_agent_kind(std::string_view name);

struct Agent {
    QualifiedId id;
    std::string name;
    AgentKind kind = AgentKind::person;
    std::optional<std::string> email;

    bool operator==(const Agent&) const = default;
};

struct CodeReference {
    std::string url;
    std::optional<std::string> revision;

    bool operator==(const CodeReference&) const = default;
};

// Static description of the method/software behind activity executions.
struct ActivityDescription {
    QualifiedId id;
    std::string name;
    std::optional<std::string> version;
    std::optional<std::string> doc;
    std::optional<std::string> docurl;
    std::optional<CodeReference> code_reference;

    bool operator==(const ActivityDescription&) const = default;
};

enum class ValueType { string, integer, real, boolean, timestamp };

const char* value_type_name(ValueType type);
std::optional<ValueType> parse_value_type(std::string_view name);
bool value_parses_as(std::string_view value, ValueType type);

// One configuration value of a specific activity execution.
struct Parameter {
    QualifiedId activity;
    std::string name;
    std::string value;
    ValueType value_type = ValueType::string;

    bool operator==(const Parameter&) const = default;
};

struct UsedRelation {
    QualifiedId activity;
    QualifiedId entity;
    std::optional<std::string> role;
    std::optional<std::string> time;

    bool operator==(const UsedRelation&) const = default;
};

struct GenerationRelation {
    QualifiedId entity;
    QualifiedId activity;
    std::optional<std::string> role;
    std::optional<std::string> time;

    bool operator==(const GenerationRelation&) const = default;
};

struct AssociationRelation {
    QualifiedId activity;
    QualifiedId agent;
    std::optional<std::string> role;

    bool operator==(const AssociationRelation&) const = default;
};

struct AttributionRelation {
    QualifiedId entity;
    QualifiedId agent;
    std::optional<std::string> role;

    bool operator==(const AttributionRelation&) const = default;
};

enum class RecordClass { entity, activity, agent, description };

const char* record_class_name(RecordClass cls);

// Typed provenance graph. Record maps are keyed by rendered qualified id
// and relation vectors are kept sorted and de-duplicated, so equality is
// structural regardless of insertion order. Ids in `incomplete_ids` are
// stubs: records known only by reference, exempt from field-level
// validation.
struct ProvenanceDocument {
    std::string default_prefix = kDefaultPrefix;
    NamespaceMap namespaces = standard_namespaces();
    std::map<std::string, Entity> entities;
    std::map<std::string, Activity> activities;
    std::map<std::string, Agent> agents;
    std::map<std::string, ActivityDescription> descriptions;
    std::vector<Parameter> parameters;          // sorted by (activity, name)
    std::vector<UsedRelation> used;             // sorted by (activity, entity, role)
    std::vector<GenerationRelation> generated;  // sorted by (entity, activity, role)
    std::vector<AssociationRelation> associations;
    std::vector<AttributionRelation> attributions;
    std::set<std::string> incomplete_ids;

    bool operator==(const ProvenanceDocument&) const = default;

    bool declared(const std::string& id) const; // has a record and is not a stub
    bool has_record(const std::string& id) const;
    std::size_t record_count() const; // class records + parameters + relations
};

ProvenanceDocument make_document(const std::string& default_prefix,
                                 const std::string& default_uri = "");

enum class UpsertOutcome { inserted, updated, unchanged };

// Field-join upserts. Existing and incoming values join field-wise: an
// absent field takes the incoming value, equal values de-duplicate, and
// differing non-empty values throw ConflictingRecord. A declared record
// clears the stub flag.
UpsertOutcome upsert(ProvenanceDocument& doc, const Entity& record);
UpsertOutcome upsert(ProvenanceDocument& doc, const Activity& record);
UpsertOutcome upsert(ProvenanceDocument& doc, const Agent& record);
UpsertOutcome upsert(ProvenanceDocument& doc, const ActivityDescription& record);

// Registers `id` as known-only-by-reference unless already declared.
UpsertOutcome add_stub(ProvenanceDocument& doc, const QualifiedId& id, RecordClass cls);

// Relations de-duplicate on endpoints + role; a missing time joins, a
// differing time throws ConflictingRecord.
UpsertOutcome add_used(ProvenanceDocument& doc, UsedRelation rel);
UpsertOutcome add_generated(ProvenanceDocument& doc, GenerationRelation rel);
UpsertOutcome add_association(ProvenanceDocument& doc, AssociationRelation rel);
UpsertOutcome add_attribution(ProvenanceDocument& doc, AttributionRelation rel);
UpsertOutcome add_parameter(ProvenanceDocument& doc, Parameter param);

enum class Severity { error, warning };

struct Finding {
    Severity severity = Severity::error;
    std::string code;
    std::string subject;
    std::string detail;

    bool operator==(const Finding&) const = default;
};

using ValidationReport = std::vector<Finding>;

bool report_ok(const ValidationReport& report); // no error-severity findings

// Empty report iff every document invariant holds. Dangling references are
// warnings (code DANGLING_REF); everything else is an error.
ValidationReport validate_document(const ProvenanceDocument& doc);

// Union keyed by id with field-join semantics. Throws ConflictingRecord /
// ConflictingNamespace.
ProvenanceDocument merge_documents(const ProvenanceDocument& a, const ProvenanceDocument& b);

// All (derived, source) entity pairs connected through one activity,
// sorted lexicographically and de-duplicated.
std::vector<std::pair<std::string, std::string>> derive_progenitor_pairs(
    const ProvenanceDocument& doc);

} // namespace provkit

#endif
