#ifndef PROVKIT_CAPTURE_HPP
#define PROVKIT_CAPTURE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <variant>

#include "model.hpp"

namespace provkit {

// Structured pipeline events, one JSON object per log line ("event" key
// holds the kind). Unknown keys survive in `extra` so a parse/serialize
// round trip is lossless.

struct ActivityStartEvent {
    QualifiedId activity;
    std::string name;
    std::string time;
    std::optional<QualifiedId> description_ref;
    AttributeMap extra;

    bool operator==(const ActivityStartEvent&) const = default;
};

struct ActivityEndEvent {
    QualifiedId activity;
    std::string time;
    AttributeMap extra;

    bool operator==(const ActivityEndEvent&) const = default;
};

struct UsedEvent {
    QualifiedId activity;
    QualifiedId entity;
    std::optional<std::string> role;
    std::optional<std::string> time;
    AttributeMap extra;

    bool operator==(const UsedEvent&) const = default;
};

struct GeneratedEvent {
    QualifiedId activity;
    QualifiedId entity;
    std::optional<std::string> role;
    std::optional<std::string> time;
    AttributeMap extra;

    bool operator==(const GeneratedEvent&) const = default;
};

struct EntityEvent {
    QualifiedId entity;
    std::optional<std::string> name;
    std::optional<std::string> location;
    AttributeMap extra;

    bool operator==(const EntityEvent&) const = default;
};

struct AgentEvent {
    QualifiedId agent;
    std::string name;
    AgentKind kind = AgentKind::person;
    std::optional<std::string> email;
    AttributeMap extra;

    bool operator==(const AgentEvent&) const = default;
};

struct AssociationEvent {
    QualifiedId activity;
    QualifiedId agent;
    std::optional<std::string> role;
    AttributeMap extra;

    bool operator==(const AssociationEvent&) const = default;
};

struct AttributionEvent {
    QualifiedId entity;
    QualifiedId agent;
    std::optional<std::string> role;
    AttributeMap extra;

    bool operator==(const AttributionEvent&) const = default;
};

struct ParameterEvent {
    QualifiedId activity;
    std::string name;
    std::string value;
    ValueType value_type = ValueType::string;
    AttributeMap extra;

    bool operator==(const ParameterEvent&) const = default;
};

using CaptureEvent =
    std::variant<ActivityStartEvent, ActivityEndEvent, UsedEvent, GeneratedEvent, EntityEvent,
                 AgentEvent, AssociationEvent, AttributionEvent, ParameterEvent>;

const char* event_kind_name(const CaptureEvent& event);

// One JSON-lines record -> typed event. Throws MalformedJson,
// UnknownEventKind, MissingField, BadValue (unparseable enum value), plus
// whatever parse_qualified_id raises for the embedded ids.
CaptureEvent parse_event_line(const std::string& line, const NamespaceMap& namespaces,
                              const std::string& default_prefix = kDefaultPrefix);

// Inverse of parse_event_line (up to JSON key order, which is canonical).
std::string event_to_line(const CaptureEvent& event);

struct FoldWarning {
    std::string code;    // EVENT_BEFORE_START / END_WITHOUT_START / UNCLOSED_ACTIVITY
    std::string subject; // activity id

    bool operator==(const FoldWarning&) const = default;
};

struct FoldResult {
    ProvenanceDocument document;
    std::vector<FoldWarning> warnings;
};

// Event stream -> document. Never fails: records referenced before they are
// described become stubs, duplicated information joins keep-first, and the
// listed warnings flag mis-ordered streams.
FoldResult fold_events(const std::vector<CaptureEvent>& events,
                       const std::string& default_prefix = kDefaultPrefix,
                       const NamespaceMap& namespaces = standard_namespaces());

// Parses a .provlog.jsonl file (blank lines skipped) and folds it.
FoldResult fold_event_file(const std::string& path,
                           const std::string& default_prefix = kDefaultPrefix,
                           const NamespaceMap& namespaces = standard_namespaces());

struct RecorderOptions {
    std::string default_prefix = kDefaultPrefix;
    std::string session_token;          // derived from entropy + time when empty
    std::function<std::string()> clock; // UTC ISO-8601; wall clock when empty
};

// Append-only event writer for instrumented pipeline code. One session per
// thread of execution; activity ids are deterministic given the token and
// clock, unique across sessions otherwise.
class RecorderSession {
public:
    using ActivityHandle = std::uint64_t;
    using Options = RecorderOptions;

    RecorderSession(std::ostream& sink, Options options = {}); // non-owning sink
    explicit RecorderSession(const std::string& path, Options options = {}); // appends
    ~RecorderSession();

    RecorderSession(const RecorderSession&) = delete;
    RecorderSession& operator=(const RecorderSession&) = delete;

    ActivityHandle begin_activity(const std::string& name,
                                  const std::optional<std::string>& description_ref = {});
    void record_used(ActivityHandle handle, const std::string& entity_id,
                     const std::optional<std::string>& role = {});
    void record_generated(ActivityHandle handle, const std::string& entity_id,
                          const std::optional<std::string>& role = {});
    void set_parameter(ActivityHandle handle, const std::string& name, const std::string& value,
                       ValueType value_type = ValueType::string);
    void declare_entity(const std::string& entity_id, const std::optional<std::string>& name = {},
                        const std::optional<std::string>& location = {});
    void declare_agent(const std::string& agent_id, const std::string& name, AgentKind kind,
                       const std::optional<std::string>& email = {});
    void associate(ActivityHandle handle, const std::string& agent_id,
                   const std::optional<std::string>& role = {});
    void attribute(const std::string& entity_id, const std::string& agent_id,
                   const std::optional<std::string>& role = {});
    void end_activity(ActivityHandle handle);

    // Rendered id assigned by begin_activity, e.g. "ex:calibrate_1_ab12cd".
    const std::string& activity_id(ActivityHandle handle) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace provkit

#endif
