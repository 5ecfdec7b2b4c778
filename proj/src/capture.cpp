#include "capture.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <tuple>

#include <json.hpp>

#include "errors.hpp"
#include "util.hpp"

namespace provkit {

using nlohmann::json;

namespace {

[[noreturn]] void missing(const std::string& kind, const char* field) {
    fail(Errc::missing_field,
         "event '" + kind + "' is missing mandatory field '" + field + "'");
}

std::string require_string(const json& j, const std::string& kind, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) missing(kind, key);
    if (!it->is_string())
        fail(Errc::malformed_json, "field '" + std::string(key) + "' must be a string");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string())
        fail(Errc::malformed_json, "field '" + std::string(key) + "' must be a string");
    return it->get<std::string>();
}

std::string scalar_to_string(const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

AttributeMap collect_extras(const json& j, std::initializer_list<const char*> known) {
    AttributeMap extras;
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool is_known = false;
        for (const char* k : known)
            if (it.key() == k) {
                is_known = true;
                break;
            }
        if (!is_known) extras[it.key()] = scalar_to_string(it.value());
    }
    return extras;
}

} // namespace

const char* event_kind_name(const CaptureEvent& event) {
    static const char* names[] = {"activity_start", "activity_end", "used",
                                  "generated",      "entity",       "agent",
                                  "association",    "attribution",  "parameter"};
    return names[event.index()];
}

CaptureEvent parse_event_line(const std::string& line, const NamespaceMap& namespaces,
                              const std::string& default_prefix) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        fail(Errc::malformed_json, e.what());
    }
    if (!j.is_object()) fail(Errc::malformed_json, "event line is not a JSON object");
    auto kind_it = j.find("event");
    if (kind_it == j.end() || !kind_it->is_string())
        fail(Errc::malformed_json, "missing string key 'event'");
    const std::string kind = kind_it->get<std::string>();

    auto qid = [&](const char* key) {
        return parse_qualified_id(require_string(j, kind, key), namespaces, default_prefix);
    };

    if (kind == "activity_start") {
        ActivityStartEvent e;
        e.activity = qid("activity_id");
        e.name = require_string(j, kind, "name");
        e.time = require_string(j, kind, "time");
        if (auto ref = optional_string(j, "description_ref"))
            e.description_ref = parse_qualified_id(*ref, namespaces, default_prefix);
        e.extra = collect_extras(j, {"event", "activity_id", "name", "time", "description_ref"});
        return e;
    }
    if (kind == "activity_end") {
        ActivityEndEvent e;
        e.activity = qid("activity_id");
        e.time = require_string(j, kind, "time");
        e.extra = collect_extras(j, {"event", "activity_id", "time"});
        return e;
    }
    if (kind == "used" || kind == "generated") {
        const QualifiedId activity = qid("activity_id");
        const QualifiedId entity = qid("entity_id");
        auto role = optional_string(j, "role");
        auto time = optional_string(j, "time");
        auto extra = collect_extras(j, {"event", "activity_id", "entity_id", "role", "time"});
        if (kind == "used") return UsedEvent{activity, entity, role, time, std::move(extra)};
        return GeneratedEvent{activity, entity, role, time, std::move(extra)};
    }
    if (kind == "entity") {
        EntityEvent e;
        e.entity = qid("entity_id");
        e.name = optional_string(j, "name");
        e.location = optional_string(j, "location");
        e.extra = collect_extras(j, {"event", "entity_id", "name", "location"});
        return e;
    }
    if (kind == "agent") {
        AgentEvent e;
        e.agent = qid("agent_id");
        e.name = require_string(j, kind, "name");
        const std::string kind_name = require_string(j, kind, "kind");
        auto parsed = parse_agent_kind(kind_name);
        if (!parsed) fail(Errc::bad_value, "unknown agent kind '" + kind_name + "'");
        e.kind = *parsed;
        e.email = optional_string(j, "email");
        e.extra = collect_extras(j, {"event", "agent_id", "name", "kind", "email"});
        return e;
    }
    if (kind == "association") {
        AssociationEvent e;
        e.activity = qid("activity_id");
        e.agent = qid("agent_id");
        e.role = optional_string(j, "role");
        e.extra = collect_extras(j, {"event", "activity_id", "agent_id", "role"});
        return e;
    }
    if (kind == "attribution") {
        AttributionEvent e;
        e.entity = qid("entity_id");
        e.agent = qid("agent_id");
        e.role = optional_string(j, "role");
        e.extra = collect_extras(j, {"event", "entity_id", "agent_id", "role"});
        return e;
    }
    if (kind == "parameter") {
        ParameterEvent e;
        e.activity = qid("activity_id");
        e.name = require_string(j, kind, "name");
        auto value_it = j.find("value");
        if (value_it == j.end() || value_it->is_null()) missing(kind, "value");
        if (!value_it->is_string() && !value_it->is_number() && !value_it->is_boolean())
            fail(Errc::malformed_json, "field 'value' must be a scalar");
        e.value = scalar_to_string(*value_it);
        const std::string type_name = require_string(j, kind, "value_type");
        auto parsed = parse_value_type(type_name);
        if (!parsed) fail(Errc::bad_value, "unknown value type '" + type_name + "'");
        e.value_type = *parsed;
        e.extra = collect_extras(j, {"event", "activity_id", "name", "value", "value_type"});
        return e;
    }
    fail(Errc::unknown_event_kind, "unknown event kind '" + kind + "'");
}

std::string event_to_line(const CaptureEvent& event) {
    json j;
    j["event"] = event_kind_name(event);
    auto put = [&j](const char* key, const std::optional<std::string>& v) {
        if (v) j[key] = *v;
    };
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ActivityStartEvent>) {
                j["activity_id"] = e.activity.str();
                j["name"] = e.name;
                j["time"] = e.time;
                if (e.description_ref) j["description_ref"] = e.description_ref->str();
            } else if constexpr (std::is_same_v<T, ActivityEndEvent>) {
                j["activity_id"] = e.activity.str();
                j["time"] = e.time;
            } else if constexpr (std::is_same_v<T, UsedEvent> ||
                                 std::is_same_v<T, GeneratedEvent>) {
                j["activity_id"] = e.activity.str();
                j["entity_id"] = e.entity.str();
                put("role", e.role);
                put("time", e.time);
            } else if constexpr (std::is_same_v<T, EntityEvent>) {
                j["entity_id"] = e.entity.str();
                put("name", e.name);
                put("location", e.location);
            } else if constexpr (std::is_same_v<T, AgentEvent>) {
                j["agent_id"] = e.agent.str();
                j["name"] = e.name;
                j["kind"] = agent_kind_name(e.kind);
                put("email", e.email);
            } else if constexpr (std::is_same_v<T, AssociationEvent>) {
                j["activity_id"] = e.activity.str();
                j["agent_id"] = e.agent.str();
                put("role", e.role);
            } else if constexpr (std::is_same_v<T, AttributionEvent>) {
                j["entity_id"] = e.entity.str();
                j["agent_id"] = e.agent.str();
                put("role", e.role);
            } else if constexpr (std::is_same_v<T, ParameterEvent>) {
                j["activity_id"] = e.activity.str();
                j["name"] = e.name;
                j["value"] = e.value;
                j["value_type"] = value_type_name(e.value_type);
            }
            for (const auto& [k, v] : e.extra) j[k] = v;
        },
        event);
    return j.dump();
}

namespace {

template <class T>
void keep_first(std::optional<T>& slot, const std::optional<T>& incoming) {
    if (!slot && incoming) slot = incoming;
}

void keep_first_attrs(AttributeMap& dst, const AttributeMap& src) {
    for (const auto& [k, v] : src) dst.emplace(k, v);
}

} // namespace

FoldResult fold_events(const std::vector<CaptureEvent>& events, const std::string& default_prefix,
                       const NamespaceMap& namespaces) {
    struct ActState {
        Activity rec;
        bool started = false;
        bool ended = false;
        bool declared = false; // started, or materialized by an end event
    };
    struct EntState {
        Entity rec;
        bool declared = false;
    };
    struct AgState {
        Agent rec;
        bool declared = false;
    };

    std::map<std::string, ActState> acts;
    std::map<std::string, EntState> ents;
    std::map<std::string, AgState> agents;
    std::set<std::string> description_stubs;
    std::vector<UsedRelation> used;
    std::vector<GenerationRelation> generated;
    std::vector<AssociationRelation> associations;
    std::vector<AttributionRelation> attributions;
    std::vector<Parameter> parameters;
    std::set<std::tuple<std::string, std::string, std::string>> used_seen, gen_seen, assoc_seen,
        attr_seen;
    std::set<std::pair<std::string, std::string>> param_seen;
    std::map<std::string, std::string> first_generation_time;

    std::vector<FoldWarning> warnings;
    std::set<std::string> warned_before_start, warned_end_without_start;

    auto touch_activity = [&](const QualifiedId& id, bool from_dependent_event) -> ActState& {
        ActState& st = acts[id.str()];
        if (st.rec.id.local.empty()) st.rec.id = id;
        if (from_dependent_event && !st.started && warned_before_start.insert(id.str()).second)
            warnings.push_back({"EVENT_BEFORE_START", id.str()});
        return st;
    };
    auto touch_entity = [&](const QualifiedId& id) -> EntState& {
        EntState& st = ents[id.str()];
        if (st.rec.id.local.empty()) st.rec.id = id;
        return st;
    };
    auto touch_agent = [&](const QualifiedId& id) -> AgState& {
        AgState& st = agents[id.str()];
        if (st.rec.id.local.empty()) st.rec.id = id;
        return st;
    };

    for (const CaptureEvent& event : events) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, ActivityStartEvent>) {
                    ActState& st = touch_activity(e.activity, false);
                    st.started = st.declared = true;
                    if (!st.rec.name) st.rec.name = e.name;
                    keep_first(st.rec.start_time, std::optional{e.time});
                    if (e.description_ref) {
                        keep_first(st.rec.description_ref, e.description_ref);
                        description_stubs.insert(e.description_ref->str());
                    }
                    keep_first_attrs(st.rec.attributes, e.extra);
                } else if constexpr (std::is_same_v<T, ActivityEndEvent>) {
                    ActState& st = touch_activity(e.activity, false);
                    if (!st.started && warned_end_without_start.insert(e.activity.str()).second)
                        warnings.push_back({"END_WITHOUT_START", e.activity.str()});
                    st.ended = st.declared = true;
                    keep_first(st.rec.end_time, std::optional{e.time});
                    keep_first_attrs(st.rec.attributes, e.extra);
                } else if constexpr (std::is_same_v<T, UsedEvent>) {
                    ActState& st = touch_activity(e.activity, true);
                    touch_entity(e.entity);
                    if (used_seen
                            .insert({e.activity.str(), e.entity.str(), e.role.value_or("")})
                            .second)
                        used.push_back({e.activity, e.entity, e.role, e.time});
                    keep_first_attrs(st.rec.attributes, e.extra);
                } else if constexpr (std::is_same_v<T, GeneratedEvent>) {
                    ActState& st = touch_activity(e.activity, true);
                    touch_entity(e.entity);
                    if (gen_seen.insert({e.entity.str(), e.activity.str(), e.role.value_or("")})
                            .second)
                        generated.push_back({e.entity, e.activity, e.role, e.time});
                    if (e.time) first_generation_time.emplace(e.entity.str(), *e.time);
                    keep_first_attrs(st.rec.attributes, e.extra);
                } else if constexpr (std::is_same_v<T, EntityEvent>) {
                    EntState& st = touch_entity(e.entity);
                    st.declared = true;
                    keep_first(st.rec.name, e.name);
                    keep_first(st.rec.location, e.location);
                    keep_first_attrs(st.rec.attributes, e.extra);
                } else if constexpr (std::is_same_v<T, AgentEvent>) {
                    AgState& st = touch_agent(e.agent);
                    if (!st.declared) {
                        st.declared = true;
                        st.rec.name = e.name;
                        st.rec.kind = e.kind;
                    }
                    keep_first(st.rec.email, e.email);
                } else if constexpr (std::is_same_v<T, AssociationEvent>) {
                    touch_activity(e.activity, true);
                    touch_agent(e.agent);
                    if (assoc_seen
                            .insert({e.activity.str(), e.agent.str(), e.role.value_or("")})
                            .second)
                        associations.push_back({e.activity, e.agent, e.role});
                } else if constexpr (std::is_same_v<T, AttributionEvent>) {
                    EntState& st = touch_entity(e.entity);
                    touch_agent(e.agent);
                    if (attr_seen.insert({e.entity.str(), e.agent.str(), e.role.value_or("")})
                            .second)
                        attributions.push_back({e.entity, e.agent, e.role});
                    keep_first_attrs(st.rec.attributes, e.extra);
                } else if constexpr (std::is_same_v<T, ParameterEvent>) {
                    touch_activity(e.activity, true);
                    if (param_seen.insert({e.activity.str(), e.name}).second)
                        parameters.push_back({e.activity, e.name, e.value, e.value_type});
                }
            },
            event);
    }

    for (const auto& [id, st] : acts)
        if (st.started && !st.ended) warnings.push_back({"UNCLOSED_ACTIVITY", id});

    FoldResult result;
    ProvenanceDocument& doc = result.document;
    doc.default_prefix = default_prefix;
    doc.namespaces = namespaces;
    for (const auto& [prefix, uri] : standard_namespaces(default_prefix))
        doc.namespaces.emplace(prefix, uri);

    for (const auto& [id, st] : acts)
        if (st.declared) upsert(doc, st.rec);
    for (const auto& [id, st] : ents)
        if (st.declared) {
            Entity rec = st.rec;
            if (!rec.generated_at) {
                auto it = first_generation_time.find(id);
                if (it != first_generation_time.end()) rec.generated_at = it->second;
            }
            upsert(doc, rec);
        }
    for (const auto& [id, st] : agents)
        if (st.declared) upsert(doc, st.rec);
    for (const auto& [id, st] : acts)
        if (!st.declared) add_stub(doc, st.rec.id, RecordClass::activity);
    for (const auto& [id, st] : ents)
        if (!st.declared) add_stub(doc, st.rec.id, RecordClass::entity);
    for (const auto& [id, st] : agents)
        if (!st.declared) add_stub(doc, st.rec.id, RecordClass::agent);
    for (const auto& id : description_stubs) {
        const auto colon = id.find(':');
        add_stub(doc, {id.substr(0, colon), id.substr(colon + 1)}, RecordClass::description);
    }
    for (const auto& rel : used) add_used(doc, rel);
    for (const auto& rel : generated) add_generated(doc, rel);
    for (const auto& rel : associations) add_association(doc, rel);
    for (const auto& rel : attributions) add_attribution(doc, rel);
    for (const auto& param : parameters) add_parameter(doc, param);

    result.warnings = std::move(warnings);
    return result;
}

FoldResult fold_event_file(const std::string& path, const std::string& default_prefix,
                           const NamespaceMap& namespaces) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open event file '" + path + "'");
    std::vector<CaptureEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        events.push_back(parse_event_line(line, namespaces, default_prefix));
    }
    return fold_events(events, default_prefix, namespaces);
}

// ---------------------------------------------------------------------------

struct RecorderSession::Impl {
    std::ofstream owned;
    std::ostream* sink = nullptr;
    Options opt;
    std::uint64_t counter = 0;

    struct Act {
        QualifiedId id;
        std::string rendered;
        bool open = true;
    };
    std::vector<Act> acts;

    std::string now() const { return opt.clock ? opt.clock() : utc_now_iso8601(); }

    void write(const CaptureEvent& event) {
        (*sink) << event_to_line(event) << '\n';
        sink->flush();
    }

    // Permissive qualification: capture must not second-guess the pipeline's
    // prefixes, so any `prefix:local` shape is accepted as-is.
    QualifiedId qualify(const std::string& id) const {
        if (id.empty()) fail(Errc::empty_id, "empty id");
        const auto colon = id.find(':');
        if (colon == std::string::npos) return {opt.default_prefix, id};
        if (colon == 0 || colon + 1 == id.size())
            fail(Errc::empty_id, "empty id component in '" + id + "'");
        return {id.substr(0, colon), id.substr(colon + 1)};
    }

    Act& live(ActivityHandle handle) {
        if (handle >= acts.size()) fail(Errc::bad_value, "unknown activity handle");
        Act& act = acts[handle];
        if (!act.open)
            fail(Errc::use_after_end, "activity '" + act.rendered + "' already ended");
        return act;
    }
};

namespace {

std::string default_session_token() {
    std::random_device rd;
    std::uint64_t x = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    x ^= static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count());
    char buf[8];
    std::snprintf(buf, sizeof buf, "%06llx",
                  static_cast<unsigned long long>(x & 0xffffff));
    return buf;
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name)
        out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out.empty() ? "activity" : out;
}

} // namespace

RecorderSession::RecorderSession(std::ostream& sink, Options options)
    : impl_(std::make_unique<Impl>()) {
    impl_->sink = &sink;
    impl_->opt = std::move(options);
    if (impl_->opt.session_token.empty()) impl_->opt.session_token = default_session_token();
}

RecorderSession::RecorderSession(const std::string& path, Options options)
    : impl_(std::make_unique<Impl>()) {
    impl_->owned.open(path, std::ios::app);
    if (!impl_->owned) fail(Errc::io_error, "cannot open event log '" + path + "'");
    impl_->sink = &impl_->owned;
    impl_->opt = std::move(options);
    if (impl_->opt.session_token.empty()) impl_->opt.session_token = default_session_token();
}

RecorderSession::~RecorderSession() = default;

RecorderSession::ActivityHandle
RecorderSession::begin_activity(const std::string& name,
                                const std::optional<std::string>& description_ref) {
    Impl::Act act;
    act.id = {impl_->opt.default_prefix, sanitize_name(name) + "_" +
                                             std::to_string(++impl_->counter) + "_" +
                                             impl_->opt.session_token};
    act.rendered = act.id.str();
    impl_->acts.push_back(act);

    ActivityStartEvent event;
    event.activity = act.id;
    event.name = name;
    event.time = impl_->now();
    if (description_ref) event.description_ref = impl_->qualify(*description_ref);
    impl_->write(event);
    return impl_->acts.size() - 1;
}

void RecorderSession::record_used(ActivityHandle handle, const std::string& entity_id,
                                  const std::optional<std::string>& role) {
    auto& act = impl_->live(handle);
    impl_->write(UsedEvent{act.id, impl_->qualify(entity_id), role, impl_->now(), {}});
}

void RecorderSession::record_generated(ActivityHandle handle, const std::string& entity_id,
                                       const std::optional<std::string>& role) {
    auto& act = impl_->live(handle);
    impl_->write(GeneratedEvent{act.id, impl_->qualify(entity_id), role, impl_->now(), {}});
}

void RecorderSession::set_parameter(ActivityHandle handle, const std::string& name,
                                    const std::string& value, ValueType value_type) {
    auto& act = impl_->live(handle);
    impl_->write(ParameterEvent{act.id, name, value, value_type, {}});
}

void RecorderSession::declare_entity(const std::string& entity_id,
                                     const std::optional<std::string>& name,
                                     const std::optional<std::string>& location) {
    impl_->write(EntityEvent{impl_->qualify(entity_id), name, location, {}});
}

void RecorderSession::declare_agent(const std::string& agent_id, const std::string& name,
                                    AgentKind kind, const std::optional<std::string>& email) {
    impl_->write(AgentEvent{impl_->qualify(agent_id), name, kind, email, {}});
}

void RecorderSession::associate(ActivityHandle handle, const std::string& agent_id,
                                const std::optional<std::string>& role) {
    auto& act = impl_->live(handle);
    impl_->write(AssociationEvent{act.id, impl_->qualify(agent_id), role, {}});
}

void RecorderSession::attribute(const std::string& entity_id, const std::string& agent_id,
                                const std::optional<std::string>& role) {
    impl_->write(
        AttributionEvent{impl_->qualify(entity_id), impl_->qualify(agent_id), role, {}});
}

void RecorderSession::end_activity(ActivityHandle handle) {
    auto& act = impl_->live(handle);
    impl_->write(ActivityEndEvent{act.id, impl_->now(), {}});
    act.open = false;
}

const std::string& RecorderSession::activity_id(ActivityHandle handle) const {
    if (handle >= impl_->acts.size()) fail(Errc::bad_value, "unknown activity handle");
    return impl_->acts[handle].rendered;
}

} // namespace provkit
