#include <algorithm>
#include <functional>

#include "errors.hpp"
#include "model.hpp"
#include "util.hpp"

namespace provkit {

namespace {

struct Collector {
    ValidationReport findings;
    std::set<std::string> dangling; // de-duplicated per id

    void error(const char* code, const std::string& subject, const std::string& detail = {}) {
        findings.push_back({Severity::error, code, subject, detail});
    }
    void warn_dangling(const std::string& id) { dangling.insert(id); }
};

// Tarjan strongly connected components over the bipartite derivation graph
// (entity -> generating activity, activity -> used entity). Every SCC of
// two or more nodes is a cycle; the finding subject is the smallest id in
// the component.
void find_cycles(const ProvenanceDocument& doc, Collector& out) {
    std::map<std::string, std::vector<std::string>> arcs;
    auto touch = [&arcs](const std::string& id) { arcs.try_emplace(id); };
    for (const auto& rel : doc.generated) {
        const std::string from = rel.entity.str(), to = rel.activity.str();
        touch(to);
        arcs[from].push_back(to);
    }
    for (const auto& rel : doc.used) {
        const std::string from = rel.activity.str(), to = rel.entity.str();
        touch(to);
        arcs[from].push_back(to);
    }

    struct NodeState {
        int index = -1;
        int lowlink = 0;
        bool on_stack = false;
    };
    std::map<std::string, NodeState> state;
    std::vector<std::string> scc_stack;
    int next_index = 0;

    // Explicit call stack: big stores would blow the machine stack with a
    // recursive formulation.
    struct Frame {
        const std::string* node;
        std::size_t next_child = 0;
    };
    std::vector<Frame> call_stack;

    auto close_component = [&](const std::string& v) {
        std::vector<std::string> component;
        for (;;) {
            const std::string w = scc_stack.back();
            scc_stack.pop_back();
            state.at(w).on_stack = false;
            component.push_back(w);
            if (w == v) break;
        }
        const auto& self = arcs.at(v);
        const bool self_arc =
            component.size() == 1 && std::find(self.begin(), self.end(), v) != self.end();
        if (component.size() >= 2 || self_arc)
            out.error("CYCLE", *std::min_element(component.begin(), component.end()),
                      "derivation cycle through " + std::to_string(component.size()) + " records");
    };

    for (const auto& [root, _] : arcs) {
        if (state[root].index >= 0) continue;
        call_stack.push_back({&root});
        while (!call_stack.empty()) {
            Frame& frame = call_stack.back();
            const std::string& v = *frame.node;
            NodeState& sv = state.at(v);
            if (frame.next_child == 0) {
                sv.index = sv.lowlink = next_index++;
                sv.on_stack = true;
                scc_stack.push_back(v);
            }
            const auto& children = arcs.at(v);
            bool descended = false;
            while (frame.next_child < children.size()) {
                const std::string& w = children[frame.next_child++];
                NodeState& sw = state[w];
                if (sw.index < 0) {
                    // find the stable key owned by the arcs map
                    call_stack.push_back({&arcs.find(w)->first});
                    descended = true;
                    break;
                }
                if (sw.on_stack) sv.lowlink = std::min(sv.lowlink, sw.index);
            }
            if (descended) continue;
            if (sv.lowlink == sv.index) close_component(v);
            call_stack.pop_back();
            if (!call_stack.empty()) {
                NodeState& parent = state.at(*call_stack.back().node);
                parent.lowlink = std::min(parent.lowlink, sv.lowlink);
            }
        }
    }
}

} // namespace

bool report_ok(const ValidationReport& report) {
    return std::none_of(report.begin(), report.end(),
                        [](const Finding& f) { return f.severity == Severity::error; });
}

ValidationReport validate_document(const ProvenanceDocument& doc) {
    Collector out;

    if (!doc.namespaces.contains("prov"))
        out.error("MISSING_NAMESPACE", "prov", "the prov prefix must be declared");
    if (!doc.default_prefix.empty() && !doc.namespaces.contains(doc.default_prefix))
        out.error("MISSING_NAMESPACE", doc.default_prefix, "default prefix must be declared");

    auto is_stub = [&doc](const std::string& id) { return doc.incomplete_ids.contains(id); };

    auto check_id = [&](const QualifiedId& id) {
        const std::string key = id.str();
        if (id.prefix.empty() || id.local.empty() || id.prefix.find(':') != std::string::npos)
            out.error("BAD_ID", key);
        else if (!doc.namespaces.contains(id.prefix))
            out.error("UNKNOWN_PREFIX", key, "prefix '" + id.prefix + "' is not declared");
    };

    // One id space across classes.
    {
        std::map<std::string, int> ids;
        for (const auto& [id, _] : doc.entities) ids[id]++;
        for (const auto& [id, _] : doc.activities) ids[id]++;
        for (const auto& [id, _] : doc.agents) ids[id]++;
        for (const auto& [id, _] : doc.descriptions) ids[id]++;
        for (const auto& [id, n] : ids)
            if (n > 1) out.error("DUPLICATE_ID", id, "id used by more than one record class");
    }

    for (const auto& [id, entity] : doc.entities) {
        check_id(entity.id);
        if (entity.generated_at && !is_iso8601_utc(*entity.generated_at))
            out.error("BAD_TIMESTAMP", id, "generated_at '" + *entity.generated_at + "'");
    }
    for (const auto& [id, activity] : doc.activities) {
        check_id(activity.id);
        if (activity.start_time && !is_iso8601_utc(*activity.start_time))
            out.error("BAD_TIMESTAMP", id, "start_time '" + *activity.start_time + "'");
        if (activity.end_time && !is_iso8601_utc(*activity.end_time))
            out.error("BAD_TIMESTAMP", id, "end_time '" + *activity.end_time + "'");
        if (activity.start_time && activity.end_time && is_iso8601_utc(*activity.start_time) &&
            is_iso8601_utc(*activity.end_time) && *activity.start_time > *activity.end_time)
            out.error("BAD_INTERVAL", id, "start_time after end_time");
    }
    for (const auto& [id, agent] : doc.agents) {
        check_id(agent.id);
        if (agent.name.empty() && !is_stub(id)) out.error("EMPTY_NAME", id);
    }
    for (const auto& [id, desc] : doc.descriptions) {
        check_id(desc.id);
        if (desc.name.empty() && !is_stub(id)) out.error("EMPTY_NAME", id);
    }

    // References. A reference to an id declared in a different class is an
    // error; a reference to a stub or to nothing at all is the DANGLING_REF
    // warning that last-step reconstruction legitimately produces.
    auto check_ref = [&](const QualifiedId& target, RecordClass cls) {
        check_id(target);
        const std::string key = target.str();
        const bool in_class = (cls == RecordClass::entity && doc.entities.contains(key)) ||
                              (cls == RecordClass::activity && doc.activities.contains(key)) ||
                              (cls == RecordClass::agent && doc.agents.contains(key)) ||
                              (cls == RecordClass::description && doc.descriptions.contains(key));
        if (!in_class) {
            if (doc.has_record(key) && !is_stub(key))
                out.error("WRONG_CLASS_REF", key,
                          std::string("referenced as ") + record_class_name(cls));
            else
                out.warn_dangling(key);
        } else if (is_stub(key)) {
            out.warn_dangling(key);
        }
    };

    for (const auto& [id, activity] : doc.activities)
        if (activity.description_ref) check_ref(*activity.description_ref, RecordClass::description);

    {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& param : doc.parameters) {
            check_ref(param.activity, RecordClass::activity);
            if (!seen.emplace(param.activity.str(), param.name).second)
                out.error("DUPLICATE_PARAMETER", param.activity.str() + "/" + param.name);
            if (!value_parses_as(param.value, param.value_type))
                out.error("BAD_PARAMETER_VALUE", param.activity.str() + "/" + param.name,
                          "'" + param.value + "' is not a " + value_type_name(param.value_type));
        }
    }

    auto check_dup = [&out](auto& seen, auto key, const std::string& subject) {
        if (!seen.insert(std::move(key)).second) out.error("DUPLICATE_RELATION", subject);
    };
    {
        std::set<std::tuple<std::string, std::string, std::string>> seen;
        for (const auto& rel : doc.used) {
            check_ref(rel.activity, RecordClass::activity);
            check_ref(rel.entity, RecordClass::entity);
            if (rel.time && !is_iso8601_utc(*rel.time))
                out.error("BAD_TIMESTAMP", rel.activity.str(), "used time '" + *rel.time + "'");
            check_dup(seen, std::tuple{rel.activity.str(), rel.entity.str(), rel.role.value_or("")},
                      "used(" + rel.activity.str() + ", " + rel.entity.str() + ")");
        }
    }
    {
        std::set<std::tuple<std::string, std::string, std::string>> seen;
        std::map<std::string, int> generators;
        for (const auto& rel : doc.generated) {
            check_ref(rel.entity, RecordClass::entity);
            check_ref(rel.activity, RecordClass::activity);
            if (rel.time && !is_iso8601_utc(*rel.time))
                out.error("BAD_TIMESTAMP", rel.entity.str(), "generation time '" + *rel.time + "'");
            check_dup(seen, std::tuple{rel.entity.str(), rel.activity.str(), rel.role.value_or("")},
                      "wasGeneratedBy(" + rel.entity.str() + ", " + rel.activity.str() + ")");
            generators[rel.entity.str()]++;
        }
        for (const auto& [entity, n] : generators)
            if (n > 1)
                out.error("MULTI_GENERATION", entity,
                          "entity generated by " + std::to_string(n) + " activities");
    }
    {
        std::set<std::tuple<std::string, std::string, std::string>> seen;
        for (const auto& rel : doc.associations) {
            check_ref(rel.activity, RecordClass::activity);
            check_ref(rel.agent, RecordClass::agent);
            check_dup(seen, std::tuple{rel.activity.str(), rel.agent.str(), rel.role.value_or("")},
                      "wasAssociatedWith(" + rel.activity.str() + ", " + rel.agent.str() + ")");
        }
    }
    {
        std::set<std::tuple<std::string, std::string, std::string>> seen;
        for (const auto& rel : doc.attributions) {
            check_ref(rel.entity, RecordClass::entity);
            check_ref(rel.agent, RecordClass::agent);
            check_dup(seen, std::tuple{rel.entity.str(), rel.agent.str(), rel.role.value_or("")},
                      "wasAttributedTo(" + rel.entity.str() + ", " + rel.agent.str() + ")");
        }
    }

    // Stubs that no relation happens to reference still surface as dangling.
    for (const auto& id : doc.incomplete_ids) out.warn_dangling(id);

    find_cycles(doc, out);

    ValidationReport report = std::move(out.findings);
    for (const auto& id : out.dangling)
        report.push_back({Severity::warning, "DANGLING_REF", id, "referenced but not declared"});
    std::sort(report.begin(), report.end(), [](const Finding& a, const Finding& b) {
        return std::tie(a.severity, a.code, a.subject, a.detail) <
               std::tie(b.severity, b.code, b.subject, b.detail);
    });
    report.erase(std::unique(report.begin(), report.end()), report.end());
    return report;
}

} // namespace provkit
