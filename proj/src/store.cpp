#include "store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>

#include <json.hpp>

#include "errors.hpp"

namespace provkit {

using nlohmann::json;
namespace fs = std::filesystem;

const char* direction_name(Direction d) {
    return d == Direction::backward ? "BACKWARD" : "FORWARD";
}

namespace {

struct FlockGuard {
    int fd;
    explicit FlockGuard(int fd_) : fd(fd_) {
        if (fd >= 0 && ::flock(fd, LOCK_EX) != 0)
            fail(Errc::io_error, "cannot lock store for writing");
    }
    ~FlockGuard() {
        if (fd >= 0) ::flock(fd, LOCK_UN);
    }
};

[[noreturn]] void corrupt(const std::string& path, const std::string& detail) {
    fail(Errc::corrupt_store, path + ": " + detail);
}

QualifiedId unrender(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) corrupt(path, std::string("row lacks '") + key + "'");
    const std::string s = it->get<std::string>();
    const auto colon = s.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        corrupt(path, "malformed id '" + s + "'");
    return {s.substr(0, colon), s.substr(colon + 1)};
}

std::string req_string(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) corrupt(path, std::string("row lacks '") + key + "'");
    return it->get<std::string>();
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

void put(json& j, const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = *v;
}

json row_of(const Entity& e) {
    json j;
    j["id"] = e.id.str();
    put(j, "name", e.name);
    put(j, "location", e.location);
    put(j, "generated_at", e.generated_at);
    put(j, "comment", e.comment);
    if (!e.attributes.empty()) j["attributes"] = e.attributes;
    return j;
}

json row_of(const Activity& a) {
    json j;
    j["id"] = a.id.str();
    put(j, "name", a.name);
    put(j, "start_time", a.start_time);
    put(j, "end_time", a.end_time);
    if (a.description_ref) j["description_ref"] = a.description_ref->str();
    put(j, "comment", a.comment);
    if (!a.attributes.empty()) j["attributes"] = a.attributes;
    return j;
}

json row_of(const Agent& a) {
    json j;
    j["id"] = a.id.str();
    j["name"] = a.name;
    j["kind"] = agent_kind_name(a.kind);
    put(j, "email", a.email);
    return j;
}

json row_of(const ActivityDescription& d) {
    json j;
    j["id"] = d.id.str();
    j["name"] = d.name;
    put(j, "version", d.version);
    put(j, "doc", d.doc);
    put(j, "docurl", d.docurl);
    if (d.code_reference) {
        j["code_url"] = d.code_reference->url;
        put(j, "code_revision", d.code_reference->revision);
    }
    return j;
}

AttributeMap attrs_of(const json& j, const std::string& path) {
    AttributeMap out;
    auto it = j.find("attributes");
    if (it == j.end()) return out;
    if (!it->is_object()) corrupt(path, "attributes must be an object");
    for (auto a = it->begin(); a != it->end(); ++a) {
        if (!a.value().is_string()) corrupt(path, "attribute values must be strings");
        out[a.key()] = a.value().get<std::string>();
    }
    return out;
}

} // namespace

Store::Store(const std::string& root) : root_(root) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) fail(Errc::io_error, "cannot create store directory '" + root_ + "'");
    lock_fd_ = ::open((root_ + "/.lock").c_str(), O_CREAT | O_RDWR, 0644);
    if (lock_fd_ < 0) fail(Errc::io_error, "cannot open store lock file in '" + root_ + "'");
    std::unique_lock lock(mutex_);
    if (!fs::exists(root_ + "/namespaces.json")) {
        for (const char* table :
             {"entities.jsonl", "activities.jsonl", "agents.jsonl", "descriptions.jsonl",
              "parameters.jsonl", "used.jsonl", "generated.jsonl", "associations.jsonl",
              "attributions.jsonl", "incomplete.jsonl"})
            if (fs::exists(root_ + "/" + table))
                corrupt(root_ + "/namespaces.json", "missing, but table files exist");
        FlockGuard flock(lock_fd_);
        data_ = make_document(kDefaultPrefix);
        save_locked();
    } else {
        load_locked();
    }
    index_locked();
}

Store::~Store() {
    if (lock_fd_ >= 0) ::close(lock_fd_);
}

void Store::save_locked() const {
    auto write_file = [this](const std::string& name, const std::string& content) {
        const std::string tmp = root_ + "/.tmp." + name;
        const std::string final_path = root_ + "/" + name;
        {
            std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
            out << content;
            if (!out) fail(Errc::io_error, "cannot write '" + tmp + "'");
        }
        int fd = ::open(tmp.c_str(), O_RDONLY);
        if (fd >= 0) {
            ::fsync(fd);
            ::close(fd);
        }
        if (::rename(tmp.c_str(), final_path.c_str()) != 0)
            fail(Errc::io_error, "cannot publish '" + final_path + "'");
    };

    json ns;
    ns["default_prefix"] = data_.default_prefix;
    ns["prefixes"] = data_.namespaces;
    write_file("namespaces.json", ns.dump() + "\n");

    std::string content;
    auto emit_rows = [&](const std::string& name, const std::vector<json>& rows) {
        content.clear();
        for (const auto& row : rows) content += row.dump() + "\n";
        write_file(name, content);
    };

    std::vector<json> rows;
    auto flush_map = [&](const std::string& name, const auto& map) {
        rows.clear();
        for (const auto& [id, rec] : map) rows.push_back(row_of(rec));
        emit_rows(name, rows);
    };
    flush_map("entities.jsonl", data_.entities);
    flush_map("activities.jsonl", data_.activities);
    flush_map("agents.jsonl", data_.agents);
    flush_map("descriptions.jsonl", data_.descriptions);

    rows.clear();
    for (const auto& p : data_.parameters) {
        json j;
        j["activity"] = p.activity.str();
        j["name"] = p.name;
        j["value"] = p.value;
        j["value_type"] = value_type_name(p.value_type);
        rows.push_back(j);
    }
    emit_rows("parameters.jsonl", rows);

    rows.clear();
    for (const auto& r : data_.used) {
        json j;
        j["activity"] = r.activity.str();
        j["entity"] = r.entity.str();
        put(j, "role", r.role);
        put(j, "time", r.time);
        rows.push_back(j);
    }
    emit_rows("used.jsonl", rows);

    rows.clear();
    for (const auto& r : data_.generated) {
        json j;
        j["entity"] = r.entity.str();
        j["activity"] = r.activity.str();
        put(j, "role", r.role);
        put(j, "time", r.time);
        rows.push_back(j);
    }
    emit_rows("generated.jsonl", rows);

    rows.clear();
    for (const auto& r : data_.associations) {
        json j;
        j["activity"] = r.activity.str();
        j["agent"] = r.agent.str();
        put(j, "role", r.role);
        rows.push_back(j);
    }
    emit_rows("associations.jsonl", rows);

    rows.clear();
    for (const auto& r : data_.attributions) {
        json j;
        j["entity"] = r.entity.str();
        j["agent"] = r.agent.str();
        put(j, "role", r.role);
        rows.push_back(j);
    }
    emit_rows("attributions.jsonl", rows);

    rows.clear();
    for (const auto& id : data_.incomplete_ids) {
        json j;
        j["id"] = id;
        rows.push_back(j);
    }
    emit_rows("incomplete.jsonl", rows);

    int dir_fd = ::open(root_.c_str(), O_RDONLY | O_DIRECTORY);
    if (dir_fd >= 0) {
        ::fsync(dir_fd);
        ::close(dir_fd);
    }
}

void Store::load_locked() {
    auto each_row = [this](const std::string& name, auto&& fn) {
        const std::string path = root_ + "/" + name;
        std::ifstream in(path);
        if (!in) return; // absent table == empty table
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                corrupt(path, "line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!j.is_object()) corrupt(path, "line " + std::to_string(line_no) + ": not an object");
            try {
                fn(j, path);
            } catch (const Error& e) {
                if (e.code() == Errc::corrupt_store) throw;
                corrupt(path, "line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    };

    ProvenanceDocument doc;
    doc.namespaces.clear();

    const std::string ns_path = root_ + "/namespaces.json";
    {
        std::ifstream in(ns_path);
        if (!in) corrupt(ns_path, "missing");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            corrupt(ns_path, e.what());
        }
        doc.default_prefix = req_string(j, "default_prefix", ns_path);
        auto prefixes = j.find("prefixes");
        if (prefixes == j.end() || !prefixes->is_object()) corrupt(ns_path, "missing prefixes");
        for (auto it = prefixes->begin(); it != prefixes->end(); ++it)
            doc.namespaces[it.key()] = it.value().get<std::string>();
    }

    each_row("entities.jsonl", [&doc](const json& j, const std::string& path) {
        Entity e;
        e.id = unrender(j, "id", path);
        e.name = opt_string(j, "name");
        e.location = opt_string(j, "location");
        e.generated_at = opt_string(j, "generated_at");
        e.comment = opt_string(j, "comment");
        e.attributes = attrs_of(j, path);
        if (!doc.entities.emplace(e.id.str(), std::move(e)).second)
            corrupt(path, "duplicate id");
    });
    each_row("activities.jsonl", [&doc](const json& j, const std::string& path) {
        Activity a;
        a.id = unrender(j, "id", path);
        a.name = opt_string(j, "name");
        a.start_time = opt_string(j, "start_time");
        a.end_time = opt_string(j, "end_time");
        if (j.contains("description_ref")) a.description_ref = unrender(j, "description_ref", path);
        a.comment = opt_string(j, "comment");
        a.attributes = attrs_of(j, path);
        if (!doc.activities.emplace(a.id.str(), std::move(a)).second)
            corrupt(path, "duplicate id");
    });
    each_row("agents.jsonl", [&doc](const json& j, const std::string& path) {
        Agent a;
        a.id = unrender(j, "id", path);
        a.name = req_string(j, "name", path);
        auto kind = parse_agent_kind(req_string(j, "kind", path));
        if (!kind) corrupt(path, "unknown agent kind");
        a.kind = *kind;
        a.email = opt_string(j, "email");
        if (!doc.agents.emplace(a.id.str(), std::move(a)).second) corrupt(path, "duplicate id");
    });
    each_row("descriptions.jsonl", [&doc](const json& j, const std::string& path) {
        ActivityDescription d;
        d.id = unrender(j, "id", path);
        d.name = req_string(j, "name", path);
        d.version = opt_string(j, "version");
        d.doc = opt_string(j, "doc");
        d.docurl = opt_string(j, "docurl");
        if (j.contains("code_url")) {
            CodeReference ref;
            ref.url = req_string(j, "code_url", path);
            ref.revision = opt_string(j, "code_revision");
            d.code_reference = std::move(ref);
        }
        if (!doc.descriptions.emplace(d.id.str(), std::move(d)).second)
            corrupt(path, "duplicate id");
    });
    each_row("parameters.jsonl", [&doc](const json& j, const std::string& path) {
        Parameter p;
        p.activity = unrender(j, "activity", path);
        p.name = req_string(j, "name", path);
        p.value = req_string(j, "value", path);
        auto type = parse_value_type(req_string(j, "value_type", path));
        if (!type) corrupt(path, "unknown value type");
        p.value_type = *type;
        add_parameter(doc, std::move(p));
    });
    each_row("used.jsonl", [&doc](const json& j, const std::string& path) {
        add_used(doc, {unrender(j, "activity", path), unrender(j, "entity", path),
                       opt_string(j, "role"), opt_string(j, "time")});
    });
    each_row("generated.jsonl", [&doc](const json& j, const std::string& path) {
        add_generated(doc, {unrender(j, "entity", path), unrender(j, "activity", path),
                            opt_string(j, "role"), opt_string(j, "time")});
    });
    each_row("associations.jsonl", [&doc](const json& j, const std::string& path) {
        add_association(doc, {unrender(j, "activity", path), unrender(j, "agent", path),
                              opt_string(j, "role")});
    });
    each_row("attributions.jsonl", [&doc](const json& j, const std::string& path) {
        add_attribution(doc, {unrender(j, "entity", path), unrender(j, "agent", path),
                              opt_string(j, "role")});
    });
    each_row("incomplete.jsonl", [&doc](const json& j, const std::string& path) {
        doc.incomplete_ids.insert(req_string(j, "id", path));
    });

    data_ = std::move(doc);
}

void Store::index_locked() {
    Indexes idx;
    for (const auto& r : data_.used) {
        idx.used_by_activity[r.activity.str()].push_back(r.entity.str());
        idx.users_of_entity[r.entity.str()].push_back(r.activity.str());
    }
    for (const auto& r : data_.generated) {
        idx.generator_of_entity[r.entity.str()].push_back(r.activity.str());
        idx.generated_by_activity[r.activity.str()].push_back(r.entity.str());
    }
    for (const auto& r : data_.associations)
        idx.agents_of_activity[r.activity.str()].push_back(r.agent.str());
    for (const auto& r : data_.attributions)
        idx.agents_of_entity[r.entity.str()].push_back(r.agent.str());
    for (std::size_t i = 0; i < data_.parameters.size(); ++i)
        idx.params_of_activity[data_.parameters[i].activity.str()].push_back(i);
    // relation containers are sorted, so every index list is sorted too, but
    // the same endpoint can repeat across roles
    for (auto* m :
         {&idx.generator_of_entity, &idx.used_by_activity, &idx.users_of_entity,
          &idx.generated_by_activity, &idx.agents_of_activity, &idx.agents_of_entity})
        for (auto& [id, list] : *m)
            list.erase(std::unique(list.begin(), list.end()), list.end());
    idx_ = std::move(idx);
}

IngestStats Store::ingest(const ProvenanceDocument& doc) {
    auto report = validate_document(doc);
    for (const auto& finding : report)
        if (finding.severity == Severity::error)
            fail(Errc::invalid_document,
                 finding.code + " on " + finding.subject +
                     (finding.detail.empty() ? "" : ": " + finding.detail));

    std::unique_lock lock(mutex_);
    FlockGuard flock(lock_fd_);

    ProvenanceDocument merged = data_;
    IngestStats stats;
    auto count = [&stats](UpsertOutcome outcome) {
        switch (outcome) {
        case UpsertOutcome::inserted: ++stats.inserted; break;
        case UpsertOutcome::updated: ++stats.updated; break;
        case UpsertOutcome::unchanged: ++stats.unchanged; break;
        }
    };

    for (const auto& [prefix, uri] : doc.namespaces) {
        auto [it, fresh] = merged.namespaces.emplace(prefix, uri);
        if (!fresh && it->second != uri)
            fail(Errc::conflicting_namespace,
                 "prefix '" + prefix + "' is bound to '" + it->second + "'");
    }
    if (merged.entities.empty() && merged.activities.empty() && merged.agents.empty() &&
        merged.descriptions.empty())
        merged.default_prefix = doc.default_prefix;

    auto take = [&](const auto& map, RecordClass cls) {
        for (const auto& [id, rec] : map) {
            if (doc.incomplete_ids.contains(id))
                count(add_stub(merged, rec.id, cls));
            else
                count(upsert(merged, rec));
        }
    };
    take(doc.entities, RecordClass::entity);
    take(doc.activities, RecordClass::activity);
    take(doc.agents, RecordClass::agent);
    take(doc.descriptions, RecordClass::description);
    for (const auto& p : doc.parameters) count(add_parameter(merged, p));
    for (const auto& r : doc.used) count(add_used(merged, r));
    for (const auto& r : doc.generated) count(add_generated(merged, r));
    for (const auto& r : doc.associations) count(add_association(merged, r));
    for (const auto& r : doc.attributions) count(add_attribution(merged, r));

    std::swap(data_, merged);
    try {
        save_locked();
    } catch (...) {
        std::swap(data_, merged); // restore the published snapshot
        throw;
    }
    index_locked();
    return stats;
}

bool Store::has_record(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return data_.has_record(id);
}

AnyRecord Store::get_record(const std::string& id) const {
    std::shared_lock lock(mutex_);
    if (auto it = data_.entities.find(id); it != data_.entities.end()) return it->second;
    if (auto it = data_.activities.find(id); it != data_.activities.end()) return it->second;
    if (auto it = data_.agents.find(id); it != data_.agents.end()) return it->second;
    if (auto it = data_.descriptions.find(id); it != data_.descriptions.end()) return it->second;
    fail(Errc::not_found, "no record with id '" + id + "'");
}

ProvenanceDocument Store::snapshot() const {
    std::shared_lock lock(mutex_);
    return data_;
}

void Store::rebuild_indexes() {
    std::unique_lock lock(mutex_);
    load_locked();
    index_locked();
}

ProvenanceDocument Store::traverse(const std::string& start, Depth depth,
                                   Direction direction) const {
    std::shared_lock lock(mutex_);

    const bool start_is_entity = data_.entities.contains(start);
    const bool start_is_activity = data_.activities.contains(start);
    if (!start_is_entity && !start_is_activity)
        fail(Errc::not_found, "no entity or activity with id '" + start + "'");

    ProvenanceDocument out;
    out.default_prefix = data_.default_prefix;
    out.namespaces = data_.namespaces;

    std::set<std::string> included;
    auto include = [&](const std::string& id, RecordClass cls) {
        if (!included.insert(id).second) return;
        const bool stub = data_.incomplete_ids.contains(id);
        switch (cls) {
        case RecordClass::entity:
            if (auto it = data_.entities.find(id); it != data_.entities.end() && !stub)
                upsert(out, it->second);
            else
                add_stub(out, data_.entities.count(id) ? data_.entities.at(id).id
                                                       : QualifiedId{id.substr(0, id.find(':')),
                                                                     id.substr(id.find(':') + 1)},
                         RecordClass::entity);
            break;
        case RecordClass::activity:
            if (auto it = data_.activities.find(id); it != data_.activities.end() && !stub)
                upsert(out, it->second);
            else
                add_stub(out,
                         data_.activities.count(id)
                             ? data_.activities.at(id).id
                             : QualifiedId{id.substr(0, id.find(':')), id.substr(id.find(':') + 1)},
                         RecordClass::activity);
            break;
        case RecordClass::agent:
            if (auto it = data_.agents.find(id); it != data_.agents.end() && !stub)
                upsert(out, it->second);
            else
                add_stub(out, QualifiedId{id.substr(0, id.find(':')), id.substr(id.find(':') + 1)},
                         RecordClass::agent);
            break;
        case RecordClass::description:
            if (auto it = data_.descriptions.find(id); it != data_.descriptions.end() && !stub)
                upsert(out, it->second);
            else
                add_stub(out, QualifiedId{id.substr(0, id.find(':')), id.substr(id.find(':') + 1)},
                         RecordClass::description);
            break;
        }
    };

    auto neighbors = [](const std::map<std::string, std::vector<std::string>>& index,
                        const std::string& id) -> const std::vector<std::string>* {
        auto it = index.find(id);
        return it == index.end() ? nullptr : &it->second;
    };

    auto attach_entity = [&](const std::string& id) {
        if (const auto* agents = neighbors(idx_.agents_of_entity, id))
            for (const auto& agent : *agents) include(agent, RecordClass::agent);
    };
    auto attach_activity = [&](const std::string& id) {
        if (const auto* agents = neighbors(idx_.agents_of_activity, id))
            for (const auto& agent : *agents) include(agent, RecordClass::agent);
        if (auto it = idx_.params_of_activity.find(id); it != idx_.params_of_activity.end())
            for (std::size_t i : it->second) add_parameter(out, data_.parameters[i]);
        if (auto it = data_.activities.find(id); it != data_.activities.end())
            if (it->second.description_ref)
                include(it->second.description_ref->str(), RecordClass::description);
    };
    auto include_entity = [&](const std::string& id) {
        include(id, RecordClass::entity);
        attach_entity(id);
    };
    auto include_activity = [&](const std::string& id) {
        include(id, RecordClass::activity);
        attach_activity(id);
    };

    if (!depth.unbounded && depth.hops == 0) {
        include(start, start_is_entity ? RecordClass::entity : RecordClass::activity);
        return out;
    }

    long remaining = depth.unbounded ? -1 : depth.hops;
    std::vector<std::string> frontier;
    std::set<std::string> expanded;

    if (start_is_activity) {
        include_activity(start);
        const auto& side =
            direction == Direction::backward ? idx_.used_by_activity : idx_.generated_by_activity;
        if (const auto* ents = neighbors(side, start))
            for (const auto& e : *ents) {
                include_entity(e);
                frontier.push_back(e);
            }
        if (remaining > 0) --remaining;
    } else {
        include_entity(start);
        frontier.push_back(start);
    }

    while (remaining != 0 && !frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& e : frontier) {
            if (!expanded.insert(e).second) continue;
            if (direction == Direction::backward) {
                if (const auto* gens = neighbors(idx_.generator_of_entity, e))
                    for (const auto& a : *gens) {
                        include_activity(a);
                        if (const auto* used = neighbors(idx_.used_by_activity, a))
                            for (const auto& u : *used) {
                                include_entity(u);
                                next.push_back(u);
                            }
                        if (const auto* gen = neighbors(idx_.generated_by_activity, a))
                            for (const auto& g : *gen) include_entity(g);
                    }
            } else {
                if (const auto* users = neighbors(idx_.users_of_entity, e))
                    for (const auto& a : *users) {
                        include_activity(a);
                        if (const auto* gen = neighbors(idx_.generated_by_activity, a))
                            for (const auto& g : *gen) {
                                include_entity(g);
                                next.push_back(g);
                            }
                    }
            }
        }
        frontier = std::move(next);
        if (remaining > 0) --remaining;
    }

    // induced relations: every stored relation whose endpoints are all here
    for (const auto& r : data_.used)
        if (included.contains(r.activity.str()) && included.contains(r.entity.str()))
            add_used(out, r);
    for (const auto& r : data_.generated)
        if (included.contains(r.entity.str()) && included.contains(r.activity.str()))
            add_generated(out, r);
    for (const auto& r : data_.associations)
        if (included.contains(r.activity.str()) && included.contains(r.agent.str()))
            add_association(out, r);
    for (const auto& r : data_.attributions)
        if (included.contains(r.entity.str()) && included.contains(r.agent.str()))
            add_attribution(out, r);

    return out;
}

} // namespace provkit
