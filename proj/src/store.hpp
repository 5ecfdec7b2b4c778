#ifndef PROVKIT_STORE_HPP
#define PROVKIT_STORE_HPP

#include <shared_mutex>
#include <variant>

#include "model.hpp"

namespace provkit {

// Traversal depth: a number of activity hops, or unbounded.
struct Depth {
    bool unbounded = false;
    int hops = 0;

    static Depth all() { return {true, 0}; }
    static Depth steps(int n) { return {false, n}; }
    bool operator==(const Depth&) const = default;
};

enum class Direction { backward, forward };

const char* direction_name(Direction d); // "BACKWARD" / "FORWARD"

struct IngestStats {
    std::size_t inserted = 0;
    std::size_t updated = 0;
    std::size_t unchanged = 0;

    bool operator==(const IngestStats&) const = default;
};

using AnyRecord = std::variant<Entity, Activity, Agent, ActivityDescription>;

// Durable single-writer/multi-reader store over a directory of flat
// relational tables (one JSON-lines file per record or relation class).
// Writers persist a full consistent snapshot via rename, so readers —
// in-process or in other processes — never see a partial ingest.
class Store {
public:
    explicit Store(const std::string& root); // creates the directory if missing
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // Validates (errors are fatal), merges with the stored graph, persists,
    // and publishes the new snapshot. Conflicts leave the store untouched.
    IngestStats ingest(const ProvenanceDocument& doc);

    // Record of any class by id. Throws NotFound.
    AnyRecord get_record(const std::string& id) const;
    bool has_record(const std::string& id) const;

    // Subgraph reachable from `start` (an entity or activity id) in the
    // given direction. One depth step crosses one activity hop; every
    // included record drags in its agents, parameters, and description.
    // depth 0 returns just the start record.
    ProvenanceDocument traverse(const std::string& start, Depth depth, Direction direction) const;

    // Drops the in-memory state and reloads it from disk.
    // Throws CorruptStore when the persisted tables cannot be read back.
    void rebuild_indexes();

    // Full snapshot of everything stored.
    ProvenanceDocument snapshot() const;

    const std::string& root() const { return root_; }

private:
    struct Indexes {
        std::map<std::string, std::vector<std::string>> generator_of_entity;
        std::map<std::string, std::vector<std::string>> used_by_activity;
        std::map<std::string, std::vector<std::string>> users_of_entity;
        std::map<std::string, std::vector<std::string>> generated_by_activity;
        std::map<std::string, std::vector<std::string>> agents_of_activity;
        std::map<std::string, std::vector<std::string>> agents_of_entity;
        std::map<std::string, std::vector<std::size_t>> params_of_activity;
    };

    void load_locked();
    void save_locked() const;
    void index_locked();

    std::string root_;
    int lock_fd_ = -1;
    ProvenanceDocument data_;
    Indexes idx_;
    mutable std::shared_mutex mutex_;
};

} // namespace provkit

#endif
