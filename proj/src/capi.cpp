#include "provkit/provkit.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "capture.hpp"
#include "errors.hpp"
#include "fits_cards.hpp"
#include "laststep.hpp"
#include "model.hpp"
#include "provsap.hpp"
#include "serialize.hpp"
#include "store.hpp"
#include "util.hpp"

// C binding: every entry point funnels through guarded(), which turns
// exceptions into status codes and keeps the message in thread-local
// storage for provkit_last_error().

struct provkit_document {
    provkit::ProvenanceDocument doc;
};

struct provkit_store {
    provkit::Store impl;
    explicit provkit_store(const std::string& root) : impl(root) {}
};

struct provkit_server {
    provkit::ProvSapServer impl;
    provkit_server(const provkit::Store& store, provkit::ProvSapServer::Options options)
        : impl(store, std::move(options)) {}
};

namespace {

using namespace provkit;

thread_local std::string g_last_error;

int status_of(Errc code) {
    switch (code) {
    case Errc::empty_id: return PROVKIT_ERR_EMPTY_ID;
    case Errc::unknown_prefix: return PROVKIT_ERR_UNKNOWN_PREFIX;
    case Errc::malformed_json: return PROVKIT_ERR_MALFORMED_JSON;
    case Errc::unknown_event_kind: return PROVKIT_ERR_UNKNOWN_EVENT_KIND;
    case Errc::missing_field: return PROVKIT_ERR_MISSING_FIELD;
    case Errc::use_after_end: return PROVKIT_ERR_USE_AFTER_END;
    case Errc::conflicting_record: return PROVKIT_ERR_CONFLICTING_RECORD;
    case Errc::conflicting_namespace: return PROVKIT_ERR_CONFLICTING_NAMESPACE;
    case Errc::not_found: return PROVKIT_ERR_NOT_FOUND;
    case Errc::corrupt_store: return PROVKIT_ERR_CORRUPT_STORE;
    case Errc::unknown_section: return PROVKIT_ERR_UNKNOWN_SECTION;
    case Errc::bad_record: return PROVKIT_ERR_BAD_RECORD;
    case Errc::malformed_card: return PROVKIT_ERR_MALFORMED_CARD;
    case Errc::duplicate_keyword: return PROVKIT_ERR_DUPLICATE_KEYWORD;
    case Errc::no_provenance: return PROVKIT_ERR_NO_PROVENANCE;
    case Errc::too_many_indexed: return PROVKIT_ERR_TOO_MANY_INDEXED;
    case Errc::cyclic_graph: return PROVKIT_ERR_CYCLIC_GRAPH;
    case Errc::missing_id: return PROVKIT_ERR_MISSING_ID;
    case Errc::bad_value: return PROVKIT_ERR_BAD_VALUE;
    case Errc::unknown_param: return PROVKIT_ERR_UNKNOWN_PARAM;
    case Errc::bind_failure: return PROVKIT_ERR_BIND_FAILURE;
    case Errc::io_error: return PROVKIT_ERR_IO;
    case Errc::invalid_document: return PROVKIT_ERR_INVALID_DOCUMENT;
    }
    return PROVKIT_ERR_INTERNAL;
}

template <typename Fn> int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return PROVKIT_OK;
    } catch (const Error& e) {
        g_last_error = e.detail(); // the status code already names the error
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PROVKIT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return PROVKIT_ERR_INTERNAL;
    }
}

[[noreturn]] void require(const char* what) {
    fail(Errc::bad_value, std::string("null argument: ") + what);
}

const char* or_default(const char* value, const char* fallback) {
    return value && *value ? value : fallback;
}

char* copy_out(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

void put_string(char** slot, const std::string& text) {
    if (slot) *slot = copy_out(text);
}

NamespaceMap build_namespaces(const char* const* prefixes, const char* const* uris,
                              size_t count) {
    NamespaceMap table = standard_namespaces();
    if (count == 0) return table;
    if (!prefixes || !uris) require("namespace arrays");
    for (size_t i = 0; i < count; ++i) {
        if (!prefixes[i] || !uris[i]) require("namespace entry");
        table[prefixes[i]] = uris[i];
    }
    return table;
}

Depth depth_of(int depth) {
    if (depth == PROVKIT_DEPTH_ALL) return Depth::all();
    if (depth < 0) fail(Errc::bad_value, "depth must be non-negative or PROVKIT_DEPTH_ALL");
    return Depth::steps(depth);
}

Direction direction_of(const char* name) {
    const std::string value = or_default(name, "BACKWARD");
    if (iequals(value, "BACKWARD")) return Direction::backward;
    if (iequals(value, "FORWARD")) return Direction::forward;
    fail(Errc::bad_value, "direction: unsupported value '" + value + "'");
}

SerializationFormat format_of(const char* name) {
    const auto format = parse_format_name(or_default(name, "PROV-JSON"));
    if (!format) fail(Errc::bad_value, std::string("format: unsupported value '") + name + "'");
    return *format;
}

} // namespace

extern "C" {

const char* provkit_version(void) { return "0.1.0"; }

const char* provkit_last_error(void) { return g_last_error.c_str(); }

const char* provkit_status_name(int status) {
    if (status == PROVKIT_OK) return "Ok";
    if (status == PROVKIT_ERR_INTERNAL) return "Internal";
    for (int raw = 0; raw <= static_cast<int>(Errc::invalid_document); ++raw) {
        const Errc code = static_cast<Errc>(raw);
        if (status_of(code) == status) return errc_name(code);
    }
    return "Unknown";
}

void provkit_string_free(char* text) { std::free(text); }

int provkit_document_parse(const char* prov_json, const char* default_prefix,
                           const char* const* ns_prefixes, const char* const* ns_uris,
                           size_t ns_count, provkit_document** out) {
    return guarded([&] {
        if (!prov_json) require("prov_json");
        if (!out) require("out");
        const NamespaceMap table = build_namespaces(ns_prefixes, ns_uris, ns_count);
        auto doc = std::make_unique<provkit_document>();
        doc->doc = from_prov_json(prov_json, table, or_default(default_prefix, kDefaultPrefix));
        *out = doc.release();
    });
}

int provkit_document_serialize(const provkit_document* doc, const char* format, char** out) {
    return guarded([&] {
        if (!doc) require("doc");
        if (!out) require("out");
        *out = copy_out(serialize_document(doc->doc, format_of(format)));
    });
}

int provkit_document_project(const provkit_document* doc, const char* model, int agents,
                             int configuration, int descriptions, int attributes,
                             provkit_document** out) {
    return guarded([&] {
        if (!doc) require("doc");
        if (!out) require("out");
        ProjectionOptions options;
        const auto parsed = parse_model_name(or_default(model, "IVOA"));
        if (!parsed) fail(Errc::bad_value, std::string("model: unsupported value '") + model + "'");
        options.model = *parsed;
        options.agents = agents != 0;
        options.configuration = configuration != 0;
        if (descriptions < 0 || descriptions > 2)
            fail(Errc::bad_value, "descriptions must be 0, 1 or 2");
        options.descriptions = descriptions;
        options.attributes = attributes != 0;
        auto projected = std::make_unique<provkit_document>();
        projected->doc = apply_projection(doc->doc, options);
        *out = projected.release();
    });
}

int provkit_document_validate(const provkit_document* doc, char** report_out,
                              size_t* errors_out) {
    return guarded([&] {
        if (!doc) require("doc");
        const ValidationReport report = validate_document(doc->doc);
        std::string lines;
        size_t errors = 0;
        for (const Finding& finding : report) {
            if (finding.severity == Severity::error) ++errors;
            if (!lines.empty()) lines += '\n';
            lines += finding.severity == Severity::error ? "error " : "warning ";
            lines += finding.code + " " + finding.subject;
            if (!finding.detail.empty()) lines += ": " + finding.detail;
        }
        put_string(report_out, lines);
        if (errors_out) *errors_out = errors;
    });
}

size_t provkit_document_record_count(const provkit_document* doc) {
    return doc ? doc->doc.record_count() : 0;
}

void provkit_document_free(provkit_document* doc) { delete doc; }

int provkit_events_fold(const char* path, const char* default_prefix,
                        const char* const* ns_prefixes, const char* const* ns_uris,
                        size_t ns_count, provkit_document** doc_out, char** warnings_out) {
    return guarded([&] {
        if (!path) require("path");
        if (!doc_out) require("doc_out");
        const NamespaceMap table = build_namespaces(ns_prefixes, ns_uris, ns_count);
        FoldResult folded =
            fold_event_file(path, or_default(default_prefix, kDefaultPrefix), table);
        std::string lines;
        for (const FoldWarning& warning : folded.warnings) {
            if (!lines.empty()) lines += '\n';
            lines += warning.code + " " + warning.subject;
        }
        auto doc = std::make_unique<provkit_document>();
        doc->doc = std::move(folded.document);
        put_string(warnings_out, lines);
        *doc_out = doc.release();
    });
}

int provkit_store_open(const char* root, provkit_store** out) {
    return guarded([&] {
        if (!root) require("root");
        if (!out) require("out");
        *out = new provkit_store(root);
    });
}

void provkit_store_close(provkit_store* store) { delete store; }

int provkit_store_ingest(provkit_store* store, const provkit_document* doc, size_t* inserted,
                         size_t* updated, size_t* unchanged) {
    return guarded([&] {
        if (!store) require("store");
        if (!doc) require("doc");
        const IngestStats stats = store->impl.ingest(doc->doc);
        if (inserted) *inserted = stats.inserted;
        if (updated) *updated = stats.updated;
        if (unchanged) *unchanged = stats.unchanged;
    });
}

int provkit_store_traverse(const provkit_store* store, const char* id, int depth,
                           const char* direction, provkit_document** out) {
    return guarded([&] {
        if (!store) require("store");
        if (!id) require("id");
        if (!out) require("out");
        auto doc = std::make_unique<provkit_document>();
        doc->doc = store->impl.traverse(id, depth_of(depth), direction_of(direction));
        *out = doc.release();
    });
}

int provkit_store_snapshot(const provkit_store* store, provkit_document** out) {
    return guarded([&] {
        if (!store) require("store");
        if (!out) require("out");
        auto doc = std::make_unique<provkit_document>();
        doc->doc = store->impl.snapshot();
        *out = doc.release();
    });
}

int provkit_store_has_record(const provkit_store* store, const char* id) {
    if (!store || !id) return 0;
    try {
        return store->impl.has_record(id) ? 1 : 0;
    } catch (...) {
        return 0;
    }
}

int provkit_laststep_write(const provkit_store* store, const char* entity_id, const char* path,
                           int fits_format) {
    return guarded([&] {
        if (!store) require("store");
        if (!entity_id) require("entity_id");
        if (!path) require("path");
        const LastStepRecord record = build_laststep(store->impl, entity_id);
        const std::vector<std::string> cards = emit_header_cards(record);
        if (fits_format)
            write_fits_header_file(path, cards);
        else
            write_text_cards(path, cards);
    });
}

int provkit_laststep_read(const char* path, int fits_format, const char* default_prefix,
                          const char* const* ns_prefixes, const char* const* ns_uris,
                          size_t ns_count, provkit_document** out) {
    return guarded([&] {
        if (!path) require("path");
        if (!out) require("out");
        const std::vector<std::string> cards =
            fits_format ? read_fits_header_cards(path) : read_text_cards(path);
        const LastStepRecord record = parse_header_cards(cards);
        const NamespaceMap table = build_namespaces(ns_prefixes, ns_uris, ns_count);
        auto doc = std::make_unique<provkit_document>();
        doc->doc = reconstruct_document({record}, table, or_default(default_prefix, kDefaultPrefix));
        *out = doc.release();
    });
}

int provkit_provsap_handle(const provkit_store* store, const char* query, int* status_out,
                           char** content_type_out, char** body_out) {
    return guarded([&] {
        if (!store) require("store");
        const HttpResponse response = handle_provsap(store->impl, query ? query : "");
        if (status_out) *status_out = response.status;
        put_string(content_type_out, response.content_type);
        put_string(body_out, response.body);
    });
}

int provkit_server_start(const provkit_store* store, const char* host, int port,
                         provkit_log_fn log, void* log_ctx, provkit_server** out) {
    return guarded([&] {
        if (!store) require("store");
        if (!out) require("out");
        ProvSapServer::Options options;
        options.host = or_default(host, "127.0.0.1");
        options.port = port;
        if (log)
            options.log = [log, log_ctx](const std::string& line) { log(line.c_str(), log_ctx); };
        *out = new provkit_server(store->impl, std::move(options));
    });
}

int provkit_server_port(const provkit_server* server) {
    return server ? server->impl.port() : 0;
}

void provkit_server_free(provkit_server* server) { delete server; }

} // extern "C"
