#ifndef PROVKIT_ERRORS_HPP
#define PROVKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace provkit {

enum class Errc {
    empty_id,
    unknown_prefix,
    malformed_json,
    unknown_event_kind,
    missing_field,
    use_after_end,
    conflicting_record,
    conflicting_namespace,
    not_found,
    corrupt_store,
    unknown_section,
    bad_record,
    malformed_card,
    duplicate_keyword,
    no_provenance,
    too_many_indexed,
    cyclic_graph,
    missing_id,
    bad_value,
    unknown_param,
    bind_failure,
    io_error,
    invalid_document,
};

// Stable machine-readable name, e.g. "UnknownPrefix". Used in CLI
// diagnostics and ProvSAP error bodies.
const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code),
          detail_(message) {}

    Errc code() const noexcept { return code_; }
    // the message without the "ErrcName: " prefix, for callers that render
    // the code separately
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline const char* errc_name(Errc code) {
    switch (code) {
    case Errc::empty_id: return "EmptyId";
    case Errc::unknown_prefix: return "UnknownPrefix";
    case Errc::malformed_json: return "MalformedJson";
    case Errc::unknown_event_kind: return "UnknownEventKind";
    case Errc::missing_field: return "MissingField";
    case Errc::use_after_end: return "UseAfterEnd";
    case Errc::conflicting_record: return "ConflictingRecord";
    case Errc::conflicting_namespace: return "ConflictingNamespace";
    case Errc::not_found: return "NotFound";
    case Errc::corrupt_store: return "CorruptStore";
    case Errc::unknown_section: return "UnknownSection";
    case Errc::bad_record: return "BadRecord";
    case Errc::malformed_card: return "MalformedCard";
    case Errc::duplicate_keyword: return "DuplicateKeyword";
    case Errc::no_provenance: return "NoProvenance";
    case Errc::too_many_indexed: return "TooManyIndexed";
    case Errc::cyclic_graph: return "CyclicGraph";
    case Errc::missing_id: return "MissingId";
    case Errc::bad_value: return "BadValue";
    case Errc::unknown_param: return "UnknownParam";
    case Errc::bind_failure: return "BindFailure";
    case Errc::io_error: return "IoError";
    case Errc::invalid_document: return "InvalidDocument";
    }
    return "Unknown";
}

} // namespace provkit

#endif
