#ifndef PROVKIT_SERIALIZE_HPP
#define PROVKIT_SERIALIZE_HPP

#include <optional>
#include <string>

#include "model.hpp"

namespace provkit {

enum class Model { ivoa, w3c };

const char* model_name(Model m); // "IVOA" / "W3C"
std::optional<Model> parse_model_name(std::string_view name); // case-insensitive

// What a serialized view of a document includes, and in which vocabulary.
struct ProjectionOptions {
    Model model = Model::ivoa;
    bool agents = true;        // agent records + both agent relations
    bool configuration = true; // parameter records
    int descriptions = 1;      // 0 drop all, 1 keep references only, 2 keep records
    bool attributes = true;    // free-form attribute maps

    bool operator==(const ProjectionOptions&) const = default;
};

enum class SerializationFormat { prov_json, prov_n, prov_dot, prov_svg };

const char* format_name(SerializationFormat f); // "PROV-JSON" / "PROV-N" / "PROV-DOT" / "PROV-SVG"
const char* mime_type(SerializationFormat f);
std::optional<SerializationFormat> parse_format_name(std::string_view name); // case-insensitive

// Filters and (for the W3C model) rewrites the document per the options.
// Idempotent; the result is still a structurally valid document.
ProvenanceDocument apply_projection(const ProvenanceDocument& doc, const ProjectionOptions& opts);

// Canonical PROV-JSON: sorted object keys, compact separators, deterministic
// "_:u<n>"-style relation keys following the document's relation order.
std::string to_prov_json(const ProvenanceDocument& doc);

// Inverse of to_prov_json on its own output. Unknown top-level sections are
// rejected; unrecognized string attributes are preserved in attribute maps.
// `defaults` seeds the namespace table (the document's "prefix" section wins),
// and `default_prefix` applies when the text does not name a default.
ProvenanceDocument from_prov_json(const std::string& text,
                                  const NamespaceMap& defaults = standard_namespaces(),
                                  const std::string& default_prefix = kDefaultPrefix);

// PROV-N: one statement per line, sorted by (statement kind, first id),
// wrapped in document/endDocument with prefix declarations.
std::string to_prov_n(const ProvenanceDocument& doc);

// Graphviz digraph: one node per record, one labeled edge per relation,
// node and edge statements each emitted in sorted order.
std::string to_dot(const ProvenanceDocument& doc);

// Self-contained SVG, longest-path layering with final products in the top
// layer. Throws CyclicGraph when the derivation graph has a cycle.
std::string to_svg(const ProvenanceDocument& doc);

std::string serialize_document(const ProvenanceDocument& doc, SerializationFormat format);

} // namespace provkit

#endif
