#ifndef PROVKIT_IDS_HPP
#define PROVKIT_IDS_HPP

#include <compare>
#include <map>
#include <string>
#include <string_view>

namespace provkit {

// Qualified name `prefix:local` resolved through a document namespace map.
struct QualifiedId {
    std::string prefix;
    std::string local;

    std::string str() const { return prefix + ":" + local; }
    bool operator==(const QualifiedId&) const = default;
};

// Three-way compare in rendered form ("prefix:local") without allocating.
// Documents sort records by rendered id, so this is the canonical order.
int compare_rendered(const QualifiedId& a, const QualifiedId& b);

inline bool operator<(const QualifiedId& a, const QualifiedId& b) {
    return compare_rendered(a, b) < 0;
}

using NamespaceMap = std::map<std::string, std::string>; // prefix -> URI

inline constexpr const char* kProvUri = "http://www.w3.org/ns/prov#";
inline constexpr const char* kXsdUri = "http://www.w3.org/2001/XMLSchema#";
inline constexpr const char* kVoprovUri = "http://www.ivoa.net/documents/ProvenanceDM/voprov#";
inline constexpr const char* kDefaultPrefix = "ex";

// prov, xsd, voprov plus the deployment prefix. An empty URI derives one
// from the prefix.
NamespaceMap standard_namespaces(const std::string& default_prefix = kDefaultPrefix,
                                 const std::string& default_uri = "");

// Splits on the first colon; text without a colon gets `default_prefix`.
// Throws EmptyId for empty text/prefix/local, UnknownPrefix when the prefix
// is not a key of `namespaces`.
QualifiedId parse_qualified_id(std::string_view text, const NamespaceMap& namespaces,
                               const std::string& default_prefix);

} // namespace provkit

#endif
