#include "ids.hpp"

#include "errors.hpp"

namespace provkit {

int compare_rendered(const QualifiedId& a, const QualifiedId& b) {
    // Simulates comparing a.str() with b.str() character by character.
    const std::string_view pa = a.prefix, pb = b.prefix;
    const size_t n = std::min(pa.size(), pb.size());
    for (size_t i = 0; i < n; ++i) {
        if (pa[i] != pb[i]) return pa[i] < pb[i] ? -1 : 1;
    }
    auto char_at = [](const QualifiedId& q, size_t i) -> int {
        if (i < q.prefix.size()) return static_cast<unsigned char>(q.prefix[i]);
        if (i == q.prefix.size()) return ':';
        i -= q.prefix.size() + 1;
        if (i < q.local.size()) return static_cast<unsigned char>(q.local[i]);
        return -1; // end of string sorts first
    };
    for (size_t i = n;; ++i) {
        const int ca = char_at(a, i), cb = char_at(b, i);
        if (ca != cb) return ca < cb ? -1 : 1;
        if (ca < 0) return 0;
    }
}

NamespaceMap standard_namespaces(const std::string& default_prefix, const std::string& default_uri) {
    NamespaceMap ns{
        {"prov", kProvUri},
        {"xsd", kXsdUri},
        {"voprov", kVoprovUri},
    };
    if (!default_prefix.empty()) {
        ns[default_prefix] =
            default_uri.empty() ? "http://example.org/" + default_prefix + "#" : default_uri;
    }
    return ns;
}

QualifiedId parse_qualified_id(std::string_view text, const NamespaceMap& namespaces,
                               const std::string& default_prefix) {
    if (text.empty()) fail(Errc::empty_id, "empty identifier");
    QualifiedId id;
    const size_t colon = text.find(':');
    if (colon == std::string_view::npos) {
        id.prefix = default_prefix;
        id.local = std::string(text);
    } else {
        id.prefix = std::string(text.substr(0, colon));
        id.local = std::string(text.substr(colon + 1));
    }
    if (id.prefix.empty()) fail(Errc::empty_id, "empty prefix in '" + std::string(text) + "'");
    if (id.local.empty()) fail(Errc::empty_id, "empty local part in '" + std::string(text) + "'");
    if (!namespaces.contains(id.prefix))
        fail(Errc::unknown_prefix, "prefix '" + id.prefix + "' not in namespace map");
    return id;
}

} // namespace provkit
