#ifndef PROVKIT_UTIL_HPP
#define PROVKIT_UTIL_HPP

#include <optional>
#include <string>
#include <string_view>

namespace provkit {

// Accepts YYYY-MM-DDThh:mm:ss[.fraction]Z with a calendar-valid date.
bool is_iso8601_utc(std::string_view text);

// Current wall-clock time as an ISO-8601 UTC instant, second precision.
std::string utc_now_iso8601();

std::string to_lower(std::string_view text);
std::string to_upper(std::string_view text);
bool iequals(std::string_view a, std::string_view b);

// Percent-decoding with '+' as space; nullopt on a malformed escape.
std::optional<std::string> url_decode(std::string_view text);

// Canonical percent-encoding for a query value: unreserved characters and
// ':' kept literal, space as '+', everything else as uppercase %XX.
std::string url_encode_component(std::string_view text);

} // namespace provkit

#endif
