#ifndef PROVKIT_PROVSAP_HPP
#define PROVKIT_PROVSAP_HPP

#include <functional>
#include <memory>
#include <string>

#include "serialize.hpp"
#include "store.hpp"

namespace provkit {

// One provenance-access query: which node, how far, in which direction,
// and how the result is projected and serialized.
struct ProvSapRequest {
    std::string id;
    Depth depth = Depth::all();
    Direction direction = Direction::backward;
    SerializationFormat format = SerializationFormat::prov_json;
    ProjectionOptions projection;

    bool operator==(const ProvSapRequest&) const = default;
};

// Parses a raw query string ("ID=ex%3Alvl2&DEPTH=1"). Parameter names are
// case-insensitive and single-valued. Throws MissingId when ID is absent
// or empty, UnknownParam for names outside the protocol, and BadValue for
// out-of-range values.
ProvSapRequest parse_provsap_query(const std::string& query);

// Canonical query string: every parameter explicit, fixed order
// (ID, DEPTH, DIRECTION, RESPONSEFORMAT, MODEL, AGENTS, CONFIGURATION,
// DESCRIPTIONS, ATTRIBUTES), values percent-encoded. parse ∘ render = id.
std::string render_provsap_query(const ProvSapRequest& request);

struct HttpResponse {
    int status = 200;
    std::string content_type;
    std::string body;

    bool operator==(const HttpResponse&) const = default;
};

// Protocol status for a failure: 400 for request errors, 404 for unknown
// start nodes, 500 for everything else.
int provsap_status(Errc code);

// Full GET handling against a store: parse, traverse, project, serialize.
// Never throws; failures return a JSON body {"error": ..., "detail": ...}.
HttpResponse handle_provsap(const Store& store, const std::string& query);

// Serves GET /provsap over HTTP on a background thread. Port 0 picks a
// free port (see port()). The constructor throws BindFailure when the
// address cannot be bound. `log` (optional) receives one line per request.
class ProvSapServer {
  public:
    struct Options {
        std::string host = "127.0.0.1";
        int port = 0;
        std::function<void(const std::string&)> log;
    };

    ProvSapServer(const Store& store, Options options);
    ~ProvSapServer();
    ProvSapServer(const ProvSapServer&) = delete;
    ProvSapServer& operator=(const ProvSapServer&) = delete;

    int port() const;
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace provkit

#endif
