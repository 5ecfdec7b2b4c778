#include <chrono>
#include <map>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "errors.hpp"
#include "provsap.hpp"
#include "util.hpp"

namespace provkit {

namespace {

[[noreturn]] void bad_value(const std::string& name, const std::string& value) {
    fail(Errc::bad_value, "parameter " + name + ": unsupported value '" + value + "'");
}

bool parse_flag(const std::string& name, const std::string& value) {
    if (value == "1") return true;
    if (value == "0") return false;
    bad_value(name, value);
}

} // namespace

ProvSapRequest parse_provsap_query(const std::string& query) {
    std::map<std::string, std::string> params;
    std::size_t start = 0;
    while (start <= query.size() && !query.empty()) {
        std::size_t end = query.find('&', start);
        if (end == std::string::npos) end = query.size();
        const std::string pair = query.substr(start, end - start);
        start = end + 1;
        if (pair.empty()) continue;
        const std::size_t eq = pair.find('=');
        const std::string raw_name = eq == std::string::npos ? pair : pair.substr(0, eq);
        const std::string raw_value = eq == std::string::npos ? "" : pair.substr(eq + 1);
        const auto name = url_decode(raw_name);
        const auto value = url_decode(raw_value);
        if (!name || !value)
            fail(Errc::bad_value, "malformed percent-encoding in '" + pair + "'");
        const std::string canonical = to_upper(*name);
        if (!params.emplace(canonical, *value).second)
            fail(Errc::bad_value, "parameter " + canonical + " given more than once");
        if (start > query.size()) break;
    }

    static const std::set<std::string> kKnown{
        "ID",    "DEPTH",  "DIRECTION",     "RESPONSEFORMAT",
        "MODEL", "AGENTS", "CONFIGURATION", "DESCRIPTIONS",
        "ATTRIBUTES"};
    for (const auto& [name, value] : params)
        if (!kKnown.contains(name)) fail(Errc::unknown_param, name);

    ProvSapRequest req;
    auto it = params.find("ID");
    if (it == params.end() || it->second.empty())
        fail(Errc::missing_id, "the ID parameter is required");
    req.id = it->second;

    if ((it = params.find("DEPTH")) != params.end()) {
        const std::string& v = it->second;
        if (iequals(v, "ALL")) {
            req.depth = Depth::all();
        } else if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos &&
                   v.size() <= 9) {
            req.depth = Depth::steps(std::stoi(v));
        } else {
            bad_value("DEPTH", v);
        }
    }
    if ((it = params.find("DIRECTION")) != params.end()) {
        if (iequals(it->second, "BACKWARD"))
            req.direction = Direction::backward;
        else if (iequals(it->second, "FORWARD"))
            req.direction = Direction::forward;
        else
            bad_value("DIRECTION", it->second);
    }
    if ((it = params.find("RESPONSEFORMAT")) != params.end()) {
        const auto format = parse_format_name(it->second);
        if (!format) bad_value("RESPONSEFORMAT", it->second);
        req.format = *format;
    }
    if ((it = params.find("MODEL")) != params.end()) {
        const auto model = parse_model_name(it->second);
        if (!model) bad_value("MODEL", it->second);
        req.projection.model = *model;
    }
    if ((it = params.find("AGENTS")) != params.end())
        req.projection.agents = parse_flag("AGENTS", it->second);
    if ((it = params.find("CONFIGURATION")) != params.end())
        req.projection.configuration = parse_flag("CONFIGURATION", it->second);
    if ((it = params.find("DESCRIPTIONS")) != params.end()) {
        const std::string& v = it->second;
        if (v != "0" && v != "1" && v != "2") bad_value("DESCRIPTIONS", v);
        req.projection.descriptions = v[0] - '0';
    }
    if ((it = params.find("ATTRIBUTES")) != params.end())
        req.projection.attributes = parse_flag("ATTRIBUTES", it->second);
    return req;
}

std::string render_provsap_query(const ProvSapRequest& request) {
    std::string out = "ID=" + url_encode_component(request.id);
    out += "&DEPTH=";
    out += request.depth.unbounded ? "ALL" : std::to_string(request.depth.hops);
    out += std::string("&DIRECTION=") + direction_name(request.direction);
    out += std::string("&RESPONSEFORMAT=") + format_name(request.format);
    out += std::string("&MODEL=") + model_name(request.projection.model);
    out += std::string("&AGENTS=") + (request.projection.agents ? "1" : "0");
    out += std::string("&CONFIGURATION=") + (request.projection.configuration ? "1" : "0");
    out += "&DESCRIPTIONS=" + std::to_string(request.projection.descriptions);
    out += std::string("&ATTRIBUTES=") + (request.projection.attributes ? "1" : "0");
    return out;
}

int provsap_status(Errc code) {
    switch (code) {
    case Errc::missing_id:
    case Errc::bad_value:
    case Errc::unknown_param:
        return 400;
    case Errc::not_found:
        return 404;
    default:
        return 500;
    }
}

HttpResponse handle_provsap(const Store& store, const std::string& query) {
    auto error_response = [](Errc code, const std::string& detail) {
        nlohmann::json body;
        body["error"] = errc_name(code);
        body["detail"] = detail;
        return HttpResponse{provsap_status(code), "application/json", body.dump()};
    };
    try {
        const ProvSapRequest req = parse_provsap_query(query);
        const ProvenanceDocument doc = store.traverse(req.id, req.depth, req.direction);
        const ProvenanceDocument projected = apply_projection(doc, req.projection);
        return {200, mime_type(req.format), serialize_document(projected, req.format)};
    } catch (const Error& e) {
        return error_response(e.code(), e.detail()); // "error" already names the code
    } catch (const std::exception& e) {
        return error_response(Errc::io_error, e.what());
    }
}

// -------- server --------

struct ProvSapServer::Impl {
    const Store& store;
    Options options;
    httplib::Server server;
    std::thread worker;
    int bound_port = 0;

    Impl(const Store& s, Options opts) : store(s), options(std::move(opts)) {}

    void log_line(const std::string& query, int status,
                  std::chrono::steady_clock::duration elapsed) {
        if (!options.log) return;
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        options.log("GET /provsap" + (query.empty() ? "" : "?" + query) + " -> " +
                    std::to_string(status) + " (" + std::to_string(ms) + "ms)");
    }
};

ProvSapServer::ProvSapServer(const Store& store, Options options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
    Impl& impl = *impl_;

    // SO_REUSEADDR only (no SO_REUSEPORT): restarts may rebind through
    // TIME_WAIT, but two live instances on one port fail loudly.
    impl.server.set_socket_options([](int sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                     reinterpret_cast<const void*>(&yes), sizeof(yes));
    });

    impl.server.Get("/provsap", [&impl](const httplib::Request& req, httplib::Response& res) {
        const auto begin = std::chrono::steady_clock::now();
        // re-encode the already-decoded parameters so the protocol parser
        // sees one canonical query string (duplicates preserved)
        std::string query;
        for (const auto& [name, value] : req.params) {
            if (!query.empty()) query += '&';
            query += url_encode_component(name) + "=" + url_encode_component(value);
        }
        const HttpResponse out = handle_provsap(impl.store, query);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
        impl.log_line(query, out.status, std::chrono::steady_clock::now() - begin);
    });

    if (impl.options.port == 0) {
        impl.bound_port = impl.server.bind_to_any_port(impl.options.host);
        if (impl.bound_port <= 0)
            fail(Errc::bind_failure, "cannot bind " + impl.options.host);
    } else {
        if (!impl.server.bind_to_port(impl.options.host, impl.options.port))
            fail(Errc::bind_failure, "cannot bind " + impl.options.host + ":" +
                                         std::to_string(impl.options.port));
        impl.bound_port = impl.options.port;
    }
    impl.worker = std::thread([&impl] { impl.server.listen_after_bind(); });
    impl.server.wait_until_ready();
}

ProvSapServer::~ProvSapServer() { stop(); }

int ProvSapServer::port() const { return impl_->bound_port; }

void ProvSapServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

} // namespace provkit
