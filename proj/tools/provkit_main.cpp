// provkit command line: capture logs in, provenance documents, headers,
// and an HTTP access service out. Links the public C interface only.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <provkit/provkit.h>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// A data error: print and stop with exit code 2.
[[noreturn]] void die(const std::string& message) {
    std::cerr << "provkit: " << message << "\n";
    std::exit(kExitData);
}

// A usage error discovered after flag parsing: print and stop with exit code 1.
[[noreturn]] void die_usage(const std::string& message) {
    std::cerr << "provkit: " << message << "\n";
    std::exit(kExitUsage);
}

void check(int status) {
    if (status != PROVKIT_OK)
        die(std::string(provkit_status_name(status)) + ": " + provkit_last_error());
}

// Owned string from a char** output parameter.
struct OutString {
    char* value = nullptr;
    ~OutString() { provkit_string_free(value); }
    std::string str() const { return value ? value : ""; }
};

struct StoreHandle {
    provkit_store* store = nullptr;
    ~StoreHandle() { provkit_store_close(store); }
};

struct DocHandle {
    provkit_document* doc = nullptr;
    ~DocHandle() { provkit_document_free(doc); }
};

// Repeatable --namespace prefix=uri flags, split and kept alive as the
// parallel arrays the C interface takes.
struct Namespaces {
    std::vector<std::string> prefixes;
    std::vector<std::string> uris;
    std::vector<const char*> prefix_ptrs;
    std::vector<const char*> uri_ptrs;

    void add(const std::string& pair) {
        const std::size_t eq = pair.find('=');
        if (eq == std::string::npos || eq == 0)
            throw CLI::ValidationError("--namespace", "expected prefix=uri, got '" + pair + "'");
        prefixes.push_back(pair.substr(0, eq));
        uris.push_back(pair.substr(eq + 1));
    }
    const char* const* prefix_array() {
        prefix_ptrs.clear();
        for (const std::string& p : prefixes) prefix_ptrs.push_back(p.c_str());
        return prefix_ptrs.data();
    }
    const char* const* uri_array() {
        uri_ptrs.clear();
        for (const std::string& u : uris) uri_ptrs.push_back(u.c_str());
        return uri_ptrs.data();
    }
    std::size_t count() const { return prefixes.size(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die("cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

provkit_store* open_store(StoreHandle& handle, const std::string& path) {
    if (path.empty()) die_usage("no store given: pass --store or set PROVKIT_STORE");
    check(provkit_store_open(path.c_str(), &handle.store));
    return handle.store;
}

void print_warnings(const std::string& lines) {
    std::istringstream in(lines);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) std::cerr << "warning: " << line << "\n";
}

void print_ingest_summary(std::size_t inserted, std::size_t updated, std::size_t unchanged) {
    std::cout << "ok: " << inserted << " inserted, " << updated << " updated, " << unchanged
              << " unchanged\n";
}

int parse_depth(const std::string& text) {
    std::string upper = text;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (upper == "ALL") return PROVKIT_DEPTH_ALL;
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos &&
        text.size() <= 9)
        return std::stoi(text);
    die_usage("--depth: expected ALL or a non-negative integer, got '" + text + "'");
}

void write_output(const std::string& out_path, const std::string& body) {
    if (out_path.empty() || out_path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) die("cannot write '" + out_path + "'");
    out << body;
    if (!out.flush()) die("cannot write '" + out_path + "'");
}

std::atomic<bool> g_stop{false};

extern "C" void handle_signal(int) { g_stop.store(true); }

void log_to_stdout(const char* line, void*) { std::cout << line << std::endl; }

bool has_extension(const std::filesystem::path& path, const char* wanted) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == wanted;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"provenance capture, storage, and access"};
    app.set_version_flag("--version", provkit_version());
    app.require_subcommand(1);

    std::string store_path;
    app.add_option("--store", store_path, "store directory (overrides PROVKIT_STORE)")
        ->envname("PROVKIT_STORE");

    Namespaces namespaces;
    app.add_option_function<std::vector<std::string>>(
           "--namespace",
           [&](const std::vector<std::string>& pairs) {
               for (const std::string& pair : pairs) namespaces.add(pair);
           },
           "extra namespace as prefix=uri (repeatable)")
        ->take_all();

    // ingest <events.provlog.jsonl>
    std::string ingest_path;
    CLI::App* ingest = app.add_subcommand("ingest", "fold a structured event log into the store");
    ingest->add_option("events", ingest_path, "event log, one JSON object per line")
        ->required();

    // import <doc.provjson>
    std::string import_path;
    CLI::App* import_cmd = app.add_subcommand("import", "load a PROV-JSON document into the store");
    import_cmd->add_option("document", import_path, "PROV-JSON file")->required();

    // export --id ... [--depth ALL] [--direction BACKWARD] [--format PROV-JSON] [--out -]
    std::string export_id, export_depth = "ALL", export_direction = "BACKWARD";
    std::string export_format = "PROV-JSON", export_out = "-";
    CLI::App* export_cmd = app.add_subcommand("export", "serialize a traversal of the store");
    export_cmd->add_option("--id", export_id, "entity or activity to start from")->required();
    export_cmd->add_option("--depth", export_depth, "ALL or a number of activity hops");
    export_cmd->add_option("--direction", export_direction, "BACKWARD or FORWARD");
    export_cmd->add_option("--format", export_format, "PROV-JSON, PROV-N, PROV-DOT or PROV-SVG");
    export_cmd->add_option("--out", export_out, "output file ('-' for stdout)");

    // header emit --id ... --out ... [--fits] / header scan <dir>
    CLI::App* header = app.add_subcommand("header", "last-step provenance headers");
    header->require_subcommand(1);
    std::string emit_id, emit_out;
    bool emit_fits = false;
    CLI::App* emit = header->add_subcommand("emit", "write an entity's last step as header cards");
    emit->add_option("--id", emit_id, "generated entity")->required();
    emit->add_option("--out", emit_out, "output file")->required();
    emit->add_flag("--fits", emit_fits, "write a FITS-style 2880-byte block header");
    std::string scan_dir;
    CLI::App* scan = header->add_subcommand("scan", "reconstruct provenance from header files");
    scan->add_option("directory", scan_dir, "directory of header files (.fits read as blocks)")
        ->required();

    // validate <doc>
    std::string validate_path;
    CLI::App* validate =
        app.add_subcommand("validate", "check a document against the model invariants");
    validate->add_option("document", validate_path, "PROV-JSON file, or .jsonl event log")
        ->required();

    // serve [--host 127.0.0.1] [--port 8080]
    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    CLI::App* serve = app.add_subcommand("serve", "serve GET /provsap over HTTP");
    serve->add_option("--host", serve_host, "address to bind");
    serve->add_option("--port", serve_port, "port to bind (0 picks a free port)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (*ingest) {
        DocHandle doc;
        OutString warnings;
        check(provkit_events_fold(ingest_path.c_str(), nullptr, namespaces.prefix_array(),
                                  namespaces.uri_array(), namespaces.count(), &doc.doc,
                                  &warnings.value));
        print_warnings(warnings.str());
        StoreHandle store;
        std::size_t inserted = 0, updated = 0, unchanged = 0;
        check(provkit_store_ingest(open_store(store, store_path), doc.doc, &inserted, &updated,
                                   &unchanged));
        print_ingest_summary(inserted, updated, unchanged);
        return 0;
    }

    if (*import_cmd) {
        const std::string text = slurp(import_path);
        DocHandle doc;
        check(provkit_document_parse(text.c_str(), nullptr, namespaces.prefix_array(),
                                     namespaces.uri_array(), namespaces.count(), &doc.doc));
        StoreHandle store;
        std::size_t inserted = 0, updated = 0, unchanged = 0;
        check(provkit_store_ingest(open_store(store, store_path), doc.doc, &inserted, &updated,
                                   &unchanged));
        print_ingest_summary(inserted, updated, unchanged);
        return 0;
    }

    if (*export_cmd) {
        StoreHandle store;
        open_store(store, store_path);
        DocHandle doc;
        check(provkit_store_traverse(store.store, export_id.c_str(), parse_depth(export_depth),
                                     export_direction.c_str(), &doc.doc));
        OutString body;
        check(provkit_document_serialize(doc.doc, export_format.c_str(), &body.value));
        write_output(export_out, body.str());
        return 0;
    }

    if (*emit) {
        StoreHandle store;
        open_store(store, store_path);
        check(provkit_laststep_write(store.store, emit_id.c_str(), emit_out.c_str(),
                                     emit_fits ? 1 : 0));
        std::cout << "wrote " << emit_out << "\n";
        return 0;
    }

    if (*scan) {
        namespace fs = std::filesystem;
        std::error_code ec;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(scan_dir, ec))
            if (entry.is_regular_file()) files.push_back(entry.path());
        if (ec) die("cannot read directory '" + scan_dir + "': " + ec.message());
        std::sort(files.begin(), files.end());

        StoreHandle store;
        open_store(store, store_path);
        std::size_t ingested = 0, skipped = 0, unreadable = 0;
        for (const fs::path& file : files) {
            DocHandle doc;
            const int fits = has_extension(file, ".fits") ? 1 : 0;
            const int status = provkit_laststep_read(
                file.string().c_str(), fits, nullptr, namespaces.prefix_array(),
                namespaces.uri_array(), namespaces.count(), &doc.doc);
            if (status == PROVKIT_ERR_NO_PROVENANCE) {
                ++skipped;
                continue;
            }
            if (status != PROVKIT_OK) {
                std::cerr << "warning: " << file.string() << ": " << provkit_last_error()
                          << "\n";
                ++unreadable;
                continue;
            }
            check(provkit_store_ingest(store.store, doc.doc, nullptr, nullptr, nullptr));
            ++ingested;
        }
        std::cout << "scanned " << files.size() << " files: " << ingested << " ingested, "
                  << skipped << " without provenance, " << unreadable << " unreadable\n";
        return 0;
    }

    if (*validate) {
        DocHandle doc;
        if (has_extension(validate_path, ".jsonl")) {
            OutString warnings;
            check(provkit_events_fold(validate_path.c_str(), nullptr,
                                      namespaces.prefix_array(), namespaces.uri_array(),
                                      namespaces.count(), &doc.doc, &warnings.value));
            print_warnings(warnings.str());
        } else {
            const std::string text = slurp(validate_path);
            check(provkit_document_parse(text.c_str(), nullptr, namespaces.prefix_array(),
                                         namespaces.uri_array(), namespaces.count(), &doc.doc));
        }
        OutString report;
        std::size_t errors = 0;
        check(provkit_document_validate(doc.doc, &report.value, &errors));
        if (!report.str().empty()) std::cout << report.str() << "\n";
        if (errors > 0) {
            std::cerr << "provkit: " << errors << " error finding(s)\n";
            return kExitData;
        }
        std::cout << "ok: " << provkit_document_record_count(doc.doc) << " records\n";
        return 0;
    }

    if (*serve) {
        // before the server answers its first request, so a supervisor that
        // waits for readiness can always stop us (overrides an inherited
        // SIG_IGN from non-interactive shells, which would eat the signal)
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        StoreHandle store;
        open_store(store, store_path);
        provkit_server* server = nullptr;
        check(provkit_server_start(store.store, serve_host.c_str(), serve_port, log_to_stdout,
                                   nullptr, &server));
        std::cout << "serving http://" << serve_host << ":" << provkit_server_port(server)
                  << "/provsap (store: " << store_path << ")" << std::endl;
        while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        provkit_server_free(server);
        std::cout << "stopped\n";
        return 0;
    }

    return kExitUsage;
}
