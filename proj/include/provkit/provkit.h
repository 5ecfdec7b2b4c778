#ifndef PROVKIT_PROVKIT_H
#define PROVKIT_PROVKIT_H

/* C interface to the provkit provenance library.
 *
 * Conventions:
 *  - Every fallible call returns PROVKIT_OK (0) or a PROVKIT_ERR_* code;
 *    provkit_last_error() then holds a human-readable message for the
 *    calling thread until its next provkit call.
 *  - Strings handed out through char** parameters are heap copies the
 *    caller releases with provkit_string_free(). Output parameters may be
 *    NULL when the caller does not want that result.
 *  - Handles are opaque; each *_free / *_close releases one handle and
 *    tolerates NULL.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define PROVKIT_OK 0
#define PROVKIT_ERR_EMPTY_ID 1
#define PROVKIT_ERR_UNKNOWN_PREFIX 2
#define PROVKIT_ERR_MALFORMED_JSON 3
#define PROVKIT_ERR_UNKNOWN_EVENT_KIND 4
#define PROVKIT_ERR_MISSING_FIELD 5
#define PROVKIT_ERR_USE_AFTER_END 6
#define PROVKIT_ERR_CONFLICTING_RECORD 7
#define PROVKIT_ERR_CONFLICTING_NAMESPACE 8
#define PROVKIT_ERR_NOT_FOUND 9
#define PROVKIT_ERR_CORRUPT_STORE 10
#define PROVKIT_ERR_UNKNOWN_SECTION 11
#define PROVKIT_ERR_BAD_RECORD 12
#define PROVKIT_ERR_MALFORMED_CARD 13
#define PROVKIT_ERR_DUPLICATE_KEYWORD 14
#define PROVKIT_ERR_NO_PROVENANCE 15
#define PROVKIT_ERR_TOO_MANY_INDEXED 16
#define PROVKIT_ERR_CYCLIC_GRAPH 17
#define PROVKIT_ERR_MISSING_ID 18
#define PROVKIT_ERR_BAD_VALUE 19
#define PROVKIT_ERR_UNKNOWN_PARAM 20
#define PROVKIT_ERR_BIND_FAILURE 21
#define PROVKIT_ERR_IO 22
#define PROVKIT_ERR_INVALID_DOCUMENT 23
#define PROVKIT_ERR_INTERNAL 100

/* Unbounded traversal depth. Non-negative depths count activity hops. */
#define PROVKIT_DEPTH_ALL (-1)

typedef struct provkit_document provkit_document; /* immutable provenance graph */
typedef struct provkit_store provkit_store;       /* durable graph store */
typedef struct provkit_server provkit_server;     /* running HTTP service */

/* Library version, e.g. "0.1.0". Static storage; do not free. */
const char* provkit_version(void);

/* Message for this thread's most recent failure ("" after success).
 * Valid until the thread's next provkit call. Do not free. */
const char* provkit_last_error(void);

/* Stable name for a status code, e.g. "NotFound". Static; do not free. */
const char* provkit_status_name(int status);

/* Releases a string obtained from any char** output parameter. */
void provkit_string_free(char* text);

/* ---- documents ------------------------------------------------------ */

/* Parses PROV-JSON text. The optional parallel arrays seed the namespace
 * table (the text's own "prefix" section wins); default_prefix (NULL for
 * "ex") applies to ids written without a prefix marker. */
int provkit_document_parse(const char* prov_json, const char* default_prefix,
                           const char* const* ns_prefixes, const char* const* ns_uris,
                           size_t ns_count, provkit_document** out);

/* Serializes in the named format: "PROV-JSON", "PROV-N", "PROV-DOT" or
 * "PROV-SVG" (case-insensitive; NULL means PROV-JSON). */
int provkit_document_serialize(const provkit_document* doc, const char* format, char** out);

/* Filters/rewrites a document the way the ProvSAP MODEL/AGENTS/
 * CONFIGURATION/DESCRIPTIONS/ATTRIBUTES parameters do. model is "IVOA" or
 * "W3C" (NULL means IVOA); flags are 0/1; descriptions is 0, 1 or 2. */
int provkit_document_project(const provkit_document* doc, const char* model, int agents,
                             int configuration, int descriptions, int attributes,
                             provkit_document** out);

/* Checks document invariants. report_out (optional) receives one finding
 * per line: "<error|warning> <CODE> <subject>: <detail>". errors_out
 * (optional) receives the number of error-severity findings. Returns
 * PROVKIT_OK even when findings exist; the call itself cannot fail. */
int provkit_document_validate(const provkit_document* doc, char** report_out,
                              size_t* errors_out);

/* Class records + parameters + relations. 0 for NULL. */
size_t provkit_document_record_count(const provkit_document* doc);

void provkit_document_free(provkit_document* doc);

/* ---- structured-log capture ----------------------------------------- */

/* Parses a .provlog.jsonl event file (one JSON object per line, blank
 * lines skipped) and folds it into a document. Never fails on stream
 * order: warnings_out (optional) receives one "<CODE> <activity-id>"
 * line per fold warning. Namespace arguments as in provkit_document_parse. */
int provkit_events_fold(const char* path, const char* default_prefix,
                        const char* const* ns_prefixes, const char* const* ns_uris,
                        size_t ns_count, provkit_document** doc_out, char** warnings_out);

/* ---- store ----------------------------------------------------------- */

/* Opens (creating if missing) the store rooted at `root`. */
int provkit_store_open(const char* root, provkit_store** out);
void provkit_store_close(provkit_store* store);

/* Validates, merges, persists. The three counters (each optional) receive
 * how many records were inserted, updated in place, or left unchanged. */
int provkit_store_ingest(provkit_store* store, const provkit_document* doc,
                         size_t* inserted, size_t* updated, size_t* unchanged);

/* Subgraph reachable from an entity or activity id. depth is a hop count
 * or PROVKIT_DEPTH_ALL; direction is "BACKWARD" or "FORWARD"
 * (case-insensitive, NULL means BACKWARD). */
int provkit_store_traverse(const provkit_store* store, const char* id, int depth,
                           const char* direction, provkit_document** out);

/* Everything stored. */
int provkit_store_snapshot(const provkit_store* store, provkit_document** out);

/* 1 when a record with this id exists (stubs count), else 0. */
int provkit_store_has_record(const provkit_store* store, const char* id);

/* ---- last-step headers ------------------------------------------------ */

/* Writes the one-step provenance summary of an entity as header cards:
 * fits_format 0 writes one 80-column card per text line, 1 writes a
 * FITS-style 2880-byte block file. */
int provkit_laststep_write(const provkit_store* store, const char* entity_id,
                           const char* path, int fits_format);

/* Reads one header file written by provkit_laststep_write (or any FITS
 * header carrying PRV_* cards) and reconstructs the provenance document
 * it describes. Namespace arguments as in provkit_document_parse. */
int provkit_laststep_read(const char* path, int fits_format, const char* default_prefix,
                          const char* const* ns_prefixes, const char* const* ns_uris,
                          size_t ns_count, provkit_document** out);

/* ---- ProvSAP access service ------------------------------------------ */

/* Answers one GET query string ("ID=ex%3Alvl2&DEPTH=1") against the
 * store. Always produces a response: protocol errors become JSON bodies.
 * status_out/content_type_out/body_out are each optional. */
int provkit_provsap_handle(const provkit_store* store, const char* query, int* status_out,
                           char** content_type_out, char** body_out);

typedef void (*provkit_log_fn)(const char* line, void* ctx);

/* Starts serving GET /provsap on a background thread. port 0 picks a free
 * port; host NULL means 127.0.0.1; log (optional) receives one line per
 * request. The store must stay open for the server's lifetime. */
int provkit_server_start(const provkit_store* store, const char* host, int port,
                         provkit_log_fn log, void* log_ctx, provkit_server** out);

/* Port the server actually listens on. 0 for NULL. */
int provkit_server_port(const provkit_server* server);

/* Stops the server and releases it. */
void provkit_server_free(provkit_server* server);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif
