#ifndef PROVKIT_LASTSTEP_HPP
#define PROVKIT_LASTSTEP_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"
#include "store.hpp"

namespace provkit {

// The one-step provenance of a single entity: the entity itself, the
// activity that generated it, that activity's inputs, siblings, and
// configuration, and a contact. Flat and string-valued so it can ride in
// a file header next to the data it describes.
struct LastStepRecord {
    std::string entity_id;                                        // PRV_ID
    std::optional<std::string> entity_name;                       // PRV_NAME
    std::optional<std::string> generated_at;                      // PRV_GENT
    std::optional<std::string> location;                          // PRV_LOC
    std::optional<std::string> contact_name;                      // PRV_CTC
    std::optional<std::string> contact_email;                     // PRV_CTCE
    std::optional<std::string> activity_id;                       // PRV_ACT
    std::optional<std::string> activity_name;                     // PRV_ACTN
    std::optional<std::string> activity_start;                    // PRV_TSTR
    std::optional<std::string> activity_end;                      // PRV_TEND
    std::optional<std::string> description_name;                  // PRV_DESC
    std::optional<std::string> description_version;               // PRV_VER
    std::vector<std::string> used_ids;                            // PRV_USDn
    std::vector<std::string> sibling_generated_ids;               // PRV_GENn
    std::vector<std::pair<std::string, std::string>> parameters;  // PRV_PARn "name=value"

    bool operator==(const LastStepRecord&) const = default;
};

// Projects the store's one-step backward neighborhood of `entity_id` onto
// a LastStepRecord. The contact is the agent attributed with role
// "contact", falling back to the lexicographically smallest attributed
// agent; stub agents and agents without a name yield no contact. Throws
// NotFound when the id does not name an entity.
LastStepRecord build_laststep(const Store& store, const std::string& entity_id);

// Fixed keyword vocabulary in fixed order; absent fields emit no card.
// Indexed families count from 1 and narrow their keyword stem as the
// index grows (PRV_USD1, PRV_US10, PRV_U100); more than 999 entries in
// one family throws TooManyIndexed.
std::vector<std::string> emit_header_cards(const LastStepRecord& record);

// Inverse of emit_header_cards, tolerant of foreign cards: non-PRV cards
// are ignored, parsing stops at END. Throws NoProvenance when no PRV_
// cards are present, DuplicateKeyword and MalformedCard as appropriate.
LastStepRecord parse_header_cards(const std::vector<std::string>& cards);

// Merges one-step documents reconstructed from each record: declared
// entity and activity, stub inputs and siblings, a contact agent with a
// derived id (default prefix + sanitized contact name), and parameters
// with the narrowest value type their text parses as. Description fields
// fold into activity attributes (their original ids are not recoverable).
ProvenanceDocument reconstruct_document(const std::vector<LastStepRecord>& records,
                                        const NamespaceMap& namespaces = standard_namespaces(),
                                        const std::string& default_prefix = kDefaultPrefix);

} // namespace provkit

#endif
