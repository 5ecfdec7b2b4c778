#include <algorithm>
#include <map>

#include "errors.hpp"
#include "fits_cards.hpp"
#include "laststep.hpp"

namespace provkit {

namespace {

// -------- keyword vocabulary --------

constexpr const char* kFixedKeywords[] = {
    "PRV_ID", "PRV_NAME", "PRV_GENT", "PRV_LOC", "PRV_CTC", "PRV_CTCE",
    "PRV_ACT", "PRV_ACTN", "PRV_TSTR", "PRV_TEND", "PRV_DESC", "PRV_VER",
};

// eight-column keyword for the n-th entry of a family: the stem narrows
// as the index widens (PRV_USD1 ... PRV_USD9, PRV_US10 ... PRV_US99,
// PRV_U100 ... PRV_U999)
std::string indexed_keyword(const char* stem3, std::size_t n) {
    const std::string stem(stem3); // three letters, e.g. "USD"
    if (n <= 9) return "PRV_" + stem + std::to_string(n);
    if (n <= 99) return "PRV_" + stem.substr(0, 2) + std::to_string(n);
    return "PRV_" + stem.substr(0, 1) + std::to_string(n);
}

// inverse of indexed_keyword for one family; nullopt when kw is not ours
std::optional<std::size_t> indexed_of(const std::string& kw, const char* stem3) {
    const std::string stem(stem3);
    for (std::size_t letters = 3; letters >= 1; --letters) {
        const std::string head = "PRV_" + stem.substr(0, letters);
        if (kw.size() <= head.size() || kw.rfind(head, 0) != 0) continue;
        const std::string digits = kw.substr(head.size());
        if (digits.empty() || digits.size() > 3) continue;
        if (!std::all_of(digits.begin(), digits.end(),
                         [](char c) { return c >= '0' && c <= '9'; }))
            continue;
        const std::size_t n = std::stoul(digits);
        // each width band belongs to exactly one stem length
        const std::size_t lo = letters == 3 ? 1 : letters == 2 ? 10 : 100;
        const std::size_t hi = letters == 3 ? 9 : letters == 2 ? 99 : 999;
        if (n < lo || n > hi) return std::nullopt;
        return n;
    }
    return std::nullopt;
}

std::string sanitized_local(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (c >= 'A' && c <= 'Z')
            out += static_cast<char>(c - 'A' + 'a');
        else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))
            out += c;
        else
            out += '_';
    }
    return out.empty() ? "contact" : out;
}

ValueType narrowest_type(const std::string& value) {
    if (value_parses_as(value, ValueType::boolean)) return ValueType::boolean;
    if (value_parses_as(value, ValueType::integer)) return ValueType::integer;
    if (value_parses_as(value, ValueType::real)) return ValueType::real;
    if (value_parses_as(value, ValueType::timestamp)) return ValueType::timestamp;
    return ValueType::string;
}

} // namespace

// -------- build --------

LastStepRecord build_laststep(const Store& store, const std::string& entity_id) {
    const ProvenanceDocument doc = store.traverse(entity_id, Depth::steps(1), Direction::backward);
    if (!doc.entities.contains(entity_id))
        fail(Errc::not_found, "'" + entity_id + "' is not an entity");

    LastStepRecord rec;
    rec.entity_id = entity_id;
    const Entity& entity = doc.entities.at(entity_id);
    if (!doc.incomplete_ids.contains(entity_id)) {
        rec.entity_name = entity.name;
        rec.generated_at = entity.generated_at;
        rec.location = entity.location;
    }

    // contact: prefer the attribution with role "contact"; rows are sorted
    // by agent, so the first candidate is the lexicographically smallest
    const AttributionRelation* contact = nullptr;
    for (const auto& r : doc.attributions) {
        if (r.entity.str() != entity_id) continue;
        if (r.role == "contact") {
            contact = &r;
            break;
        }
        if (!contact) contact = &r;
    }
    if (contact) {
        const std::string agent_id = contact->agent.str();
        if (auto it = doc.agents.find(agent_id);
            it != doc.agents.end() && !doc.incomplete_ids.contains(agent_id) &&
            !it->second.name.empty()) {
            rec.contact_name = it->second.name;
            rec.contact_email = it->second.email;
        }
    }

    const GenerationRelation* gen = nullptr;
    for (const auto& r : doc.generated)
        if (r.entity.str() == entity_id) {
            gen = &r;
            break;
        }
    if (!gen) return rec;

    const std::string act_id = gen->activity.str();
    rec.activity_id = act_id;
    const Activity& act = doc.activities.at(act_id);
    if (!doc.incomplete_ids.contains(act_id)) {
        rec.activity_name = act.name;
        rec.activity_start = act.start_time;
        rec.activity_end = act.end_time;
        if (act.description_ref) {
            const std::string desc_id = act.description_ref->str();
            if (auto it = doc.descriptions.find(desc_id);
                it != doc.descriptions.end() && !doc.incomplete_ids.contains(desc_id)) {
                if (!it->second.name.empty()) rec.description_name = it->second.name;
                rec.description_version = it->second.version;
            }
        }
    }

    for (const auto& r : doc.used)
        if (r.activity.str() == act_id && r.entity.str() != entity_id)
            rec.used_ids.push_back(r.entity.str());
    for (const auto& r : doc.generated)
        if (r.activity.str() == act_id && r.entity.str() != entity_id)
            rec.sibling_generated_ids.push_back(r.entity.str());
    for (const auto& p : doc.parameters)
        if (p.activity.str() == act_id) rec.parameters.emplace_back(p.name, p.value);
    return rec;
}

// -------- emit --------

std::vector<std::string> emit_header_cards(const LastStepRecord& record) {
    std::vector<std::string> cards;
    auto push = [&cards](const std::string& keyword, const std::string& value) {
        for (std::string& card : encode_string_card(keyword, value))
            cards.push_back(std::move(card));
    };
    auto push_opt = [&push](const char* keyword, const std::optional<std::string>& value) {
        if (value) push(keyword, *value);
    };
    auto push_family = [&push](const char* stem3, const std::vector<std::string>& values) {
        if (values.size() > 999)
            fail(Errc::too_many_indexed,
                 std::string("more than 999 PRV_") + stem3 + " entries");
        for (std::size_t i = 0; i < values.size(); ++i)
            push(indexed_keyword(stem3, i + 1), values[i]);
    };

    push("PRV_ID", record.entity_id);
    push_opt("PRV_NAME", record.entity_name);
    push_opt("PRV_GENT", record.generated_at);
    push_opt("PRV_LOC", record.location);
    push_opt("PRV_CTC", record.contact_name);
    push_opt("PRV_CTCE", record.contact_email);
    push_opt("PRV_ACT", record.activity_id);
    push_opt("PRV_ACTN", record.activity_name);
    push_opt("PRV_TSTR", record.activity_start);
    push_opt("PRV_TEND", record.activity_end);
    push_opt("PRV_DESC", record.description_name);
    push_opt("PRV_VER", record.description_version);
    push_family("USD", record.used_ids);
    push_family("GEN", record.sibling_generated_ids);

    std::vector<std::string> rendered_params;
    rendered_params.reserve(record.parameters.size());
    for (const auto& [name, value] : record.parameters)
        rendered_params.push_back(name + "=" + value);
    push_family("PAR", rendered_params);
    return cards;
}

// -------- parse --------

LastStepRecord parse_header_cards(const std::vector<std::string>& cards) {
    struct Entry {
        std::string keyword;
        std::string value;
        std::size_t index = 0;
    };
    std::vector<Entry> entries;
    std::optional<Entry> pending; // open '&' continuation chain

    auto commit_literal_amp = [&] {
        if (!pending) return;
        pending->value += '&'; // no CONTINUE followed: the marker was literal
        entries.push_back(std::move(*pending));
        pending.reset();
    };

    for (std::size_t i = 0; i < cards.size(); ++i) {
        const std::string kw = card_keyword(cards[i]);
        if (kw == "END") break;
        if (kw == "CONTINUE") {
            if (!pending) continue; // continuation of a card we do not track
            CardValue v = parse_continue_card(cards[i], i);
            if (v.continued) v.text.pop_back();
            pending->value += v.text;
            if (!v.continued) {
                entries.push_back(std::move(*pending));
                pending.reset();
            }
            continue;
        }
        commit_literal_amp();
        if (kw.rfind("PRV_", 0) != 0) continue;
        CardValue v = parse_value_card(cards[i], i);
        if (v.continued) v.text.pop_back();
        Entry entry{kw, std::move(v.text), i};
        if (v.continued)
            pending = std::move(entry);
        else
            entries.push_back(std::move(entry));
    }
    commit_literal_amp();

    if (entries.empty()) fail(Errc::no_provenance, "no PRV_ cards in header");

    LastStepRecord rec;
    std::map<std::string, std::optional<std::string>*> fixed{
        {"PRV_NAME", &rec.entity_name},
        {"PRV_GENT", &rec.generated_at},
        {"PRV_LOC", &rec.location},
        {"PRV_CTC", &rec.contact_name},
        {"PRV_CTCE", &rec.contact_email},
        {"PRV_ACT", &rec.activity_id},
        {"PRV_ACTN", &rec.activity_name},
        {"PRV_TSTR", &rec.activity_start},
        {"PRV_TEND", &rec.activity_end},
        {"PRV_DESC", &rec.description_name},
        {"PRV_VER", &rec.description_version},
    };

    bool has_id = false;
    std::map<std::size_t, std::string> used, siblings, params;
    for (const Entry& e : entries) {
        if (e.keyword == "PRV_ID") {
            if (has_id) fail(Errc::duplicate_keyword, "PRV_ID");
            has_id = true;
            rec.entity_id = e.value;
            continue;
        }
        if (auto it = fixed.find(e.keyword); it != fixed.end()) {
            if (it->second->has_value()) fail(Errc::duplicate_keyword, e.keyword);
            *it->second = e.value;
            continue;
        }
        auto take_family = [&](const char* stem3, std::map<std::size_t, std::string>& into) {
            const auto n = indexed_of(e.keyword, stem3);
            if (!n) return false;
            if (!into.emplace(*n, e.value).second)
                fail(Errc::duplicate_keyword, e.keyword);
            return true;
        };
        if (take_family("USD", used) || take_family("GEN", siblings) ||
            take_family("PAR", params))
            continue;
        fail(Errc::malformed_card, "card " + std::to_string(e.index + 1) +
                                       ": unknown provenance keyword '" + e.keyword + "'");
    }
    if (!has_id) fail(Errc::missing_field, "PRV_ID");

    for (auto& [n, value] : used) rec.used_ids.push_back(std::move(value));
    for (auto& [n, value] : siblings) rec.sibling_generated_ids.push_back(std::move(value));
    for (auto& [n, value] : params) {
        const std::size_t eq = value.find('=');
        if (eq == std::string::npos || eq == 0)
            fail(Errc::malformed_card,
                 "parameter entry " + std::to_string(n) + " is not name=value");
        rec.parameters.emplace_back(value.substr(0, eq), value.substr(eq + 1));
    }
    return rec;
}

// -------- reconstruct --------

ProvenanceDocument reconstruct_document(const std::vector<LastStepRecord>& records,
                                        const NamespaceMap& namespaces,
                                        const std::string& default_prefix) {
    ProvenanceDocument merged = make_document(default_prefix);
    merged.namespaces = namespaces;
    if (!default_prefix.empty() && !merged.namespaces.contains(default_prefix))
        merged.namespaces[default_prefix] = "http://example.org/" + default_prefix + "#";

    for (const LastStepRecord& rec : records) {
        ProvenanceDocument doc = make_document(default_prefix);
        doc.namespaces = merged.namespaces;
        auto qid = [&doc](const std::string& s) {
            return parse_qualified_id(s, doc.namespaces, doc.default_prefix);
        };

        Entity entity;
        entity.id = qid(rec.entity_id);
        entity.name = rec.entity_name;
        entity.generated_at = rec.generated_at;
        entity.location = rec.location;
        upsert(doc, entity);

        if (rec.contact_name) {
            Agent agent;
            agent.id = QualifiedId{doc.default_prefix, sanitized_local(*rec.contact_name)};
            agent.name = *rec.contact_name;
            agent.kind = AgentKind::person;
            agent.email = rec.contact_email;
            upsert(doc, agent);
            add_attribution(doc, {entity.id, agent.id, "contact"});
        }

        if (rec.activity_id) {
            Activity act;
            act.id = qid(*rec.activity_id);
            act.name = rec.activity_name;
            act.start_time = rec.activity_start;
            act.end_time = rec.activity_end;
            // description ids are not recoverable from a header, so the
            // description fields ride along as activity attributes
            if (rec.description_name)
                act.attributes["voprov:desc_name"] = *rec.description_name;
            if (rec.description_version)
                act.attributes["voprov:desc_version"] = *rec.description_version;
            upsert(doc, act);
            add_generated(doc, {entity.id, act.id, {}, {}});

            for (const std::string& used_id : rec.used_ids) {
                const QualifiedId uid = qid(used_id);
                add_stub(doc, uid, RecordClass::entity);
                add_used(doc, {act.id, uid, {}, {}});
            }
            for (const std::string& sib_id : rec.sibling_generated_ids) {
                const QualifiedId sid = qid(sib_id);
                add_stub(doc, sid, RecordClass::entity);
                add_generated(doc, {sid, act.id, {}, {}});
            }
            for (const auto& [name, value] : rec.parameters)
                add_parameter(doc, {act.id, name, value, narrowest_type(value)});
        }

        merged = merge_documents(merged, doc);
    }
    return merged;
}

} // namespace provkit
