#include <doctest.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "generators.hpp"
#include "serialize.hpp"

using namespace provkit;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string golden(const std::string& name) {
    return slurp(std::string(PROVKIT_TEST_GOLDEN_DIR) + "/" + name);
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

// one calibration step with every record class and relation type present
ProvenanceDocument calibration_doc() {
    ProvenanceDocument doc = make_document("ex");
    auto qid = [&](const std::string& s) {
        return parse_qualified_id(s, doc.namespaces, doc.default_prefix);
    };

    Entity raw;
    raw.id = qid("ex:raw");
    raw.name = "Raw frame";
    raw.attributes["voprov:origin"] = "telescope";
    upsert(doc, raw);

    Entity lvl1;
    lvl1.id = qid("ex:lvl1");
    lvl1.name = "Calibrated frame";
    lvl1.generated_at = "2024-03-01T00:10:00Z";
    upsert(doc, lvl1);

    Activity cal;
    cal.id = qid("ex:calibrate");
    cal.name = "Calibrate";
    cal.start_time = "2024-03-01T00:00:00Z";
    cal.end_time = "2024-03-01T00:10:00Z";
    cal.description_ref = qid("ex:calibrate_desc");
    upsert(doc, cal);

    ActivityDescription desc;
    desc.id = qid("ex:calibrate_desc");
    desc.name = "Calibration step";
    desc.version = "1.2";
    desc.docurl = "https://example.org/docs/cal";
    desc.code_reference = CodeReference{"https://git.example.org/cal.git", "abc123"};
    upsert(doc, desc);

    Agent alice;
    alice.id = qid("ex:alice");
    alice.name = "Alice";
    alice.kind = AgentKind::person;
    alice.email = "alice@example.org";
    upsert(doc, alice);

    add_used(doc, {qid("ex:calibrate"), qid("ex:raw"), "input", "2024-03-01T00:00:05Z"});
    add_generated(doc, {qid("ex:lvl1"), qid("ex:calibrate"), {}, "2024-03-01T00:10:00Z"});
    add_association(doc, {qid("ex:calibrate"), qid("ex:alice"), "operator"});
    add_attribution(doc, {qid("ex:lvl1"), qid("ex:alice"), "contact"});
    add_parameter(doc, {qid("ex:calibrate"), "bias", "120", ValueType::integer});
    return doc;
}

std::optional<Errc> code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace

TEST_CASE("prov-json output matches the calibration golden byte for byte") {
    const ProvenanceDocument doc = calibration_doc();
    CHECK(to_prov_json(doc) == golden("chain.provjson"));
    // and the golden parses back to the identical document
    CHECK(from_prov_json(golden("chain.provjson")) == doc);
}

TEST_CASE("prov-n output matches the calibration golden byte for byte") {
    CHECK(to_prov_n(calibration_doc()) == golden("chain.provn"));
}

TEST_CASE("dot output matches the calibration golden byte for byte") {
    CHECK(to_dot(calibration_doc()) == golden("chain.dot"));
}

TEST_CASE("empty documents serialize to bare skeletons") {
    const ProvenanceDocument doc = make_document("ex");
    CHECK(to_prov_json(doc) ==
          R"({"prefix":{"default":"http://example.org/ex#","ex":"http://example.org/ex#",)"
          R"("prov":"http://www.w3.org/ns/prov#",)"
          R"("voprov":"http://www.ivoa.net/documents/ProvenanceDM/voprov#",)"
          R"("xsd":"http://www.w3.org/2001/XMLSchema#"}})");
    CHECK(to_prov_n(doc) == "document\n"
                            "  prefix ex <http://example.org/ex#>\n"
                            "  prefix prov <http://www.w3.org/ns/prov#>\n"
                            "  prefix voprov <http://www.ivoa.net/documents/ProvenanceDM/voprov#>\n"
                            "  prefix xsd <http://www.w3.org/2001/XMLSchema#>\n"
                            "endDocument\n");
    CHECK(to_dot(doc) == "digraph provenance {\n"
                         "  rankdir=BT;\n"
                         "  node [fontname=\"Helvetica\"];\n"
                         "}\n");
    const std::string svg = to_svg(doc);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(count_occurrences(svg, "data-layer") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("format and model names round-trip through their parsers") {
    for (auto f : {SerializationFormat::prov_json, SerializationFormat::prov_n,
                   SerializationFormat::prov_dot, SerializationFormat::prov_svg}) {
        CHECK(parse_format_name(format_name(f)) == f);
        CHECK(*mime_type(f) != '\0');
    }
    CHECK(parse_format_name("prov-json") == SerializationFormat::prov_json);
    CHECK(parse_format_name("Prov-Svg") == SerializationFormat::prov_svg);
    CHECK(!parse_format_name("prov-xml").has_value());
    CHECK(parse_model_name("ivoa") == Model::ivoa);
    CHECK(parse_model_name("w3c") == Model::w3c);
    CHECK(!parse_model_name("prov-o").has_value());
    CHECK(mime_type(SerializationFormat::prov_json) == std::string("application/json"));
    CHECK(mime_type(SerializationFormat::prov_svg) == std::string("image/svg+xml"));

    const ProvenanceDocument doc = calibration_doc();
    CHECK(serialize_document(doc, SerializationFormat::prov_json) == to_prov_json(doc));
    CHECK(serialize_document(doc, SerializationFormat::prov_n) == to_prov_n(doc));
    CHECK(serialize_document(doc, SerializationFormat::prov_dot) == to_dot(doc));
    CHECK(serialize_document(doc, SerializationFormat::prov_svg) == to_svg(doc));
}

TEST_CASE("svg places a two-step chain in five layers, final product on top") {
    const ProvenanceDocument doc = testkit::make_chain(2);
    const std::string svg = to_svg(doc);

    CHECK(count_occurrences(svg, "<ellipse ") == 3); // raw, lvl1, lvl2
    CHECK(count_occurrences(svg, "<rect ") == 2);    // a1, a2
    CHECK(count_occurrences(svg, "<polygon ") == 0);
    CHECK(count_occurrences(svg, "<line ") == 4); // 2 used + 2 wasGeneratedBy
    for (int layer = 0; layer < 5; ++layer)
        CHECK(count_occurrences(svg, "data-layer=\"" + std::to_string(layer) + "\"") == 1);
    CHECK(count_occurrences(svg, "data-layer") == 5);

    // the final product sits in layer 0, the original input in the deepest layer
    const std::size_t lvl2_glyph = svg.find("data-layer=\"0\"");
    const std::size_t raw_glyph = svg.find("data-layer=\"4\"");
    REQUIRE(lvl2_glyph != std::string::npos);
    REQUIRE(raw_glyph != std::string::npos);
    CHECK(svg.find("ex:lvl2", lvl2_glyph) < svg.find("</text>", svg.find("ex:lvl2", lvl2_glyph)));
    CHECK(svg.find(">ex:raw<") != std::string::npos);
    CHECK(svg.find(">ex:lvl2<") != std::string::npos);
}

TEST_CASE("svg refuses documents whose derivation graph is cyclic") {
    ProvenanceDocument doc = make_document("ex");
    auto qid = [&](const std::string& s) {
        return parse_qualified_id(s, doc.namespaces, doc.default_prefix);
    };
    Entity e;
    e.id = qid("ex:e1");
    upsert(doc, e);
    Activity a;
    a.id = qid("ex:a1");
    upsert(doc, a);
    add_used(doc, {qid("ex:a1"), qid("ex:e1"), {}, {}});
    add_generated(doc, {qid("ex:e1"), qid("ex:a1"), {}, {}});
    CHECK(code_of([&] { (void)to_svg(doc); }) == Errc::cyclic_graph);
}

TEST_CASE("parse-serialize identity holds over random documents") {
    testkit::DocGen gen(6364136223846793005ULL);
    for (int round = 0; round < 60; ++round) {
        const ProvenanceDocument doc = gen.random_document();
        const std::string text = to_prov_json(doc);
        const ProvenanceDocument back = from_prov_json(text);
        REQUIRE_MESSAGE(back == doc, "round " << round << " drifted through PROV-JSON");
        CHECK(to_prov_json(back) == text);
    }
}

TEST_CASE("every serializer is deterministic across invocations") {
    testkit::DocGen gen(88172645463325252ULL);
    for (int round = 0; round < 10; ++round) {
        const ProvenanceDocument doc = gen.random_document();
        CHECK(to_prov_json(doc) == to_prov_json(doc));
        CHECK(to_prov_n(doc) == to_prov_n(doc));
        CHECK(to_dot(doc) == to_dot(doc));
        CHECK(to_svg(doc) == to_svg(doc));
    }
}

TEST_CASE("each textual format enumerates every record and relation exactly once") {
    testkit::DocGen gen(2862933555777941757ULL);
    for (int round = 0; round < 15; ++round) {
        const ProvenanceDocument doc = gen.random_document();
        const std::size_t n_entity_stmts = doc.entities.size() + doc.descriptions.size();

        const auto parsed = nlohmann::json::parse(to_prov_json(doc));
        auto section_size = [&parsed](const char* key) -> std::size_t {
            return parsed.contains(key) ? parsed.at(key).size() : 0;
        };
        CHECK(section_size("entity") == n_entity_stmts);
        CHECK(section_size("activity") == doc.activities.size());
        CHECK(section_size("agent") == doc.agents.size());
        CHECK(section_size("used") == doc.used.size());
        CHECK(section_size("wasGeneratedBy") == doc.generated.size());
        CHECK(section_size("wasAssociatedWith") == doc.associations.size());
        CHECK(section_size("wasAttributedTo") == doc.attributions.size());

        const std::string provn = to_prov_n(doc);
        CHECK(count_occurrences(provn, "\n  entity(") == n_entity_stmts);
        CHECK(count_occurrences(provn, "\n  activity(") == doc.activities.size());
        CHECK(count_occurrences(provn, "\n  agent(") == doc.agents.size());
        CHECK(count_occurrences(provn, "\n  used(") == doc.used.size());
        CHECK(count_occurrences(provn, "\n  wasGeneratedBy(") == doc.generated.size());
        CHECK(count_occurrences(provn, "\n  wasAssociatedWith(") == doc.associations.size());
        CHECK(count_occurrences(provn, "\n  wasAttributedTo(") == doc.attributions.size());

        const std::string dot = to_dot(doc);
        CHECK(count_occurrences(dot, "[shape=") ==
              n_entity_stmts + doc.activities.size() + doc.agents.size() +
                  doc.parameters.size());
        std::size_t described = 0;
        for (const auto& [id, a] : doc.activities) described += a.description_ref.has_value();
        CHECK(count_occurrences(dot, "\" -> \"") ==
              doc.used.size() + doc.generated.size() + doc.associations.size() +
                  doc.attributions.size() + doc.parameters.size() + described);
    }
}

TEST_CASE("projection filters exactly what each option names") {
    const ProvenanceDocument doc = calibration_doc();

    SUBCASE("defaults keep description references but drop the records") {
        const ProvenanceDocument out = apply_projection(doc, {});
        CHECK(out.descriptions.empty());
        CHECK(out.activities.at("ex:calibrate").description_ref.has_value());
        CHECK(out.agents == doc.agents);
        CHECK(out.parameters == doc.parameters);
        CHECK(out.entities == doc.entities);
        CHECK(out.used == doc.used);
    }
    SUBCASE("agents=false removes agents and both agent relations, nothing else") {
        ProjectionOptions opts;
        opts.agents = false;
        const ProvenanceDocument out = apply_projection(doc, opts);
        CHECK(out.agents.empty());
        CHECK(out.associations.empty());
        CHECK(out.attributions.empty());
        CHECK(out.entities == doc.entities);
        CHECK(out.parameters == doc.parameters);
        CHECK(to_prov_json(out).find("ex:alice") == std::string::npos);
    }
    SUBCASE("configuration=false removes parameters only") {
        ProjectionOptions opts;
        opts.configuration = false;
        const ProvenanceDocument out = apply_projection(doc, opts);
        CHECK(out.parameters.empty());
        CHECK(out.agents == doc.agents);
        CHECK(to_prov_json(out).find("voprov:parameter_bias") == std::string::npos);
    }
    SUBCASE("descriptions=0 erases even the references") {
        ProjectionOptions opts;
        opts.descriptions = 0;
        const ProvenanceDocument out = apply_projection(doc, opts);
        CHECK(out.descriptions.empty());
        CHECK(!out.activities.at("ex:calibrate").description_ref.has_value());
        CHECK(to_prov_json(out).find("ex:calibrate_desc") == std::string::npos);
    }
    SUBCASE("descriptions=2 keeps the full records") {
        ProjectionOptions opts;
        opts.descriptions = 2;
        const ProvenanceDocument out = apply_projection(doc, opts);
        CHECK(out.descriptions == doc.descriptions);
        CHECK(out.activities.at("ex:calibrate").description_ref ==
              doc.activities.at("ex:calibrate").description_ref);
    }
    SUBCASE("attributes=false clears the free-form maps only") {
        ProjectionOptions opts;
        opts.attributes = false;
        const ProvenanceDocument out = apply_projection(doc, opts);
        CHECK(out.entities.at("ex:raw").attributes.empty());
        CHECK(out.entities.at("ex:raw").name == doc.entities.at("ex:raw").name);
        CHECK(out.parameters == doc.parameters);
        CHECK(to_prov_json(out).find("voprov:origin") == std::string::npos);
    }
}

TEST_CASE("w3c projection rewrites ivoa content into plain attributes") {
    const ProvenanceDocument doc = calibration_doc();

    SUBCASE("parameters fold into voprov:parameter_* attributes") {
        ProjectionOptions opts;
        opts.model = Model::w3c;
        const ProvenanceDocument out = apply_projection(doc, opts);
        CHECK(out.parameters.empty());
        CHECK(out.descriptions.empty());
        const Activity& act = out.activities.at("ex:calibrate");
        CHECK(!act.description_ref.has_value());
        CHECK(act.attributes.at("voprov:parameter_bias") == "120");
        CHECK(act.attributes.at("voprov:description") == "ex:calibrate_desc");
        CHECK(!act.attributes.contains("voprov:desc_name")); // level 1: reference only
        // the output carries no typed values anywhere
        CHECK(to_prov_json(out).find("\"$\"") == std::string::npos);
    }
    SUBCASE("descriptions=2 folds the description content onto the activity") {
        ProjectionOptions opts;
        opts.model = Model::w3c;
        opts.descriptions = 2;
        const ProvenanceDocument out = apply_projection(doc, opts);
        const Activity& act = out.activities.at("ex:calibrate");
        CHECK(act.attributes.at("voprov:desc_name") == "Calibration step");
        CHECK(act.attributes.at("voprov:desc_version") == "1.2");
        CHECK(act.attributes.at("voprov:desc_docurl") == "https://example.org/docs/cal");
        CHECK(act.attributes.at("voprov:code_ref") == "https://git.example.org/cal.git@abc123");
        CHECK(out.descriptions.empty());
    }
    SUBCASE("descriptions=0 under w3c leaves no trace of the description") {
        ProjectionOptions opts;
        opts.model = Model::w3c;
        opts.descriptions = 0;
        const ProvenanceDocument out = apply_projection(doc, opts);
        CHECK(to_prov_json(out).find("calibrate_desc") == std::string::npos);
    }
}

TEST_CASE("projection is idempotent for every option combination") {
    testkit::DocGen gen(3935559000370003845ULL);
    std::vector<ProjectionOptions> grid;
    for (Model model : {Model::ivoa, Model::w3c})
        for (bool agents : {true, false})
            for (bool configuration : {true, false})
                for (int descriptions : {0, 1, 2})
                    for (bool attributes : {true, false})
                        grid.push_back({model, agents, configuration, descriptions, attributes});

    for (int round = 0; round < 8; ++round) {
        const ProvenanceDocument doc = gen.random_document();
        for (const ProjectionOptions& opts : grid) {
            const ProvenanceDocument once = apply_projection(doc, opts);
            REQUIRE(apply_projection(once, opts) == once);
        }
    }
}

TEST_CASE("projection soundness: excluded classes leave no residue in the output") {
    testkit::DocGen gen(1442695040888963407ULL);
    for (int round = 0; round < 12; ++round) {
        const ProvenanceDocument doc = gen.random_document();

        ProjectionOptions no_agents;
        no_agents.agents = false;
        const ProvenanceDocument pa = apply_projection(doc, no_agents);
        CHECK(pa.agents.empty());
        CHECK(pa.associations.empty());
        CHECK(pa.attributions.empty());
        const std::string pa_json = to_prov_json(pa);
        for (const auto& [id, _] : doc.agents)
            CHECK_MESSAGE(pa_json.find("\"" + id + "\"") == std::string::npos,
                          "agent " << id << " leaked");

        ProjectionOptions no_cfg;
        no_cfg.configuration = false;
        CHECK(to_prov_json(apply_projection(doc, no_cfg)).find("voprov:parameter_") ==
              std::string::npos);

        ProjectionOptions no_desc;
        no_desc.descriptions = 0;
        const std::string nd_json = to_prov_json(apply_projection(doc, no_desc));
        for (const auto& [id, _] : doc.descriptions)
            CHECK(nd_json.find("\"" + id + "\"") == std::string::npos);
    }
}

TEST_CASE("stubs survive every textual format and the json round trip") {
    ProvenanceDocument doc = calibration_doc();
    auto qid = [&](const std::string& s) {
        return parse_qualified_id(s, doc.namespaces, doc.default_prefix);
    };
    add_stub(doc, qid("ex:ghost"), RecordClass::entity);
    add_stub(doc, qid("ex:mystery_agent"), RecordClass::agent);
    add_stub(doc, qid("ex:lost_desc"), RecordClass::description);
    add_used(doc, {qid("ex:calibrate"), qid("ex:ghost"), {}, {}});

    const std::string text = to_prov_json(doc);
    CHECK(from_prov_json(text) == doc);
    CHECK(count_occurrences(text, "\"voprov:stub\":\"true\"") == 3);

    const std::string provn = to_prov_n(doc);
    CHECK(count_occurrences(provn, "voprov:stub=\"true\"") == 3);
    CHECK(provn.find("entity(ex:ghost, [voprov:stub=\"true\"])") != std::string::npos);
    CHECK(provn.find("prov:type='voprov:ActivityDescription', voprov:stub=\"true\"") !=
          std::string::npos);

    const std::string dot = to_dot(doc);
    CHECK(count_occurrences(dot, "style=\"filled,dashed\"") == 3);

    const std::string svg = to_svg(doc);
    CHECK(count_occurrences(svg, "stroke-dasharray=\"4 2\"") == 3);
}

TEST_CASE("namespace table on parse: explicit prefixes win, defaults fill the gap") {
    SUBCASE("absent prefix section falls back to the provided defaults") {
        const ProvenanceDocument doc = from_prov_json("{}");
        CHECK(doc.namespaces == standard_namespaces());
        CHECK(doc.default_prefix == kDefaultPrefix);
    }
    SUBCASE("the default marker resolves to the matching prefix") {
        const ProvenanceDocument doc = from_prov_json(
            R"({"prefix":{"obs":"http://observatory.test/ns#",)"
            R"("default":"http://observatory.test/ns#"}})");
        CHECK(doc.default_prefix == "obs");
        CHECK(doc.namespaces ==
              NamespaceMap{{"obs", "http://observatory.test/ns#"}});
    }
    SUBCASE("a present but empty prefix section means no namespaces at all") {
        const ProvenanceDocument doc = from_prov_json(R"({"prefix":{}})");
        CHECK(doc.namespaces.empty());
        // ids can then no longer resolve their prefix
        CHECK(code_of([] {
                  (void)from_prov_json(R"({"prefix":{},"entity":{"bare":{}}})");
              }) == Errc::bad_record);
    }
}

TEST_CASE("parser rejects malformed input with the precise error class") {
    auto parse_code = [](const std::string& text) {
        return code_of([&] { (void)from_prov_json(text); });
    };

    SUBCASE("malformed json") {
        CHECK(parse_code("{") == Errc::malformed_json);
        CHECK(parse_code("[1,2,3]") == Errc::malformed_json);
        CHECK(parse_code(R"({"prefix":{"ex":5}})") == Errc::malformed_json);
        CHECK(parse_code(R"({"entity":[]})") == Errc::malformed_json);
    }
    SUBCASE("unknown top-level sections") {
        CHECK(parse_code(R"({"wasInformedBy":{}})") == Errc::unknown_section);
        CHECK(parse_code(R"({"bundle":{}})") == Errc::unknown_section);
    }
    SUBCASE("bad records") {
        CHECK(parse_code(R"({"entity":{"ex:e":{"prov:label":5}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"entity":{"":{}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"agent":{"ex:a":{"prov:type":"prov:Robot"}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"agent":{"ex:a":{"favorite_color":"blue"}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"activity":{"ex:a":{"voprov:parameter_p":{"$":"1"}}}})") ==
              Errc::bad_record);
        CHECK(parse_code(
                  R"({"activity":{"ex:a":{"other":{"$":"1","type":"xsd:integer"}}}})") ==
              Errc::bad_record);
        CHECK(parse_code(
                  R"({"activity":{"ex:a":{"voprov:parameter_p":{"$":"1","type":"xsd:float"}}}})") ==
              Errc::bad_record);
        CHECK(parse_code(R"({"entity":{"ex:d":{"prov:type":"voprov:ActivityDescription",)"
                         R"("voprov:code_revision":"r1"}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"entity":{"ex:d":{"prov:type":"voprov:ActivityDescription",)"
                         R"("bogus":"x"}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"used":{"_:u1":{"prov:activity":"ex:a"}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"used":{"_:u1":{"prov:activity":"ex:a","prov:entity":"ex:e",)"
                         R"("extra":"1"}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"wasAttributedTo":{"_:at1":{"prov:entity":"ex:e",)"
                         R"("prov:agent":"ex:g","prov:time":"2024-01-01T00:00:00Z"}}})") ==
              Errc::bad_record);
        CHECK(parse_code(R"({"entity":{"ex:e":{"voprov:stub":"yes"}}})") == Errc::bad_record);
        CHECK(parse_code(R"({"entity":{"ex:e":{"voprov:stub":"true","prov:label":"x"}}})") ==
              Errc::bad_record);
        CHECK(parse_code(
                  R"({"used":{"_:u1":{"prov:activity":"ex:a","prov:entity":"ex:e",)"
                  R"("prov:time":"2024-01-01T00:00:00Z"},)"
                  R"("_:u2":{"prov:activity":"ex:a","prov:entity":"ex:e",)"
                  R"("prov:time":"2024-01-01T00:00:07Z"}}})") == Errc::bad_record);
    }
}
