#include <doctest.h>

#include <cstdlib>
#include <regex>

#include <json.hpp>

#include "check_kind.hpp"
#include "fixtures.hpp"
#include "kgprompt/description_gen.hpp"
#include "kgprompt/text.hpp"

using namespace kgprompt;

namespace {

KnowledgeGraph small_graph() {
    using D = Dimension;
    return KnowledgeGraph::create({"3D mask", "real face"}, {"has_characteristic", "symbolizes"},
                                  {{"3d_mask", "3D mask", D::CategoryRelatedTerm, "3D mask"},
                                   {"uniform_texture", "uniform texture", D::InherentCharacteristic, "3D mask"},
                                   {"fake", "fake", D::SymbolicMeaning, "3D mask"},
                                   {"real_face", "real face", D::CategoryRelatedTerm, "real face"},
                                   {"skin", "skin", D::InherentCharacteristic, "real face"}},
                                  {{"3d_mask", "has_characteristic", "uniform_texture"},
                                   {"3d_mask", "symbolizes", "fake"},
                                   {"real_face", "has_characteristic", "skin"}});
}

std::string words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
    return s;
}

}  // namespace

TEST_SUITE("description_gen") {

TEST_CASE("question template") {
    CHECK(render_question("3D mask", "has_characteristic", "uniform texture") ==
          "In 3D mask face presentation attack detection, please analyze the sentence "
          "[3D mask][has_characteristic][uniform texture] in 30 words or less.");
    CHECK(render_question("a", "b", "c") ==
          "In 3D mask face presentation attack detection, please analyze the sentence [a][b][c] in 30 words or less.");
    const auto g = small_graph();
    const auto q1 = render_question(g, g.triples().front());
    CHECK(q1 == render_question(g, g.triples().front()));
    const std::regex shape(
        R"(^In 3D mask face presentation attack detection, please analyze the sentence \[.+\]\[.+\]\[.+\] in 30 words or less\.$)");
    const auto full = load_kg_file(fixtures::kg_fixture());
    for (const auto& t : full.triples()) CHECK(std::regex_match(render_question(full, t), shape));
}

TEST_CASE("cached descriptions need no client calls") {
    const auto g = load_kg_file(fixtures::kg_fixture());
    auto cache = load_cache(fixtures::cache_fixture());
    fixtures::CountingLlm llm("unused");
    const auto mask = generate_descriptions(g, "3D mask", &llm, cache);
    const auto real = generate_descriptions(g, "real face", &llm, cache);
    CHECK(llm.calls == 0);
    CHECK(mask.size() == query_category(g, "3D mask").triples.size());
    CHECK(real.size() == query_category(g, "real face").triples.size());
    CHECK(mask.size() + real.size() == 42);
    for (const auto& d : mask) {
        CHECK(d.category == "3D mask");
        CHECK(!d.text.empty());
        CHECK(text::word_count(d.text) <= kMaxDescriptionWords);
    }
    // Offline entirely: a null client is fine when the cache is complete.
    CHECK(generate_descriptions(g, "real face", nullptr, cache).size() == real.size());
}

TEST_CASE("misses are generated once, stored, and truncated") {
    const auto g = small_graph();
    DescriptionCache cache;
    const std::string twelve = words(12);
    fixtures::CountingLlm short_llm(twelve);
    const auto real = generate_descriptions(g, "real face", &short_llm, cache);
    CHECK(short_llm.calls == 1);
    REQUIRE(real.size() == 1);
    CHECK(real[0].text == twelve);
    CHECK(short_llm.questions[0] ==
          "In 3D mask face presentation attack detection, please analyze the sentence "
          "[real face][has_characteristic][skin] in 30 words or less.");

    fixtures::CountingLlm long_llm(words(45));
    const auto mask = generate_descriptions(g, "3D mask", &long_llm, cache);
    CHECK(long_llm.calls == 2);
    REQUIRE(mask.size() == 2);
    CHECK(mask[0].text == words(30));
    CHECK(text::word_count(mask[0].text) == 30);
    CHECK(cache.size() == 3);

    generate_descriptions(g, "3D mask", &long_llm, cache);
    CHECK(long_llm.calls == 2);
}

TEST_CASE("client failures") {
    const auto g = small_graph();
    DescriptionCache cache;
    CHECK_KIND(generate_descriptions(g, "3D mask", nullptr, cache), ErrorKind::Network);
    fixtures::CountingLlm blank("   ");
    CHECK_KIND(generate_descriptions(g, "3D mask", &blank, cache), ErrorKind::EmptyResponse);
    CHECK(cache.size() == 0);
    CHECK_KIND(generate_descriptions(g, "nope", &blank, cache), ErrorKind::UnknownCategory);
}

TEST_CASE("cache file round trip") {
    fixtures::TempDir dir;
    DescriptionCache empty;
    save_cache(empty, dir.file("empty.json"));
    CHECK(load_cache(dir.file("empty.json")) == empty);

    DescriptionCache two;
    two.put("z|r|y", {"b", "second"});
    two.put("a|r|b", {"a", "first"});
    save_cache(two, dir.file("two.json"));
    const auto bytes = fixtures::read_file(dir.file("two.json"));
    CHECK(bytes.find("a|r|b") < bytes.find("z|r|y"));
    CHECK(load_cache(dir.file("two.json")) == two);
    CHECK(serialize_cache(load_cache(dir.file("two.json"))) == bytes);

    fixtures::write_file(dir.file("bad.json"), "{\"entries\": 3");
    CHECK_KIND(load_cache(dir.file("bad.json")), ErrorKind::MalformedFile);
    CHECK_KIND(parse_cache(R"({"entries": {}, "version": 2})"), ErrorKind::MalformedFile);
    CHECK_KIND(load_cache(dir.file("absent.json")), ErrorKind::Io);
}

TEST_CASE("bundled cache is canonical and covers every triple") {
    const auto bytes = fixtures::read_file(fixtures::cache_fixture());
    const auto cache = parse_cache(bytes);
    CHECK(serialize_cache(cache) == bytes);
    const auto g = load_kg_file(fixtures::kg_fixture());
    CHECK(cache.size() == g.triples().size());
    for (const auto& t : g.triples()) {
        const auto* e = cache.find(triple_key(t));
        REQUIRE(e != nullptr);
        CHECK(e->category == g.entity(t.head).category);
        CHECK(text::word_count(e->text) <= kMaxDescriptionWords);
    }
}

TEST_CASE("answer extraction") {
    CHECK(extract_answer(R"({"choices":[{"message":{"role":"assistant","content":"hi there"}}]})") == "hi there");
    CHECK(extract_answer(R"({"choices":[{"text":"plain"}]})") == "plain");
    CHECK(extract_answer(R"({"text":"top"})") == "top");
    CHECK_KIND(extract_answer(R"({"choices":[]})"), ErrorKind::UnparseableResponse);
    CHECK_KIND(extract_answer("not json"), ErrorKind::UnparseableResponse);
}

TEST_CASE("http language model client") {
    std::string auth, body;
    fixtures::LocalServer server([&](httplib::Server& s) {
        s.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
            auth = req.get_header_value("Authorization");
            body = req.body;
            res.set_content(R"({"choices":[{"message":{"content":"Masks show uniform texture."}}]})",
                            "application/json");
        });
        s.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    });
    setenv("KGPROMPT_LLM_TOKEN", "secret-token", 1);
    HttpLlmClient client(server.url("/v1/chat"), "test-model");
    unsetenv("KGPROMPT_LLM_TOKEN");
    CHECK(client.complete("question?") == "Masks show uniform texture.");
    CHECK(auth == "Bearer secret-token");
    const auto j = nlohmann::json::parse(body);
    CHECK(j["model"] == "test-model");
    CHECK(j["messages"][0]["content"] == "question?");

    HttpLlmClient broken(server.url("/broken"));
    CHECK_KIND(broken.complete("q"), ErrorKind::Network);
}

}
