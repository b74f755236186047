#include "kgprompt/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kgprompt/error.hpp"
#include "kgprompt/http.hpp"
#include "kgprompt/text.hpp"

namespace kgprompt {

namespace {
constexpr std::size_t kMaxEntityWords = 8;
}

std::string_view dimension_name(Dimension d) {
    switch (d) {
        case Dimension::CategoryRelatedTerm: return "category_related_term";
        case Dimension::SymbolicMeaning: return "symbolic_meaning";
        case Dimension::InherentCharacteristic: return "inherent_characteristic";
    }
    return "";
}

Dimension parse_dimension(std::string_view s) {
    if (s == "category_related_term") return Dimension::CategoryRelatedTerm;
    if (s == "symbolic_meaning") return Dimension::SymbolicMeaning;
    if (s == "inherent_characteristic") return Dimension::InherentCharacteristic;
    throw Error(ErrorKind::InvalidEntity, "unknown entity dimension '" + std::string(s) + "'");
}

std::string triple_key(const Triple& t) { return t.head + "|" + t.relation + "|" + t.tail; }

KnowledgeGraph KnowledgeGraph::create(std::vector<std::string> categories, std::vector<std::string> relations,
                                      std::vector<Entity> entities, std::vector<Triple> triples) {
    KnowledgeGraph g;
    std::sort(categories.begin(), categories.end());
    if (auto it = std::adjacent_find(categories.begin(), categories.end()); it != categories.end()) {
        throw Error(ErrorKind::DuplicateEntry, "duplicate category '" + *it + "'");
    }
    std::sort(relations.begin(), relations.end());
    if (auto it = std::adjacent_find(relations.begin(), relations.end()); it != relations.end()) {
        throw Error(ErrorKind::DuplicateEntry, "duplicate relation '" + *it + "'");
    }
    std::sort(entities.begin(), entities.end(), [](const Entity& a, const Entity& b) { return a.id < b.id; });
    std::sort(triples.begin(), triples.end());

    for (std::size_t i = 0; i < entities.size(); ++i) {
        const Entity& e = entities[i];
        if (e.id.empty()) throw Error(ErrorKind::InvalidEntity, "entity with empty id");
        if (i > 0 && entities[i - 1].id == e.id) {
            throw Error(ErrorKind::DuplicateEntry, "duplicate entity id '" + e.id + "'");
        }
        const auto words = text::word_count(e.text);
        if (words == 0 || words > kMaxEntityWords) {
            throw Error(ErrorKind::InvalidEntity, "entity '" + e.id + "' text must have 1.." +
                                                      std::to_string(kMaxEntityWords) + " words");
        }
        if (!std::binary_search(categories.begin(), categories.end(), e.category)) {
            throw Error(ErrorKind::UnknownCategory,
                        "entity '" + e.id + "' anchored to unknown category '" + e.category + "'");
        }
        g.index_.emplace(e.id, i);
    }
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const Triple& t = triples[i];
        if (i > 0 && triples[i - 1] == t) {
            throw Error(ErrorKind::DuplicateEntry, "duplicate triple '" + triple_key(t) + "'");
        }
        for (const auto* id : {&t.head, &t.tail}) {
            if (!g.index_.contains(*id)) {
                throw Error(ErrorKind::DanglingReference,
                            "triple '" + triple_key(t) + "' references unknown entity '" + *id + "'");
            }
        }
        if (!std::binary_search(relations.begin(), relations.end(), t.relation)) {
            throw Error(ErrorKind::DanglingReference,
                        "triple '" + triple_key(t) + "' uses undeclared relation '" + t.relation + "'");
        }
    }
    for (const auto& c : categories) {
        const bool any =
            std::any_of(entities.begin(), entities.end(), [&](const Entity& e) { return e.category == c; });
        if (!any) throw Error(ErrorKind::EmptyCategory, "category '" + c + "' has no entities");
    }

    g.categories_ = std::move(categories);
    g.relations_ = std::move(relations);
    g.entities_ = std::move(entities);
    g.triples_ = std::move(triples);
    return g;
}

const Entity& KnowledgeGraph::entity(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw Error(ErrorKind::DanglingReference, "unknown entity '" + std::string(id) + "'");
    }
    return entities_[it->second];
}

bool KnowledgeGraph::has_category(std::string_view c) const {
    return std::binary_search(categories_.begin(), categories_.end(), c);
}

std::size_t KnowledgeGraph::category_index(std::string_view c) const {
    auto it = std::lower_bound(categories_.begin(), categories_.end(), c);
    if (it == categories_.end() || *it != c) {
        throw Error(ErrorKind::UnknownCategory, "unknown category '" + std::string(c) + "'");
    }
    return static_cast<std::size_t>(it - categories_.begin());
}

namespace {

using json = nlohmann::json;

const json& require(const json& obj, const char* key, json::value_t type, const char* where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorKind::MalformedFile, std::string(where) + ": missing key '" + key + "'");
    }
    const json& v = obj.at(key);
    if (v.type() != type) {
        throw Error(ErrorKind::MalformedFile, std::string(where) + ": key '" + key + "' has wrong type");
    }
    return v;
}

std::vector<std::string> string_array(const json& arr, const char* where) {
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw Error(ErrorKind::MalformedFile, std::string(where) + ": expected strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

KnowledgeGraph parse_kg(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::MalformedFile, std::string("knowledge graph is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::MalformedFile, "knowledge graph must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "categories" && key != "relations" && key != "entities" && key != "triples") {
            throw Error(ErrorKind::MalformedFile, "unexpected top-level key '" + key + "'");
        }
    }
    auto categories = string_array(require(doc, "categories", json::value_t::array, "graph"), "categories");
    auto relations = string_array(require(doc, "relations", json::value_t::array, "graph"), "relations");

    std::vector<Entity> entities;
    for (const auto& e : require(doc, "entities", json::value_t::array, "graph")) {
        Entity ent;
        ent.id = require(e, "id", json::value_t::string, "entity").get<std::string>();
        ent.text = require(e, "text", json::value_t::string, "entity").get<std::string>();
        ent.dimension = parse_dimension(require(e, "dimension", json::value_t::string, "entity").get<std::string>());
        ent.category = require(e, "category", json::value_t::string, "entity").get<std::string>();
        entities.push_back(std::move(ent));
    }
    std::vector<Triple> triples;
    for (const auto& t : require(doc, "triples", json::value_t::array, "graph")) {
        triples.push_back({require(t, "head", json::value_t::string, "triple").get<std::string>(),
                           require(t, "relation", json::value_t::string, "triple").get<std::string>(),
                           require(t, "tail", json::value_t::string, "triple").get<std::string>()});
    }
    return KnowledgeGraph::create(std::move(categories), std::move(relations), std::move(entities),
                                  std::move(triples));
}

std::string serialize_kg(const KnowledgeGraph& g) {
    nlohmann::ordered_json doc;
    doc["categories"] = g.categories();
    doc["relations"] = g.relations();
    auto& ents = doc["entities"] = nlohmann::ordered_json::array();
    for (const auto& e : g.entities()) {
        ents.push_back({{"id", e.id},
                        {"text", e.text},
                        {"dimension", std::string(dimension_name(e.dimension))},
                        {"category", e.category}});
    }
    auto& trs = doc["triples"] = nlohmann::ordered_json::array();
    for (const auto& t : g.triples()) {
        trs.push_back({{"head", t.head}, {"relation", t.relation}, {"tail", t.tail}});
    }
    return doc.dump(2) + "\n";
}

KnowledgeGraph load_kg_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open knowledge graph file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_kg(ss.str());
}

CategoryView query_category(const KnowledgeGraph& g, std::string_view category) {
    if (!g.has_category(category)) {
        throw Error(ErrorKind::UnknownCategory, "unknown category '" + std::string(category) + "'");
    }
    CategoryView view;
    for (const auto& e : g.entities()) {
        if (e.category == category) view.entities.push_back(e);
    }
    for (const auto& t : g.triples()) {
        if (g.entity(t.head).category == category || g.entity(t.tail).category == category) {
            view.triples.push_back(t);
        }
    }
    return view;
}

HttpKgSourceClient::HttpKgSourceClient(std::string base_url, int timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {}

std::string HttpKgSourceClient::query(const std::string& category) {
    return http::get(base_url_, {{"q", category}}, timeout_seconds_);
}

namespace {

std::string edge_field(const json& edge, const char* flat, const char* nested) {
    if (edge.contains(flat) && edge.at(flat).is_string()) return edge.at(flat).get<std::string>();
    if (edge.contains(nested) && edge.at(nested).is_object()) {
        const auto& n = edge.at(nested);
        if (n.contains("label") && n.at("label").is_string()) return n.at("label").get<std::string>();
    }
    throw Error(ErrorKind::UnparseableResponse, std::string("candidate edge missing '") + flat + "'");
}

}  // namespace

std::vector<CandidateEdge> fetch_subgraph(KgSourceClient& client, const std::string& category) {
    const std::string body = client.query(category);
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error&) {
        throw Error(ErrorKind::UnparseableResponse, "knowledge source response is not JSON");
    }
    if (!doc.is_object() || !doc.contains("edges") || !doc.at("edges").is_array()) {
        throw Error(ErrorKind::UnparseableResponse, "knowledge source response has no 'edges' array");
    }
    std::vector<CandidateEdge> out;
    for (const auto& edge : doc.at("edges")) {
        if (!edge.is_object()) throw Error(ErrorKind::UnparseableResponse, "edge is not an object");
        out.push_back({edge_field(edge, "head", "start"), edge_field(edge, "relation", "rel"),
                       edge_field(edge, "tail", "end")});
    }
    return out;
}

}  // namespace kgprompt
