#pragma once

// Task knowledge graph: categories, entities, relation labels and
// (head, relation, tail) triples. Graphs are validated on construction and
// immutable afterwards; all collections are kept in canonical sorted order.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kgprompt {

enum class Dimension { CategoryRelatedTerm, SymbolicMeaning, InherentCharacteristic };

std::string_view dimension_name(Dimension d);
Dimension parse_dimension(std::string_view s);

struct Entity {
    std::string id;
    std::string text;
    Dimension dimension = Dimension::CategoryRelatedTerm;
    std::string category;

    bool operator==(const Entity&) const = default;
};

struct Triple {
    std::string head;
    std::string relation;
    std::string tail;

    auto operator<=>(const Triple&) const = default;
};

// Canonical "head|relation|tail" key.
std::string triple_key(const Triple& t);

class KnowledgeGraph {
public:
    // Validates and canonicalizes. Throws Error with DuplicateEntry,
    // InvalidEntity, UnknownCategory, DanglingReference or EmptyCategory.
    static KnowledgeGraph create(std::vector<std::string> categories, std::vector<std::string> relations,
                                 std::vector<Entity> entities, std::vector<Triple> triples);

    const std::vector<std::string>& categories() const noexcept { return categories_; }
    const std::vector<std::string>& relations() const noexcept { return relations_; }
    const std::vector<Entity>& entities() const noexcept { return entities_; }
    const std::vector<Triple>& triples() const noexcept { return triples_; }

    const Entity& entity(std::string_view id) const;
    bool has_category(std::string_view c) const;
    std::size_t category_index(std::string_view c) const;

    bool operator==(const KnowledgeGraph& o) const {
        return categories_ == o.categories_ && relations_ == o.relations_ && entities_ == o.entities_ &&
               triples_ == o.triples_;
    }

private:
    KnowledgeGraph() = default;

    std::vector<std::string> categories_;
    std::vector<std::string> relations_;
    std::vector<Entity> entities_;
    std::vector<Triple> triples_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

KnowledgeGraph parse_kg(std::string_view bytes);
std::string serialize_kg(const KnowledgeGraph& g);

// Reads and parses a graph file; a missing or unreadable file is an Io error.
KnowledgeGraph load_kg_file(const std::string& path);

struct CategoryView {
    std::vector<Entity> entities;  // id-sorted
    std::vector<Triple> triples;   // canonical order
};

CategoryView query_category(const KnowledgeGraph& g, std::string_view category);

// Candidate edge retrieved from a public knowledge graph. Candidates are
// surfaced for manual curation and never merged into a graph by this library.
struct CandidateEdge {
    std::string head;
    std::string relation;
    std::string tail;

    bool operator==(const CandidateEdge&) const = default;
};

class KgSourceClient {
public:
    virtual ~KgSourceClient() = default;
    // Raw response body for a category query. Throws NetworkError.
    virtual std::string query(const std::string& category) = 0;
};

// HTTP GET {base_url}?q={category}.
class HttpKgSourceClient : public KgSourceClient {
public:
    explicit HttpKgSourceClient(std::string base_url, int timeout_seconds = 10);
    std::string query(const std::string& category) override;

private:
    std::string base_url_;
    int timeout_seconds_;
};

// Accepts either {"edges":[{"head","relation","tail"}]} or ConceptNet-style
// {"edges":[{"start":{"label"},"rel":{"label"},"end":{"label"}}]}.
std::vector<CandidateEdge> fetch_subgraph(KgSourceClient& client, const std::string& category);

}  // namespace kgprompt
