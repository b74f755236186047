#include "kgprompt/prompt_assembly.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "kgprompt/error.hpp"
#include "kgprompt/text.hpp"

namespace kgprompt {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t basis = 1469598103934665603ull) {
    std::uint64_t h = basis;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

HashEmbedding::HashEmbedding(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim == 0) throw Error(ErrorKind::InvalidArgument, "embedding width must be >= 1");
}

Vector HashEmbedding::word(const std::string& token) const {
    std::mt19937_64 rng(fnv1a(token) ^ (seed_ * 0x9E3779B97F4A7C15ull));
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(dim_)));
    Vector v(dim_);
    for (double& x : v) x = dist(rng);
    return v;
}

TableEmbedding::TableEmbedding(const std::string& path, std::shared_ptr<const EmbeddingProvider> fallback)
    : fallback_(std::move(fallback)) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open embedding table '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue;
        Vector v;
        double x;
        while (ls >> x) v.push_back(x);
        if (dim_ == 0) dim_ = v.size();
        if (v.empty() || v.size() != dim_) {
            throw Error(ErrorKind::MalformedFile, path + ":" + std::to_string(lineno) + ": inconsistent vector width");
        }
        table_.emplace(std::move(token), std::move(v));
    }
    if (dim_ == 0) throw Error(ErrorKind::MalformedFile, "embedding table '" + path + "' is empty");
    if (fallback_ && fallback_->dim() != dim_) {
        throw Error(ErrorKind::DimensionMismatch, "fallback embedding width differs from table width");
    }
}

Vector TableEmbedding::word(const std::string& token) const {
    if (auto it = table_.find(token); it != table_.end()) return it->second;
    if (!fallback_) throw Error(ErrorKind::InvalidArgument, "token '" + token + "' not in embedding table");
    return fallback_->word(token);
}

Vector embed_phrase(const std::string& phrase, const EmbeddingProvider& table) {
    const auto toks = text::tokens(phrase);
    if (toks.empty()) throw Error(ErrorKind::InvalidArgument, "cannot embed an empty phrase");
    Vector acc(table.dim(), 0.0);
    for (const auto& t : toks) {
        const Vector w = table.word(t);
        if (w.size() != acc.size()) throw Error(ErrorKind::DimensionMismatch, "embedding width mismatch");
        axpy(1.0, w, acc);
    }
    scale(acc, 1.0 / static_cast<double>(toks.size()));
    return acc;
}

TokenEmbedding build_entity_prompt(const KnowledgeGraph& g, const std::string& category,
                                   const EmbeddingProvider& table) {
    const auto view = query_category(g, category);
    std::vector<Vector> rows{embed_phrase(category, table)};
    TokenEmbedding out;
    out.unit_meta.push_back("class:" + category);
    for (const auto& e : view.entities) {
        rows.push_back(embed_phrase(e.text, table));
        out.unit_meta.push_back("entity:" + e.text);
    }
    out.rows = Matrix::from_rows(rows);
    return out;
}

TokenEmbedding build_description_prompt(const std::vector<TripleDescription>& descriptions,
                                        const std::string& category, const EmbeddingProvider& table) {
    std::vector<Vector> rows{embed_phrase(category, table)};
    TokenEmbedding out;
    out.unit_meta.push_back("class:" + category);
    for (const auto& d : descriptions) {
        if (d.category != category) {
            throw Error(ErrorKind::CategoryMismatch,
                        "description '" + d.triple_key + "' belongs to '" + d.category + "', not '" + category + "'");
        }
        rows.push_back(embed_phrase(d.text, table));
        out.unit_meta.push_back("description:" + d.triple_key);
    }
    out.rows = Matrix::from_rows(rows);
    return out;
}

std::vector<Matrix> init_context(std::size_t num_classes, std::size_t context_len, std::size_t width,
                                 std::uint64_t seed) {
    if (num_classes < 2) throw Error(ErrorKind::InvalidArgument, "need at least two classes");
    if (context_len < 1) throw Error(ErrorKind::InvalidArgument, "context length must be >= 1");
    if (width < 1) throw Error(ErrorKind::InvalidArgument, "embedding width must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, kContextInitStd);
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < num_classes; ++k) {
        Matrix m(context_len, width);
        for (double& x : m.flat()) x = dist(rng);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<PromptBundle> build_prompt_bundles(const KnowledgeGraph& g, DescriptionCache& cache,
                                               LlmClient* client, const EmbeddingProvider& table,
                                               std::size_t context_len, std::uint64_t seed) {
    auto contexts = init_context(g.categories().size(), context_len, table.dim(), seed);
    std::vector<PromptBundle> out;
    for (std::size_t k = 0; k < g.categories().size(); ++k) {
        const std::string& c = g.categories()[k];
        PromptBundle b;
        b.category = c;
        b.entity_prompt = build_entity_prompt(g, c, table);
        b.description_prompt = build_description_prompt(generate_descriptions(g, c, client, cache), c, table);
        b.context = std::move(contexts[k]);
        b.class_embedding = embed_phrase(c, table);
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace kgprompt
