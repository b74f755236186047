#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgprompt/description_gen.hpp"
#include "kgprompt/kg_store.hpp"
#include "kgprompt/linalg.hpp"

namespace kgprompt {

// Word-level embedding lookup. Implementations must be deterministic.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    virtual Vector word(const std::string& token) const = 0;
};

// Each token maps to a Gaussian vector (std 1/sqrt(m)) seeded by a hash of
// the token and the provider seed.
class HashEmbedding : public EmbeddingProvider {
public:
    HashEmbedding(std::size_t dim, std::uint64_t seed);
    std::size_t dim() const override { return dim_; }
    Vector word(const std::string& token) const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

// Vocabulary adapter for exported encoder tables. File format: one token per
// line followed by `dim` floats, whitespace separated. Out-of-vocabulary
// tokens fall back to `fallback`.
class TableEmbedding : public EmbeddingProvider {
public:
    TableEmbedding(const std::string& path, std::shared_ptr<const EmbeddingProvider> fallback);
    std::size_t dim() const override { return dim_; }
    Vector word(const std::string& token) const override;

private:
    std::size_t dim_ = 0;
    std::unordered_map<std::string, Vector> table_;
    std::shared_ptr<const EmbeddingProvider> fallback_;
};

// Mean of the word vectors of `text`. Throws InvalidArgument if the phrase
// has no tokens.
Vector embed_phrase(const std::string& text, const EmbeddingProvider& table);

struct TokenEmbedding {
    Matrix rows;
    std::vector<std::string> unit_meta;  // "class:..", "entity:..", "description:.."
};

// Rows: class name, then one pooled row per entity of `category` in id order.
TokenEmbedding build_entity_prompt(const KnowledgeGraph& g, const std::string& category,
                                   const EmbeddingProvider& table);

// Rows: class name, then one pooled row per description.
TokenEmbedding build_description_prompt(const std::vector<TripleDescription>& descriptions,
                                        const std::string& category, const EmbeddingProvider& table);

inline constexpr double kContextInitStd = 0.02;
inline constexpr std::size_t kDefaultContextLength = 2;

// K independent context matrices of shape context_len x width.
std::vector<Matrix> init_context(std::size_t num_classes, std::size_t context_len, std::size_t width,
                                 std::uint64_t seed);

struct PromptBundle {
    std::string category;
    TokenEmbedding entity_prompt;
    TokenEmbedding description_prompt;
    Matrix context;
    Vector class_embedding;
};

// Bundles for every category of `g` in graph order. Descriptions come from
// `cache` (and `client` on a miss).
std::vector<PromptBundle> build_prompt_bundles(const KnowledgeGraph& g, DescriptionCache& cache,
                                               LlmClient* client, const EmbeddingProvider& table,
                                               std::size_t context_len, std::uint64_t seed);

}  // namespace kgprompt
