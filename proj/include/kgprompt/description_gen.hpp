#pragma once

// Turns knowledge-graph triples into short discriminative descriptions by
// asking a language model a fixed question per triple. Answers are cached by
// triple key so that everything downstream runs offline once the cache is
// populated.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kgprompt/kg_store.hpp"

namespace kgprompt {

inline constexpr std::size_t kMaxDescriptionWords = 30;

struct TripleDescription {
    std::string triple_key;
    std::string category;
    std::string text;

    bool operator==(const TripleDescription&) const = default;
};

std::string render_question(std::string_view head, std::string_view relation, std::string_view tail);
// Substitutes entity surface text for head and tail.
std::string render_question(const KnowledgeGraph& g, const Triple& t);

struct CacheEntry {
    std::string category;
    std::string text;

    bool operator==(const CacheEntry&) const = default;
};

class DescriptionCache {
public:
    const CacheEntry* find(const std::string& key) const;
    void put(const std::string& key, CacheEntry entry);
    std::size_t size() const noexcept { return entries_.size(); }
    const std::map<std::string, CacheEntry>& entries() const noexcept { return entries_; }

    bool operator==(const DescriptionCache&) const = default;

private:
    std::map<std::string, CacheEntry> entries_;
};

DescriptionCache parse_cache(std::string_view bytes);
std::string serialize_cache(const DescriptionCache& cache);
DescriptionCache load_cache(const std::string& path);
void save_cache(const DescriptionCache& cache, const std::string& path);

class LlmClient {
public:
    virtual ~LlmClient() = default;
    // Answer text for one question. Throws NetworkError or EmptyResponse.
    virtual std::string complete(const std::string& question) = 0;
};

// Chat-completion style POST. The bearer token is read from the
// KGPROMPT_LLM_TOKEN environment variable at construction.
class HttpLlmClient : public LlmClient {
public:
    explicit HttpLlmClient(std::string url, std::string model = {}, int timeout_seconds = 60);
    std::string complete(const std::string& question) override;

private:
    std::string url_;
    std::string model_;
    std::string token_;
    int timeout_seconds_;
};

// Extracts the answer text from a chat-completion or completion response.
std::string extract_answer(std::string_view response_body);

// One description per triple of `category`, in canonical triple order.
// `client` may be null when the cache is expected to be complete.
std::vector<TripleDescription> generate_descriptions(const KnowledgeGraph& g, const std::string& category,
                                                     LlmClient* client, DescriptionCache& cache);

}  // namespace kgprompt
