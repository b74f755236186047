#include "kgprompt/description_gen.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kgprompt/error.hpp"
#include "kgprompt/http.hpp"
#include "kgprompt/text.hpp"

namespace kgprompt {

using json = nlohmann::json;

std::string render_question(std::string_view head, std::string_view relation, std::string_view tail) {
    std::string q = "In 3D mask face presentation attack detection, please analyze the sentence [";
    q += head;
    q += "][";
    q += relation;
    q += "][";
    q += tail;
    q += "] in 30 words or less.";
    return q;
}

std::string render_question(const KnowledgeGraph& g, const Triple& t) {
    return render_question(g.entity(t.head).text, t.relation, g.entity(t.tail).text);
}

const CacheEntry* DescriptionCache::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

void DescriptionCache::put(const std::string& key, CacheEntry entry) { entries_[key] = std::move(entry); }

DescriptionCache parse_cache(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::MalformedFile, std::string("description cache is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_object()) {
        throw Error(ErrorKind::MalformedFile, "description cache has no 'entries' object");
    }
    if (!doc.contains("version") || doc.at("version") != 1) {
        throw Error(ErrorKind::MalformedFile, "unsupported description cache version");
    }
    DescriptionCache cache;
    for (const auto& [key, value] : doc.at("entries").items()) {
        if (!value.is_object() || !value.contains("category") || !value.contains("text") ||
            !value.at("category").is_string() || !value.at("text").is_string()) {
            throw Error(ErrorKind::MalformedFile, "malformed cache entry '" + key + "'");
        }
        cache.put(key, {value.at("category").get<std::string>(), value.at("text").get<std::string>()});
    }
    return cache;
}

std::string serialize_cache(const DescriptionCache& cache) {
    // json objects are std::map backed, so keys come out sorted.
    json doc;
    doc["version"] = 1;
    doc["entries"] = json::object();
    for (const auto& [key, e] : cache.entries()) {
        doc["entries"][key] = {{"category", e.category}, {"text", e.text}};
    }
    return doc.dump(2) + "\n";
}

DescriptionCache load_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open description cache '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_cache(ss.str());
}

void save_cache(const DescriptionCache& cache, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write description cache '" + path + "'");
    out << serialize_cache(cache);
}

HttpLlmClient::HttpLlmClient(std::string url, std::string model, int timeout_seconds)
    : url_(std::move(url)), model_(std::move(model)), timeout_seconds_(timeout_seconds) {
    if (const char* tok = std::getenv("KGPROMPT_LLM_TOKEN")) token_ = tok;
}

std::string HttpLlmClient::complete(const std::string& question) {
    json body;
    if (!model_.empty()) body["model"] = model_;
    body["messages"] = json::array({{{"role", "user"}, {"content", question}}});
    return extract_answer(http::post_json(url_, body.dump(), token_, timeout_seconds_));
}

std::string extract_answer(std::string_view response_body) {
    json doc;
    try {
        doc = json::parse(response_body.begin(), response_body.end());
    } catch (const json::parse_error&) {
        throw Error(ErrorKind::UnparseableResponse, "language model response is not JSON");
    }
    auto text_at = [](const json& j, std::initializer_list<const char*> path) -> const json* {
        const json* cur = &j;
        for (const char* key : path) {
            if (!cur->is_object() || !cur->contains(key)) return nullptr;
            cur = &cur->at(key);
        }
        return cur->is_string() ? cur : nullptr;
    };
    if (doc.contains("choices") && doc.at("choices").is_array() && !doc.at("choices").empty()) {
        const json& first = doc.at("choices").front();
        if (const json* t = text_at(first, {"message", "content"})) return t->get<std::string>();
        if (const json* t = text_at(first, {"text"})) return t->get<std::string>();
    }
    if (const json* t = text_at(doc, {"text"})) return t->get<std::string>();
    if (const json* t = text_at(doc, {"content"})) return t->get<std::string>();
    throw Error(ErrorKind::UnparseableResponse, "language model response has no text field");
}

std::vector<TripleDescription> generate_descriptions(const KnowledgeGraph& g, const std::string& category,
                                                     LlmClient* client, DescriptionCache& cache) {
    const auto view = query_category(g, category);
    std::vector<TripleDescription> out;
    out.reserve(view.triples.size());
    for (const auto& t : view.triples) {
        const std::string key = triple_key(t);
        if (const CacheEntry* hit = cache.find(key)) {
            out.push_back({key, category, hit->text});
            continue;
        }
        if (client == nullptr) {
            throw Error(ErrorKind::Network, "no cached description for '" + key + "' and no language model configured");
        }
        const std::string answer = text::trim(client->complete(render_question(g, t)));
        if (answer.empty()) throw Error(ErrorKind::EmptyResponse, "empty description for '" + key + "'");
        std::string clipped = text::truncate_words(answer, kMaxDescriptionWords);
        cache.put(key, {category, clipped});
        out.push_back({key, category, std::move(clipped)});
    }
    return out;
}

}  // namespace kgprompt
