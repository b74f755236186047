#pragma once

// Thin blocking HTTP helpers shared by the LLM, public-KG and encoder
// clients. Transport failures and non-2xx statuses throw NetworkError.

#include <string>
#include <utility>
#include <vector>

namespace kgprompt::http {

struct Url {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 0;
    std::string path;  // always starts with '/'
};

// Throws Config on anything that is not http(s)://host[:port][/path].
Url parse_url(const std::string& url);

std::string get(const std::string& url, const std::vector<std::pair<std::string, std::string>>& query,
                int timeout_seconds);

std::string post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                      int timeout_seconds);

}  // namespace kgprompt::http
