#include "kgprompt/http.hpp"

#include <httplib.h>

#include "kgprompt/error.hpp"

namespace kgprompt::http {

Url parse_url(const std::string& url) {
    Url u;
    const auto sep = url.find("://");
    if (sep == std::string::npos) throw Error(ErrorKind::Config, "URL without scheme: " + url);
    u.scheme = url.substr(0, sep);
    if (u.scheme != "http" && u.scheme != "https") {
        throw Error(ErrorKind::Config, "unsupported URL scheme: " + u.scheme);
    }
    std::string rest = url.substr(sep + 3);
    const auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    u.path = slash == std::string::npos ? "/" : rest.substr(slash);
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        try {
            u.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Config, "bad port in URL: " + url);
        }
        authority = authority.substr(0, colon);
    } else {
        u.port = u.scheme == "https" ? 443 : 80;
    }
    if (authority.empty()) throw Error(ErrorKind::Config, "URL without host: " + url);
    u.host = authority;
    return u;
}

namespace {

httplib::Client make_client(const Url& u, int timeout_seconds) {
    httplib::Client cli(u.scheme + "://" + u.host + ":" + std::to_string(u.port));
    cli.set_connection_timeout(timeout_seconds, 0);
    cli.set_read_timeout(timeout_seconds, 0);
    cli.set_write_timeout(timeout_seconds, 0);
    return cli;
}

std::string check(const httplib::Result& res, const std::string& url) {
    if (!res) {
        throw Error(ErrorKind::Network, "request to " + url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorKind::Network, "request to " + url + " returned HTTP " + std::to_string(res->status));
    }
    return res->body;
}

}  // namespace

std::string get(const std::string& url, const std::vector<std::pair<std::string, std::string>>& query,
                int timeout_seconds) {
    const Url u = parse_url(url);
    auto cli = make_client(u, timeout_seconds);
    httplib::Params params;
    for (const auto& [k, v] : query) params.emplace(k, v);
    return check(cli.Get(u.path, params, httplib::Headers{}), url);
}

std::string post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                      int timeout_seconds) {
    const Url u = parse_url(url);
    auto cli = make_client(u, timeout_seconds);
    httplib::Headers headers;
    if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
    return check(cli.Post(u.path, headers, body, "application/json"), url);
}

}  // namespace kgprompt::http
