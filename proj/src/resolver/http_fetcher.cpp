#include <httplib.h>

#include "newsky/resolver/resolver.hpp"

namespace newsky::resolver {

namespace {

std::string percent_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (const char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

}  // namespace

std::string get_posts_target(std::span<const std::string> uris) {
    std::string target = "/xrpc/app.bsky.feed.getPosts";
    char sep = '?';
    for (const auto& uri : uris) {
        target += sep;
        target += "uris=" + percent_encode(uri);
        sep = '&';
    }
    return target;
}

HttpPostFetcher::HttpPostFetcher(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::vector<PostView> HttpPostFetcher::get_posts(std::span<const std::string> uris) {
    // Split "scheme://host[:port]/prefix" so a path prefix survives.
    std::string origin = base_url_;
    std::string prefix;
    if (const auto scheme = base_url_.find("://"); scheme != std::string::npos) {
        if (const auto slash = base_url_.find('/', scheme + 3); slash != std::string::npos) {
            origin = base_url_.substr(0, slash);
            prefix = base_url_.substr(slash);
        }
    }
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    const auto result = client.Get(prefix + get_posts_target(uris));
    if (!result) {
        throw EndpointDown("getPosts transport error: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw EndpointDown("getPosts returned HTTP " + std::to_string(result->status));
    }
    nlohmann::json body;
    try {
        body = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw EndpointDown(std::string("getPosts returned invalid json: ") + e.what());
    }
    return parse_get_posts_body(body);
}

}  // namespace newsky::resolver
