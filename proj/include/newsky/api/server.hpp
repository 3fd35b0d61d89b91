#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "newsky/analytics/hashtag_graph.hpp"
#include "newsky/ratings/ratings.hpp"
#include "newsky/store/store.hpp"

namespace httplib {
class Server;
}

namespace newsky::api {

class PortInUse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ServiceOptions {
    std::filesystem::path store_path;
    std::filesystem::path jobs_dir;
    std::size_t max_buckets = 20'000;
    std::int64_t min_cooccurrence = 1;
    analytics::MixedPolicy mixed = analytics::MixedPolicy::Unreliable;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

using QueryParams = std::multimap<std::string, std::string>;

// Request handling without a socket. Read-only over the store.
class Service {
public:
    Service(std::shared_ptr<ratings::RatingService> ratings, ServiceOptions options);

    Response handle(const std::string& path, const QueryParams& params) const;

private:
    Response prevalence(const std::map<std::string, std::string>& params) const;
    Response domains_top(const std::map<std::string, std::string>& params) const;
    Response hashtag_graph(const std::map<std::string, std::string>& params) const;
    Response audiences(const std::map<std::string, std::string>& params) const;
    Response orientation(const std::map<std::string, std::string>& params) const;
    Response health() const;

    /// nullptr until the store file exists.
    const store::Store* store() const;

    std::shared_ptr<ratings::RatingService> ratings_;
    ServiceOptions options_;
    mutable std::mutex store_mutex_;
    mutable std::unique_ptr<store::Store> store_;
};

// HTTP front end: /v1 routes plus an optional static file mount at "/".
class HttpServer {
public:
    HttpServer(std::shared_ptr<const Service> service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();

    /// Throws PortInUse. Port 0 picks a free port; see port().
    void bind(const std::string& host, int port);
    int port() const { return port_; }
    /// Blocks until stop().
    void listen();
    void stop();

private:
    std::shared_ptr<const Service> service_;
    std::unique_ptr<httplib::Server> server_;
    int port_ = 0;
};

}  // namespace newsky::api
