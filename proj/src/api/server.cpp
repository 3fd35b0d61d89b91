#include "newsky/api/server.hpp"

#include <charconv>

#include <httplib.h>
#include <json.hpp>

#include "newsky/analytics/audiences.hpp"
#include "newsky/analytics/distribution.hpp"
#include "newsky/analytics/exports.hpp"
#include "newsky/api/contract.hpp"
#include "newsky/app/pipeline.hpp"

namespace newsky::api {

using nlohmann::json;

namespace {

class BadRequest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Params = std::map<std::string, std::string>;

Response json_response(int status, const json& body) {
    Response r;
    r.status = status;
    r.body = body.dump();
    return r;
}

Response error_response(int status, const std::string& message) {
    return json_response(status, {{"error", message}});
}

// Rejects unknown, repeated and out-of-vocabulary parameters; fills defaults.
Params validate(const RouteSpec& route, const QueryParams& query) {
    Params out;
    for (const auto& [name, value] : query) {
        const auto spec = std::find_if(route.params.begin(), route.params.end(),
                                       [&](const ParamSpec& p) { return p.name == name; });
        if (spec == route.params.end()) throw BadRequest("unknown parameter '" + name + "'");
        if (!out.emplace(name, value).second) throw BadRequest("parameter '" + name + "' given more than once");
        if (!spec->values.empty() &&
            std::find(spec->values.begin(), spec->values.end(), value) == spec->values.end()) {
            throw BadRequest("invalid value for '" + name + "'");
        }
    }
    for (const auto& spec : route.params) {
        if (out.count(spec.name)) continue;
        if (spec.required) throw BadRequest("missing parameter '" + spec.name + "'");
        if (!spec.default_value.empty()) out.emplace(spec.name, spec.default_value);
    }
    return out;
}

std::optional<std::string> get(const Params& params, const std::string& name) {
    const auto it = params.find(name);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::int64_t parse_int(const std::string& name, const std::string& text, std::int64_t lo, std::int64_t hi) {
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < lo || v > hi) {
        throw BadRequest("'" + name + "' must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "]");
    }
    return v;
}

Timestamp parse_time(const std::string& name, const std::string& text) {
    const auto t = parse_rfc3339(text);
    if (!t) throw BadRequest("'" + name + "' must be an RFC 3339 timestamp");
    return *t;
}

std::optional<store::Window> parse_window(const std::optional<std::string>& text) {
    if (!text || *text == "all") return std::nullopt;
    const auto slash = text->find('/');
    if (slash == std::string::npos) throw BadRequest("'window' must be \"all\" or \"<from>/<to>\"");
    store::Window w{parse_time("window", text->substr(0, slash)), parse_time("window", text->substr(slash + 1))};
    if (w.to < w.from) throw BadRequest("'window' ends before it starts");
    return w;
}

store::KindSet parse_kinds(const Params& params) {
    const auto kinds = store::KindSet::parse(get(params, "kinds").value_or("post,repost,like"));
    if (!kinds) throw BadRequest("'kinds' must list post, repost or like");
    return *kinds;
}

store::Dedup parse_dedup_param(const Params& params) {
    return *store::parse_dedup(get(params, "dedup").value_or("per_link"));
}

json optional_int(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Service::Service(std::shared_ptr<ratings::RatingService> ratings, ServiceOptions options)
    : ratings_(std::move(ratings)), options_(std::move(options)) {}

const store::Store* Service::store() const {
    std::lock_guard lock(store_mutex_);
    if (!store_ && std::filesystem::exists(options_.store_path)) {
        store::StoreOptions opts;
        opts.read_only = true;
        opts.max_buckets = options_.max_buckets;
        store_ = store::Store::open(options_.store_path, opts);
    }
    return store_.get();
}

Response Service::handle(const std::string& path, const QueryParams& query) const {
    const RouteSpec* route = find_route(path);
    if (!route) return error_response(404, "no such endpoint");
    try {
        const Params params = validate(*route, query);
        if (path == "/v1/prevalence") return prevalence(params);
        if (path == "/v1/domains/top") return domains_top(params);
        if (path == "/v1/hashtag-graph") return hashtag_graph(params);
        if (path == "/v1/audiences") return audiences(params);
        if (path == "/v1/orientation") return orientation(params);
        if (path == "/v1/health") return health();
        return json_response(200, openapi_document());
    } catch (const BadRequest& e) {
        return error_response(400, e.what());
    } catch (const analytics::EmptyWindow& e) {
        return error_response(400, e.what());
    } catch (const store::RangeTooLarge& e) {
        return error_response(416, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

Response Service::prevalence(const Params& params) const {
    store::PrevalenceQuery q;
    q.window = {parse_time("from", params.at("from")), parse_time("to", params.at("to"))};
    if (q.window.to < q.window.from) throw BadRequest("'from' must not be after 'to'");
    q.granularity = *parse_granularity(params.at("granularity"));
    q.dedup = parse_dedup_param(params);
    q.kinds = parse_kinds(params);

    const auto table = ratings_->snapshot();
    const store::Store* s = store();
    const auto buckets = s ? s->query_absolute(q, *table) : store::zero_buckets(q, options_.max_buckets);

    Response r;
    r.headers["Cache-Control"] = "public, max-age=60";
    if (params.at("format") == "csv") {
        r.content_type = "text/csv";
        r.body = store::prevalence_csv(buckets);
    } else if (params.at("mode") == "relative") {
        r.body = analytics::to_json(store::to_relative(buckets)).dump();
    } else {
        r.body = analytics::to_json(buckets).dump();
    }
    return r;
}

Response Service::domains_top(const Params& params) const {
    const auto cls = *analytics::parse_rank_class(params.at("class"));
    const auto limit = static_cast<std::size_t>(parse_int("limit", params.at("limit"), 1, 1000));
    const auto window = parse_window(get(params, "window"));
    const auto kinds = parse_kinds(params);
    const store::Store* s = store();
    const auto counts = s ? s->domain_counts(window, kinds, parse_dedup_param(params)) : analytics::DomainCounts{};
    const auto table = ratings_->snapshot();
    return json_response(200, analytics::to_json(analytics::rank_frequency(counts, *table, cls, limit)));
}

Response Service::hashtag_graph(const Params& params) const {
    const auto k = static_cast<std::size_t>(parse_int("k", params.at("k"), 0, 1'000'000));
    const auto window = parse_window(get(params, "window"));
    std::int64_t min_cooc = options_.min_cooccurrence;
    if (const auto v = get(params, "min_cooccurrence")) min_cooc = parse_int("min_cooccurrence", *v, 1, 1'000'000);
    const auto table = ratings_->snapshot();
    analytics::HashtagGraph graph;
    if (const store::Store* s = store()) {
        if (window) {
            graph = analytics::build_hashtag_graph(*s, *window, *table, min_cooc, options_.mixed);
        } else {
            store::KindSet posts = store::KindSet::none();
            posts.add(ingest::EventKind::Post);
            graph = analytics::build_hashtag_graph(analytics::hashtag_posts(s->observations(std::nullopt, posts), *table),
                                                   min_cooc, options_.mixed);
        }
    } else if (window && window->empty()) {
        throw analytics::EmptyWindow("hashtag graph window is empty");
    }
    json body = analytics::to_json(graph.k_core(k));
    body["k"] = k;
    return json_response(200, body);
}

Response Service::audiences(const Params& params) const {
    const auto window = parse_window(get(params, "window"));
    const auto top = static_cast<std::size_t>(parse_int("top_words", params.at("top_words"), 0, 10'000));
    const auto result = analytics::load_audience_job(options_.jobs_dir, window);
    if (!result) return error_response(409, "audience job has not been run for this window");
    return json_response(200, analytics::to_json(*result, top, false));
}

Response Service::orientation(const Params& params) const {
    const auto window = parse_window(get(params, "window"));
    const auto kinds = parse_kinds(params);
    std::optional<std::string_view> lang;
    const auto lang_param = get(params, "lang");
    if (lang_param) lang = *lang_param;
    const store::Store* s = store();
    const auto counts = s ? s->domain_counts(window, kinds, store::Dedup::PerLink) : analytics::DomainCounts{};
    const auto table = ratings_->snapshot();
    return json_response(200, analytics::to_json(analytics::orientation_distribution(counts, *table, lang)));
}

Response Service::health() const {
    const store::Store* s = store();
    const auto meta_int = [&](const char* key) -> std::optional<std::int64_t> {
        if (!s) return std::nullopt;
        const auto text = s->meta(key);
        if (!text) return std::nullopt;
        try {
            return std::stoll(*text);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    const auto last = meta_int(app::kMetaLastCursor);
    const auto head = meta_int(app::kMetaHeadCursor);
    std::optional<std::int64_t> lag;
    if (last && head) lag = std::max<std::int64_t>(0, *head - *last);
    json body = {{"status", "ok"},
                 {"last_cursor", optional_int(last)},
                 {"head_cursor", optional_int(head)},
                 {"cursor_lag", optional_int(lag)},
                 {"decode_error_count", meta_int(app::kMetaDecodeErrors).value_or(0)},
                 {"store_size_bytes", s ? s->size_bytes() : 0},
                 {"ratings_generation", ratings_->generation()}};
    return json_response(200, body);
}

HttpServer::HttpServer(std::shared_ptr<const Service> service, std::optional<std::filesystem::path> static_dir)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEADDR only: a second server on a busy port must fail to bind.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    if (static_dir && !static_dir->empty()) {
        if (!server_->set_mount_point("/", static_dir->string())) {
            throw std::runtime_error("static directory " + static_dir->string() + " does not exist");
        }
    }
    server_->Get(R"(/v1/.*)", [this](const httplib::Request& req, httplib::Response& res) {
        QueryParams params(req.params.begin(), req.params.end());
        const Response r = service_->handle(req.path, params);
        res.status = r.status;
        for (const auto& [k, v] : r.headers) res.set_header(k, v);
        res.set_content(r.body, r.content_type);
    });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        if (port_ < 0) throw PortInUse("cannot bind " + host);
        return;
    }
    if (!server_->bind_to_port(host, port)) {
        throw PortInUse("cannot bind " + host + ":" + std::to_string(port));
    }
    port_ = port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_) server_->stop();
}

}  // namespace newsky::api
