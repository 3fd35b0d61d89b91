// newsky: operator entry point (ingest, analyze, serve, export, ratings).

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "newsky/analytics/audiences.hpp"
#include "newsky/analytics/distribution.hpp"
#include "newsky/analytics/exports.hpp"
#include "newsky/analytics/hashtag_graph.hpp"
#include "newsky/api/server.hpp"
#include "newsky/app/config.hpp"
#include "newsky/app/log.hpp"
#include "newsky/app/pipeline.hpp"
#include "newsky/ingest/transport.hpp"

namespace {

using namespace newsky;

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

// Input problems the operator can fix: exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop{false};
api::HttpServer* g_server = nullptr;

void on_signal(int) {
    g_stop = true;
    if (g_server) g_server->stop();
}

struct Common {
    std::string config_path;
    std::string store_path;
};

app::Config load(const Common& common) {
    std::optional<std::filesystem::path> file;
    if (!common.config_path.empty()) {
        if (!std::filesystem::exists(common.config_path)) throw UsageError("config file not found: " + common.config_path);
        file = common.config_path;
    }
    app::Config config = app::load_config(file);
    if (!common.store_path.empty()) config.store_path = common.store_path;
    return config;
}

std::shared_ptr<const ratings::RatingTable> load_table(const app::Config& config, bool required) {
    if (config.score_file.empty()) {
        if (required) throw UsageError("ratings.score_file is not configured");
        app::log_warn("no ratings configured; every domain is unrated");
        return std::make_shared<ratings::RatingTable>();
    }
    std::vector<std::string> warnings;
    auto table = std::make_shared<ratings::RatingTable>(ratings::RatingTable::load(config.rating_files(), &warnings));
    for (const auto& w : warnings) app::log_warn("ratings", {{"detail", w}});
    return table;
}

std::unique_ptr<store::Store> open_reader(const app::Config& config) {
    if (!std::filesystem::exists(config.store_path)) {
        throw UsageError("store not found: " + config.store_path.string());
    }
    store::StoreOptions opts;
    opts.read_only = true;
    opts.max_buckets = static_cast<std::size_t>(config.max_buckets);
    return store::Store::open(config.store_path, opts);
}

std::optional<store::Window> window_from(const std::string& from, const std::string& to) {
    if (from.empty() && to.empty()) return std::nullopt;
    if (from.empty() || to.empty()) throw UsageError("--from and --to go together");
    const auto f = parse_rfc3339(from);
    const auto t = parse_rfc3339(to);
    if (!f || !t) throw UsageError("--from/--to must be RFC 3339 timestamps");
    if (*t < *f) throw UsageError("--from must not be after --to");
    return store::Window{*f, *t};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    app::log_info("wrote", {{"path", path.string()}, {"bytes", content.size()}});
}

int run_ingest(const Common& common, const std::string& source_spec, std::optional<std::int64_t> resume,
               std::optional<int> max_reconnects) {
    const app::Config config = load(common);
    app::PipelineOptions options;
    try {
        options.source = ingest::StreamSource::parse(source_spec.empty() ? config.source : source_spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    options.source.resume_cursor = resume;
    if (options.source.mode == ingest::StreamSource::Mode::ReplayFile &&
        !std::filesystem::is_regular_file(options.source.location)) {
        throw UsageError("replay file not readable: " + options.source.location);
    }
    options.stream.queue_capacity = static_cast<std::size_t>(config.queue_capacity);
    options.stream.backoff_base = std::chrono::milliseconds(config.backoff_base_ms);
    options.stream.backoff_cap = std::chrono::milliseconds(config.backoff_cap_ms);
    options.stream.max_reconnect_attempts = max_reconnects;
    options.resolver.batch_limit = static_cast<std::size_t>(config.resolver_batch_limit);
    options.resolver.rate_per_second = config.resolver_rate_per_second;
    options.resolver.cache_capacity = static_cast<std::size_t>(config.resolver_cache_capacity);
    options.max_resolve_attempts = static_cast<int>(config.resolver_max_attempts);
    if (!config.resolver_fixture.empty()) {
        options.fetcher = resolver::FixturePostFetcher::from_file(config.resolver_fixture.string());
    } else {
        options.fetcher = std::make_shared<resolver::HttpPostFetcher>(
            config.resolver_base_url, std::chrono::seconds(std::max<std::int64_t>(1, config.resolver_timeout_ms / 1000)));
    }
    options.stop = &g_stop;

    store::StoreOptions store_options;
    store_options.commit_interval = std::chrono::milliseconds(config.commit_interval_ms);
    auto store = store::Store::open(config.store_path, store_options);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto stats = app::run_pipeline(*store, std::move(options));
    if (stats.last_cursor) {
        std::cout << "resume_cursor=" << *stats.last_cursor << '\n';
    } else {
        std::cout << "resume_cursor=none\n";
    }
    std::cout << "events=" << stats.events << " observations=" << stats.observations
              << " decode_errors=" << stats.stream.decode_errors << " dropped_unresolved=" << stats.dropped_unresolved
              << (stats.interrupted ? " interrupted=true" : "") << '\n';
    return 0;
}

struct AnalyzeArgs {
    std::string from;
    std::string to;
    std::size_t k = 0;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string cls = "all";
    std::size_t limit = 1000;
    std::string lang;
};

int run_analyze(const Common& common, const std::string& job, const AnalyzeArgs& args) {
    const app::Config config = load(common);
    const auto window = window_from(args.from, args.to);
    const std::filesystem::path out = args.out_dir;
    auto store = open_reader(config);

    if (job == "hashtag-graph") {
        const auto table = load_table(config, true);
        analytics::HashtagGraph graph;
        if (window && window->empty()) {
            // Nothing to aggregate; the CSVs still get their headers.
        } else if (window) {
            graph = analytics::build_hashtag_graph(*store, *window, *table, config.min_cooccurrence, config.mixed_policy);
        } else {
            store::KindSet posts = store::KindSet::none();
            posts.add(ingest::EventKind::Post);
            graph = analytics::build_hashtag_graph(
                analytics::hashtag_posts(store->observations(std::nullopt, posts), *table), config.min_cooccurrence,
                config.mixed_policy);
        }
        const auto core = graph.k_core(args.k);
        write_file(out / "hashtag_edges.csv", analytics::hashtag_edges_csv(core));
        write_file(out / "hashtag_nodes.csv", analytics::hashtag_nodes_csv(core));
        return 0;
    }
    if (job == "audiences") {
        analytics::AudienceOptions opts;
        opts.seed = args.seed.value_or(static_cast<std::uint64_t>(config.seed));
        opts.top_words = static_cast<std::size_t>(config.top_words);
        opts.form = config.denominator;
        const auto result = analytics::run_audience_job(*store, window, opts);
        analytics::save_audience_job(config.effective_jobs_dir(), result);
        write_file(out / "audiences.json", analytics::to_json(result).dump(2) + "\n");
        write_file(out / "audience_lexicon.csv", analytics::lexicon_csv(result));
        return 0;
    }
    if (job == "rankfreq") {
        const auto cls = analytics::parse_rank_class(args.cls);
        if (!cls) throw UsageError("--class must be reliable, unreliable or all");
        const auto table = load_table(config, true);
        const auto counts = store->domain_counts(window, store::KindSet::all(), store::Dedup::PerLink);
        write_file(out / ("rankfreq_" + args.cls + ".csv"),
                   analytics::rank_frequency_csv(analytics::rank_frequency(counts, *table, *cls, args.limit)));
        return 0;
    }
    if (job == "orientation") {
        const auto table = load_table(config, true);
        const auto counts = store->domain_counts(window, store::KindSet::all(), store::Dedup::PerLink);
        std::optional<std::string_view> lang;
        if (!args.lang.empty()) lang = args.lang;
        write_file(out / "orientation.csv",
                   analytics::orientation_csv(analytics::orientation_distribution(counts, *table, lang)));
        return 0;
    }
    throw UsageError("unknown analysis '" + job + "'");
}

int run_serve(const Common& common, std::optional<int> port_override) {
    const app::Config config = load(common);
    std::shared_ptr<ratings::RatingService> ratings;
    if (config.score_file.empty()) {
        ratings = std::make_shared<ratings::RatingService>(load_table(config, false));
    } else {
        ratings = std::make_shared<ratings::RatingService>(config.rating_files());
        if (config.ratings_reload_ms > 0) ratings->start_watching(std::chrono::milliseconds(config.ratings_reload_ms));
    }
    api::ServiceOptions opts;
    opts.store_path = config.store_path;
    opts.jobs_dir = config.effective_jobs_dir();
    opts.max_buckets = static_cast<std::size_t>(config.max_buckets);
    opts.min_cooccurrence = config.min_cooccurrence;
    opts.mixed = config.mixed_policy;
    auto service = std::make_shared<const api::Service>(ratings, opts);

    std::optional<std::filesystem::path> static_dir;
    if (!config.static_dir.empty()) static_dir = config.static_dir;
    api::HttpServer server(service, static_dir);
    server.bind(config.api_host, port_override.value_or(static_cast<int>(config.api_port)));
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    app::log_info("serving", {{"host", config.api_host}, {"port", server.port()}});
    std::cout << "listening on " << config.api_host << ':' << server.port() << std::endl;
    server.listen();
    g_server = nullptr;
    ratings->stop_watching();
    return 0;
}

int run_export(const Common& common, const std::string& from, const std::string& to, const std::string& granularity,
               const std::string& dedup, const std::string& kinds, const std::string& out) {
    const app::Config config = load(common);
    const auto window = window_from(from, to);
    if (!window) throw UsageError("--from and --to are required");
    store::PrevalenceQuery q;
    q.window = *window;
    const auto g = parse_granularity(granularity);
    const auto d = store::parse_dedup(dedup);
    const auto k = store::KindSet::parse(kinds);
    if (!g || !d || !k) throw UsageError("invalid --granularity, --dedup or --kinds");
    q.granularity = *g;
    q.dedup = *d;
    q.kinds = *k;
    const auto table = load_table(config, true);
    auto store = open_reader(config);
    const std::string csv = store::prevalence_csv(store->query_absolute(q, *table));
    if (out.empty() || out == "-") {
        std::cout << csv;
    } else {
        write_file(out, csv);
    }
    return 0;
}

int run_ratings_check(const Common& common, const std::vector<std::string>& domains) {
    const app::Config config = load(common);
    const auto table = load_table(config, true);
    std::cout << "domains=" << table->size() << '\n';
    for (const auto& d : domains) {
        const auto r = table->classify(d);
        std::cout << d << ',' << ratings::to_string(r.reliability) << ',' << ratings::to_string(r.orientation) << ','
                  << ratings::to_string(r.orientation_source) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"newsky: news-link observatory for a Bluesky-style firehose"};
    cli.require_subcommand(1);
    Common common;
    cli.add_option("-c,--config", common.config_path, "TOML config file");
    cli.add_option("--store", common.store_path, "store path (overrides store.path)");
    std::string log_level = "info";
    cli.add_option("--log-level", log_level, "debug, info, warn or error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

    auto* ingest = cli.add_subcommand("ingest", "consume a live or replayed stream into the store");
    std::string source;
    std::optional<std::int64_t> resume;
    std::optional<int> max_reconnects;
    ingest->add_option("--source", source, "live:<url> or replay:<path>");
    ingest->add_option("--resume-cursor", resume, "start strictly after this cursor");
    ingest->add_option("--max-reconnects", max_reconnects, "give up after this many failed reconnects");

    auto* analyze = cli.add_subcommand("analyze", "run an analytics job");
    std::string job;
    AnalyzeArgs aargs;
    analyze->add_option("job", job, "hashtag-graph, audiences, rankfreq or orientation")
        ->required()
        ->check(CLI::IsMember({"hashtag-graph", "audiences", "rankfreq", "orientation"}));
    analyze->add_option("--from", aargs.from, "window start (RFC 3339)");
    analyze->add_option("--to", aargs.to, "window end, exclusive (RFC 3339)");
    analyze->add_option("--k", aargs.k, "k-core for hashtag-graph");
    analyze->add_option("--seed", aargs.seed, "community detection seed");
    analyze->add_option("--out", aargs.out_dir, "output directory");
    analyze->add_option("--class", aargs.cls, "rankfreq class: reliable, unreliable or all");
    analyze->add_option("--limit", aargs.limit, "rankfreq rows");
    analyze->add_option("--lang", aargs.lang, "orientation: keep sources rated for this language");

    auto* serve = cli.add_subcommand("serve", "serve the read-only HTTP API");
    std::optional<int> port;
    serve->add_option("--port", port, "overrides api.port");

    auto* exp = cli.add_subcommand("export", "export absolute prevalence buckets as CSV");
    std::string from, to, granularity = "hour", dedup = "per_link", kinds = "post,repost,like", out;
    exp->add_option("--from", from)->required();
    exp->add_option("--to", to)->required();
    exp->add_option("--granularity", granularity);
    exp->add_option("--dedup", dedup);
    exp->add_option("--kinds", kinds);
    exp->add_option("--out", out, "file path; stdout when omitted");

    auto* rat = cli.add_subcommand("ratings", "load the configured ratings and classify domains");
    std::vector<std::string> domains;
    rat->add_option("domains", domains, "domains to classify");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (log_level == "debug") app::set_log_level(app::LogLevel::Debug);
    if (log_level == "warn") app::set_log_level(app::LogLevel::Warn);
    if (log_level == "error") app::set_log_level(app::LogLevel::Error);

    try {
        if (*ingest) return run_ingest(common, source, resume, max_reconnects);
        if (*analyze) return run_analyze(common, job, aargs);
        if (*serve) return run_serve(common, port);
        if (*exp) return run_export(common, from, to, granularity, dedup, kinds, out);
        if (*rat) return run_ratings_check(common, domains);
    } catch (const UsageError& e) {
        app::log_error(e.what());
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const app::ConfigError& e) {
        app::log_error(e.what());
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ratings::SchemaError& e) {
        app::log_error(e.what());
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const analytics::EmptyWindow& e) {
        app::log_error(e.what());
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        app::log_error(e.what());
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
