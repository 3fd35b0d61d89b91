#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "newsky/analytics/hashtag_graph.hpp"
#include "newsky/analytics/lexicon.hpp"
#include "newsky/ratings/ratings.hpp"

namespace newsky::app {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Config {
    // [store]
    std::filesystem::path store_path = "newsky.db";
    std::filesystem::path jobs_dir;  // empty: "<store_path>.jobs"
    std::int64_t max_buckets = 20'000;

    // [ingest]
    std::string source = "live:wss://bsky.network/xrpc/com.atproto.sync.subscribeRepos";
    std::int64_t queue_capacity = 10'000;
    std::int64_t backoff_base_ms = 1'000;
    std::int64_t backoff_cap_ms = 60'000;
    std::int64_t commit_interval_ms = 1'000;

    // [resolver]
    std::string resolver_base_url = "https://public.api.bsky.app";
    std::filesystem::path resolver_fixture;  // when set, answers come from this getPosts document
    std::int64_t resolver_batch_limit = 25;
    double resolver_rate_per_second = 10.0;
    std::int64_t resolver_cache_capacity = 500'000;
    std::int64_t resolver_timeout_ms = 10'000;
    std::int64_t resolver_max_attempts = 3;

    // [ratings]
    std::filesystem::path score_file;
    std::filesystem::path mbfc_file;
    std::filesystem::path allsides_file;
    std::filesystem::path newsguard_orientation_file;
    std::int64_t ratings_reload_ms = 5'000;

    // [api]
    std::string api_host = "127.0.0.1";
    std::int64_t api_port = 8080;
    std::filesystem::path static_dir;

    // [analytics]
    std::int64_t seed = 42;
    std::int64_t min_cooccurrence = 1;
    analytics::MixedPolicy mixed_policy = analytics::MixedPolicy::Unreliable;
    analytics::DenominatorForm denominator = analytics::DenominatorForm::AsPrinted;
    std::int64_t top_words = 100;

    std::filesystem::path effective_jobs_dir() const;
    /// Throws ConfigError when no score file is configured.
    ratings::RatingFiles rating_files() const;
};

/// Dotted key names ("store.path", "api.port", ...), in file order.
std::vector<std::string> config_keys();

/// NEWSKY_<SECTION>_<KEY>, e.g. NEWSKY_API_PORT for "api.port".
std::string env_name(const std::string& key);

/// Sets one key from its textual form. Throws ConfigError.
void set_config_value(Config& config, const std::string& key, const std::string& value);

/// Defaults, then the TOML file (if given), then NEWSKY_* environment
/// variables. `env` replaces the process environment when supplied.
/// Relative paths in the file resolve against the file's directory.
Config load_config(const std::optional<std::filesystem::path>& file,
                   const std::optional<std::map<std::string, std::string>>& env = std::nullopt);

}  // namespace newsky::app
