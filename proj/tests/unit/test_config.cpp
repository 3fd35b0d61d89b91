#include <doctest.h>

#include <fstream>
#include <set>

#include "newsky/app/config.hpp"
#include "support.hpp"

using namespace newsky;
using namespace newsky::app;

namespace {

std::filesystem::path write_toml(const testing::TempDir& dir, const std::string& text) {
    const auto path = dir / "newsky.toml";
    std::ofstream(path) << text;
    return path;
}

const std::map<std::string, std::string> kNoEnv;

}  // namespace

TEST_CASE("defaults") {
    const auto c = load_config(std::nullopt, kNoEnv);
    CHECK(c.api_port == 8080);
    CHECK(c.resolver_batch_limit == 25);
    CHECK(c.min_cooccurrence == 1);
    CHECK(c.mixed_policy == analytics::MixedPolicy::Unreliable);
    CHECK(c.effective_jobs_dir() == "newsky.db.jobs");
    CHECK_THROWS_AS(c.rating_files(), ConfigError);
}

TEST_CASE("toml file with relative paths") {
    testing::TempDir dir;
    const auto path = write_toml(dir, R"(
[store]
path = "data/obs.db"
max_buckets = 500

[ratings]
score_file = "ratings/scores.csv"
mbfc_file = "/abs/mbfc.csv"

[api]
port = 9001

[analytics]
mixed_policy = "skip"
denominator = "conventional"
min_cooccurrence = 5

[resolver]
rate_per_second = 2.5
)");
    const auto c = load_config(path, kNoEnv);
    const auto base = std::filesystem::absolute(dir.path());
    CHECK(c.store_path == (base / "data/obs.db").lexically_normal());
    CHECK(c.score_file == (base / "ratings/scores.csv").lexically_normal());
    CHECK(c.mbfc_file == "/abs/mbfc.csv");
    CHECK(c.max_buckets == 500);
    CHECK(c.api_port == 9001);
    CHECK(c.mixed_policy == analytics::MixedPolicy::Skip);
    CHECK(c.denominator == analytics::DenominatorForm::Conventional);
    CHECK(c.min_cooccurrence == 5);
    CHECK(c.resolver_rate_per_second == 2.5);
    const auto files = c.rating_files();
    CHECK(files.mbfc_file == std::filesystem::path("/abs/mbfc.csv"));
    CHECK_FALSE(files.allsides_file.has_value());
}

TEST_CASE("environment overrides the file") {
    testing::TempDir dir;
    const auto path = write_toml(dir, "[api]\nport = 9001\n");
    const auto c = load_config(path, std::map<std::string, std::string>{{"NEWSKY_API_PORT", "9100"},
                                                                         {"NEWSKY_STORE_PATH", "env.db"},
                                                                         {"UNRELATED", "x"}});
    CHECK(c.api_port == 9100);
    CHECK(c.store_path == "env.db");
    CHECK(env_name("api.port") == "NEWSKY_API_PORT");
    CHECK(env_name("ratings.newsguard_orientation_file") == "NEWSKY_RATINGS_NEWSGUARD_ORIENTATION_FILE");
}

TEST_CASE("every key has a distinct environment name") {
    std::set<std::string> names;
    for (const auto& k : config_keys()) CHECK(names.insert(env_name(k)).second);
    CHECK(names.size() == config_keys().size());
}

TEST_CASE("invalid configuration is rejected") {
    testing::TempDir dir;
    CHECK_THROWS_AS(load_config(write_toml(dir, "[store]\nsize = 3\n"), kNoEnv), ConfigError);
    CHECK_THROWS_AS(load_config(write_toml(dir, "port = 3\n"), kNoEnv), ConfigError);
    CHECK_THROWS_AS(load_config(write_toml(dir, "[api]\nport = 70000\n"), kNoEnv), ConfigError);
    CHECK_THROWS_AS(load_config(write_toml(dir, "[api\n"), kNoEnv), ConfigError);
    CHECK_THROWS_AS(load_config(write_toml(dir, "[analytics]\nmixed_policy = \"maybe\"\n"), kNoEnv), ConfigError);
    CHECK_THROWS_AS(load_config(std::nullopt, std::map<std::string, std::string>{{"NEWSKY_API_PORT", "http"}}),
                    ConfigError);
    Config c;
    CHECK_THROWS_AS(set_config_value(c, "api.nope", "1"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "resolver.rate_per_second", "0"), ConfigError);
    set_config_value(c, "resolver.batch_limit", "10");
    CHECK(c.resolver_batch_limit == 10);
}
