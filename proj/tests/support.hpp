#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "newsky/app/pipeline.hpp"
#include "newsky/ratings/ratings.hpp"
#include "newsky/resolver/resolver.hpp"
#include "newsky/store/store.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(NEWSKY_FIXTURE_DIR) / name; }

inline std::filesystem::path test_data(const std::string& name) {
    return std::filesystem::path(NEWSKY_TEST_DATA_DIR) / name;
}

inline nlohmann::json oracle(const std::string& name) {
    std::ifstream in(std::filesystem::path(NEWSKY_ORACLE_DIR) / (name + ".json"));
    if (!in) throw std::runtime_error("oracle output missing for " + name + "; run the oracle_* tests first");
    return nlohmann::json::parse(in);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("newsky-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline newsky::ratings::RatingFiles fixture_rating_files() {
    return {fixture("ratings/scores.csv"), fixture("ratings/mbfc.csv"), fixture("ratings/allsides.csv"),
            fixture("ratings/newsguard_orientation.csv")};
}

inline std::shared_ptr<const newsky::ratings::RatingTable> fixture_ratings() {
    return std::make_shared<const newsky::ratings::RatingTable>(
        newsky::ratings::RatingTable::load(fixture_rating_files()));
}

inline newsky::ratings::RatingTable ratings_from_csv(const std::string& scores) {
    std::istringstream in(scores);
    return newsky::ratings::RatingTable::from_streams(in, nullptr, nullptr, nullptr);
}

// Replays a fixture file into the store at `db`, resolving engagements
// against the bundled getPosts fixture.
inline newsky::app::PipelineStats ingest_fixture(const std::filesystem::path& db, const std::string& replay_name,
                                                 std::optional<std::int64_t> resume = std::nullopt) {
    auto store = newsky::store::Store::open(db);
    newsky::app::PipelineOptions opts;
    opts.source = newsky::ingest::StreamSource::parse("replay:" + fixture(replay_name).string());
    opts.source.resume_cursor = resume;
    opts.fetcher = newsky::resolver::FixturePostFetcher::from_file(fixture("posts_fixture.json").string());
    opts.resolver.rate_per_second = 1e6;
    opts.resolve_linger = std::chrono::milliseconds(20);
    return newsky::app::run_pipeline(*store, opts);
}

inline nlohmann::json bucket_json(const newsky::store::PrevalenceBucket& b) {
    return {{"bucket_start", newsky::format_rfc3339(b.bucket_start)},
            {"total_links", b.total_links},
            {"total_rated", b.total_rated},
            {"reliable", b.reliable},
            {"unreliable", b.unreliable}};
}

}  // namespace testing
