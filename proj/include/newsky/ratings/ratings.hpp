#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

namespace newsky::ratings {

// Sources scoring at or above this are Reliable; below it, Unreliable.
inline constexpr double kReliableThreshold = 60.0;

enum class Reliability { Reliable, Unreliable, Unrated };
enum class Orientation { Left, LeanLeft, Center, LeanRight, Right, Unknown };
// Declared in precedence order.
enum class OrientationSource { MBFC, AllSides, NewsGuardTier, None };

std::string_view to_string(Reliability r);
std::string_view to_string(Orientation o);
std::string_view to_string(OrientationSource s);
std::optional<Reliability> parse_reliability(std::string_view text);

Reliability reliability_for(std::optional<double> score);

/// Maps a vendor label onto the five buckets. Case-insensitive; aliases such
/// as "left-center" (LeanLeft) or "least biased" (Center) are accepted.
std::optional<Orientation> parse_orientation_label(std::string_view label);

struct SourceRating {
    std::string domain;
    std::optional<double> score;
    Reliability reliability = Reliability::Unrated;
    Orientation orientation = Orientation::Unknown;
    OrientationSource orientation_source = OrientationSource::None;
    std::optional<std::string> lang;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RatingFiles {
    std::filesystem::path score_file;
    std::optional<std::filesystem::path> mbfc_file;
    std::optional<std::filesystem::path> allsides_file;
    std::optional<std::filesystem::path> newsguard_orientation_file;
};

struct OrientationInput {
    OrientationSource source;
    std::istream* stream;
};

// Immutable domain -> rating snapshot.
class RatingTable {
public:
    RatingTable() = default;

    /// Throws SchemaError on a missing or malformed header, and
    /// std::runtime_error when a named file cannot be opened. Duplicate
    /// domains within one file keep the last row and add a warning.
    static RatingTable load(const RatingFiles& files, std::vector<std::string>* warnings = nullptr);
    static RatingTable from_streams(std::istream& score, std::istream* mbfc, std::istream* allsides,
                                    std::istream* newsguard,
                                    std::vector<std::string>* warnings = nullptr);

    /// Applies orientation files in the given order; MBFC beats AllSides beats
    /// the NewsGuard tier regardless of that order.
    void merge_orientations(const std::vector<OrientationInput>& inputs,
                            std::vector<std::string>* warnings = nullptr);

    /// Exact lookup, falling back to the registrable domain. Misses come back
    /// Unrated with Unknown orientation.
    SourceRating classify(std::string_view domain) const;

    std::size_t size() const { return by_domain_.size(); }
    /// Sorted by domain.
    std::vector<SourceRating> entries() const;

private:
    std::unordered_map<std::string, SourceRating> by_domain_;
};

// Holds the current RatingTable and swaps in a new one when the files change.
// Readers take a snapshot and never wait on a reload.
class RatingService {
public:
    explicit RatingService(RatingFiles files);
    explicit RatingService(std::shared_ptr<const RatingTable> fixed);
    ~RatingService();

    std::shared_ptr<const RatingTable> snapshot() const;

    /// Reloads when any file's modification time changed. A failed reload
    /// keeps the previous snapshot and returns false.
    bool reload_if_changed(std::vector<std::string>* warnings = nullptr);
    void replace(std::shared_ptr<const RatingTable> table);

    void start_watching(std::chrono::milliseconds interval);
    void stop_watching();

    std::uint64_t generation() const { return generation_; }

private:
    std::vector<std::filesystem::file_time_type> mtimes() const;

    std::optional<RatingFiles> files_;
    std::shared_ptr<const RatingTable> table_;
    std::vector<std::filesystem::file_time_type> loaded_mtimes_;
    std::atomic<std::uint64_t> generation_{0};

    std::mutex watch_mutex_;
    std::condition_variable watch_cv_;
    bool watching_ = false;
    std::thread watcher_;
};

}  // namespace newsky::ratings
