#include "newsky/ratings/ratings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "newsky/parser/post_parser.hpp"
#include "newsky/ratings/csv.hpp"

namespace newsky::ratings {

namespace {

std::string normalize_label(std::string_view label) {
    std::string out;
    bool pending_space = false;
    for (const char raw : label) {
        char c = raw;
        if (c == '_' || c == '\t') c = ' ';
        if (c == ' ') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

const std::map<std::string, Orientation, std::less<>>& alias_table() {
    static const std::map<std::string, Orientation, std::less<>> table = {
        {"left", Orientation::Left},
        {"far left", Orientation::Left},
        {"extreme left", Orientation::Left},
        {"left bias", Orientation::Left},
        {"hyper-partisan left", Orientation::Left},
        {"lean left", Orientation::LeanLeft},
        {"lean-left", Orientation::LeanLeft},
        {"leans left", Orientation::LeanLeft},
        {"left-leaning", Orientation::LeanLeft},
        {"left leaning", Orientation::LeanLeft},
        {"left-center", Orientation::LeanLeft},
        {"left center", Orientation::LeanLeft},
        {"left-center bias", Orientation::LeanLeft},
        {"center-left", Orientation::LeanLeft},
        {"centre-left", Orientation::LeanLeft},
        {"slightly left", Orientation::LeanLeft},
        {"skews left", Orientation::LeanLeft},
        {"center", Orientation::Center},
        {"centre", Orientation::Center},
        {"center bias", Orientation::Center},
        {"least biased", Orientation::Center},
        {"neutral", Orientation::Center},
        {"balanced", Orientation::Center},
        {"centrist", Orientation::Center},
        {"lean right", Orientation::LeanRight},
        {"lean-right", Orientation::LeanRight},
        {"leans right", Orientation::LeanRight},
        {"right-leaning", Orientation::LeanRight},
        {"right leaning", Orientation::LeanRight},
        {"right-center", Orientation::LeanRight},
        {"right center", Orientation::LeanRight},
        {"right-center bias", Orientation::LeanRight},
        {"center-right", Orientation::LeanRight},
        {"centre-right", Orientation::LeanRight},
        {"slightly right", Orientation::LeanRight},
        {"skews right", Orientation::LeanRight},
        {"right", Orientation::Right},
        {"far right", Orientation::Right},
        {"extreme right", Orientation::Right},
        {"right bias", Orientation::Right},
        {"hyper-partisan right", Orientation::Right},
    };
    return table;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

std::optional<std::string> normalize_rating_domain(std::string_view raw) {
    const std::string value = trim(raw);
    if (value.empty()) return std::nullopt;
    if (value.find("://") != std::string::npos) return parser::normalize_domain(value);
    return parser::normalize_domain("https://" + value);
}

struct Header {
    std::size_t domain = 0;
    std::size_t value = 0;
    std::optional<std::size_t> lang;
};

Header read_header(CsvReader& reader, std::string_view value_column, std::string_view file_label) {
    const auto row = reader.next();
    if (!row) throw SchemaError(std::string(file_label) + ": empty file, header row required");
    std::optional<std::size_t> domain, value, lang;
    for (std::size_t i = 0; i < row->size(); ++i) {
        const auto name = normalize_label((*row)[i]);
        if (name == "domain") domain = i;
        if (name == value_column) value = i;
        if (name == "lang") lang = i;
    }
    if (!domain || !value) {
        throw SchemaError(std::string(file_label) + ": header must contain 'domain' and '" +
                          std::string(value_column) + "'");
    }
    return Header{*domain, *value, lang};
}

void warn(std::vector<std::string>* warnings, std::string message) {
    if (warnings) warnings->push_back(std::move(message));
}

// domain -> label for one orientation file; later rows win.
std::map<std::string, Orientation> read_orientation_file(std::istream& in, std::string_view label,
                                                         std::vector<std::string>* warnings) {
    CsvReader reader(in);
    const auto header = read_header(reader, "orientation", label);
    std::map<std::string, Orientation> out;
    while (auto row = reader.next()) {
        if (row->size() <= std::max(header.domain, header.value)) {
            warn(warnings, std::string(label) + ":" + std::to_string(reader.line()) + ": short row");
            continue;
        }
        const auto domain = normalize_rating_domain((*row)[header.domain]);
        if (!domain) {
            warn(warnings, std::string(label) + ":" + std::to_string(reader.line()) +
                               ": unparseable domain '" + (*row)[header.domain] + "'");
            continue;
        }
        const auto orientation = parse_orientation_label((*row)[header.value]);
        if (!orientation) {
            warn(warnings, std::string(label) + ":" + std::to_string(reader.line()) +
                               ": unknown orientation label '" + (*row)[header.value] + "'");
            continue;
        }
        if (out.count(*domain)) {
            warn(warnings, std::string(label) + ":" + std::to_string(reader.line()) +
                               ": duplicate domain '" + *domain + "', keeping last row");
        }
        out[*domain] = *orientation;
    }
    return out;
}

}  // namespace

std::string_view to_string(Reliability r) {
    switch (r) {
        case Reliability::Reliable: return "reliable";
        case Reliability::Unreliable: return "unreliable";
        case Reliability::Unrated: return "unrated";
    }
    return "unrated";
}

std::string_view to_string(Orientation o) {
    switch (o) {
        case Orientation::Left: return "left";
        case Orientation::LeanLeft: return "lean_left";
        case Orientation::Center: return "center";
        case Orientation::LeanRight: return "lean_right";
        case Orientation::Right: return "right";
        case Orientation::Unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(OrientationSource s) {
    switch (s) {
        case OrientationSource::MBFC: return "mbfc";
        case OrientationSource::AllSides: return "allsides";
        case OrientationSource::NewsGuardTier: return "newsguard";
        case OrientationSource::None: return "none";
    }
    return "none";
}

std::optional<Reliability> parse_reliability(std::string_view text) {
    if (text == "reliable") return Reliability::Reliable;
    if (text == "unreliable") return Reliability::Unreliable;
    if (text == "unrated") return Reliability::Unrated;
    return std::nullopt;
}

Reliability reliability_for(std::optional<double> score) {
    if (!score) return Reliability::Unrated;
    return *score >= kReliableThreshold ? Reliability::Reliable : Reliability::Unreliable;
}

std::optional<Orientation> parse_orientation_label(std::string_view label) {
    const auto& table = alias_table();
    const auto it = table.find(normalize_label(label));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

RatingTable RatingTable::from_streams(std::istream& score, std::istream* mbfc, std::istream* allsides,
                                      std::istream* newsguard, std::vector<std::string>* warnings) {
    RatingTable table;

    CsvReader reader(score);
    const auto header = read_header(reader, "score", "score_file");
    while (auto row = reader.next()) {
        const auto needed = std::max(header.domain, header.value);
        if (row->size() <= needed) {
            warn(warnings, "score_file:" + std::to_string(reader.line()) + ": short row");
            continue;
        }
        const auto domain = normalize_rating_domain((*row)[header.domain]);
        if (!domain) {
            warn(warnings, "score_file:" + std::to_string(reader.line()) + ": unparseable domain '" +
                               (*row)[header.domain] + "'");
            continue;
        }
        std::optional<double> value;
        const std::string text = trim((*row)[header.value]);
        if (!text.empty()) {
            double parsed = 0;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
            if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(parsed) ||
                parsed < 0 || parsed > 100) {
                warn(warnings, "score_file:" + std::to_string(reader.line()) + ": score '" + text +
                                   "' is not a number in [0, 100]");
                continue;
            }
            value = parsed;
        }
        if (table.by_domain_.count(*domain)) {
            warn(warnings, "score_file:" + std::to_string(reader.line()) + ": duplicate domain '" +
                               *domain + "', keeping last row");
        }
        SourceRating rating;
        rating.domain = *domain;
        rating.score = value;
        rating.reliability = reliability_for(value);
        if (header.lang && *header.lang < row->size()) {
            auto lang = trim((*row)[*header.lang]);
            if (!lang.empty()) rating.lang = normalize_label(lang);
        }
        table.by_domain_[*domain] = std::move(rating);
    }

    std::vector<OrientationInput> inputs;
    if (mbfc) inputs.push_back({OrientationSource::MBFC, mbfc});
    if (allsides) inputs.push_back({OrientationSource::AllSides, allsides});
    if (newsguard) inputs.push_back({OrientationSource::NewsGuardTier, newsguard});
    table.merge_orientations(inputs, warnings);
    return table;
}

void RatingTable::merge_orientations(const std::vector<OrientationInput>& inputs, std::vector<std::string>* warnings) {
    // A label is replaced only by a source of equal or higher precedence, so
    // the outcome does not depend on the order the files arrive in.
    for (const auto& [source, stream] : inputs) {
        if (!stream) continue;
        for (const auto& [domain, orientation] :
             read_orientation_file(*stream, std::string(to_string(source)) + "_file", warnings)) {
            auto& rating = by_domain_[domain];
            if (rating.domain.empty()) rating.domain = domain;
            if (rating.orientation_source < source) continue;
            rating.orientation = orientation;
            rating.orientation_source = source;
        }
    }
}

RatingTable RatingTable::load(const RatingFiles& files, std::vector<std::string>* warnings) {
    auto open = [](const std::filesystem::path& path) {
        auto in = std::make_unique<std::ifstream>(path);
        if (!*in) throw std::runtime_error("cannot open ratings file: " + path.string());
        return in;
    };
    auto score = open(files.score_file);
    std::unique_ptr<std::ifstream> mbfc, allsides, newsguard;
    if (files.mbfc_file) mbfc = open(*files.mbfc_file);
    if (files.allsides_file) allsides = open(*files.allsides_file);
    if (files.newsguard_orientation_file) newsguard = open(*files.newsguard_orientation_file);
    return from_streams(*score, mbfc.get(), allsides.get(), newsguard.get(), warnings);
}

SourceRating RatingTable::classify(std::string_view domain) const {
    if (const auto it = by_domain_.find(std::string(domain)); it != by_domain_.end()) {
        return it->second;
    }
    if (const auto base = normalize_rating_domain(domain); base && *base != domain) {
        if (const auto it = by_domain_.find(*base); it != by_domain_.end()) return it->second;
    }
    SourceRating miss;
    miss.domain = std::string(domain);
    return miss;
}

std::vector<SourceRating> RatingTable::entries() const {
    std::vector<SourceRating> out;
    out.reserve(by_domain_.size());
    for (const auto& [_, rating] : by_domain_) out.push_back(rating);
    std::sort(out.begin(), out.end(),
              [](const SourceRating& a, const SourceRating& b) { return a.domain < b.domain; });
    return out;
}

RatingService::RatingService(RatingFiles files) : files_(std::move(files)) {
    loaded_mtimes_ = mtimes();
    table_ = std::make_shared<const RatingTable>(RatingTable::load(*files_));
    generation_ = 1;
}

RatingService::RatingService(std::shared_ptr<const RatingTable> fixed) : table_(std::move(fixed)) {
    generation_ = 1;
}

RatingService::~RatingService() { stop_watching(); }

std::shared_ptr<const RatingTable> RatingService::snapshot() const { return std::atomic_load(&table_); }

void RatingService::replace(std::shared_ptr<const RatingTable> table) {
    std::atomic_store(&table_, std::move(table));
    ++generation_;
}

std::vector<std::filesystem::file_time_type> RatingService::mtimes() const {
    std::vector<std::filesystem::file_time_type> out;
    if (!files_) return out;
    auto stamp = [&](const std::filesystem::path& p) {
        std::error_code ec;
        out.push_back(std::filesystem::last_write_time(p, ec));
    };
    stamp(files_->score_file);
    if (files_->mbfc_file) stamp(*files_->mbfc_file);
    if (files_->allsides_file) stamp(*files_->allsides_file);
    if (files_->newsguard_orientation_file) stamp(*files_->newsguard_orientation_file);
    return out;
}

bool RatingService::reload_if_changed(std::vector<std::string>* warnings) {
    if (!files_) return false;
    const auto current = mtimes();
    if (current == loaded_mtimes_) return false;
    try {
        auto table = std::make_shared<const RatingTable>(RatingTable::load(*files_, warnings));
        loaded_mtimes_ = current;
        replace(std::move(table));
        return true;
    } catch (const std::exception& e) {
        if (warnings) warnings->push_back(std::string("ratings reload failed: ") + e.what());
        return false;
    }
}

void RatingService::start_watching(std::chrono::milliseconds interval) {
    std::lock_guard lock(watch_mutex_);
    if (watching_ || !files_) return;
    watching_ = true;
    watcher_ = std::thread([this, interval] {
        std::unique_lock lock(watch_mutex_);
        while (watching_) {
            watch_cv_.wait_for(lock, interval, [&] { return !watching_; });
            if (!watching_) break;
            lock.unlock();
            reload_if_changed();
            lock.lock();
        }
    });
}

void RatingService::stop_watching() {
    {
        std::lock_guard lock(watch_mutex_);
        if (!watching_) return;
        watching_ = false;
    }
    watch_cv_.notify_all();
    if (watcher_.joinable()) watcher_.join();
}

}  // namespace newsky::ratings
