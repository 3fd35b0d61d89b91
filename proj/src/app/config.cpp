#include "newsky/app/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>

#include <toml.hpp>

extern char** environ;

namespace newsky::app {

namespace {

enum class Kind { String, Path, Int, Double, Enum };

struct Key {
    const char* name;
    Kind kind;
    std::function<void(Config&, const std::string&)> set;
};

std::int64_t to_int(const std::string& key, const std::string& text) {
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    }
    return v;
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + text + "'");
}

template <typename T>
std::function<void(Config&, const std::string&)> int_field(const char* key, T Config::*field, std::int64_t min) {
    return [key, field, min](Config& c, const std::string& text) {
        const auto v = to_int(key, text);
        if (v < min) throw ConfigError(std::string(key) + ": must be at least " + std::to_string(min));
        c.*field = v;
    };
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"store.path", Kind::Path, [](Config& c, const std::string& v) { c.store_path = v; }},
        {"store.jobs_dir", Kind::Path, [](Config& c, const std::string& v) { c.jobs_dir = v; }},
        {"store.max_buckets", Kind::Int, int_field("store.max_buckets", &Config::max_buckets, 1)},
        {"ingest.source", Kind::String, [](Config& c, const std::string& v) { c.source = v; }},
        {"ingest.queue_capacity", Kind::Int, int_field("ingest.queue_capacity", &Config::queue_capacity, 1)},
        {"ingest.backoff_base_ms", Kind::Int, int_field("ingest.backoff_base_ms", &Config::backoff_base_ms, 1)},
        {"ingest.backoff_cap_ms", Kind::Int, int_field("ingest.backoff_cap_ms", &Config::backoff_cap_ms, 1)},
        {"ingest.commit_interval_ms", Kind::Int,
         int_field("ingest.commit_interval_ms", &Config::commit_interval_ms, 0)},
        {"resolver.base_url", Kind::String, [](Config& c, const std::string& v) { c.resolver_base_url = v; }},
        {"resolver.fixture", Kind::Path, [](Config& c, const std::string& v) { c.resolver_fixture = v; }},
        {"resolver.batch_limit", Kind::Int, int_field("resolver.batch_limit", &Config::resolver_batch_limit, 1)},
        {"resolver.rate_per_second", Kind::Double,
         [](Config& c, const std::string& v) {
             c.resolver_rate_per_second = to_double("resolver.rate_per_second", v);
             if (c.resolver_rate_per_second <= 0) throw ConfigError("resolver.rate_per_second: must be positive");
         }},
        {"resolver.cache_capacity", Kind::Int,
         int_field("resolver.cache_capacity", &Config::resolver_cache_capacity, 1)},
        {"resolver.timeout_ms", Kind::Int, int_field("resolver.timeout_ms", &Config::resolver_timeout_ms, 1)},
        {"resolver.max_attempts", Kind::Int, int_field("resolver.max_attempts", &Config::resolver_max_attempts, 1)},
        {"ratings.score_file", Kind::Path, [](Config& c, const std::string& v) { c.score_file = v; }},
        {"ratings.mbfc_file", Kind::Path, [](Config& c, const std::string& v) { c.mbfc_file = v; }},
        {"ratings.allsides_file", Kind::Path, [](Config& c, const std::string& v) { c.allsides_file = v; }},
        {"ratings.newsguard_orientation_file", Kind::Path,
         [](Config& c, const std::string& v) { c.newsguard_orientation_file = v; }},
        {"ratings.reload_ms", Kind::Int, int_field("ratings.reload_ms", &Config::ratings_reload_ms, 0)},
        {"api.host", Kind::String, [](Config& c, const std::string& v) { c.api_host = v; }},
        {"api.port", Kind::Int,
         [](Config& c, const std::string& v) {
             const auto port = to_int("api.port", v);
             if (port < 0 || port > 65535) throw ConfigError("api.port: out of range");
             c.api_port = port;
         }},
        {"api.static_dir", Kind::Path, [](Config& c, const std::string& v) { c.static_dir = v; }},
        {"analytics.seed", Kind::Int, int_field("analytics.seed", &Config::seed, 0)},
        {"analytics.min_cooccurrence", Kind::Int,
         int_field("analytics.min_cooccurrence", &Config::min_cooccurrence, 1)},
        {"analytics.mixed_policy", Kind::Enum,
         [](Config& c, const std::string& v) {
             const auto p = analytics::parse_mixed_policy(v);
             if (!p) throw ConfigError("analytics.mixed_policy: expected unreliable, reliable or skip");
             c.mixed_policy = *p;
         }},
        {"analytics.denominator", Kind::Enum,
         [](Config& c, const std::string& v) {
             if (v == "as_printed") {
                 c.denominator = analytics::DenominatorForm::AsPrinted;
             } else if (v == "conventional") {
                 c.denominator = analytics::DenominatorForm::Conventional;
             } else {
                 throw ConfigError("analytics.denominator: expected as_printed or conventional");
             }
         }},
        {"analytics.top_words", Kind::Int, int_field("analytics.top_words", &Config::top_words, 1)},
    };
    return table;
}

const Key& find_key(const std::string& name) {
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return name == k.name; });
    if (it == table.end()) throw ConfigError("unknown config key '" + name + "'");
    return *it;
}

std::string node_text(const std::string& key, const toml::node& node) {
    if (const auto* s = node.as_string()) return s->get();
    if (const auto* i = node.as_integer()) return std::to_string(i->get());
    if (const auto* f = node.as_floating_point()) {
        std::ostringstream out;
        out.precision(17);
        out << f->get();
        return out.str();
    }
    if (const auto* b = node.as_boolean()) return b->get() ? "true" : "false";
    throw ConfigError(key + ": unsupported value type");
}

}  // namespace

std::filesystem::path Config::effective_jobs_dir() const {
    if (!jobs_dir.empty()) return jobs_dir;
    return store_path.string() + ".jobs";
}

ratings::RatingFiles Config::rating_files() const {
    if (score_file.empty()) throw ConfigError("ratings.score_file is not set");
    ratings::RatingFiles files;
    files.score_file = score_file;
    if (!mbfc_file.empty()) files.mbfc_file = mbfc_file;
    if (!allsides_file.empty()) files.allsides_file = allsides_file;
    if (!newsguard_orientation_file.empty()) files.newsguard_orientation_file = newsguard_orientation_file;
    return files;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.emplace_back(k.name);
    return out;
}

std::string env_name(const std::string& key) {
    std::string out = "NEWSKY_";
    for (const char c : key) {
        out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

void set_config_value(Config& config, const std::string& key, const std::string& value) {
    find_key(key).set(config, value);
}

Config load_config(const std::optional<std::filesystem::path>& file,
                   const std::optional<std::map<std::string, std::string>>& env) {
    Config config;
    if (file) {
        toml::table doc;
        try {
            doc = toml::parse_file(file->string());
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << file->string() << ": " << e.description() << " (line " << e.source().begin.line << ")";
            throw ConfigError(msg.str());
        }
        const auto base = std::filesystem::absolute(*file).parent_path();
        for (const auto& [section, node] : doc) {
            const auto* table = node.as_table();
            if (!table) throw ConfigError("top-level key '" + std::string(section.str()) + "' must be a section");
            for (const auto& [name, value] : *table) {
                const std::string key = std::string(section.str()) + "." + std::string(name.str());
                const Key& desc = find_key(key);
                std::string text = node_text(key, value);
                if (desc.kind == Kind::Path && !text.empty() && std::filesystem::path(text).is_relative()) {
                    text = (base / text).lexically_normal().string();
                }
                desc.set(config, text);
            }
        }
    }

    std::map<std::string, std::string> vars;
    if (env) {
        vars = *env;
    } else {
        for (char** e = environ; e && *e; ++e) {
            const std::string entry = *e;
            const auto eq = entry.find('=');
            if (eq != std::string::npos) vars.emplace(entry.substr(0, eq), entry.substr(eq + 1));
        }
    }
    for (const auto& k : keys()) {
        const auto it = vars.find(env_name(k.name));
        if (it != vars.end()) k.set(config, it->second);
    }
    return config;
}

}  // namespace newsky::app
