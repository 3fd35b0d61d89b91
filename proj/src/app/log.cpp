#include "newsky/app/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "newsky/time.hpp"

namespace newsky::app {

namespace {

std::atomic<LogLevel> g_level{LogLevel::Info};
std::atomic<std::ostream*> g_out{nullptr};
std::mutex g_mutex;

std::string_view level_name(LogLevel level) {
    switch (level) {
        case LogLevel::Debug:
            return "debug";
        case LogLevel::Info:
            return "info";
        case LogLevel::Warn:
            return "warn";
        case LogLevel::Error:
            return "error";
    }
    return "info";
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
void set_log_stream(std::ostream* out) { g_out = out; }

void log(LogLevel level, std::string_view msg, const nlohmann::json& fields) {
    if (level < g_level.load()) return;
    nlohmann::json line = {{"ts", format_rfc3339(now_utc())}, {"level", level_name(level)}, {"msg", msg}};
    if (fields.is_object()) {
        for (const auto& [k, v] : fields.items()) line[k] = v;
    }
    const std::string text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    std::lock_guard lock(g_mutex);
    std::ostream* out = g_out.load();
    (out ? *out : std::cerr) << text << '\n';
    (out ? *out : std::cerr).flush();
}

}  // namespace newsky::app
