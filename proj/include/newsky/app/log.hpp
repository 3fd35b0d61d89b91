#pragma once

#include <ostream>
#include <string_view>

#include <json.hpp>

namespace newsky::app {

enum class LogLevel { Debug, Info, Warn, Error };

void set_log_level(LogLevel level);
/// Redirects output (stderr by default). Tests pass a stringstream.
void set_log_stream(std::ostream* out);

/// One JSON object per line: {"ts", "level", "msg", ...fields}.
void log(LogLevel level, std::string_view msg, const nlohmann::json& fields = nlohmann::json::object());

inline void log_info(std::string_view msg, const nlohmann::json& fields = nlohmann::json::object()) {
    log(LogLevel::Info, msg, fields);
}
inline void log_warn(std::string_view msg, const nlohmann::json& fields = nlohmann::json::object()) {
    log(LogLevel::Warn, msg, fields);
}
inline void log_error(std::string_view msg, const nlohmann::json& fields = nlohmann::json::object()) {
    log(LogLevel::Error, msg, fields);
}

}  // namespace newsky::app
