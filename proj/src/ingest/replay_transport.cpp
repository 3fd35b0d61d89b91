#include "newsky/ingest/transport.hpp"

namespace newsky::ingest {

ReplayFileTransport::ReplayFileTransport(std::filesystem::path path) : path_(std::move(path)) {}

void ReplayFileTransport::open(std::optional<std::int64_t>) {
    // The stream filters by cursor, so a replay always restarts from the top.
    in_ = std::ifstream(path_, std::ios::binary);
    if (!in_) throw ConnectFailed("cannot open replay file: " + path_.string());
}

std::optional<RawFrame> ReplayFileTransport::read() {
    if (!in_.is_open()) throw TransportClosed("replay file not open");
    std::string line;
    while (std::getline(in_, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        return RawFrame{std::move(line), now_utc()};
    }
    if (in_.bad()) throw TransportClosed("read error on " + path_.string());
    return std::nullopt;
}

void ReplayFileTransport::close() { in_.close(); }

}  // namespace newsky::ingest
