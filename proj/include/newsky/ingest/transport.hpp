#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "newsky/time.hpp"

namespace newsky::ingest {

class ConnectFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The transport dropped mid-stream; the reader reconnects with its cursor.
class TransportClosed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FrameEncoding { ReplayJsonLine, LiveBinary };

struct RawFrame {
    std::string bytes;
    Timestamp received_at;
};

// Owns one connection. Only the stream's reader thread calls open/read;
// interrupt() may be called from any thread to unblock a pending read.
class FrameTransport {
public:
    virtual ~FrameTransport() = default;

    /// Throws ConnectFailed. `cursor` asks the server to resume after it.
    virtual void open(std::optional<std::int64_t> cursor) = 0;
    /// nullopt at a clean end of stream. Throws TransportClosed.
    virtual std::optional<RawFrame> read() = 0;
    virtual void close() = 0;
    virtual void interrupt() {}
    virtual FrameEncoding encoding() const = 0;
    /// Whether end of stream is final (replay) or a reason to reconnect (live).
    virtual bool finite() const = 0;
};

class ReplayFileTransport final : public FrameTransport {
public:
    explicit ReplayFileTransport(std::filesystem::path path);

    void open(std::optional<std::int64_t> cursor) override;
    std::optional<RawFrame> read() override;
    void close() override;
    FrameEncoding encoding() const override { return FrameEncoding::ReplayJsonLine; }
    bool finite() const override { return true; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

/// ws:// or wss:// subscribeRepos endpoint. The cursor is appended as the
/// `cursor` query parameter.
std::unique_ptr<FrameTransport> make_websocket_transport(const std::string& url);

}  // namespace newsky::ingest
