#include <sys/socket.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/ssl.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/ssl.hpp>
#include <boost/beast/websocket.hpp>
#include <boost/beast/websocket/ssl.hpp>
#include <mutex>
#include <variant>

#include "newsky/ingest/transport.hpp"

namespace newsky::ingest {

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct WsUrl {
    bool tls = false;
    std::string host;
    std::string port;
    std::string target;
};

WsUrl parse_ws_url(const std::string& url) {
    WsUrl out;
    std::string rest;
    if (url.rfind("wss://", 0) == 0) {
        out.tls = true;
        rest = url.substr(6);
    } else if (url.rfind("ws://", 0) == 0) {
        rest = url.substr(5);
    } else {
        throw ConnectFailed("unsupported websocket url: " + url);
    }
    const auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    out.target = slash == std::string::npos ? "/" : rest.substr(slash);
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos && authority.find(']') == std::string::npos) {
        out.host = authority.substr(0, colon);
        out.port = authority.substr(colon + 1);
    } else {
        out.host = authority;
        out.port = out.tls ? "443" : "80";
    }
    if (out.host.empty()) throw ConnectFailed("websocket url without host: " + url);
    return out;
}

using PlainWs = websocket::stream<tcp::socket>;
using TlsWs = websocket::stream<asio::ssl::stream<tcp::socket>>;

class WebSocketTransport final : public FrameTransport {
public:
    explicit WebSocketTransport(std::string url) : url_(parse_ws_url(url)) {}

    void open(std::optional<std::int64_t> cursor) override {
        close();
        std::string target = url_.target;
        if (cursor) {
            target += (target.find('?') == std::string::npos ? '?' : '&');
            target += "cursor=" + std::to_string(*cursor);
        }
        try {
            tcp::resolver resolver(ioc_);
            const auto endpoints = resolver.resolve(url_.host, url_.port);
            const std::string host_header = url_.host + ":" + url_.port;
            if (url_.tls) {
                ssl_ctx_.set_default_verify_paths();
                ssl_ctx_.set_verify_mode(asio::ssl::verify_peer);
                auto& ws = emplace<TlsWs>(ioc_, ssl_ctx_);
                asio::connect(beast::get_lowest_layer(ws), endpoints);
                if (!SSL_set_tlsext_host_name(ws.next_layer().native_handle(), url_.host.c_str())) {
                    throw ConnectFailed("cannot set SNI host name");
                }
                ws.next_layer().handshake(asio::ssl::stream_base::client);
                handshake(ws, host_header, target);
            } else {
                auto& ws = emplace<PlainWs>(ioc_);
                asio::connect(beast::get_lowest_layer(ws), endpoints);
                handshake(ws, host_header, target);
            }
        } catch (const beast::system_error& e) {
            close();
            throw ConnectFailed("websocket connect to " + url_.host + ": " + e.what());
        }
    }

    std::optional<RawFrame> read() override {
        return std::visit(
            [&](auto& ws) -> std::optional<RawFrame> {
                if constexpr (std::is_same_v<std::decay_t<decltype(ws)>, std::monostate>) {
                    throw TransportClosed("websocket not connected");
                } else {
                    beast::flat_buffer buffer;
                    beast::error_code ec;
                    ws.read(buffer, ec);
                    if (ec == websocket::error::closed) return std::nullopt;
                    if (ec) throw TransportClosed("websocket read: " + ec.message());
                    const auto data = buffer.cdata();
                    return RawFrame{std::string(static_cast<const char*>(data.data()), data.size()),
                                    now_utc()};
                }
            },
            ws_);
    }

    void close() override {
        std::lock_guard lock(state_mutex_);
        std::visit(
            [](auto& ws) {
                if constexpr (!std::is_same_v<std::decay_t<decltype(ws)>, std::monostate>) {
                    beast::error_code ec;
                    beast::get_lowest_layer(ws).close(ec);
                }
            },
            ws_);
        ws_.emplace<std::monostate>();
    }

    void interrupt() override {
        // shutdown(2) wakes a read blocked on this socket; the reader then
        // sees TransportClosed and checks its stop flag.
        std::lock_guard lock(state_mutex_);
        std::visit(
            [](auto& ws) {
                if constexpr (!std::is_same_v<std::decay_t<decltype(ws)>, std::monostate>) {
                    ::shutdown(beast::get_lowest_layer(ws).native_handle(), SHUT_RDWR);
                }
            },
            ws_);
    }

    FrameEncoding encoding() const override { return FrameEncoding::LiveBinary; }
    bool finite() const override { return false; }

private:
    template <typename Ws, typename... Args>
    Ws& emplace(Args&&... args) {
        std::lock_guard lock(state_mutex_);
        return ws_.emplace<Ws>(std::forward<Args>(args)...);
    }

    template <typename Ws>
    static void handshake(Ws& ws, const std::string& host, const std::string& target) {
        ws.set_option(websocket::stream_base::decorator([](websocket::request_type& req) {
            req.set(beast::http::field::user_agent, "newsky-ingest");
        }));
        ws.read_message_max(64 * 1024 * 1024);
        ws.handshake(host, target);
    }

    WsUrl url_;
    asio::io_context ioc_;
    asio::ssl::context ssl_ctx_{asio::ssl::context::tls_client};
    std::mutex state_mutex_;
    std::variant<std::monostate, PlainWs, TlsWs> ws_;
};

}  // namespace

std::unique_ptr<FrameTransport> make_websocket_transport(const std::string& url) {
    return std::make_unique<WebSocketTransport>(url);
}

}  // namespace newsky::ingest
