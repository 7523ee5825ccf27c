#pragma once

#include "lwoct/protocol.hpp"

#include <boost/asio.hpp>

#include <atomic>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace lwoct {

struct Endpoint {
    std::string host = "127.0.0.1";
    unsigned short port = 0;
};

/// Parses "host:port" or a bare port.
inline Endpoint parse_bind(std::string_view spec)
{
    Endpoint e;
    const auto colon = spec.rfind(':');
    std::string port(colon == std::string_view::npos ? spec : spec.substr(colon + 1));
    if (colon != std::string_view::npos && colon > 0)
        e.host = std::string(spec.substr(0, colon));
    try {
        std::size_t used = 0;
        const int value = std::stoi(port, &used);
        if (used != port.size() || value < 0 || value > 65535)
            throw std::out_of_range("port");
        e.port = static_cast<unsigned short>(value);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad bind address '" + std::string(spec) + "'");
    }
    return e;
}

/// TCP server speaking the line protocol; one ProtocolHandler per connection, one thread per connection.
class Service {
public:
    using HandlerFactory = std::function<ProtocolHandler()>;

    Service(Endpoint bind, HandlerFactory factory)
        : factory_(std::move(factory)),
          acceptor_(io_, {boost::asio::ip::make_address(bind.host), bind.port})
    {
    }

    ~Service() { stop(); }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    unsigned short port() const { return acceptor_.local_endpoint().port(); }

    void start()
    {
        running_ = true;
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    /// Blocks the caller until stop() is called from elsewhere.
    void run()
    {
        running_ = true;
        accept_loop();
    }

    void stop()
    {
        if (!running_.exchange(false))
            return;
        boost::system::error_code ec;
        if (accept_thread_.joinable()) {
            // A blocking accept only returns on a connection, so poke it with one.
            boost::asio::io_context io;
            boost::asio::ip::tcp::socket wake(io);
            auto ep = acceptor_.local_endpoint(ec);
            if (!ec && ep.address().is_unspecified())
                ep.address(ep.address().is_v6() ? boost::asio::ip::address(boost::asio::ip::address_v6::loopback())
                                                 : boost::asio::ip::address(boost::asio::ip::address_v4::loopback()));
            wake.connect(ep, ec);
            accept_thread_.join();
        }
        acceptor_.close(ec);
        {
            std::lock_guard lock(mutex_);
            for (auto& s : sockets_)
                s->shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
        }
        for (auto& t : workers_)
            if (t.joinable())
                t.join();
        workers_.clear();
    }

private:
    void accept_loop()
    {
        while (running_) {
            auto socket = std::make_shared<boost::asio::ip::tcp::socket>(io_);
            boost::system::error_code ec;
            acceptor_.accept(*socket, ec);
            if (ec || !running_)
                break;
            std::lock_guard lock(mutex_);
            sockets_.push_back(socket);
            workers_.emplace_back([this, socket] { serve(*socket); });
        }
    }

    void serve(boost::asio::ip::tcp::socket& socket)
    {
        ProtocolHandler handler = factory_();
        boost::asio::streambuf buffer;
        boost::system::error_code ec;
        while (true) {
            boost::asio::read_until(socket, buffer, '\n', ec);
            if (ec)
                break;
            std::istream in(&buffer);
            std::string line;
            std::getline(in, line);
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            const std::string reply = handler.handle_line(line) + "\n";
            boost::asio::write(socket, boost::asio::buffer(reply), ec);
            if (ec)
                break;
        }
        socket.close(ec);
    }

    HandlerFactory factory_;
    boost::asio::io_context io_;
    boost::asio::ip::tcp::acceptor acceptor_;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex mutex_;
    std::list<std::shared_ptr<boost::asio::ip::tcp::socket>> sockets_;
    std::list<std::thread> workers_;
};

/// Minimal blocking client used by tools and tests.
class LineClient {
public:
    LineClient(const std::string& host, unsigned short port) : socket_(io_)
    {
        boost::asio::ip::tcp::resolver resolver(io_);
        boost::asio::connect(socket_, resolver.resolve(host, std::to_string(port)));
    }

    std::string request(const std::string& line)
    {
        boost::asio::write(socket_, boost::asio::buffer(line + "\n"));
        boost::asio::read_until(socket_, buffer_, '\n');
        std::istream in(&buffer_);
        std::string reply;
        std::getline(in, reply);
        return reply;
    }

private:
    boost::asio::io_context io_;
    boost::asio::ip::tcp::socket socket_;
    boost::asio::streambuf buffer_;
};

} // namespace lwoct
