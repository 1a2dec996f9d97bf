#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "fftdock/dispatch/wire.hpp"

namespace fftdock {

// A bidirectional, ordered message channel. Both implementations carry the
// same length-prefixed frames, so the in-memory pipe exercises the wire
// encoding as well.
class Connection {
 public:
  virtual ~Connection() = default;
  // Throws TransportError once the channel is closed.
  virtual void send(const wire::Message& m) = 0;
  // Blocks for the next message; nullopt once the peer closed or close() was
  // called and every message sent before that has been consumed.
  virtual std::optional<wire::Message> receive() = 0;
  // Tears the channel down in both directions; pending receive() calls return.
  virtual void close() = 0;
  virtual std::string peer() const = 0;
};

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> make_memory_pipe(const std::string& name = "memory");

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;

  // "host:port", ":port" or "port"
  static Endpoint parse(const std::string& text);
  std::string str() const { return host + ":" + std::to_string(port); }
};

class TcpListener {
 public:
  explicit TcpListener(const Endpoint& endpoint);  // throws TransportError on bind failure
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  // nullptr on timeout.
  std::unique_ptr<Connection> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  int port_ = 0;
};

// Throws TransportError if the connection is refused.
std::unique_ptr<Connection> tcp_connect(const Endpoint& endpoint);

}  // namespace fftdock
