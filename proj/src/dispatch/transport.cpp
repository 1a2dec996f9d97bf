#include "fftdock/dispatch/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "fftdock/errors.hpp"

namespace fftdock {

namespace {

// One direction of an in-memory pipe: a queue of encoded frames.
struct Channel {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::string> frames;
  bool closed = false;
};

class MemoryConnection : public Connection {
 public:
  MemoryConnection(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out, std::string name)
      : in_(std::move(in)), out_(std::move(out)), name_(std::move(name)) {}
  ~MemoryConnection() override { close(); }

  void send(const wire::Message& m) override {
    std::string frame = wire::encode_frame(m);
    std::lock_guard lock(out_->mutex);
    if (out_->closed) throw TransportError("connection closed");
    out_->frames.push_back(std::move(frame));
    out_->ready.notify_all();
  }

  std::optional<wire::Message> receive() override {
    std::unique_lock lock(in_->mutex);
    in_->ready.wait(lock, [&] { return !in_->frames.empty() || in_->closed; });
    if (in_->frames.empty()) return std::nullopt;
    std::string frame = std::move(in_->frames.front());
    in_->frames.pop_front();
    lock.unlock();
    wire::FrameDecoder decoder;
    decoder.feed(frame);
    return decoder.next();
  }

  void close() override {
    for (Channel* c : {in_.get(), out_.get()}) {
      std::lock_guard lock(c->mutex);
      c->closed = true;
      c->ready.notify_all();
    }
  }

  std::string peer() const override { return name_; }

 private:
  std::shared_ptr<Channel> in_;
  std::shared_ptr<Channel> out_;
  std::string name_;
};

class TcpConnection : public Connection {
 public:
  TcpConnection(int fd, std::string peer) : fd_(fd), peer_(std::move(peer)) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpConnection() override {
    close();
    ::close(fd_);
  }

  void send(const wire::Message& m) override {
    const std::string frame = wire::encode_frame(m);
    std::lock_guard lock(send_mutex_);
    if (closed_) throw TransportError("connection closed");
    std::size_t sent = 0;
    while (sent < frame.size()) {
      const ssize_t k = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
      if (k < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("send failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(k);
    }
  }

  std::optional<wire::Message> receive() override {
    unsigned char prefix[4];
    if (!read_exact(prefix, 4)) return std::nullopt;
    const std::uint32_t len = wire::read_length_prefix(prefix);
    if (len > wire::kMaxPayloadBytes) throw ProtocolError("frame length exceeds limit");
    std::string payload(len, '\0');
    if (!read_exact(reinterpret_cast<unsigned char*>(payload.data()), len)) return std::nullopt;
    return wire::decode_payload(payload);
  }

  void close() override {
    bool expected = false;
    if (closed_.compare_exchange_strong(expected, true)) ::shutdown(fd_, SHUT_RDWR);
  }

  std::string peer() const override { return peer_; }

 private:
  bool read_exact(unsigned char* p, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
      const ssize_t k = ::recv(fd_, p + got, n - got, 0);
      if (k == 0) return false;
      if (k < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      got += static_cast<std::size_t>(k);
    }
    return true;
  }

  int fd_;
  std::string peer_;
  std::mutex send_mutex_;
  std::atomic<bool> closed_{false};
};

sockaddr_in resolve(const Endpoint& e) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(e.port));
  if (e.host.empty() || e.host == "0.0.0.0" || e.host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (::inet_pton(AF_INET, e.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(e.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw TransportError("cannot resolve host " + e.host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> make_memory_pipe(const std::string& name) {
  auto a_to_b = std::make_shared<Channel>();
  auto b_to_a = std::make_shared<Channel>();
  return {std::make_unique<MemoryConnection>(b_to_a, a_to_b, name),
          std::make_unique<MemoryConnection>(a_to_b, b_to_a, name)};
}

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint e;
  std::string port_text = text;
  const auto colon = text.rfind(':');
  if (colon != std::string::npos) {
    if (colon > 0) e.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    e.port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument(port_text);
  } catch (const std::logic_error&) {
    throw ParameterError("bad endpoint '" + text + "'");
  }
  if (e.port < 0 || e.port > 65535) throw ParameterError("port out of range in '" + text + "'");
  return e;
}

TcpListener::TcpListener(const Endpoint& endpoint) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(endpoint);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 64) < 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw TransportError("cannot listen on " + endpoint.str() + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Connection> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (ready <= 0) return nullptr;
  sockaddr_in peer{};
  socklen_t len = sizeof peer;
  const int fd = ::accept(fd_, reinterpret_cast<sockaddr*>(&peer), &len);
  if (fd < 0) return nullptr;
  char host[INET_ADDRSTRLEN] = {0};
  ::inet_ntop(AF_INET, &peer.sin_addr, host, sizeof host);
  return std::make_unique<TcpConnection>(fd, std::string(host) + ":" + std::to_string(ntohs(peer.sin_port)));
}

std::unique_ptr<Connection> tcp_connect(const Endpoint& endpoint) {
  sockaddr_in addr = resolve(endpoint);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw TransportError("cannot connect to " + endpoint.str() + ": " + err);
  }
  return std::make_unique<TcpConnection>(fd, endpoint.str());
}

}  // namespace fftdock
