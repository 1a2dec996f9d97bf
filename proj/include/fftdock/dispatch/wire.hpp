#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "fftdock/dispatch/task.hpp"
#include "fftdock/docking.hpp"

namespace fftdock::wire {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxPayloadBytes = 64u << 20;

struct Hello {
  std::string worker_id;
  int slots = 1;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct Request {
  std::string worker_id;
  friend bool operator==(const Request&, const Request&) = default;
};

struct Assign {
  DockingTask task;
  friend bool operator==(const Assign&, const Assign&) = default;
};

// Either a result or, for a task that failed deterministically inside the
// worker (unreadable file, grid overflow), an error message.
struct Result {
  std::string task_id;
  std::optional<DockingResult> result;
  std::string error;
  friend bool operator==(const Result& a, const Result& b);
};

struct NoMoreTasks {
  friend bool operator==(const NoMoreTasks&, const NoMoreTasks&) = default;
};

struct Shutdown {
  friend bool operator==(const Shutdown&, const Shutdown&) = default;
};

using Message = std::variant<Hello, Request, Assign, Result, NoMoreTasks, Shutdown>;

std::string_view type_name(const Message& m);

// UTF-8 JSON object with "type" and "v".
std::string encode_payload(const Message& m);
// Throws ProtocolError on malformed JSON, unknown type or version mismatch.
Message decode_payload(std::string_view payload);

// 4-byte big-endian payload length followed by the payload.
std::string encode_frame(const Message& m);
std::uint32_t read_length_prefix(const unsigned char* four_bytes);

// Incremental decoder for a byte stream carrying consecutive frames.
class FrameDecoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  std::optional<Message> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

}  // namespace fftdock::wire
