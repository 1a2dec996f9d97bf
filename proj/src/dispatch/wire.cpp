#include "fftdock/dispatch/wire.hpp"

#include "fftdock/errors.hpp"

namespace fftdock::wire {

using nlohmann::json;

bool operator==(const Result& a, const Result& b) {
  if (a.task_id != b.task_id || a.error != b.error || a.result.has_value() != b.result.has_value()) return false;
  return !a.result || (a.result->same_outcome(*b.result) && a.result->wall_time == b.result->wall_time);
}

std::string_view type_name(const Message& m) {
  static constexpr std::string_view names[] = {"HELLO", "REQUEST", "ASSIGN", "RESULT", "NO_MORE_TASKS", "SHUTDOWN"};
  return names[m.index()];
}

std::string encode_payload(const Message& m) {
  json j;
  std::visit(
      [&j](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Hello>) {
          j = {{"worker_id", msg.worker_id}, {"slots", msg.slots}};
        } else if constexpr (std::is_same_v<T, Request>) {
          j = {{"worker_id", msg.worker_id}};
        } else if constexpr (std::is_same_v<T, Assign>) {
          j = {{"task", msg.task}};
        } else if constexpr (std::is_same_v<T, Result>) {
          j = {{"task_id", msg.task_id}};
          if (msg.result) j["result"] = *msg.result;
          // error text can carry arbitrary bytes from file names; keep it sendable
          if (!msg.error.empty())
            j["error"] = json::parse(json(msg.error).dump(-1, ' ', false, json::error_handler_t::replace));
        } else {
          j = json::object();
        }
      },
      m);
  j["type"] = type_name(m);
  j["v"] = kProtocolVersion;
  try {
    return j.dump();
  } catch (const json::type_error& e) {
    throw ProtocolError(std::string("cannot encode ") + std::string(type_name(m)) + ": " + e.what());
  }
}

Message decode_payload(std::string_view payload) {
  json j;
  try {
    j = json::parse(payload);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message is not a JSON object");
  try {
    if (j.at("v").get<int>() != kProtocolVersion)
      throw ProtocolError("unsupported protocol version " + j.at("v").dump());
    const std::string type = j.at("type").get<std::string>();
    if (type == "HELLO") return Hello{j.at("worker_id").get<std::string>(), j.at("slots").get<int>()};
    if (type == "REQUEST") return Request{j.at("worker_id").get<std::string>()};
    if (type == "ASSIGN") return Assign{j.at("task").get<DockingTask>()};
    if (type == "RESULT") {
      Result r;
      r.task_id = j.at("task_id").get<std::string>();
      if (j.contains("result")) r.result = j.at("result").get<DockingResult>();
      r.error = j.value("error", std::string());
      if (!r.result && r.error.empty()) throw ProtocolError("RESULT without result or error");
      return r;
    }
    if (type == "NO_MORE_TASKS") return NoMoreTasks{};
    if (type == "SHUTDOWN") return Shutdown{};
    throw ProtocolError("unknown message type " + type);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("bad message fields: ") + e.what());
  }
}

std::string encode_frame(const Message& m) {
  const std::string payload = encode_payload(m);
  if (payload.size() > kMaxPayloadBytes) throw ProtocolError("message too large");
  const auto len = static_cast<std::uint32_t>(payload.size());
  std::string frame;
  frame.reserve(4 + payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) frame.push_back(static_cast<char>((len >> shift) & 0xff));
  frame += payload;
  return frame;
}

std::uint32_t read_length_prefix(const unsigned char* b) {
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::optional<Message> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const std::uint32_t len = read_length_prefix(reinterpret_cast<const unsigned char*>(buffer_.data()));
  if (len > kMaxPayloadBytes) throw ProtocolError("frame length " + std::to_string(len) + " exceeds limit");
  if (buffer_.size() < 4 + std::size_t(len)) return std::nullopt;
  Message m = decode_payload(std::string_view(buffer_).substr(4, len));
  buffer_.erase(0, 4 + std::size_t(len));
  return m;
}

}  // namespace fftdock::wire
