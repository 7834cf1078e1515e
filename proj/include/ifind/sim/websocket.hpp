#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// Minimal RFC 6455 pieces: the handshake accept key and frame coding.
namespace ifind::sim::ws {

/// Sec-WebSocket-Accept value for a client's Sec-WebSocket-Key.
std::string accept_key(std::string_view client_key);

enum class Opcode : std::uint8_t {
  Continuation = 0x0,
  Text = 0x1,
  Binary = 0x2,
  Close = 0x8,
  Ping = 0x9,
  Pong = 0xA,
};

struct Frame {
  bool fin = true;
  Opcode opcode = Opcode::Text;
  std::string payload;  // unmasked
};

/// Encodes one frame; `mask` is applied when present (client to server).
std::string encode(const Frame& f, std::optional<std::uint32_t> mask = std::nullopt);

/// Decodes one frame from the front of `buf`, returning it and the number of
/// bytes consumed, or nullopt when more bytes are needed.
std::optional<std::pair<Frame, std::size_t>> decode(std::string_view buf);

}  // namespace ifind::sim::ws
