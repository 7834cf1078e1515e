#include "ifind/sim/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

namespace ifind::sim::ws {

std::string accept_key(std::string_view client_key) {
  static constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  std::string input(client_key);
  input += kGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<const char*>(out), static_cast<std::size_t>(n));
}

std::string encode(const Frame& f, std::optional<std::uint32_t> mask) {
  std::string out;
  out.push_back(static_cast<char>((f.fin ? 0x80 : 0x00) | static_cast<std::uint8_t>(f.opcode)));
  const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
  const std::uint64_t len = f.payload.size();
  if (len < 126) {
    out.push_back(static_cast<char>(mask_bit | len));
  } else if (len <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>(len >> 8));
    out.push_back(static_cast<char>(len & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((len >> shift) & 0xFF));
  }
  if (!mask) return out + f.payload;
  unsigned char key[4];
  for (int i = 0; i < 4; ++i) key[i] = static_cast<unsigned char>((*mask >> (24 - 8 * i)) & 0xFF);
  out.append(reinterpret_cast<const char*>(key), 4);
  for (std::size_t i = 0; i < f.payload.size(); ++i)
    out.push_back(static_cast<char>(static_cast<unsigned char>(f.payload[i]) ^ key[i % 4]));
  return out;
}

std::optional<std::pair<Frame, std::size_t>> decode(std::string_view buf) {
  if (buf.size() < 2) return std::nullopt;
  const auto b0 = static_cast<std::uint8_t>(buf[0]);
  const auto b1 = static_cast<std::uint8_t>(buf[1]);
  Frame f;
  f.fin = (b0 & 0x80) != 0;
  f.opcode = static_cast<Opcode>(b0 & 0x0F);
  const bool masked = (b1 & 0x80) != 0;
  std::uint64_t len = b1 & 0x7F;
  std::size_t pos = 2;
  if (len == 126) {
    if (buf.size() < 4) return std::nullopt;
    len = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[2])) << 8) |
          static_cast<std::uint8_t>(buf[3]);
    pos = 4;
  } else if (len == 127) {
    if (buf.size() < 10) return std::nullopt;
    len = 0;
    for (std::size_t i = 2; i < 10; ++i) len = (len << 8) | static_cast<std::uint8_t>(buf[i]);
    pos = 10;
  }
  unsigned char key[4] = {0, 0, 0, 0};
  if (masked) {
    if (buf.size() < pos + 4) return std::nullopt;
    for (int i = 0; i < 4; ++i) key[i] = static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)]);
    pos += 4;
  }
  if (buf.size() - pos < len) return std::nullopt;
  f.payload.assign(buf.substr(pos, static_cast<std::size_t>(len)));
  if (masked)
    for (std::size_t i = 0; i < f.payload.size(); ++i)
      f.payload[i] = static_cast<char>(static_cast<unsigned char>(f.payload[i]) ^ key[i % 4]);
  return std::make_pair(std::move(f), pos + static_cast<std::size_t>(len));
}

}  // namespace ifind::sim::ws
