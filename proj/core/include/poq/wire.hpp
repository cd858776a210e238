#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "poq/f2.hpp"

/// Length-prefixed frames: 1 type byte, 4-byte big-endian payload length,
/// payload.
namespace poq::wire {

enum class FrameType : std::uint8_t {
  kHello = 0x01,
  kARow = 0x10,
  kYBit = 0x11,
  kRVec = 0x12,
  kDVec = 0x13,
  kTheta = 0x14,
  kBBit = 0x15,
  kStreamChunk = 0x20,
  kIhRow = 0x21,
  kIhResp = 0x22,
  kStitchFuns = 0x23,
  kStitchBits = 0x24,
  kR0R1Vec = 0x25,
  kVerdict = 0x30,
};

inline constexpr std::size_t kHeaderBytes = 5;
inline constexpr std::size_t kMaxPayload = std::size_t{1} << 24;
/// Longest stream fragment carried by one STREAM_CHUNK.
inline constexpr std::size_t kMaxChunkBits = std::size_t{1} << 16;

bool is_known_type(std::uint8_t byte);
std::string_view type_name(FrameType type);
/// Inverse of type_name; nullopt for unknown names.
std::optional<FrameType> type_from_name(std::string_view name);

struct Frame {
  FrameType type{};
  std::vector<std::uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

std::vector<std::uint8_t> encode(const Frame& frame);
void encode_into(const Frame& frame, std::vector<std::uint8_t>& out);

/// Incremental decoder for a byte stream. Throws ProtocolError on an
/// unknown type byte or a length above kMaxPayload.
class Decoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Frame> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
};

/// Decodes exactly one frame occupying all of `bytes`.
Frame decode(std::span<const std::uint8_t> bytes);

// Payload helpers. Parsers throw ProtocolError on malformed payloads.

Frame bit_frame(FrameType type, bool bit);
bool parse_bit(const Frame& frame);

Frame vec_frame(FrameType type, const f2::BitVec& v);
f2::BitVec parse_vec(const Frame& frame);

Frame vec_pair_frame(FrameType type, const f2::BitVec& a, const f2::BitVec& b);
std::pair<f2::BitVec, f2::BitVec> parse_vec_pair(const Frame& frame);

/// Throws ProtocolError unless frame.type == expected.
void expect(const Frame& frame, FrameType expected);

}  // namespace poq::wire
