#include "poq/wire.hpp"

#include <array>
#include <string>

#include "poq/errors.hpp"

namespace poq::wire {

namespace {

struct TypeEntry {
  FrameType type;
  std::string_view name;
};

constexpr std::array<TypeEntry, 14> kTypes{{
    {FrameType::kHello, "HELLO"},
    {FrameType::kARow, "A_ROW"},
    {FrameType::kYBit, "Y_BIT"},
    {FrameType::kRVec, "R_VEC"},
    {FrameType::kDVec, "D_VEC"},
    {FrameType::kTheta, "THETA"},
    {FrameType::kBBit, "B_BIT"},
    {FrameType::kStreamChunk, "STREAM_CHUNK"},
    {FrameType::kIhRow, "IH_ROW"},
    {FrameType::kIhResp, "IH_RESP"},
    {FrameType::kStitchFuns, "STITCH_FUNS"},
    {FrameType::kStitchBits, "STITCH_BITS"},
    {FrameType::kR0R1Vec, "R0R1_VEC"},
    {FrameType::kVerdict, "VERDICT"},
}};

}  // namespace

bool is_known_type(std::uint8_t byte) {
  for (const auto& e : kTypes) {
    if (static_cast<std::uint8_t>(e.type) == byte) return true;
  }
  return false;
}

std::string_view type_name(FrameType type) {
  for (const auto& e : kTypes) {
    if (e.type == type) return e.name;
  }
  return "UNKNOWN";
}

std::optional<FrameType> type_from_name(std::string_view name) {
  for (const auto& e : kTypes) {
    if (e.name == name) return e.type;
  }
  return std::nullopt;
}

void encode_into(const Frame& frame, std::vector<std::uint8_t>& out) {
  if (frame.payload.size() > kMaxPayload) throw ProtocolError("frame payload too large");
  const auto len = static_cast<std::uint32_t>(frame.payload.size());
  out.push_back(static_cast<std::uint8_t>(frame.type));
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
}

std::vector<std::uint8_t> encode(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + frame.payload.size());
  encode_into(frame, out);
  return out;
}

void Decoder::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> Decoder::next() {
  if (buffered() < kHeaderBytes) return std::nullopt;
  const std::uint8_t* h = buffer_.data() + offset_;
  if (!is_known_type(h[0])) {
    throw ProtocolError("unknown frame type 0x" + std::to_string(static_cast<int>(h[0])));
  }
  const std::size_t len = (std::size_t{h[1]} << 24) | (std::size_t{h[2]} << 16) |
                          (std::size_t{h[3]} << 8) | std::size_t{h[4]};
  if (len > kMaxPayload) throw ProtocolError("frame length exceeds limit");
  if (buffered() < kHeaderBytes + len) return std::nullopt;
  Frame f{static_cast<FrameType>(h[0]),
          std::vector<std::uint8_t>(h + kHeaderBytes, h + kHeaderBytes + len)};
  offset_ += kHeaderBytes + len;
  if (offset_ > 4096 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return f;
}

Frame decode(std::span<const std::uint8_t> bytes) {
  Decoder dec;
  dec.feed(bytes);
  auto f = dec.next();
  if (!f || dec.buffered() != 0) throw ProtocolError("frame length does not match buffer");
  return *std::move(f);
}

Frame bit_frame(FrameType type, bool bit) { return Frame{type, {static_cast<std::uint8_t>(bit)}}; }

bool parse_bit(const Frame& frame) {
  if (frame.payload.size() != 1 || frame.payload[0] > 1) {
    throw ProtocolError(std::string(type_name(frame.type)) + ": expected one 0/1 byte");
  }
  return frame.payload[0] == 1;
}

Frame vec_frame(FrameType type, const f2::BitVec& v) { return Frame{type, v.serialize()}; }

f2::BitVec parse_vec(const Frame& frame) {
  try {
    std::size_t used = 0;
    f2::BitVec v = f2::BitVec::deserialize(frame.payload, &used);
    if (used != frame.payload.size()) throw std::invalid_argument("trailing bytes");
    return v;
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string(type_name(frame.type)) + ": " + e.what());
  }
}

Frame vec_pair_frame(FrameType type, const f2::BitVec& a, const f2::BitVec& b) {
  Frame f{type, {}};
  a.serialize_into(f.payload);
  b.serialize_into(f.payload);
  return f;
}

std::pair<f2::BitVec, f2::BitVec> parse_vec_pair(const Frame& frame) {
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    std::span<const std::uint8_t> bytes(frame.payload);
    f2::BitVec a = f2::BitVec::deserialize(bytes, &used_a);
    f2::BitVec b = f2::BitVec::deserialize(bytes.subspan(used_a), &used_b);
    if (used_a + used_b != bytes.size()) throw std::invalid_argument("trailing bytes");
    return {std::move(a), std::move(b)};
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string(type_name(frame.type)) + ": " + e.what());
  }
}

void expect(const Frame& frame, FrameType expected) {
  if (frame.type != expected) {
    throw ProtocolError("expected " + std::string(type_name(expected)) + ", got " +
                        std::string(type_name(frame.type)));
  }
}

}  // namespace poq::wire
