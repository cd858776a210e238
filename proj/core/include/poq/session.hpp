#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "poq/wire.hpp"

/// Two-party sessions: the party interface, transcripts and the in-process
/// link.
namespace poq::session {

using wire::Frame;

/// One side of a protocol run as a message-driven state machine.
class Party {
 public:
  virtual ~Party() = default;

  /// Frames sent before anything is received.
  virtual std::vector<Frame> start() { return {}; }
  virtual std::vector<Frame> on_frame(const Frame& frame) = 0;
  virtual bool finished() const = 0;
};

enum class Direction : std::uint8_t { kToProver, kToVerifier };

std::string_view direction_name(Direction d);

struct Record {
  std::size_t seq = 0;
  Direction dir = Direction::kToProver;
  Frame frame;

  bool operator==(const Record&) const = default;
};

class Transcript {
 public:
  void add(Direction dir, Frame frame);
  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  /// Frames travelling in one direction, in order.
  std::vector<Frame> frames(Direction dir) const;

  /// One JSON object per record: {"trial","seq","dir","type","payload"}
  /// with a base64 payload.
  std::string to_jsonl(std::size_t trial) const;
  static Transcript from_jsonl(std::string_view lines);

  bool operator==(const Transcript&) const = default;

 private:
  std::vector<Record> records_;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Delivers frames between two parties in FIFO order, recording each frame
/// when it is sent.
class InprocLink {
 public:
  InprocLink(Party& verifier, Party& prover, Transcript* transcript = nullptr);

  /// Queues both parties' opening frames.
  void open();
  /// Delivers one queued frame. Returns false if nothing was queued.
  bool step();
  /// Runs to quiescence. Throws ProtocolError if either party is still
  /// waiting afterwards.
  void run();

 private:
  void send(Direction dir, std::vector<Frame> frames);

  Party& verifier_;
  Party& prover_;
  Transcript* transcript_;
  std::deque<std::pair<Direction, Frame>> queue_;
};

/// Feeds the frames a party received in `recorded` into `fresh` and checks
/// that what it sends back matches the recording. Returns false on the
/// first divergence.
bool replay_matches(Party& fresh, Direction inbound, const Transcript& recorded);

}  // namespace poq::session
