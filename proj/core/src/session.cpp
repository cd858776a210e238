#include "poq/session.hpp"

#include <array>
#include <sstream>

#include <nlohmann/json.hpp>

#include "poq/errors.hpp"

namespace poq::session {

std::string_view direction_name(Direction d) {
  return d == Direction::kToProver ? "v2p" : "p2v";
}

void Transcript::add(Direction dir, Frame frame) {
  records_.push_back({records_.size(), dir, std::move(frame)});
}

std::vector<Frame> Transcript::frames(Direction dir) const {
  std::vector<Frame> out;
  for (const auto& r : records_) {
    if (r.dir == dir) out.push_back(r.frame);
  }
  return out;
}

std::string Transcript::to_jsonl(std::size_t trial) const {
  std::string out;
  for (const auto& r : records_) {
    nlohmann::ordered_json j;
    j["trial"] = trial;
    j["seq"] = r.seq;
    j["dir"] = direction_name(r.dir);
    j["type"] = wire::type_name(r.frame.type);
    j["payload"] = base64_encode(r.frame.payload);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Transcript Transcript::from_jsonl(std::string_view lines) {
  Transcript t;
  std::istringstream in{std::string(lines)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("seq")) continue;  // header lines
    const auto type = wire::type_from_name(j.at("type").get<std::string>());
    if (!type) throw ProtocolError("transcript: unknown frame type");
    const auto dir = j.at("dir").get<std::string>() == "v2p" ? Direction::kToProver
                                                             : Direction::kToVerifier;
    t.add(dir, Frame{*type, base64_decode(j.at("payload").get<std::string>())});
  }
  return t;
}

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int alphabet_index(char c) {
  const auto pos = kAlphabet.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) |
                            bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64: length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> q{};
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + static_cast<std::size_t>(j)];
      if (c == '=' && i + 4 == text.size() && j >= 2) {
        q[static_cast<std::size_t>(j)] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw std::invalid_argument("base64: data after padding");
      q[static_cast<std::size_t>(j)] = alphabet_index(c);
      if (q[static_cast<std::size_t>(j)] < 0) throw std::invalid_argument("base64: bad character");
    }
    const std::uint32_t v = (static_cast<std::uint32_t>(q[0]) << 18) |
                            (static_cast<std::uint32_t>(q[1]) << 12) |
                            (static_cast<std::uint32_t>(q[2]) << 6) | static_cast<std::uint32_t>(q[3]);
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

// --- InprocLink -------------------------------------------------------------

InprocLink::InprocLink(Party& verifier, Party& prover, Transcript* transcript)
    : verifier_(verifier), prover_(prover), transcript_(transcript) {}

void InprocLink::send(Direction dir, std::vector<Frame> frames) {
  for (auto& f : frames) {
    if (transcript_ != nullptr) transcript_->add(dir, f);
    queue_.emplace_back(dir, std::move(f));
  }
}

void InprocLink::open() {
  send(Direction::kToProver, verifier_.start());
  send(Direction::kToVerifier, prover_.start());
}

bool InprocLink::step() {
  if (queue_.empty()) return false;
  auto [dir, frame] = std::move(queue_.front());
  queue_.pop_front();
  if (dir == Direction::kToProver) {
    send(Direction::kToVerifier, prover_.on_frame(frame));
  } else {
    send(Direction::kToProver, verifier_.on_frame(frame));
  }
  return true;
}

void InprocLink::run() {
  while (step()) {
  }
  if (!verifier_.finished() || !prover_.finished()) {
    throw ProtocolError("session stalled before both parties finished");
  }
}

bool replay_matches(Party& fresh, Direction inbound, const Transcript& recorded) {
  std::vector<Frame> produced = fresh.start();
  std::vector<Frame> expected;
  for (const auto& r : recorded.records()) {
    if (r.dir == inbound) {
      auto out = fresh.on_frame(r.frame);
      produced.insert(produced.end(), out.begin(), out.end());
    } else {
      expected.push_back(r.frame);
    }
  }
  return produced == expected;
}

}  // namespace poq::session
