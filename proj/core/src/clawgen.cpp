#include "poq/clawgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "poq/errors.hpp"
#include "poq/wire.hpp"

namespace poq::clawgen {

using wire::FrameType;

void StreamParams::validate() const {
  if (lambda < 1) throw ConfigError("clawgen: lambda must be at least 1");
  if (lambda > 0xffff) throw ConfigError("clawgen: lambda above 65535");
  if (k < 2 || (k & (k - 1)) != 0) throw ConfigError("clawgen: k must be a power of two >= 2");
  if (k > (std::size_t{1} << 30)) throw ConfigError("clawgen: k above 2^30");
  if (strict) {
    const double lhs = static_cast<double>(k) / static_cast<double>(width());
    const double rhs = static_cast<double>(lambda) *
                       (static_cast<double>(m) + c * static_cast<double>(lambda));
    if (!(lhs > rhs)) {
      throw ConfigError("clawgen: strict mode requires k/log2 k > lambda*(m + c*lambda)");
    }
  }
}

std::uint64_t StreamParams::budget() const {
  if (attempt_budget != 0) return attempt_budget;
  return 100 * static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(k);
}

Dictator pick_dictator(Index v0, Index v1, std::size_t width) {
  if (v0 == v1) throw std::invalid_argument("pick_dictator: v0 == v1");
  const BitVec a = ih::encode_index(v0, width);
  const std::size_t p = (a ^ ih::encode_index(v1, width)).lowest_set();
  return Dictator{p, a.get(p)};
}

BitVec encode_component(Index v, bool z, std::size_t width) {
  BitVec out = ih::encode_index(v, width);
  out.push_back(z);
  return out;
}

StitchedClaw assemble(const std::vector<OneBitClaw>& claws, const BitVec& stitch_bits,
                      std::size_t width) {
  if (claws.empty()) throw std::invalid_argument("assemble: no claws");
  if (stitch_bits.size() + 1 != claws.size()) {
    throw std::invalid_argument("assemble: need lambda - 1 stitch bits");
  }
  StitchedClaw out;
  out.stitch_bits = stitch_bits;
  out.components = claws;
  BitVec x[2];
  for (std::size_t j = 0; j < claws.size(); ++j) {
    const OneBitClaw& c = claws[j];
    out.funs.push_back(pick_dictator(c.v0, c.v1, width));
    const bool flip = j > 0 && stitch_bits.get(j - 1);
    for (int b = 0; b < 2; ++b) {
      const bool side = (b != 0) != flip;
      x[b] = x[b].concat(side ? encode_component(c.v1, c.z1, width)
                              : encode_component(c.v0, c.z0, width));
    }
  }
  out.claw = ClawPair{std::move(x[0]), std::move(x[1]), out.funs.front()};
  return out;
}

StitchedClaw stitch(const std::vector<OneBitClaw>& claws, std::size_t width, RandomSource& rng) {
  BitVec bits(claws.empty() ? 0 : claws.size() - 1);
  for (std::size_t j = 0; j < bits.size(); ++j) bits.set(j, rng.bit());
  return assemble(claws, bits, width);
}

// --- frames -------------------------------------------------------------------

wire::Frame chunk_frame(std::uint16_t claw, const BitVec& bits) {
  wire::Frame f{FrameType::kStreamChunk, {static_cast<std::uint8_t>(claw >> 8),
                                          static_cast<std::uint8_t>(claw)}};
  bits.serialize_into(f.payload);
  return f;
}

std::pair<std::uint16_t, BitVec> parse_chunk(const wire::Frame& frame) {
  wire::expect(frame, FrameType::kStreamChunk);
  if (frame.payload.size() < 2) throw ProtocolError("STREAM_CHUNK: short payload");
  const auto claw = static_cast<std::uint16_t>(frame.payload[0] << 8 | frame.payload[1]);
  try {
    std::size_t used = 0;
    std::span<const std::uint8_t> rest(frame.payload.data() + 2, frame.payload.size() - 2);
    BitVec bits = BitVec::deserialize(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("trailing bytes");
    if (bits.size() > wire::kMaxChunkBits) throw std::invalid_argument("chunk too long");
    return {claw, std::move(bits)};
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string("STREAM_CHUNK: ") + e.what());
  }
}

wire::Frame funs_frame(const std::vector<Dictator>& funs) {
  wire::Frame f{FrameType::kStitchFuns, {}};
  f.payload.push_back(static_cast<std::uint8_t>(funs.size() >> 8));
  f.payload.push_back(static_cast<std::uint8_t>(funs.size()));
  for (const auto& g : funs) {
    f.payload.push_back(static_cast<std::uint8_t>(g.position));
    f.payload.push_back(static_cast<std::uint8_t>(g.inverted));
  }
  return f;
}

std::vector<Dictator> parse_funs(const wire::Frame& frame) {
  wire::expect(frame, FrameType::kStitchFuns);
  const auto& p = frame.payload;
  if (p.size() < 2) throw ProtocolError("STITCH_FUNS: short payload");
  const std::size_t count = std::size_t{p[0]} << 8 | p[1];
  if (p.size() != 2 + 2 * count) throw ProtocolError("STITCH_FUNS: length mismatch");
  std::vector<Dictator> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t inv = p[2 + 2 * i + 1];
    if (inv > 1) throw ProtocolError("STITCH_FUNS: polarity byte");
    out.push_back(Dictator{p[2 + 2 * i], inv == 1});
  }
  return out;
}

// --- verifier -----------------------------------------------------------------

ClawVerifier::ClawVerifier(const StreamParams& params, Mode mode, RandomSource& rng,
                           bool standalone)
    : params_(params), mode_(mode), rng_(rng), standalone_(standalone), session_(params.k) {
  params_.validate();
}

std::vector<wire::Frame> ClawVerifier::start() {
  std::vector<wire::Frame> out;
  begin_attempt(out);
  audit();
  return out;
}

void ClawVerifier::begin_attempt(std::vector<wire::Frame>& out) {
  const std::size_t k = params_.k;
  ++attempt_;
  session_ = ih::IHSession(k);
  if (mode_ == Mode::kRejection) {
    v0_ = static_cast<Index>(1 + rng_.below(k));
    v1_ = static_cast<Index>(1 + rng_.below(k));
  } else {
    full_stream_ = BitVec(k);
  }
  const auto claw_id = static_cast<std::uint16_t>(claw_index_ + 1);
  for (std::size_t begin = 0; begin < k; begin += wire::kMaxChunkBits) {
    const std::size_t len = std::min(wire::kMaxChunkBits, k - begin);
    BitVec chunk = f2::sample_uniform(len, rng_);
    if (mode_ == Mode::kRejection) {
      // Only U at v0 and v1 survives the chunk.
      if (v0_ - 1 >= begin && v0_ - 1 < begin + len) u0_ = chunk.get(v0_ - 1 - begin);
      if (v1_ - 1 >= begin && v1_ - 1 < begin + len) u1_ = chunk.get(v1_ - 1 - begin);
    } else {
      for (std::size_t i = 0; i < len; ++i) full_stream_.set(begin + i, chunk.get(i));
    }
    streamed_bits_ += len;
    out.push_back(chunk_frame(claw_id, chunk));
  }
  if (session_.rounds() == 0) {
    finish_attempt(out);
  } else {
    next_row(out);
  }
}

void ClawVerifier::next_row(std::vector<wire::Frame>& out) {
  BitVec h = ih::alice_next_row(session_, rng_);
  out.push_back(wire::vec_frame(FrameType::kIhRow, h));
  session_.push_row(std::move(h));
}

void ClawVerifier::finish_attempt(std::vector<wire::Frame>& out) {
  const auto [p0, p1] = ih::preimages(session_.transcript());
  if (mode_ == Mode::kAccelerated) {
    v0_ = p0;
    v1_ = p1;
    u0_ = full_stream_.get(p0 - 1);
    u1_ = full_stream_.get(p1 - 1);
    full_stream_ = BitVec();
  } else if (v0_ != p0 || v1_ != p1) {
    if (attempt_ >= params_.budget()) {
      throw AttemptBudgetExceeded("clawgen: claw " + std::to_string(claw_index_ + 1) +
                                  " exceeded " + std::to_string(params_.budget()) +
                                  " attempts (k=" + std::to_string(params_.k) + ")");
    }
    audit();
    begin_attempt(out);
    return;
  }
  claws_.push_back(OneBitClaw{v0_, v1_, u0_, u1_});
  attempts_.push_back(attempt_);
  attempt_ = 0;
  ++claw_index_;
  audit();
  if (claw_index_ < params_.lambda) {
    begin_attempt(out);
    return;
  }
  std::vector<Dictator> funs;
  for (const auto& c : claws_) funs.push_back(pick_dictator(c.v0, c.v1, params_.width()));
  out.push_back(funs_frame(funs));
  phase_ = Phase::kAwaitStitch;
}

std::vector<wire::Frame> ClawVerifier::on_frame(const wire::Frame& frame) {
  std::vector<wire::Frame> out;
  switch (phase_) {
    case Phase::kHashing: {
      wire::expect(frame, FrameType::kIhResp);
      if (!session_.awaiting_response()) throw ProtocolError("clawgen verifier: unexpected IH_RESP");
      session_.push_response(wire::parse_bit(frame));
      audit();
      if (session_.complete()) {
        finish_attempt(out);
      } else {
        next_row(out);
      }
      break;
    }
    case Phase::kAwaitStitch: {
      wire::expect(frame, FrameType::kStitchBits);
      const BitVec bits = wire::parse_vec(frame);
      if (bits.size() + 1 != params_.lambda) {
        throw ProtocolError("STITCH_BITS: expected lambda - 1 bits");
      }
      result_ = assemble(claws_, bits, params_.width());
      phase_ = Phase::kDone;
      if (standalone_) out.push_back(wire::bit_frame(FrameType::kVerdict, true));
      break;
    }
    case Phase::kDone:
      throw ProtocolError("clawgen verifier: frame after completion");
  }
  audit();
  return out;
}

std::vector<std::uint8_t> ClawVerifier::serialize() const {
  const std::size_t w = params_.width();
  BitVec bits;
  auto put = [&bits](std::uint64_t v, std::size_t n) { bits.append(v, n); };
  put(static_cast<std::uint64_t>(phase_), 2);
  put(claw_index_, 16);
  put(attempt_, 32);
  put(v0_ - 1, w);
  put(v1_ - 1, w);
  put(u0_, 1);
  put(u1_, 1);
  for (const auto& r : session_.transcript().rows) bits = bits.concat(r);
  for (const bool y : session_.transcript().responses) bits.push_back(y);
  for (const auto& c : claws_) {
    put(c.v0 - 1, w);
    put(c.v1 - 1, w);
    put(c.z0, 1);
    put(c.z1, 1);
  }
  bits = bits.concat(full_stream_);
  return bits.serialize();
}

std::size_t ClawVerifier::state_bits() const {
  const std::size_t w = params_.width();
  const auto& tr = session_.transcript();
  std::size_t row_bits = 0;
  for (const auto& r : tr.rows) row_bits += r.size();
  return 2 + 16 + 32 + 2 * w + 2 + row_bits + tr.responses.size() +
         claws_.size() * (2 * w + 2) + full_stream_.size();
}

void ClawVerifier::audit() { peak_state_bits_ = std::max(peak_state_bits_, state_bits()); }

// --- prover -------------------------------------------------------------------

ClawProver::ClawProver(const StreamParams& params, RandomSource& rng, bool standalone)
    : params_(params), rng_(rng), standalone_(standalone) {
  params_.validate();
}

void ClawProver::commit_current() {
  if (stream_pos_ != params_.k || support_.size() != 2) {
    throw ProtocolError("clawgen prover: claw ended before hashing completed");
  }
  const auto& a = support_[0];
  const auto& b = support_[1];
  supports_.push_back(OneBitClaw{a.v, b.v, a.payload != 0, b.payload != 0});
  support_.clear();
}

std::vector<wire::Frame> ClawProver::on_frame(const wire::Frame& frame) {
  if (done_) throw ProtocolError("clawgen prover: frame after completion");
  switch (frame.type) {
    case FrameType::kStreamChunk: {
      auto [claw, bits] = parse_chunk(frame);
      if (claw != 0 && claw == claw_index_) {
        // Same claw after a full stream: the previous attempt failed.
        if (stream_pos_ == params_.k) {
          stream_pos_ = 0;
          support_.clear();
        }
      } else if (claw == claw_index_ + 1 && claw <= params_.lambda) {
        if (claw_index_ > 0) commit_current();
        claw_index_ = claw;
        stream_pos_ = 0;
        support_.clear();
      } else {
        throw ProtocolError("clawgen prover: chunk for claw " + std::to_string(claw) +
                            " during claw " + std::to_string(claw_index_));
      }
      if (stream_pos_ + bits.size() > params_.k) throw ProtocolError("clawgen prover: stream overrun");
      for (std::size_t i = 0; i < bits.size(); ++i) {
        support_.push_back({static_cast<Index>(stream_pos_ + i + 1),
                            static_cast<std::uint8_t>(bits.get(i))});
      }
      stream_pos_ += bits.size();
      return {};
    }
    case FrameType::kIhRow: {
      if (stream_pos_ != params_.k) throw ProtocolError("clawgen prover: IH_ROW mid-stream");
      const BitVec h = wire::parse_vec(frame);
      if (h.size() != params_.width()) throw ProtocolError("IH_ROW: wrong width");
      auto resp = ih::coherent_bob_respond(support_, h, rng_);
      support_ = std::move(resp.support);
      return {wire::bit_frame(FrameType::kIhResp, resp.bit)};
    }
    case FrameType::kStitchFuns: {
      if (claw_ || claw_index_ != params_.lambda) {
        throw ProtocolError("clawgen prover: STITCH_FUNS out of order");
      }
      commit_current();
      const auto funs = parse_funs(frame);
      if (funs.size() != params_.lambda) throw ProtocolError("STITCH_FUNS: expected lambda functions");
      // Order each support by its dictator so branch 0 is g^j = 0.
      std::vector<OneBitClaw> labelled;
      for (std::size_t j = 0; j < funs.size(); ++j) {
        OneBitClaw c = supports_[j];
        const std::size_t w = params_.width();
        if (funs[j].position >= w) throw ProtocolError("STITCH_FUNS: position out of range");
        const bool g0 = funs[j](ih::encode_index(c.v0, w));
        const bool g1 = funs[j](ih::encode_index(c.v1, w));
        if (g0 == g1) throw ProtocolError("STITCH_FUNS: function does not split the claw");
        if (g0) {
          std::swap(c.v0, c.v1);
          std::swap(c.z0, c.z1);
        }
        labelled.push_back(c);
      }
      claw_ = stitch(labelled, params_.width(), rng_);
      claw_->funs = funs;
      claw_->claw.g = funs.front();
      if (!standalone_) done_ = true;
      return {wire::vec_frame(FrameType::kStitchBits, claw_->stitch_bits)};
    }
    case FrameType::kVerdict:
      if (!standalone_ || !claw_) throw ProtocolError("clawgen prover: unexpected VERDICT");
      wire::parse_bit(frame);
      done_ = true;
      return {};
    default:
      throw ProtocolError("clawgen prover: unexpected " + std::string(wire::type_name(frame.type)));
  }
}

// --- drivers ------------------------------------------------------------------

OneBitResult gen_one_bit_claw(const StreamParams& params, RandomSource& verifier_rng,
                              RandomSource& prover_rng, Mode mode) {
  StreamParams one = params;
  one.lambda = 1;
  ClawVerifier v(one, mode, verifier_rng);
  ClawProver p(one, prover_rng);
  session::InprocLink link(v, p);
  link.open();
  link.run();
  const OneBitClaw& pc = p.supports().front();
  return OneBitResult{v.result()->components.front(),
                      {{pc.v0, static_cast<std::uint8_t>(pc.z0)},
                       {pc.v1, static_cast<std::uint8_t>(pc.z1)}},
                      v.attempts().front()};
}

bool RunResult::correct() const {
  const ClawPair& v = verifier_claw.claw;
  const ClawPair& p = prover_claw.claw;
  return v.valid() && v.x0 == p.x0 && v.x1 == p.x1 && v.g == p.g;
}

RunResult run_clawgen(const StreamParams& params, std::uint64_t seed, std::uint64_t trial,
                      Mode mode) {
  Rng vr = trial_rng(seed, trial, Role::kVerifier);
  Rng pr = trial_rng(seed, trial, Role::kProver);
  ClawVerifier v(params, mode, vr);
  ClawProver p(params, pr);
  RunResult res;
  session::InprocLink link(v, p, &res.transcript);
  link.open();
  link.run();
  res.verifier_claw = *v.result();
  res.prover_claw = *p.claw();
  res.attempts = v.attempts();
  res.streamed_bits = v.streamed_bits();
  res.verifier_peak_bits = v.peak_state_bits();
  return res;
}

}  // namespace poq::clawgen
