#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "poq/f2.hpp"
#include "poq/ih.hpp"
#include "poq/qsim.hpp"
#include "poq/rng.hpp"
#include "poq/session.hpp"

/// Claw generation from a streamed random string and interactive hashing.
///
/// Each one-bit claw: the verifier picks v0, v1 in [k], streams U in
/// {0,1}^k, the prover holds sum_v |v, U_v> and runs the hashing receiver
/// coherently. The attempt succeeds when the hash preimages are exactly
/// (v0, v1); otherwise everything restarts. lambda one-bit claws are then
/// stitched into one claw over lambda * (log2 k + 1) bits.
namespace poq::clawgen {

using f2::BitVec;
using ih::Index;
using qsim::ClawPair;
using qsim::Dictator;

enum class Mode : std::uint8_t {
  /// The protocol as written: retry until the preimages match.
  kRejection,
  /// Honest-run shortcut: run one attempt and take v0, v1 from the hash.
  /// The verifier keeps all of U while streaming.
  kAccelerated,
};

struct StreamParams {
  std::size_t lambda = 1;
  std::size_t k = 2;
  /// Adversary memory bound, used by the strict precondition and reports.
  std::size_t m = 0;
  /// Enforce k / log2 k > lambda * (m + c * lambda).
  bool strict = false;
  double c = 1.0;
  /// Per-claw attempt cap; 0 means 100 * k^2.
  std::uint64_t attempt_budget = 0;

  /// Throws ConfigError.
  void validate() const;
  std::size_t width() const { return ih::index_width(k); }
  /// Length of each claw component.
  std::size_t claw_bits() const { return lambda * (width() + 1); }
  std::uint64_t budget() const;
};

struct OneBitClaw {
  Index v0 = 1;
  Index v1 = 2;
  bool z0 = false;
  bool z1 = false;

  bool operator==(const OneBitClaw&) const = default;
};

/// Dictator on the index bits with g(v0) = 0 and g(v1) = 1, at the lowest
/// differing position. Throws std::invalid_argument when v0 == v1.
Dictator pick_dictator(Index v0, Index v1, std::size_t width);

/// (bin(v - 1), z) as width + 1 bits.
BitVec encode_component(Index v, bool z, std::size_t width);

struct StitchedClaw {
  ClawPair claw;
  /// b_2 .. b_lambda.
  BitVec stitch_bits;
  std::vector<OneBitClaw> components;
  std::vector<Dictator> funs;
};

/// x_b = (v^1_b, z^1_b, v^2_{b^b_2}, z^2_{b^b_2}, ...) with g = g^1.
StitchedClaw assemble(const std::vector<OneBitClaw>& claws, const BitVec& stitch_bits,
                      std::size_t width);

/// The prover's B_j measurements: b_j is uniform for j >= 2; the residual
/// superposition is over the returned claw.
StitchedClaw stitch(const std::vector<OneBitClaw>& claws, std::size_t width, RandomSource& rng);

/// Verifier side of claw generation. When `standalone`, the run ends with
/// VERDICT(1); otherwise finished() turns true once the claw is fixed and
/// the caller continues the session.
class ClawVerifier final : public session::Party {
 public:
  ClawVerifier(const StreamParams& params, Mode mode, RandomSource& rng, bool standalone = true);

  std::vector<wire::Frame> start() override;
  std::vector<wire::Frame> on_frame(const wire::Frame& frame) override;
  bool finished() const override { return phase_ == Phase::kDone; }

  const StreamParams& params() const { return params_; }
  /// Available once finished.
  const std::optional<StitchedClaw>& result() const { return result_; }
  const std::vector<std::uint64_t>& attempts() const { return attempts_; }
  std::uint64_t streamed_bits() const { return streamed_bits_; }

  /// Persistent state: the current attempt (v0, v1, U at both, hashing
  /// rows and responses) and the finished one-bit claws.
  std::vector<std::uint8_t> serialize() const;
  /// Bit length of the state inside serialize().
  std::size_t state_bits() const;
  std::size_t peak_state_bits() const { return peak_state_bits_; }

 private:
  enum class Phase : std::uint8_t { kHashing, kAwaitStitch, kDone };

  void begin_attempt(std::vector<wire::Frame>& out);
  void finish_attempt(std::vector<wire::Frame>& out);
  void next_row(std::vector<wire::Frame>& out);
  void audit();

  StreamParams params_;
  Mode mode_;
  RandomSource& rng_;
  bool standalone_;
  Phase phase_ = Phase::kHashing;

  std::size_t claw_index_ = 0;  // 0-based claw in progress
  std::uint64_t attempt_ = 0;
  Index v0_ = 1;
  Index v1_ = 1;
  bool u0_ = false;
  bool u1_ = false;
  BitVec full_stream_;  // accelerated mode only
  ih::IHSession session_;

  std::vector<OneBitClaw> claws_;
  std::vector<std::uint64_t> attempts_;
  std::uint64_t streamed_bits_ = 0;
  std::optional<StitchedClaw> result_;
  std::size_t peak_state_bits_ = 0;
};

/// Honest coherent prover. After stitching, the residual state is the
/// two-element superposition described by claw().
class ClawProver final : public session::Party {
 public:
  ClawProver(const StreamParams& params, RandomSource& rng, bool standalone = true);

  std::vector<wire::Frame> on_frame(const wire::Frame& frame) override;
  bool finished() const override { return done_; }

  /// Supports of the completed one-bit claws, as (v0, z0, v1, z1).
  const std::vector<OneBitClaw>& supports() const { return supports_; }
  const std::optional<StitchedClaw>& claw() const { return claw_; }

 private:
  void commit_current();

  StreamParams params_;
  RandomSource& rng_;
  bool standalone_;
  std::size_t claw_index_ = 0;  // 1-based index of the claw in progress; 0 before any
  std::size_t stream_pos_ = 0;
  ih::Support support_;
  std::vector<OneBitClaw> supports_;
  std::optional<StitchedClaw> claw_;
  bool done_ = false;
};

// STREAM_CHUNK payload: u16 claw index (1-based, big-endian), then a
// serialized BitVec of at most 2^16 bits.
wire::Frame chunk_frame(std::uint16_t claw, const BitVec& bits);
std::pair<std::uint16_t, BitVec> parse_chunk(const wire::Frame& frame);
// STITCH_FUNS payload: u16 count, then (u8 position, u8 inverted) pairs.
wire::Frame funs_frame(const std::vector<Dictator>& funs);
std::vector<Dictator> parse_funs(const wire::Frame& frame);

struct OneBitResult {
  OneBitClaw claw;
  /// Prover support as (v, U_v) pairs, in index order.
  ih::Support support;
  std::uint64_t attempts = 0;
};

/// One one-bit claw through the in-process link with lambda forced to 1.
OneBitResult gen_one_bit_claw(const StreamParams& params, RandomSource& verifier_rng,
                              RandomSource& prover_rng, Mode mode);

struct RunResult {
  StitchedClaw verifier_claw;
  StitchedClaw prover_claw;
  session::Transcript transcript;
  std::vector<std::uint64_t> attempts;
  std::uint64_t streamed_bits = 0;
  std::size_t verifier_peak_bits = 0;

  /// Prover support equals {x0, x1} and g separates them.
  bool correct() const;
};

RunResult run_clawgen(const StreamParams& params, std::uint64_t seed, std::uint64_t trial,
                      Mode mode);

}  // namespace poq::clawgen
