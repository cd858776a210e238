#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "poq/clawgen.hpp"
#include "poq/f2.hpp"
#include "poq/rng.hpp"
#include "poq/session.hpp"

/// Memory-bounded classical adversaries.
///
/// A strategy is a pure transition from (persistent state, incoming frame,
/// randomness) to (outgoing frames, new persistent state). Scratch inside a
/// transition is free; only the state that survives to the next frame is
/// metered, and it must serialize into at most m bits.
namespace poq::adversary {

using f2::BitVec;
using wire::Frame;

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

/// Packs fixed-width fields into a BitVec, bit 0 of each field first.
class BitWriter {
 public:
  BitWriter& put(std::uint64_t value, std::size_t width);
  BitWriter& put(const BitVec& v);
  BitVec take() { return std::move(bits_); }

 private:
  BitVec bits_;
};

class BitReader {
 public:
  explicit BitReader(const BitVec& bits) : bits_(bits) {}
  std::uint64_t get(std::size_t width);
  BitVec get_vec(std::size_t len);
  std::size_t remaining() const { return bits_.size() - pos_; }

 private:
  const BitVec& bits_;
  std::size_t pos_ = 0;
};

/// The m-bit capsule carried between rounds.
class BoundedMemory {
 public:
  explicit BoundedMemory(std::size_t capacity_bits) : capacity_(capacity_bits) {}

  /// Throws MemoryBoundViolation when state exceeds the capacity; the
  /// previous state is kept.
  void store(BitVec state);
  const BitVec& load() const { return state_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t peak_bits() const { return peak_; }

 private:
  std::size_t capacity_;
  BitVec state_;
  std::size_t peak_ = 0;
};

struct Step {
  std::vector<Frame> out;
  BitVec state;
};

using Strategy = std::function<Step(const BitVec& state, const Frame& in, RandomSource& rng)>;

/// Runs a strategy as the prover side of a session. Finishes on VERDICT.
class AdversaryParty final : public session::Party {
 public:
  AdversaryParty(Strategy strategy, std::size_t capacity_bits, RandomSource& rng);

  std::vector<Frame> on_frame(const Frame& frame) override;
  bool finished() const override { return done_; }

  const BoundedMemory& memory() const { return memory_; }

 private:
  Strategy strategy_;
  BoundedMemory memory_;
  RandomSource& rng_;
  bool done_ = false;
};

// --- Raz experiment -----------------------------------------------------------

/// Streams rounds rows (v, v.s), then asks for the guess with an empty
/// R_VEC; the prover answers D_VEC = s~ and gets VERDICT(s~ == s).
class RazVerifier final : public session::Party {
 public:
  RazVerifier(std::size_t n, std::size_t rounds, RandomSource& rng);

  std::vector<Frame> start() override;
  std::vector<Frame> on_frame(const Frame& frame) override;
  bool finished() const override { return result_.has_value(); }

  const BitVec& secret() const { return s_; }
  std::optional<bool> result() const { return result_; }

 private:
  std::size_t n_;
  std::size_t rounds_;
  RandomSource& rng_;
  BitVec s_;
  std::optional<bool> result_;
};

/// Stores every row and solves; any consistent solution when V is singular.
Strategy raz_unbounded(std::size_t n);
/// Keeps the first j = floor(m / (n+1)) rows, then solves and picks a
/// uniform consistent solution.
Strategy raz_store_equations(std::size_t n, std::size_t m);
/// Keeps nothing and guesses.
Strategy raz_guess(std::size_t n);

struct RazOutcome {
  bool success = false;
  /// A memory-bound violation aborts the run; it is not a failure.
  bool aborted = false;
  std::size_t memory_bits_peak = 0;
};

RazOutcome raz_experiment(std::size_t n, std::size_t rounds, const Strategy& adv,
                          std::size_t capacity_bits, std::uint64_t seed, std::uint64_t trial,
                          session::Transcript* transcript = nullptr);

// --- Goldreich-Levin ----------------------------------------------------------

struct GLOptions {
  /// t = ceil(c * log2 n / eps^2).
  double c = 0.5;
  /// Query f(sum_S r_j) without the e_i offset.
  bool sketch_form = false;
  /// Force b_j = r_j . x for this x instead of guessing.
  std::optional<BitVec> condition_on;
};

std::size_t gl_samples(std::size_t n, double eps, double c);

struct GLResult {
  BitVec x;
  std::size_t t = 0;
  /// Working set: r_1..r_t, b_1..b_t, the subset cursor, one majority
  /// counter and the output.
  std::size_t memory_bits = 0;
};

using Oracle = std::function<bool(const BitVec&)>;

GLResult gl_extract(std::size_t n, double eps, const Oracle& f, RandomSource& rng,
                    const GLOptions& opts = {});

/// Runs both theta branches from the post-commitment state and returns
/// 1 iff the answers differ. `challenge` is R_VEC or R0R1_VEC.
bool predictor_b(const Strategy& prover, const BitVec& snapshot, const Frame& challenge,
                 const Rng& rng);

// --- poq1 attacks -------------------------------------------------------------

/// y_i = a_i . x for a fixed x, then d uniform and b = r . x.
Strategy poq1_linear_memory();
/// Stores every row, solves for t and answers each challenge type so the
/// verdict accepts.
Strategy poq1_unbounded();

struct Poq1AttackTrial {
  bool accept = false;
  bool degenerate = false;
  bool challenge = false;
  /// For the unbounded attack: r.t matched c.
  bool c_detected = false;
  std::size_t memory_bits_peak = 0;
};

Poq1AttackTrial attack_poq1(const std::string& name, std::size_t n, std::uint64_t seed,
                            std::uint64_t trial);
inline Poq1AttackTrial attack_poq1_linear_memory(std::size_t n, std::uint64_t seed,
                                                 std::uint64_t trial) {
  return attack_poq1("linear_memory", n, seed, trial);
}
inline Poq1AttackTrial attack_poq1_unbounded(std::size_t n, std::uint64_t seed,
                                             std::uint64_t trial) {
  return attack_poq1("unbounded", n, seed, trial);
}

/// Recovers t from a poq1 prover after claw generation using predictor_b as
/// the oracle. Returns whether gl_extract output equals t.
bool gl_against_poq1(const std::string& name, std::size_t n, double eps, const GLOptions& opts,
                     std::uint64_t seed, std::uint64_t trial);

// --- clawgen subset attack ------------------------------------------------------

/// Persistent bits needed by the subset attack.
std::size_t subset_attack_memory(const clawgen::StreamParams& params, std::size_t p);

/// Keeps U at indices 1..p, steers each hashing run towards that set, and
/// ends with a guess of (x0, x1) with unknown z bits drawn uniformly.
Strategy clawgen_subset(const clawgen::StreamParams& params, std::size_t p);

struct SubsetTrial {
  bool correct = false;
  /// Components whose z bits were both known.
  std::size_t known_components = 0;
  std::size_t memory_bits_peak = 0;
};

SubsetTrial attack_clawgen_subset(const clawgen::StreamParams& params, std::size_t p,
                                  std::uint64_t seed, std::uint64_t trial);

/// Capacity enforced for the poq1 attacks: linear_memory keeps n + 2 bits,
/// unbounded is metered but not capped.
std::size_t poq1_capacity(const std::string& name, std::size_t n);
Strategy poq1_strategy(const std::string& name);

/// JSON attack summary with fields attack, params, trials, accepts,
/// memory_bits_peak, degenerate_runs.
struct AttackReport {
  std::string attack;
  std::string params;  // JSON object text
  std::size_t trials = 0;
  std::size_t accepts = 0;
  std::size_t memory_bits_peak = 0;
  std::size_t degenerate_runs = 0;

  std::string to_json() const;
};

}  // namespace poq::adversary
