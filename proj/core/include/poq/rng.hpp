#pragma once

#include <array>
#include <cstdint>

namespace poq {

/// Source of uniform randomness. Every random choice in the library goes
/// through one of these three calls, so tests can substitute an enumerating
/// source and obtain exact laws instead of samples.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  /// Uniform over [0, 2^count), count <= 64.
  virtual std::uint64_t bits(unsigned count) = 0;
  /// Uniform over [0, bound), bound >= 1.
  virtual std::uint64_t below(std::uint64_t bound) = 0;
  /// Uniform over [0, 1) with 53-bit resolution.
  virtual double uniform01() = 0;

  bool bit() { return bits(1) != 0; }
};

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based generator: key = seed, counter = (block index, stream id).
/// Two generators with the same (seed, stream) produce the same sequence on
/// every platform, independent of scheduling.
class Rng final : public RandomSource {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(unsigned count) override;
  std::uint64_t below(std::uint64_t bound) override;
  double uniform01() override;

  std::uint64_t next_u64();
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
};

enum class Role : std::uint8_t { kVerifier = 1, kProver = 2, kHarness = 3 };

/// Stream id for one party of one trial. The trial index and role are mixed
/// so per-trial substreams never overlap.
std::uint64_t trial_stream(std::uint64_t trial, Role role);

inline Rng trial_rng(std::uint64_t seed, std::uint64_t trial, Role role) {
  return Rng(seed, trial_stream(trial, role));
}

}  // namespace poq
