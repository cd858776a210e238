#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "poq/clawgen.hpp"
#include "poq/qsim.hpp"
#include "poq/rng.hpp"
#include "poq/session.hpp"

/// Proof of quantumness from a claw: commit with (r0, r1), CHSH test,
/// verdict from alpha = r0.x0 xor r1.x1. The claw comes from clawgen.
namespace poq::poq2 {

using f2::BitVec;
using qsim::ClawPair;
using qsim::QubitDesc;
using qsim::Theta;

/// (-1)^b == (1 - alpha)(-1)^{r0.x0} +/- alpha (-1)^{d.(x0 xor x1)}, with +
/// for theta = +pi/8 and - for -pi/8, evaluated over the integers.
bool verdict_equation(Theta theta, bool alpha, bool r0x0, bool d_dot_diff, bool b);

class Verifier {
 public:
  explicit Verifier(ClawPair claw);

  std::pair<BitVec, BitVec> commit_challenge(RandomSource& rng);
  void receive_d(BitVec d);
  Theta choose_theta(RandomSource& rng);
  bool verdict(bool b);
  bool accepts(const BitVec& d, bool b) const;

  const ClawPair& claw() const { return claw_; }
  const BitVec& r0() const { return r0_; }
  const BitVec& r1() const { return r1_; }
  bool alpha() const { return alpha_; }
  const BitVec& d() const { return d_; }
  Theta theta() const { return theta_; }
  std::optional<bool> result() const { return result_; }

 private:
  ClawPair claw_;
  BitVec r0_, r1_, d_;
  bool alpha_ = false;
  Theta theta_ = Theta::kPlus;
  std::optional<bool> result_;
};

/// The prover's commitment: r_{g(x)}.x into B, then X in the Hadamard basis.
qsim::CommitOutcome commit_phase(const ClawPair& support, const BitVec& r0, const BitVec& r1,
                                 RandomSource& rng);

double exact_accept_probability(const Verifier& v, const BitVec& d, const QubitDesc& q);

class VerifierParty final : public session::Party {
 public:
  VerifierParty(const clawgen::StreamParams& params, clawgen::Mode mode, std::uint64_t seed,
                std::uint64_t trial);

  std::vector<wire::Frame> start() override;
  std::vector<wire::Frame> on_frame(const wire::Frame& frame) override;
  bool finished() const override { return verifier_ && verifier_->result().has_value(); }

  const clawgen::ClawVerifier& clawgen() const { return claw_; }
  const std::optional<Verifier>& verifier() const { return verifier_; }

 private:
  enum class Phase : std::uint8_t { kClaw, kAwaitD, kAwaitB, kDone };

  Rng rng_;
  clawgen::ClawVerifier claw_;
  std::optional<Verifier> verifier_;
  Phase phase_ = Phase::kClaw;
};

class ProverParty final : public session::Party {
 public:
  ProverParty(const clawgen::StreamParams& params, std::uint64_t seed, std::uint64_t trial);

  std::vector<wire::Frame> on_frame(const wire::Frame& frame) override;
  bool finished() const override { return done_; }

  const clawgen::ClawProver& clawgen() const { return claw_; }
  std::optional<QubitDesc> committed() const { return committed_; }

 private:
  Rng rng_;
  clawgen::ClawProver claw_;
  std::optional<QubitDesc> committed_;
  bool done_ = false;
};

struct RunResult {
  session::Transcript transcript;
  bool accept = false;
  bool alpha = false;
  double exact_accept = 0.0;
  std::vector<std::uint64_t> attempts;
  std::size_t verifier_peak_bits = 0;
  bool claw_correct = false;
};

RunResult run_honest(const clawgen::StreamParams& params, std::uint64_t seed, std::uint64_t trial,
                     clawgen::Mode mode = clawgen::Mode::kAccelerated);

}  // namespace poq::poq2
