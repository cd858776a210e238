#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "poq/f2.hpp"
#include "poq/qsim.hpp"
#include "poq/rng.hpp"
#include "poq/session.hpp"

/// Parity-based proof of quantumness with a quadratic memory gap.
///
/// The verifier streams rows a_i = (v_i, v_i.s) of A = (V, Vs) and never
/// stores A; it keeps the running sum r = sum u_i a_i so that, for c = 0, the
/// committed bit r.x of the prover's claw can be checked against u.y.
namespace poq::poq1 {

using f2::BitVec;
using qsim::QubitDesc;
using qsim::Theta;
using qsim::theta_from_bit;

/// Verifier messages of the parity protocol. Every member is O(n) bits.
class Verifier {
 public:
  enum class Phase : std::uint8_t { kClaw, kAwaitY, kCommit, kAwaitD, kAwaitB, kDone };

  Verifier(std::size_t n, RandomSource& rng);

  std::size_t n() const { return n_; }
  std::size_t rounds() const { return 2 * n_; }
  Phase phase() const { return phase_; }
  std::size_t round() const { return round_; }

  /// Samples v_i and returns a_i = (v_i, v_i.s); adds u_i a_i to r.
  BitVec verifier_round(RandomSource& rng);
  void verifier_absorb(bool y);
  /// c = 0 sends the accumulator, c = 1 a fresh r with r.t = 1.
  BitVec verifier_commit_challenge(RandomSource& rng);
  void receive_d(BitVec d);
  Theta choose_theta(RandomSource& rng);
  bool verifier_verdict(bool b);
  /// Verdict for an explicit (d, b) without changing state.
  bool accepts(const BitVec& d, bool b) const;

  const BitVec& s() const { return s_; }
  const BitVec& t() const { return t_; }
  const BitVec& u() const { return u_; }
  const BitVec& y() const { return y_; }
  const BitVec& accumulator() const { return r_; }
  const BitVec& d() const { return d_; }
  bool challenge() const { return c_; }
  Theta theta() const { return theta_; }
  std::optional<bool> verdict() const { return verdict_; }

  /// Persistent state as bytes; its size is the memory audit.
  std::vector<std::uint8_t> serialize() const;

 private:
  void require(Phase p, const char* op) const;

  std::size_t n_;
  Phase phase_ = Phase::kClaw;
  std::size_t round_ = 0;
  BitVec s_, t_, u_, r_, y_, d_;
  bool c_ = false;
  Theta theta_ = Theta::kPlus;
  std::optional<bool> verdict_;
};

/// Honest prover backed by the claw calculus. The register holds n+1
/// qubits and one ancilla is allocated per measurement round.
class HonestProver {
 public:
  explicit HonestProver(std::size_t n);

  bool on_row(const BitVec& a, RandomSource& rng);
  BitVec on_challenge(const BitVec& r, RandomSource& rng);
  bool on_theta(Theta theta, RandomSource& rng);

  /// Claw register state; commitment measures a copy.
  const qsim::AffineState& state() const { return state_; }
  std::optional<QubitDesc> committed() const { return committed_; }
  std::size_t peak_qubits() const { return peak_qubits_; }

 private:
  std::size_t n_;
  qsim::AffineState state_;
  std::optional<QubitDesc> committed_;
  std::size_t peak_qubits_;
};

/// Exact Pr[accept] given the prover's committed qubit.
double exact_accept_probability(const Verifier& v, const BitVec& d, const QubitDesc& q);

class VerifierParty final : public session::Party {
 public:
  VerifierParty(std::size_t n, std::uint64_t seed, std::uint64_t trial);

  std::vector<wire::Frame> start() override;
  std::vector<wire::Frame> on_frame(const wire::Frame& frame) override;
  bool finished() const override { return verifier_.phase() == Verifier::Phase::kDone; }

  const Verifier& verifier() const { return verifier_; }
  std::size_t peak_state_bytes() const { return peak_state_bytes_; }

 private:
  void audit();

  Rng rng_;
  Verifier verifier_;
  std::size_t peak_state_bytes_ = 0;
};

class ProverParty final : public session::Party {
 public:
  ProverParty(std::size_t n, std::uint64_t seed, std::uint64_t trial);

  std::vector<wire::Frame> on_frame(const wire::Frame& frame) override;
  bool finished() const override { return done_; }

  /// The register state is left at the claw after commitment, so this
  /// exposes the claw for post-run checks.
  const HonestProver& prover() const { return prover_; }

 private:
  Rng rng_;
  HonestProver prover_;
  bool done_ = false;
};

struct RunResult {
  session::Transcript transcript;
  bool accept = false;
  /// rank(V) < n, detected from the recorded rows.
  bool degenerate = false;
  double exact_accept = 0.0;
  bool challenge = false;
  std::size_t prover_peak_qubits = 0;
  std::size_t claw_log2_size = 0;
  std::size_t verifier_state_bytes = 0;
};

/// rank of the matrix formed by the A_ROW payloads of a transcript.
std::size_t transcript_rank(const session::Transcript& t);

/// One honest run through the in-process link.
RunResult run_honest(std::size_t n, std::uint64_t seed, std::uint64_t trial);

}  // namespace poq::poq1
