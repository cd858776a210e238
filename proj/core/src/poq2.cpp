#include "poq/poq2.hpp"

#include <string>

#include "poq/errors.hpp"
#include "poq/wire.hpp"

namespace poq::poq2 {

using wire::FrameType;

namespace {

int sign(bool bit) { return bit ? -1 : 1; }

}  // namespace

bool verdict_equation(Theta theta, bool alpha, bool r0x0, bool d_dot_diff, bool b) {
  const int a = alpha ? 1 : 0;
  const int second = a * sign(d_dot_diff);
  const int rhs = (1 - a) * sign(r0x0) + (theta == Theta::kPlus ? second : -second);
  return sign(b) == rhs;
}

Verifier::Verifier(ClawPair claw) : claw_(std::move(claw)) {
  if (!claw_.valid()) throw std::invalid_argument("poq2 verifier: invalid claw");
}

std::pair<BitVec, BitVec> Verifier::commit_challenge(RandomSource& rng) {
  r0_ = f2::sample_uniform(claw_.dim(), rng);
  r1_ = f2::sample_uniform(claw_.dim(), rng);
  alpha_ = f2::dot(r0_, claw_.x0) != f2::dot(r1_, claw_.x1);
  return {r0_, r1_};
}

void Verifier::receive_d(BitVec d) {
  if (d.size() != claw_.dim()) throw ProtocolError("poq2 verifier: d has wrong length");
  d_ = std::move(d);
}

Theta Verifier::choose_theta(RandomSource& rng) {
  theta_ = qsim::theta_from_bit(rng.bit());
  return theta_;
}

bool Verifier::accepts(const BitVec& d, bool b) const {
  return verdict_equation(theta_, alpha_, f2::dot(r0_, claw_.x0),
                          f2::dot(d, claw_.x0 ^ claw_.x1), b);
}

bool Verifier::verdict(bool b) {
  result_ = accepts(d_, b);
  return *result_;
}

qsim::CommitOutcome commit_phase(const ClawPair& support, const BitVec& r0, const BitVec& r1,
                                 RandomSource& rng) {
  // Branch labels come from g; x0 is the branch with g = 0.
  if (support.g(support.x0) || !support.g(support.x1)) {
    throw std::invalid_argument("commit_phase: g does not label the support");
  }
  return qsim::hadamard_commit_measure(support, r0, r1, rng);
}

double exact_accept_probability(const Verifier& v, const BitVec& d, const QubitDesc& q) {
  const double p0 = qsim::chsh_prob_zero(q, v.theta());
  return (v.accepts(d, false) ? p0 : 0.0) + (v.accepts(d, true) ? 1.0 - p0 : 0.0);
}

// --- parties ------------------------------------------------------------------

VerifierParty::VerifierParty(const clawgen::StreamParams& params, clawgen::Mode mode,
                             std::uint64_t seed, std::uint64_t trial)
    : rng_(trial_rng(seed, trial, Role::kVerifier)), claw_(params, mode, rng_, false) {}

std::vector<wire::Frame> VerifierParty::start() { return claw_.start(); }

std::vector<wire::Frame> VerifierParty::on_frame(const wire::Frame& frame) {
  switch (phase_) {
    case Phase::kClaw: {
      auto out = claw_.on_frame(frame);
      if (claw_.finished()) {
        verifier_.emplace(claw_.result()->claw);
        const auto [r0, r1] = verifier_->commit_challenge(rng_);
        out.push_back(wire::vec_pair_frame(FrameType::kR0R1Vec, r0, r1));
        phase_ = Phase::kAwaitD;
      }
      return out;
    }
    case Phase::kAwaitD: {
      wire::expect(frame, FrameType::kDVec);
      verifier_->receive_d(wire::parse_vec(frame));
      phase_ = Phase::kAwaitB;
      return {wire::bit_frame(FrameType::kTheta, verifier_->choose_theta(rng_) == Theta::kMinus)};
    }
    case Phase::kAwaitB: {
      wire::expect(frame, FrameType::kBBit);
      phase_ = Phase::kDone;
      return {wire::bit_frame(FrameType::kVerdict, verifier_->verdict(wire::parse_bit(frame)))};
    }
    case Phase::kDone:
      break;
  }
  throw ProtocolError("poq2 verifier: frame after verdict");
}

ProverParty::ProverParty(const clawgen::StreamParams& params, std::uint64_t seed,
                         std::uint64_t trial)
    : rng_(trial_rng(seed, trial, Role::kProver)), claw_(params, rng_, false) {}

std::vector<wire::Frame> ProverParty::on_frame(const wire::Frame& frame) {
  if (done_) throw ProtocolError("poq2 prover: frame after verdict");
  if (!claw_.finished()) return claw_.on_frame(frame);
  switch (frame.type) {
    case FrameType::kR0R1Vec: {
      if (committed_) throw ProtocolError("poq2 prover: second challenge");
      const auto [r0, r1] = wire::parse_vec_pair(frame);
      const ClawPair& support = claw_.claw()->claw;
      if (r0.size() != support.dim() || r1.size() != support.dim()) {
        throw ProtocolError("R0R1_VEC: wrong length");
      }
      auto out = commit_phase(support, r0, r1, rng_);
      committed_ = out.qubit;
      return {wire::vec_frame(FrameType::kDVec, out.d)};
    }
    case FrameType::kTheta: {
      if (!committed_) throw ProtocolError("poq2 prover: THETA before commitment");
      const Theta th = qsim::theta_from_bit(wire::parse_bit(frame));
      return {wire::bit_frame(FrameType::kBBit, qsim::chsh_measure(*committed_, th, rng_))};
    }
    case FrameType::kVerdict:
      wire::parse_bit(frame);
      done_ = true;
      return {};
    default:
      throw ProtocolError("poq2 prover: unexpected " + std::string(wire::type_name(frame.type)));
  }
}

RunResult run_honest(const clawgen::StreamParams& params, std::uint64_t seed, std::uint64_t trial,
                     clawgen::Mode mode) {
  VerifierParty vp(params, mode, seed, trial);
  ProverParty pp(params, seed, trial);
  RunResult res;
  session::InprocLink link(vp, pp, &res.transcript);
  link.open();
  link.run();
  const Verifier& v = *vp.verifier();
  res.accept = v.result().value_or(false);
  res.alpha = v.alpha();
  res.exact_accept = exact_accept_probability(v, v.d(), *pp.committed());
  res.attempts = vp.clawgen().attempts();
  res.verifier_peak_bits = vp.clawgen().peak_state_bits();
  const ClawPair& a = vp.clawgen().result()->claw;
  const ClawPair& b = pp.clawgen().claw()->claw;
  res.claw_correct = a.valid() && a.x0 == b.x0 && a.x1 == b.x1 && a.g == b.g;
  return res;
}

}  // namespace poq::poq2
