#include "poq/poq1.hpp"

#include <algorithm>
#include <string>

#include "poq/errors.hpp"
#include "poq/wire.hpp"

namespace poq::poq1 {

using wire::FrameType;

namespace {

const char* phase_name(Verifier::Phase p) {
  switch (p) {
    case Verifier::Phase::kClaw: return "claw";
    case Verifier::Phase::kAwaitY: return "await-y";
    case Verifier::Phase::kCommit: return "commit";
    case Verifier::Phase::kAwaitD: return "await-d";
    case Verifier::Phase::kAwaitB: return "await-b";
    case Verifier::Phase::kDone: return "done";
  }
  return "?";
}

}  // namespace

Verifier::Verifier(std::size_t n, RandomSource& rng)
    : n_(n),
      s_(f2::sample_uniform(n, rng)),
      t_(s_),
      u_(f2::sample_uniform(2 * n, rng)),
      r_(n + 1),
      y_(2 * n),
      d_(n + 1) {
  if (n < 2) throw ConfigError("poq1: n must be at least 2");
  t_.push_back(true);
}

void Verifier::require(Phase p, const char* op) const {
  if (phase_ != p) {
    throw ProtocolError(std::string("poq1 verifier: ") + op + " in phase " + phase_name(phase_));
  }
}

BitVec Verifier::verifier_round(RandomSource& rng) {
  require(Phase::kClaw, "round");
  BitVec a = f2::sample_uniform(n_, rng);
  a.push_back(f2::dot(a.slice(0, n_), s_));
  if (u_.get(round_)) r_ ^= a;
  phase_ = Phase::kAwaitY;
  return a;
}

void Verifier::verifier_absorb(bool y) {
  require(Phase::kAwaitY, "absorb");
  y_.set(round_, y);
  ++round_;
  phase_ = round_ == rounds() ? Phase::kCommit : Phase::kClaw;
}

BitVec Verifier::verifier_commit_challenge(RandomSource& rng) {
  require(Phase::kCommit, "commit");
  c_ = rng.bit();
  phase_ = Phase::kAwaitD;
  if (!c_) return r_;
  return f2::sample_conditioned(n_ + 1, t_, true, rng);
}

void Verifier::receive_d(BitVec d) {
  require(Phase::kAwaitD, "receive d");
  if (d.size() != n_ + 1) throw ProtocolError("poq1 verifier: d has wrong length");
  d_ = std::move(d);
}

Theta Verifier::choose_theta(RandomSource& rng) {
  require(Phase::kAwaitD, "theta");
  theta_ = theta_from_bit(rng.bit());
  phase_ = Phase::kAwaitB;
  return theta_;
}

bool Verifier::accepts(const BitVec& d, bool b) const {
  if (!c_) return f2::dot(u_, y_) == b;
  const bool dt = f2::dot(d, t_);
  return theta_ == Theta::kPlus ? dt == b : dt != b;
}

bool Verifier::verifier_verdict(bool b) {
  require(Phase::kAwaitB, "verdict");
  verdict_ = accepts(d_, b);
  phase_ = Phase::kDone;
  return *verdict_;
}

std::vector<std::uint8_t> Verifier::serialize() const {
  std::vector<std::uint8_t> out;
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n_ >> shift));
  out.push_back(static_cast<std::uint8_t>(phase_));
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(round_ >> shift));
  }
  s_.serialize_into(out);
  u_.serialize_into(out);
  r_.serialize_into(out);
  y_.serialize_into(out);
  d_.serialize_into(out);
  // c, theta and verdict share one flags byte; t is recomputed from s.
  std::uint8_t flags = static_cast<std::uint8_t>(c_) | static_cast<std::uint8_t>(theta_) << 1;
  if (verdict_) flags |= static_cast<std::uint8_t>(4 | (*verdict_ ? 8 : 0));
  out.push_back(flags);
  return out;
}

// --- honest prover ------------------------------------------------------------

HonestProver::HonestProver(std::size_t n) : n_(n), state_(n + 1), peak_qubits_(n + 1) {}

bool HonestProver::on_row(const BitVec& a, RandomSource& rng) {
  if (a.size() != n_ + 1) throw ProtocolError("poq1 prover: row has wrong length");
  if (committed_) throw ProtocolError("poq1 prover: row after commitment");
  // The ancilla holding a.x is measured and reset before the next round.
  peak_qubits_ = std::max(peak_qubits_, n_ + 2);
  auto out = qsim::linear_bit_measure(state_, a, rng);
  state_ = std::move(out.state);
  return out.bit;
}

BitVec HonestProver::on_challenge(const BitVec& r, RandomSource& rng) {
  if (r.size() != n_ + 1) throw ProtocolError("poq1 prover: r has wrong length");
  if (committed_) throw ProtocolError("poq1 prover: second challenge");
  peak_qubits_ = std::max(peak_qubits_, n_ + 2);
  auto out = qsim::affine_commit_measure(state_, r, rng);
  committed_ = out.qubit;
  return std::move(out.d);
}

bool HonestProver::on_theta(Theta theta, RandomSource& rng) {
  if (!committed_) throw ProtocolError("poq1 prover: theta before commitment");
  return qsim::chsh_measure(*committed_, theta, rng);
}

double exact_accept_probability(const Verifier& v, const BitVec& d, const QubitDesc& q) {
  const double p0 = qsim::chsh_prob_zero(q, v.theta());
  return (v.accepts(d, false) ? p0 : 0.0) + (v.accepts(d, true) ? 1.0 - p0 : 0.0);
}

// --- parties ------------------------------------------------------------------

VerifierParty::VerifierParty(std::size_t n, std::uint64_t seed, std::uint64_t trial)
    : rng_(trial_rng(seed, trial, Role::kVerifier)), verifier_(n, rng_) {
  audit();
}

void VerifierParty::audit() {
  peak_state_bytes_ = std::max(peak_state_bytes_, verifier_.serialize().size());
}

std::vector<wire::Frame> VerifierParty::start() {
  auto a = verifier_.verifier_round(rng_);
  audit();
  return {wire::vec_frame(FrameType::kARow, a)};
}

std::vector<wire::Frame> VerifierParty::on_frame(const wire::Frame& frame) {
  std::vector<wire::Frame> out;
  switch (verifier_.phase()) {
    case Verifier::Phase::kAwaitY: {
      wire::expect(frame, FrameType::kYBit);
      verifier_.verifier_absorb(wire::parse_bit(frame));
      if (verifier_.phase() == Verifier::Phase::kClaw) {
        out.push_back(wire::vec_frame(FrameType::kARow, verifier_.verifier_round(rng_)));
      } else {
        out.push_back(wire::vec_frame(FrameType::kRVec, verifier_.verifier_commit_challenge(rng_)));
      }
      break;
    }
    case Verifier::Phase::kAwaitD: {
      wire::expect(frame, FrameType::kDVec);
      verifier_.receive_d(wire::parse_vec(frame));
      const Theta th = verifier_.choose_theta(rng_);
      out.push_back(wire::bit_frame(FrameType::kTheta, th == Theta::kMinus));
      break;
    }
    case Verifier::Phase::kAwaitB: {
      wire::expect(frame, FrameType::kBBit);
      const bool ok = verifier_.verifier_verdict(wire::parse_bit(frame));
      out.push_back(wire::bit_frame(FrameType::kVerdict, ok));
      break;
    }
    default:
      throw ProtocolError("poq1 verifier: unexpected " + std::string(wire::type_name(frame.type)));
  }
  audit();
  return out;
}

ProverParty::ProverParty(std::size_t n, std::uint64_t seed, std::uint64_t trial)
    : rng_(trial_rng(seed, trial, Role::kProver)), prover_(n) {}

std::vector<wire::Frame> ProverParty::on_frame(const wire::Frame& frame) {
  if (done_) throw ProtocolError("poq1 prover: frame after verdict");
  switch (frame.type) {
    case FrameType::kARow:
      return {wire::bit_frame(FrameType::kYBit, prover_.on_row(wire::parse_vec(frame), rng_))};
    case FrameType::kRVec:
      return {wire::vec_frame(FrameType::kDVec, prover_.on_challenge(wire::parse_vec(frame), rng_))};
    case FrameType::kTheta:
      return {wire::bit_frame(FrameType::kBBit,
                              prover_.on_theta(theta_from_bit(wire::parse_bit(frame)), rng_))};
    case FrameType::kVerdict:
      wire::parse_bit(frame);
      done_ = true;
      return {};
    default:
      throw ProtocolError("poq1 prover: unexpected " + std::string(wire::type_name(frame.type)));
  }
}

std::size_t transcript_rank(const session::Transcript& t) {
  f2::BitMat v;
  for (const auto& f : t.frames(session::Direction::kToProver)) {
    if (f.type != FrameType::kARow) continue;
    const BitVec a = wire::parse_vec(f);
    v.append_row(a.slice(0, a.size() - 1));
  }
  return f2::rank(v);
}

RunResult run_honest(std::size_t n, std::uint64_t seed, std::uint64_t trial) {
  VerifierParty vp(n, seed, trial);
  ProverParty pp(n, seed, trial);
  RunResult res;
  session::InprocLink link(vp, pp, &res.transcript);
  link.open();
  link.run();

  const Verifier& v = vp.verifier();
  res.accept = v.verdict().value_or(false);
  res.challenge = v.challenge();
  res.degenerate = transcript_rank(res.transcript) < n;
  res.exact_accept = exact_accept_probability(v, v.d(), *pp.prover().committed());
  res.prover_peak_qubits = pp.prover().peak_qubits();
  res.claw_log2_size = pp.prover().state().log2_size();
  res.verifier_state_bytes = vp.peak_state_bytes();
  return res;
}

}  // namespace poq::poq1
