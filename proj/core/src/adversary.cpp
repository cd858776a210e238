#include "poq/adversary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "poq/errors.hpp"
#include "poq/ih.hpp"
#include "poq/poq1.hpp"
#include "poq/wire.hpp"

namespace poq::adversary {

using wire::FrameType;

BitWriter& BitWriter::put(std::uint64_t value, std::size_t width) {
  bits_.append(value, width);
  return *this;
}

BitWriter& BitWriter::put(const BitVec& v) {
  bits_ = bits_.concat(v);
  return *this;
}

std::uint64_t BitReader::get(std::size_t width) {
  if (width > remaining()) throw std::out_of_range("BitReader: read past end");
  const std::uint64_t v = bits_.extract(pos_, width);
  pos_ += width;
  return v;
}

BitVec BitReader::get_vec(std::size_t len) {
  if (len > remaining()) throw std::out_of_range("BitReader: read past end");
  BitVec v = bits_.slice(pos_, len);
  pos_ += len;
  return v;
}

void BoundedMemory::store(BitVec state) {
  if (state.size() > capacity_) throw MemoryBoundViolation(state.size(), capacity_);
  peak_ = std::max(peak_, state.size());
  state_ = std::move(state);
}

AdversaryParty::AdversaryParty(Strategy strategy, std::size_t capacity_bits, RandomSource& rng)
    : strategy_(std::move(strategy)), memory_(capacity_bits), rng_(rng) {}

std::vector<Frame> AdversaryParty::on_frame(const Frame& frame) {
  if (done_) throw ProtocolError("adversary: frame after verdict");
  Step step = strategy_(memory_.load(), frame, rng_);
  memory_.store(std::move(step.state));
  if (frame.type == FrameType::kVerdict) done_ = true;
  return std::move(step.out);
}

namespace {

std::vector<BitVec> split_rows(const BitVec& bits, std::size_t offset, std::size_t width) {
  std::vector<BitVec> rows;
  for (std::size_t at = offset; at + width <= bits.size(); at += width) {
    rows.push_back(bits.slice(at, width));
  }
  return rows;
}

// A uniform solution of V s = w for rows (v, w); uniform over GF(2)^n when
// there are no rows.
BitVec solve_rows(const std::vector<BitVec>& rows, std::size_t n, RandomSource& rng) {
  f2::BitMat v(0, n);
  BitVec w(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    v.append_row(rows[i].slice(0, n));
    w.set(i, rows[i].get(n));
  }
  auto s = f2::sample_solution(v, w, rng);
  return s ? *s : f2::sample_uniform(n, rng);
}

Step passive(const BitVec& state) { return Step{{}, state}; }

}  // namespace

// --- Raz ----------------------------------------------------------------------

RazVerifier::RazVerifier(std::size_t n, std::size_t rounds, RandomSource& rng)
    : n_(n), rounds_(rounds), rng_(rng) {
  if (n == 0 || rounds == 0) throw ConfigError("raz: n and rounds must be positive");
}

std::vector<Frame> RazVerifier::start() {
  s_ = f2::sample_uniform(n_, rng_);
  std::vector<Frame> out;
  for (std::size_t i = 0; i < rounds_; ++i) {
    BitVec a = f2::sample_uniform(n_, rng_);
    a.push_back(f2::dot(a, s_));
    out.push_back(wire::vec_frame(FrameType::kARow, a));
  }
  out.push_back(wire::vec_frame(FrameType::kRVec, BitVec()));
  return out;
}

std::vector<Frame> RazVerifier::on_frame(const Frame& frame) {
  if (result_) throw ProtocolError("raz verifier: frame after verdict");
  wire::expect(frame, FrameType::kDVec);
  const BitVec guess = wire::parse_vec(frame);
  result_ = guess == s_;
  return {wire::bit_frame(FrameType::kVerdict, *result_)};
}

namespace {

Strategy raz_storing(std::size_t n, std::size_t keep) {
  return [n, keep](const BitVec& state, const Frame& in, RandomSource& rng) -> Step {
    switch (in.type) {
      case FrameType::kARow: {
        const BitVec a = wire::parse_vec(in);
        if (a.size() != n + 1) throw ProtocolError("raz adversary: row width");
        if (state.size() / (n + 1) < keep) return Step{{}, state.concat(a)};
        return passive(state);
      }
      case FrameType::kRVec: {
        const BitVec s = solve_rows(split_rows(state, 0, n + 1), n, rng);
        return Step{{wire::vec_frame(FrameType::kDVec, s)}, BitVec()};
      }
      case FrameType::kVerdict:
        return passive(BitVec());
      default:
        throw ProtocolError("raz adversary: unexpected frame");
    }
  };
}

}  // namespace

Strategy raz_unbounded(std::size_t n) { return raz_storing(n, kUnbounded); }

Strategy raz_store_equations(std::size_t n, std::size_t m) { return raz_storing(n, m / (n + 1)); }

Strategy raz_guess(std::size_t n) { return raz_storing(n, 0); }

RazOutcome raz_experiment(std::size_t n, std::size_t rounds, const Strategy& adv,
                          std::size_t capacity_bits, std::uint64_t seed, std::uint64_t trial,
                          session::Transcript* transcript) {
  Rng vr = trial_rng(seed, trial, Role::kVerifier);
  Rng pr = trial_rng(seed, trial, Role::kProver);
  RazVerifier v(n, rounds, vr);
  AdversaryParty p(adv, capacity_bits, pr);
  session::InprocLink link(v, p, transcript);
  RazOutcome out;
  try {
    link.open();
    link.run();
    out.success = v.result().value_or(false);
  } catch (const MemoryBoundViolation&) {
    out.aborted = true;
  }
  out.memory_bits_peak = p.memory().peak_bits();
  return out;
}

// --- Goldreich-Levin ----------------------------------------------------------

std::size_t gl_samples(std::size_t n, double eps, double c) {
  if (n < 2 || !(eps > 0.0) || !(c > 0.0)) throw std::invalid_argument("gl: bad parameters");
  const double t = std::ceil(c * std::log2(static_cast<double>(n)) / (eps * eps));
  return std::max<std::size_t>(1, static_cast<std::size_t>(t));
}

GLResult gl_extract(std::size_t n, double eps, const Oracle& f, RandomSource& rng,
                    const GLOptions& opts) {
  GLResult res;
  res.t = gl_samples(n, eps, opts.c);
  if (res.t > 24) throw std::invalid_argument("gl: t above 24");
  const std::size_t t = res.t;
  std::vector<BitVec> r(t);
  BitVec b(t);
  for (std::size_t j = 0; j < t; ++j) {
    r[j] = f2::sample_uniform(n, rng);
    b.set(j, opts.condition_on ? f2::dot(r[j], *opts.condition_on) : rng.bit());
  }
  res.x = BitVec(n);
  const std::uint64_t subsets = std::uint64_t{1} << t;
  for (std::size_t i = 0; i < n; ++i) {
    // Walk all S in Gray-code order so each step toggles one r_j.
    BitVec q = opts.sketch_form ? BitVec(n) : BitVec::unit(n, i);
    bool bsum = false;
    std::uint64_t ones = 0;
    for (std::uint64_t g = 0; g < subsets; ++g) {
      if (g > 0) {
        const auto j = static_cast<std::size_t>(std::countr_zero(g));
        q ^= r[j];
        bsum ^= b.get(j);
      }
      if (f(q) != bsum) ++ones;
    }
    res.x.set(i, 2 * ones > subsets);  // ties go to 0
  }
  // r's, b's, subset cursor (t bits), counter (t + 1 bits), output.
  res.memory_bits = t * n + t + t + (t + 1) + n;
  return res;
}

bool predictor_b(const Strategy& prover, const BitVec& snapshot, const Frame& challenge,
                 const Rng& rng) {
  Rng fork = rng;
  Step committed = prover(snapshot, challenge, fork);
  bool answers[2];
  for (int th = 0; th < 2; ++th) {
    Rng branch = fork;
    Step s = prover(committed.state, wire::bit_frame(FrameType::kTheta, th == 1), branch);
    if (s.out.size() != 1) throw ProtocolError("predictor: prover did not answer THETA");
    answers[th] = wire::parse_bit(s.out.front());
  }
  return answers[0] != answers[1];
}

// --- poq1 attacks -------------------------------------------------------------
//
// Both strategies tag their state with one leading bit: 0 while rows are
// arriving, 1 once the challenge has been answered.

Strategy poq1_linear_memory() {
  return [](const BitVec& state, const Frame& in, RandomSource& rng) -> Step {
    switch (in.type) {
      case FrameType::kARow: {
        const BitVec a = wire::parse_vec(in);
        BitVec x = state.empty() ? f2::sample_uniform(a.size(), rng) : state.slice(1, a.size());
        const bool y = f2::dot(a, x);
        return Step{{wire::bit_frame(FrameType::kYBit, y)}, BitWriter().put(0, 1).put(x).take()};
      }
      case FrameType::kRVec: {
        const BitVec r = wire::parse_vec(in);
        const BitVec x = state.slice(1, state.size() - 1);
        const bool b = f2::dot(r, x);
        const BitVec d = f2::sample_uniform(r.size(), rng);
        return Step{{wire::vec_frame(FrameType::kDVec, d)}, BitWriter().put(1, 1).put(b, 1).take()};
      }
      case FrameType::kTheta:
        wire::parse_bit(in);
        return Step{{wire::bit_frame(FrameType::kBBit, state.get(1))}, state};
      case FrameType::kVerdict:
        return passive(BitVec());
      default:
        throw ProtocolError("linear_memory: unexpected frame");
    }
  };
}

Strategy poq1_unbounded() {
  // Layout while rows arrive: tag, x (n+1), rows (n+1 each).
  return [](const BitVec& state, const Frame& in, RandomSource& rng) -> Step {
    switch (in.type) {
      case FrameType::kARow: {
        const BitVec a = wire::parse_vec(in);
        BitVec st = state.empty()
                        ? BitWriter().put(0, 1).put(f2::sample_uniform(a.size(), rng)).take()
                        : state;
        const bool y = f2::dot(a, st.slice(1, a.size()));
        return Step{{wire::bit_frame(FrameType::kYBit, y)}, st.concat(a)};
      }
      case FrameType::kRVec: {
        const BitVec r = wire::parse_vec(in);
        const std::size_t w = r.size();
        const std::size_t n = w - 1;
        const BitVec x = state.slice(1, w);
        BitVec t = solve_rows(split_rows(state, 1 + w, w), n, rng);
        t.push_back(true);
        if (!f2::dot(r, t)) {
          // r is in the row span: the verifier checks u.y = r.x.
          const BitVec d = f2::sample_uniform(w, rng);
          return Step{{wire::vec_frame(FrameType::kDVec, d)},
                      BitWriter().put(1, 1).put(0, 1).put(f2::dot(r, x), 1).take()};
        }
        // r.t = 1: make d.t = 0, then b = 0 for +pi/8 and b = 1 for -pi/8.
        const BitVec d = f2::sample_conditioned(w, t, false, rng);
        return Step{{wire::vec_frame(FrameType::kDVec, d)},
                    BitWriter().put(1, 1).put(1, 1).put(0, 1).take()};
      }
      case FrameType::kTheta: {
        const bool minus = wire::parse_bit(in);
        const bool c = state.get(1);
        const bool b = c ? minus : state.get(2);
        return Step{{wire::bit_frame(FrameType::kBBit, b)}, state};
      }
      case FrameType::kVerdict:
        return passive(BitVec());
      default:
        throw ProtocolError("unbounded: unexpected frame");
    }
  };
}

std::size_t poq1_capacity(const std::string& name, std::size_t n) {
  if (name == "linear_memory") return n + 2;
  if (name == "unbounded") return kUnbounded;
  throw ConfigError("unknown poq1 adversary: " + name);
}

Strategy poq1_strategy(const std::string& name) {
  if (name == "linear_memory") return poq1_linear_memory();
  if (name == "unbounded") return poq1_unbounded();
  throw ConfigError("unknown poq1 adversary: " + name);
}

Poq1AttackTrial attack_poq1(const std::string& name, std::size_t n, std::uint64_t seed,
                            std::uint64_t trial) {
  poq1::VerifierParty vp(n, seed, trial);
  Rng pr = trial_rng(seed, trial, Role::kProver);
  AdversaryParty ap(poq1_strategy(name), poq1_capacity(name, n), pr);
  session::Transcript transcript;
  session::InprocLink link(vp, ap, &transcript);
  link.open();
  link.run();

  const poq1::Verifier& v = vp.verifier();
  Poq1AttackTrial out;
  out.accept = v.verdict().value_or(false);
  out.challenge = v.challenge();
  out.degenerate = poq1::transcript_rank(transcript) < n;
  for (const auto& f : transcript.frames(session::Direction::kToProver)) {
    if (f.type == FrameType::kRVec) out.c_detected = f2::dot(wire::parse_vec(f), v.t()) == v.challenge();
  }
  out.memory_bits_peak = ap.memory().peak_bits();
  return out;
}

bool gl_against_poq1(const std::string& name, std::size_t n, double eps, const GLOptions& opts,
                     std::uint64_t seed, std::uint64_t trial) {
  Rng vr = trial_rng(seed, trial, Role::kVerifier);
  Rng pr = trial_rng(seed, trial, Role::kProver);
  Rng hr = trial_rng(seed, trial, Role::kHarness);
  poq1::Verifier v(n, vr);
  const Strategy prover = poq1_strategy(name);
  BitVec w;
  for (std::size_t i = 0; i < v.rounds(); ++i) {
    Step s = prover(w, wire::vec_frame(FrameType::kARow, v.verifier_round(vr)), pr);
    v.verifier_absorb(wire::parse_bit(s.out.at(0)));
    w = std::move(s.state);
  }
  const Oracle f = [&](const BitVec& r) {
    return predictor_b(prover, w, wire::vec_frame(FrameType::kRVec, r), pr);
  };
  return gl_extract(n + 1, eps, f, hr, opts).x == v.t();
}

// --- clawgen subset attack ------------------------------------------------------

namespace {

struct SubsetClaw {
  ih::Index v0 = 1, v1 = 2;
  bool known0 = false, z0 = false, known1 = false, z1 = false;
};

// Persistent layout of the subset attack.
struct SubsetState {
  bool stitched = false;
  BitVec x0, x1;  // the final guess
  std::size_t claw = 0;
  std::size_t pos = 0;
  BitVec stored;  // U at 1..p for the current attempt
  std::vector<BitVec> rows;
  std::vector<bool> responses;
  std::vector<SubsetClaw> done;
};

struct SubsetCodec {
  std::size_t lambda, k, width, p;

  std::size_t stored_bits() const { return std::min(p, k); }

  BitVec encode(const SubsetState& s) const {
    BitWriter w;
    w.put(s.stitched, 1);
    if (s.stitched) return w.put(s.x0).put(s.x1).take();
    w.put(s.claw, 16).put(s.pos, width + 1).put(s.stored).put(s.rows.size(), 8);
    for (std::size_t i = 0; i < s.rows.size(); ++i) w.put(s.rows[i]).put(s.responses[i], 1);
    w.put(s.done.size(), 16);
    for (const auto& c : s.done) {
      w.put(c.v0 - 1, width).put(c.v1 - 1, width);
      w.put(c.known0, 1).put(c.z0, 1).put(c.known1, 1).put(c.z1, 1);
    }
    return w.take();
  }

  SubsetState decode(const BitVec& bits) const {
    SubsetState s;
    s.stored = BitVec(stored_bits());
    if (bits.empty()) return s;
    BitReader r(bits);
    s.stitched = r.get(1) != 0;
    const std::size_t ell = lambda * (width + 1);
    if (s.stitched) {
      s.x0 = r.get_vec(ell);
      s.x1 = r.get_vec(ell);
      return s;
    }
    s.claw = r.get(16);
    s.pos = r.get(width + 1);
    s.stored = r.get_vec(stored_bits());
    const std::size_t nrows = r.get(8);
    for (std::size_t i = 0; i < nrows; ++i) {
      s.rows.push_back(r.get_vec(width));
      s.responses.push_back(r.get(1) != 0);
    }
    const std::size_t ndone = r.get(16);
    for (std::size_t i = 0; i < ndone; ++i) {
      SubsetClaw c;
      c.v0 = static_cast<ih::Index>(r.get(width) + 1);
      c.v1 = static_cast<ih::Index>(r.get(width) + 1);
      c.known0 = r.get(1) != 0;
      c.z0 = r.get(1) != 0;
      c.known1 = r.get(1) != 0;
      c.z1 = r.get(1) != 0;
      s.done.push_back(c);
    }
    return s;
  }

  void commit(SubsetState& s) const {
    ih::IHTranscript t;
    t.k = k;
    t.rows = s.rows;
    t.responses = s.responses;
    const auto [a, b] = ih::preimages(t);
    SubsetClaw c;
    c.v0 = a;
    c.v1 = b;
    c.known0 = a <= p;
    c.z0 = c.known0 && s.stored.get(a - 1);
    c.known1 = b <= p;
    c.z1 = c.known1 && s.stored.get(b - 1);
    s.done.push_back(c);
  }

  void restart(SubsetState& s) const {
    s.pos = 0;
    s.stored = BitVec(stored_bits());
    s.rows.clear();
    s.responses.clear();
  }
};

}  // namespace

std::size_t subset_attack_memory(const clawgen::StreamParams& params, std::size_t p) {
  const std::size_t w = params.width();
  const std::size_t before = 1 + 16 + (w + 1) + std::min(p, params.k) + 8 +
                             (w - 1) * (w + 1) + 16 + params.lambda * (2 * w + 4);
  const std::size_t after = 1 + 2 * params.lambda * (w + 1);
  return std::max(before, after);
}

Strategy clawgen_subset(const clawgen::StreamParams& params, std::size_t p) {
  params.validate();
  const SubsetCodec codec{params.lambda, params.k, params.width(), p};
  return [codec](const BitVec& state, const Frame& in, RandomSource& rng) -> Step {
    SubsetState s = codec.decode(state);
    std::vector<Frame> out;
    switch (in.type) {
      case FrameType::kStreamChunk: {
        const auto [claw, bits] = clawgen::parse_chunk(in);
        if (claw == s.claw && s.pos == codec.k) {
          codec.restart(s);
        } else if (claw == s.claw + 1) {
          if (s.claw > 0) codec.commit(s);
          s.claw = claw;
          codec.restart(s);
        }
        for (std::size_t i = 0; i < bits.size(); ++i) {
          const std::size_t v = s.pos + i;  // 0-based index
          if (v < codec.stored_bits()) s.stored.set(v, bits.get(i));
        }
        s.pos += bits.size();
        break;
      }
      case FrameType::kIhRow: {
        const BitVec h = wire::parse_vec(in);
        // Keep as many indices from 1..p consistent as possible.
        std::size_t count[2] = {0, 0};
        for (std::size_t v = 1; v <= codec.stored_bits(); ++v) {
          const BitVec x = ih::encode_index(static_cast<ih::Index>(v), codec.width);
          bool ok = true;
          for (std::size_t i = 0; i < s.rows.size() && ok; ++i) ok = f2::dot(s.rows[i], x) == s.responses[i];
          if (ok) ++count[f2::dot(h, x) ? 1 : 0];
        }
        const bool y = count[1] == count[0] ? rng.bit() : count[1] > count[0];
        s.rows.push_back(h);
        s.responses.push_back(y);
        out.push_back(wire::bit_frame(FrameType::kIhResp, y));
        break;
      }
      case FrameType::kStitchFuns: {
        codec.commit(s);
        std::vector<clawgen::OneBitClaw> guess;
        for (const auto& c : s.done) {
          const bool z0 = c.known0 ? c.z0 : rng.bit();
          const bool z1 = c.known1 ? c.z1 : rng.bit();
          guess.push_back(clawgen::OneBitClaw{c.v0, c.v1, z0, z1});
        }
        const BitVec bits(codec.lambda - 1);
        const auto claw = clawgen::assemble(guess, bits, codec.width);
        out.push_back(wire::vec_frame(FrameType::kStitchBits, bits));
        SubsetState fin;
        fin.stitched = true;
        fin.x0 = claw.claw.x0;
        fin.x1 = claw.claw.x1;
        return Step{std::move(out), codec.encode(fin)};
      }
      case FrameType::kVerdict:
        return passive(state);
      default:
        throw ProtocolError("subset attack: unexpected frame");
    }
    return Step{std::move(out), codec.encode(s)};
  };
}

SubsetTrial attack_clawgen_subset(const clawgen::StreamParams& params, std::size_t p,
                                  std::uint64_t seed, std::uint64_t trial) {
  Rng vr = trial_rng(seed, trial, Role::kVerifier);
  Rng pr = trial_rng(seed, trial, Role::kProver);
  clawgen::ClawVerifier v(params, clawgen::Mode::kRejection, vr);
  AdversaryParty a(clawgen_subset(params, p), subset_attack_memory(params, p), pr);
  session::InprocLink link(v, a);
  link.open();
  link.run();

  const std::size_t ell = params.claw_bits();
  const BitVec& fin = a.memory().load();
  SubsetTrial out;
  const auto& claw = v.result()->claw;
  out.correct = fin.size() == 1 + 2 * ell && fin.slice(1, ell) == claw.x0 &&
                fin.slice(1 + ell, ell) == claw.x1;
  for (const auto& c : v.result()->components) {
    if (c.v0 <= p && c.v1 <= p) ++out.known_components;
  }
  out.memory_bits_peak = a.memory().peak_bits();
  return out;
}

std::string AttackReport::to_json() const {
  nlohmann::ordered_json j;
  j["attack"] = attack;
  j["params"] = nlohmann::json::parse(params.empty() ? "{}" : params);
  j["trials"] = trials;
  j["accepts"] = accepts;
  j["memory_bits_peak"] = memory_bits_peak;
  j["degenerate_runs"] = degenerate_runs;
  return j.dump();
}

}  // namespace poq::adversary
