#include "poq/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "poq/adversary.hpp"
#include "poq/ih.hpp"
#include "poq/poq1.hpp"
#include "poq/poq2.hpp"
#include "poq/transport.hpp"

namespace poq::runner {

using f2::BitVec;
using nlohmann::ordered_json;
using session::Party;
using session::Transcript;
using wire::Frame;
using wire::FrameType;

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kPoq1:
      return "poq1";
    case Protocol::kClawgen:
      return "clawgen";
    case Protocol::kPoq2:
      return "poq2";
    case Protocol::kRaz:
      return "raz";
    case Protocol::kIhDiag:
      return "ih-diag";
  }
  return "?";
}

Protocol parse_protocol(std::string_view name) {
  for (auto p : {Protocol::kPoq1, Protocol::kClawgen, Protocol::kPoq2, Protocol::kRaz,
                 Protocol::kIhDiag}) {
    if (protocol_name(p) == name) return p;
  }
  throw ConfigError("unknown protocol: " + std::string(name));
}

std::string_view mode_name(clawgen::Mode m) {
  return m == clawgen::Mode::kRejection ? "rejection" : "accelerated";
}

clawgen::Mode parse_mode(std::string_view name) {
  if (name == "rejection") return clawgen::Mode::kRejection;
  if (name == "accelerated") return clawgen::Mode::kAccelerated;
  throw ConfigError("unknown mode: " + std::string(name));
}

// --- config -------------------------------------------------------------------

namespace {

const std::set<std::string>& adversaries_for(Protocol p) {
  static const std::set<std::string> poq1{"honest", "linear_memory", "unbounded"};
  static const std::set<std::string> clawgen{"honest", "subset"};
  static const std::set<std::string> raz{"honest", "unbounded", "store_equations", "guess"};
  static const std::set<std::string> honest_only{"honest"};
  switch (p) {
    case Protocol::kPoq1:
      return poq1;
    case Protocol::kClawgen:
      return clawgen;
    case Protocol::kRaz:
      return raz;
    default:
      return honest_only;
  }
}

}  // namespace

void RunConfig::validate() const {
  if (trials == 0) throw ConfigError("trials must be positive");
  if (threads == 0) throw ConfigError("threads must be positive");
  if (adversaries_for(protocol).count(adversary) == 0) {
    throw ConfigError("adversary '" + adversary + "' is not defined for " +
                      std::string(protocol_name(protocol)));
  }
  switch (protocol) {
    case Protocol::kPoq1:
      if (n < 2 || n > 4096) throw ConfigError("poq1: n must be in [2, 4096]");
      break;
    case Protocol::kRaz:
      if (n < 1 || n > 4096) throw ConfigError("raz: n must be in [1, 4096]");
      if (adversary == "store_equations" && m == 0) throw ConfigError("raz: store_equations needs m");
      break;
    case Protocol::kClawgen:
    case Protocol::kPoq2:
      stream_params().validate();
      if (lambda > 255) throw ConfigError("lambda must be at most 255");
      if (adversary == "subset" && subset > k) throw ConfigError("subset must be at most k");
      break;
    case Protocol::kIhDiag: {
      try {
        ih::index_width(k);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      if (k > (std::size_t{1} << 16)) throw ConfigError("ih-diag: k must be at most 2^16");
      if (!bset.empty() && k > 32) throw ConfigError("ih-diag: bset needs k <= 32");
      std::set<ih::Index> seen;
      for (const auto v : bset) {
        if (v < 1 || v > k) throw ConfigError("ih-diag: bset entries must lie in [1, k]");
        if (!seen.insert(v).second) throw ConfigError("ih-diag: duplicate bset entry");
      }
      break;
    }
  }
}

clawgen::StreamParams RunConfig::stream_params() const {
  clawgen::StreamParams p;
  p.lambda = lambda;
  p.k = k;
  p.m = m;
  p.strict = strict;
  p.attempt_budget = attempt_budget;
  return p;
}

std::string RunConfig::protocol_params_json() const {
  ordered_json j;
  j["protocol"] = protocol_name(protocol);
  switch (protocol) {
    case Protocol::kPoq1:
      j["n"] = n;
      break;
    case Protocol::kRaz:
      j["n"] = n;
      j["rounds"] = raz_rounds();
      break;
    case Protocol::kClawgen:
    case Protocol::kPoq2:
      j["lambda"] = lambda;
      j["k"] = k;
      j["m"] = m;
      j["strict"] = strict;
      j["attempt_budget"] = attempt_budget;
      j["mode"] = mode_name(mode);
      break;
    case Protocol::kIhDiag:
      j["k"] = k;
      break;
  }
  return j.dump();
}

std::uint64_t RunConfig::params_hash() const {
  // FNV-1a.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : protocol_params_json()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::params_json() const {
  auto j = ordered_json::parse(protocol_params_json());
  j["adversary"] = adversary;
  if (adversary == "subset") j["subset"] = subset;
  if (protocol == Protocol::kRaz && adversary == "store_equations") j["m"] = m;
  if (protocol == Protocol::kIhDiag && !bset.empty()) j["bset"] = bset;
  j["trials"] = trials;
  j["transport"] = transport == Transport::kTcp ? "tcp" : "inproc";
  return j.dump();
}

// --- trials -------------------------------------------------------------------

namespace {

/// Alice's side of a bare hashing run; VERDICT says the hash was 2-to-1.
class IhAlice final : public Party {
 public:
  IhAlice(std::size_t k, RandomSource& rng) : session_(k), rng_(rng) {}

  std::vector<Frame> start() override {
    if (session_.rounds() == 0) return {finish()};
    return {next_row()};
  }

  std::vector<Frame> on_frame(const Frame& frame) override {
    if (result_) throw ProtocolError("ih-diag: frame after verdict");
    wire::expect(frame, FrameType::kIhResp);
    if (!session_.awaiting_response()) throw ProtocolError("ih-diag: unexpected response");
    session_.push_response(wire::parse_bit(frame));
    if (session_.complete()) return {finish()};
    return {next_row()};
  }

  bool finished() const override { return result_.has_value(); }
  std::optional<bool> result() const { return result_; }

 private:
  Frame next_row() {
    BitVec h = ih::alice_next_row(session_, rng_);
    Frame f = wire::vec_frame(FrameType::kIhRow, h);
    session_.push_row(std::move(h));
    return f;
  }

  Frame finish() {
    bool ok = true;
    try {
      const auto [a, b] = ih::preimages(session_.transcript());
      ok = a != b;
    } catch (const std::logic_error&) {
      ok = false;
    }
    result_ = ok;
    return wire::bit_frame(FrameType::kVerdict, ok);
  }

  ih::IHSession session_;
  RandomSource& rng_;
  std::optional<bool> result_;
};

class IhBob final : public Party {
 public:
  IhBob(std::size_t k, RandomSource& rng) : v_(static_cast<ih::Index>(1 + rng.below(k))) {
    transcript_.k = k;
  }

  std::vector<Frame> on_frame(const Frame& frame) override {
    if (done_) throw ProtocolError("ih-diag: frame after verdict");
    switch (frame.type) {
      case FrameType::kIhRow: {
        BitVec h = wire::parse_vec(frame);
        if (h.size() != transcript_.width()) throw ProtocolError("IH_ROW: wrong width");
        const bool y = ih::bob_respond(v_, h);
        transcript_.rows.push_back(std::move(h));
        transcript_.responses.push_back(y);
        return {wire::bit_frame(FrameType::kIhResp, y)};
      }
      case FrameType::kVerdict:
        wire::parse_bit(frame);
        done_ = true;
        return {};
      default:
        throw ProtocolError("ih-diag: unexpected " + std::string(wire::type_name(frame.type)));
    }
  }

  bool finished() const override { return done_; }

  /// v is one of the two preimages of the final transcript.
  bool holds_preimage() const {
    if (!transcript_.complete()) return false;
    const auto [a, b] = ih::preimages(transcript_);
    return v_ == a || v_ == b;
  }

 private:
  ih::Index v_;
  ih::IHTranscript transcript_;
  bool done_ = false;
};

class Poq1Trial final : public Trial {
 public:
  Poq1Trial(const RunConfig& cfg, std::uint64_t trial)
      : n_(cfg.n), verifier_(cfg.n, cfg.seed, trial) {
    if (cfg.adversary == "honest") {
      honest_.emplace(cfg.n, cfg.seed, trial);
    } else {
      rng_.emplace(trial_rng(cfg.seed, trial, Role::kProver));
      adv_.emplace(adversary::poq1_strategy(cfg.adversary),
                   adversary::poq1_capacity(cfg.adversary, cfg.n), *rng_);
    }
  }

  Party& verifier() override { return verifier_; }
  Party& prover() override { return honest_ ? static_cast<Party&>(*honest_) : *adv_; }

  TrialOutcome outcome(const Transcript& t, bool prover_local) const override {
    const poq1::Verifier& v = verifier_.verifier();
    TrialOutcome o;
    o.accept = v.verdict().value_or(false);
    o.degenerate = poq1::transcript_rank(t) < n_;
    o.verifier_memory_bits = 8 * verifier_.peak_state_bytes();
    if (prover_local && honest_ && honest_->prover().committed()) {
      o.exact_accept = poq1::exact_accept_probability(v, v.d(), *honest_->prover().committed());
    }
    if (prover_local && adv_) o.prover_memory_bits = adv_->memory().peak_bits();
    return o;
  }

 private:
  std::size_t n_;
  poq1::VerifierParty verifier_;
  std::optional<poq1::ProverParty> honest_;
  std::optional<Rng> rng_;
  std::optional<adversary::AdversaryParty> adv_;
};

class ClawgenTrial final : public Trial {
 public:
  ClawgenTrial(const RunConfig& cfg, std::uint64_t trial)
      : params_(cfg.stream_params()),
        vrng_(trial_rng(cfg.seed, trial, Role::kVerifier)),
        prng_(trial_rng(cfg.seed, trial, Role::kProver)),
        verifier_(params_, cfg.mode, vrng_) {
    if (cfg.adversary == "honest") {
      honest_.emplace(params_, prng_);
    } else {
      adv_.emplace(adversary::clawgen_subset(params_, cfg.subset),
                   adversary::subset_attack_memory(params_, cfg.subset), prng_);
    }
  }

  Party& verifier() override { return verifier_; }
  Party& prover() override { return honest_ ? static_cast<Party&>(*honest_) : *adv_; }

  TrialOutcome outcome(const Transcript&, bool prover_local) const override {
    TrialOutcome o;
    o.attempts = verifier_.attempts();
    o.verifier_memory_bits = verifier_.peak_state_bits();
    const auto& result = verifier_.result();
    // Without the prover only the verifier's completion is observable.
    o.accept = result.has_value();
    if (!prover_local || !result) return o;
    if (honest_) {
      clawgen::RunResult r;
      r.verifier_claw = *result;
      r.prover_claw = honest_->claw().value_or(clawgen::StitchedClaw{});
      o.accept = honest_->claw().has_value() && r.correct();
    } else {
      // The attack succeeds when its final state holds (x0, x1).
      const std::size_t ell = params_.claw_bits();
      const BitVec& fin = adv_->memory().load();
      o.accept = fin.size() == 1 + 2 * ell && fin.slice(1, ell) == result->claw.x0 &&
                 fin.slice(1 + ell, ell) == result->claw.x1;
      o.prover_memory_bits = adv_->memory().peak_bits();
    }
    return o;
  }

 private:
  clawgen::StreamParams params_;
  Rng vrng_;
  Rng prng_;
  clawgen::ClawVerifier verifier_;
  std::optional<clawgen::ClawProver> honest_;
  std::optional<adversary::AdversaryParty> adv_;
};

class Poq2Trial final : public Trial {
 public:
  Poq2Trial(const RunConfig& cfg, std::uint64_t trial)
      : verifier_(cfg.stream_params(), cfg.mode, cfg.seed, trial),
        prover_(cfg.stream_params(), cfg.seed, trial) {}

  Party& verifier() override { return verifier_; }
  Party& prover() override { return prover_; }

  TrialOutcome outcome(const Transcript&, bool prover_local) const override {
    TrialOutcome o;
    o.attempts = verifier_.clawgen().attempts();
    o.verifier_memory_bits = verifier_.clawgen().peak_state_bits();
    const auto& v = verifier_.verifier();
    o.accept = v && v->result().value_or(false);
    if (prover_local && v && prover_.committed()) {
      o.exact_accept = poq2::exact_accept_probability(*v, v->d(), *prover_.committed());
    }
    return o;
  }

 private:
  poq2::VerifierParty verifier_;
  poq2::ProverParty prover_;
};

adversary::Strategy raz_strategy(const RunConfig& cfg) {
  if (cfg.adversary == "store_equations") return adversary::raz_store_equations(cfg.n, cfg.m);
  if (cfg.adversary == "guess") return adversary::raz_guess(cfg.n);
  return adversary::raz_unbounded(cfg.n);
}

std::size_t raz_capacity(const RunConfig& cfg) {
  if (cfg.adversary == "store_equations") return cfg.m;
  if (cfg.adversary == "guess") return 0;
  return adversary::kUnbounded;
}

class RazTrial final : public Trial {
 public:
  RazTrial(const RunConfig& cfg, std::uint64_t trial)
      : vrng_(trial_rng(cfg.seed, trial, Role::kVerifier)),
        prng_(trial_rng(cfg.seed, trial, Role::kProver)),
        verifier_(cfg.n, cfg.raz_rounds(), vrng_),
        prover_(raz_strategy(cfg), raz_capacity(cfg), prng_) {}

  Party& verifier() override { return verifier_; }
  Party& prover() override { return prover_; }

  TrialOutcome outcome(const Transcript&, bool prover_local) const override {
    TrialOutcome o;
    o.accept = verifier_.result().value_or(false);
    if (prover_local) o.prover_memory_bits = prover_.memory().peak_bits();
    return o;
  }

 private:
  Rng vrng_;
  Rng prng_;
  adversary::RazVerifier verifier_;
  adversary::AdversaryParty prover_;
};

class IhDiagTrial final : public Trial {
 public:
  IhDiagTrial(const RunConfig& cfg, std::uint64_t trial)
      : vrng_(trial_rng(cfg.seed, trial, Role::kVerifier)),
        prng_(trial_rng(cfg.seed, trial, Role::kProver)),
        alice_(cfg.k, vrng_),
        bob_(cfg.k, prng_) {}

  Party& verifier() override { return alice_; }
  Party& prover() override { return bob_; }

  TrialOutcome outcome(const Transcript&, bool prover_local) const override {
    TrialOutcome o;
    o.accept = alice_.result().value_or(false) && (!prover_local || bob_.holds_preimage());
    return o;
  }

 private:
  Rng vrng_;
  Rng prng_;
  IhAlice alice_;
  IhBob bob_;
};

TrialOutcome failed(std::uint64_t trial, ExitCode code, const std::string& what) {
  TrialOutcome o;
  o.trial = trial;
  o.aborted = true;
  o.error_code = code;
  o.error = what;
  return o;
}

}  // namespace

std::unique_ptr<Trial> make_trial(const RunConfig& cfg, std::uint64_t trial) {
  switch (cfg.protocol) {
    case Protocol::kPoq1:
      return std::make_unique<Poq1Trial>(cfg, trial);
    case Protocol::kClawgen:
      return std::make_unique<ClawgenTrial>(cfg, trial);
    case Protocol::kPoq2:
      return std::make_unique<Poq2Trial>(cfg, trial);
    case Protocol::kRaz:
      return std::make_unique<RazTrial>(cfg, trial);
    case Protocol::kIhDiag:
      return std::make_unique<IhDiagTrial>(cfg, trial);
  }
  throw ConfigError("unknown protocol");
}

TrialOutcome run_inproc_trial(const RunConfig& cfg, std::uint64_t trial, Transcript* transcript) {
  Transcript local;
  Transcript& t = transcript ? *transcript : local;
  try {
    auto tr = make_trial(cfg, trial);
    session::InprocLink link(tr->verifier(), tr->prover(), &t);
    link.open();
    link.run();
    TrialOutcome o = tr->outcome(t, true);
    o.trial = trial;
    return o;
  } catch (const Error& e) {
    return failed(trial, e.code(), e.what());
  } catch (const std::exception& e) {
    return failed(trial, ExitCode::kFailure, e.what());
  }
}

// --- statistics ---------------------------------------------------------------

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

ExitCode Report::exit_code() const {
  return failures.empty() ? ExitCode::kOk : failures.front().code;
}

std::string Report::to_json() const {
  ordered_json j;
  j["protocol"] = protocol;
  j["params"] = ordered_json::parse(params.empty() ? "{}" : params);
  j["seed"] = seed;
  j["trials"] = trials;
  j["completed"] = completed;
  j["aborted"] = aborted;
  j["accepts"] = accepts;
  j["accept_rate"] = accept_rate;
  j["ci95"] = {ci95.lo, ci95.hi};
  j["degenerate_runs"] = degenerate_runs;
  if (exact_count > 0) {
    j["exact_accept"] = {
        {"count", exact_count}, {"mean", exact_mean}, {"min", exact_min}, {"max", exact_max}};
  } else {
    j["exact_accept"] = nullptr;
  }
  if (attempt_count > 0) {
    j["attempts"] = {{"claws", attempt_count},
                     {"mean", attempt_mean},
                     {"min", attempt_min},
                     {"max", attempt_max}};
  } else {
    j["attempts"] = nullptr;
  }
  ordered_json mem;
  mem["verifier_peak_bits"] =
      verifier_memory_peak ? ordered_json(*verifier_memory_peak) : ordered_json(nullptr);
  mem["prover_peak_bits"] =
      prover_memory_peak ? ordered_json(*prover_memory_peak) : ordered_json(nullptr);
  j["memory"] = mem;
  if (ih_adversary_value) j["ih_adversary_value"] = *ih_adversary_value;
  j["wall_time_s"] = wall_time_s;
  ordered_json fails = ordered_json::array();
  for (const auto& f : failures) {
    fails.push_back({{"trial", f.trial},
                     {"exit_code", static_cast<int>(f.code)},
                     {"message", f.message}});
  }
  j["failures"] = fails;
  return j.dump(2);
}

Report aggregate(const RunConfig& cfg, const std::vector<TrialOutcome>& outcomes,
                 double wall_time_s) {
  Report r;
  r.protocol = protocol_name(cfg.protocol);
  r.params = cfg.params_json();
  r.seed = cfg.seed;
  r.trials = outcomes.size();
  r.wall_time_s = wall_time_s;
  double exact_sum = 0.0;
  double attempt_sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.aborted) {
      ++r.aborted;
      r.failures.push_back({o.trial, o.error_code.value_or(ExitCode::kFailure), o.error});
      continue;
    }
    ++r.completed;
    if (o.accept) ++r.accepts;
    if (o.degenerate) ++r.degenerate_runs;
    if (o.exact_accept && !o.degenerate) {
      const double e = *o.exact_accept;
      r.exact_min = r.exact_count == 0 ? e : std::min(r.exact_min, e);
      r.exact_max = r.exact_count == 0 ? e : std::max(r.exact_max, e);
      exact_sum += e;
      ++r.exact_count;
    }
    for (const auto a : o.attempts) {
      r.attempt_min = r.attempt_count == 0 ? a : std::min(r.attempt_min, a);
      r.attempt_max = r.attempt_count == 0 ? a : std::max(r.attempt_max, a);
      attempt_sum += static_cast<double>(a);
      ++r.attempt_count;
    }
    if (o.verifier_memory_bits) {
      r.verifier_memory_peak = std::max(r.verifier_memory_peak.value_or(0), *o.verifier_memory_bits);
    }
    if (o.prover_memory_bits) {
      r.prover_memory_peak = std::max(r.prover_memory_peak.value_or(0), *o.prover_memory_bits);
    }
  }
  if (r.completed > 0) r.accept_rate = static_cast<double>(r.accepts) / static_cast<double>(r.completed);
  r.ci95 = wilson_interval(r.accepts, r.completed);
  if (r.exact_count > 0) r.exact_mean = exact_sum / static_cast<double>(r.exact_count);
  if (r.attempt_count > 0) r.attempt_mean = attempt_sum / static_cast<double>(r.attempt_count);
  if (cfg.protocol == Protocol::kIhDiag && !cfg.bset.empty()) {
    r.ih_adversary_value = ih::optimal_adversary_value(cfg.k, cfg.bset);
  }
  return r;
}

RunOutput run(const RunConfig& cfg, bool keep_transcripts) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  RunOutput out;
  out.outcomes.resize(trials);
  if (keep_transcripts) out.transcripts.resize(trials);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    std::optional<transport::Listener> listener;
    if (cfg.transport == Transport::kTcp) listener.emplace(transport::Endpoint{"127.0.0.1", 0});
    for (std::size_t i = next++; i < trials; i = next++) {
      Transcript* t = keep_transcripts ? &out.transcripts[i] : nullptr;
      out.outcomes[i] = cfg.transport == Transport::kTcp
                            ? transport::run_loopback_trial(cfg, i, *listener, t)
                            : run_inproc_trial(cfg, i, t);
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(cfg.threads, trials));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.report = aggregate(cfg, out.outcomes, wall);
  return out;
}

std::string transcripts_jsonl(const RunConfig& cfg, const std::vector<Transcript>& transcripts) {
  ordered_json header;
  header["protocol"] = protocol_name(cfg.protocol);
  header["params"] = ordered_json::parse(cfg.params_json());
  header["seed"] = cfg.seed;
  std::string out = header.dump() + "\n";
  for (std::size_t i = 0; i < transcripts.size(); ++i) out += transcripts[i].to_jsonl(i);
  return out;
}

std::map<std::uint64_t, Transcript> read_transcripts_jsonl(std::string_view text) {
  std::map<std::uint64_t, std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("trial")) continue;
    auto& buf = lines[j.at("trial").get<std::uint64_t>()];
    buf += line;
    buf += '\n';
  }
  std::map<std::uint64_t, Transcript> out;
  for (const auto& [trial, body] : lines) out.emplace(trial, Transcript::from_jsonl(body));
  return out;
}

}  // namespace poq::runner
