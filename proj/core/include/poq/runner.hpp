#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poq/clawgen.hpp"
#include "poq/errors.hpp"
#include "poq/session.hpp"

/// Trial orchestration: configuration, per-trial party construction,
/// statistics and transcript files.
namespace poq::runner {

enum class Protocol : std::uint8_t { kPoq1 = 1, kClawgen = 2, kPoq2 = 3, kRaz = 4, kIhDiag = 5 };
enum class Transport : std::uint8_t { kInproc, kTcp };

std::string_view protocol_name(Protocol p);
/// Throws ConfigError on an unknown name.
Protocol parse_protocol(std::string_view name);
std::string_view mode_name(clawgen::Mode m);
clawgen::Mode parse_mode(std::string_view name);

struct RunConfig {
  Protocol protocol = Protocol::kPoq1;
  /// poq1 and raz dimension.
  std::size_t n = 16;
  /// raz rows; 0 means 2n.
  std::size_t rounds = 0;
  /// clawgen, poq2 and ih-diag.
  std::size_t lambda = 1;
  std::size_t k = 16;
  std::size_t m = 0;
  bool strict = false;
  std::uint64_t attempt_budget = 0;
  clawgen::Mode mode = clawgen::Mode::kAccelerated;
  /// "honest" or an attack name valid for the protocol.
  std::string adversary = "honest";
  /// Stored prefix length for the clawgen subset attack.
  std::size_t subset = 0;
  /// Optional B for ih-diag: reports the optimal adversary value.
  std::vector<ih::Index> bset;

  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  Transport transport = Transport::kInproc;
  unsigned threads = 1;

  /// Throws ConfigError.
  void validate() const;
  clawgen::StreamParams stream_params() const;
  std::size_t raz_rounds() const { return rounds == 0 ? 2 * n : rounds; }

  /// Parameters both endpoints must agree on: everything that shapes the
  /// verifier's messages. Excludes seed, trial count, transport and the
  /// prover's strategy.
  std::string protocol_params_json() const;
  std::uint64_t params_hash() const;
  /// All run parameters except the seed, for reports and transcript headers.
  std::string params_json() const;
};

struct TrialOutcome {
  std::uint64_t trial = 0;
  bool accept = false;
  /// Ended by an error; not counted as a rejection.
  bool aborted = false;
  /// poq1 with rank(V) < n.
  bool degenerate = false;
  /// Conditional accept probability given the transcript, when the prover
  /// ran locally and is honest.
  std::optional<double> exact_accept;
  /// Attempts per one-bit claw.
  std::vector<std::uint64_t> attempts;
  std::optional<std::size_t> verifier_memory_bits;
  std::optional<std::size_t> prover_memory_bits;
  std::optional<ExitCode> error_code;
  std::string error;
};

/// Both parties of one trial with their random streams.
class Trial {
 public:
  virtual ~Trial() = default;
  virtual session::Party& verifier() = 0;
  virtual session::Party& prover() = 0;
  /// Fills the outcome from the parties' final state. With prover_local
  /// false only verifier-side facts are used.
  virtual TrialOutcome outcome(const session::Transcript& transcript, bool prover_local) const = 0;
};

std::unique_ptr<Trial> make_trial(const RunConfig& cfg, std::uint64_t trial);

/// Runs one trial in process. Errors are caught into the outcome.
TrialOutcome run_inproc_trial(const RunConfig& cfg, std::uint64_t trial,
                              session::Transcript* transcript = nullptr);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval at normal quantile z.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.96);

struct Report {
  std::string protocol;
  std::string params;  // JSON object text
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t completed = 0;
  std::size_t aborted = 0;
  std::size_t accepts = 0;
  std::size_t degenerate_runs = 0;
  double accept_rate = 0.0;
  Interval ci95;
  std::size_t exact_count = 0;
  double exact_mean = 0.0;
  double exact_min = 0.0;
  double exact_max = 0.0;
  std::size_t attempt_count = 0;
  double attempt_mean = 0.0;
  std::uint64_t attempt_min = 0;
  std::uint64_t attempt_max = 0;
  std::optional<std::size_t> verifier_memory_peak;
  std::optional<std::size_t> prover_memory_peak;
  std::optional<double> ih_adversary_value;
  double wall_time_s = 0.0;
  struct Failure {
    std::uint64_t trial;
    ExitCode code;
    std::string message;
  };
  std::vector<Failure> failures;

  /// First error's exit code, or kOk.
  ExitCode exit_code() const;
  std::string to_json() const;
};

Report aggregate(const RunConfig& cfg, const std::vector<TrialOutcome>& outcomes,
                 double wall_time_s);

struct RunOutput {
  Report report;
  std::vector<TrialOutcome> outcomes;
  /// One per trial when requested.
  std::vector<session::Transcript> transcripts;
};

/// Runs cfg.trials trials in process on cfg.threads workers. Outcomes are
/// ordered by trial index regardless of scheduling.
RunOutput run(const RunConfig& cfg, bool keep_transcripts = false);

/// Header line followed by each trial's records.
std::string transcripts_jsonl(const RunConfig& cfg,
                              const std::vector<session::Transcript>& transcripts);
/// Inverse of transcripts_jsonl, keyed by trial.
std::map<std::uint64_t, session::Transcript> read_transcripts_jsonl(std::string_view text);

}  // namespace poq::runner
