#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include "poq/runner.hpp"
#include "poq/session.hpp"
#include "poq/wire.hpp"

/// TCP transport on POSIX sockets. One session per connection, opened by a
/// HELLO exchange in each direction.
namespace poq::transport {

using wire::Frame;

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "HOST:PORT". Throws ConfigError.
Endpoint parse_endpoint(std::string_view text);

/// A connected stream socket carrying frames.
class Channel {
 public:
  explicit Channel(int fd);
  Channel(Channel&& other) noexcept;
  Channel& operator=(Channel&& other) noexcept;
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;
  ~Channel();

  /// Throws TransportError.
  void send(const Frame& frame);
  /// Blocks for one frame. Throws TransportError on EOF, timeout or socket
  /// failure, ProtocolError on a malformed header.
  Frame recv();
  void close();
  bool open() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
  wire::Decoder decoder_;
};

class Listener {
 public:
  explicit Listener(const Endpoint& at);
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  /// Bound port; useful when listening on port 0.
  std::uint16_t port() const { return port_; }
  Channel accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Retries refused connections until the timeout.
Channel connect(const Endpoint& to, std::chrono::milliseconds timeout = std::chrono::seconds(10));

// HELLO payload: u8 protocol id, u64 params hash, u64 trial index, all
// big-endian.
struct Hello {
  std::uint8_t protocol = 0;
  std::uint64_t params_hash = 0;
  std::uint64_t trial = 0;

  bool operator==(const Hello&) const = default;
};

Frame hello_frame(const Hello& hello);
Hello parse_hello(const Frame& frame);
Hello hello_for(const runner::RunConfig& cfg, std::uint64_t trial);

/// Sends ours, reads theirs. Throws ConfigError on a mismatch; no protocol
/// frame has been sent at that point.
void handshake(Channel& ch, const Hello& mine);

/// Pumps frames between ch and party until the party finishes. The
/// verifier sends its opening frames first. Records from the verifier's
/// point of view when `transcript` is set.
void drive(Channel& ch, session::Party& party, bool is_verifier,
           session::Transcript* transcript = nullptr);

/// One trial with the verifier on an accepted connection and the prover on
/// a loopback client thread.
runner::TrialOutcome run_loopback_trial(const runner::RunConfig& cfg, std::uint64_t trial,
                                        Listener& listener,
                                        session::Transcript* transcript = nullptr);

/// Verifier process: accepts cfg.trials connections in order. A HELLO
/// mismatch throws ConfigError; other per-trial errors mark the trial
/// aborted.
runner::RunOutput serve_verifier(const runner::RunConfig& cfg, Listener& listener,
                                 bool keep_transcripts = false);

/// Prover process: one connection per trial.
runner::RunOutput serve_prover(const runner::RunConfig& cfg, const Endpoint& to);

}  // namespace poq::transport
