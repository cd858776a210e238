#include "poq/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "poq/errors.hpp"

namespace poq::transport {

using wire::FrameType;

namespace {

constexpr int kIoTimeoutSeconds = 30;

std::string sys_error(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void set_timeouts(int fd) {
  timeval tv{};
  tv.tv_sec = kIoTimeoutSeconds;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw TransportError("cannot resolve host " + ep.host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | in[at + i];
  return v;
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    throw ConfigError("endpoint must be HOST:PORT: " + std::string(text));
  }
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  if (ep.host.empty()) ep.host = "127.0.0.1";
  unsigned long port = 0;
  for (const char c : text.substr(colon + 1)) {
    if (c < '0' || c > '9') throw ConfigError("bad port in " + std::string(text));
    port = port * 10 + static_cast<unsigned long>(c - '0');
    if (port > 65535) throw ConfigError("port out of range in " + std::string(text));
  }
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

// --- channel ----------------------------------------------------------------------

Channel::Channel(int fd) : fd_(fd) {}

Channel::Channel(Channel&& other) noexcept
    : fd_(other.fd_), decoder_(std::move(other.decoder_)) {
  other.fd_ = -1;
}

Channel& Channel::operator=(Channel&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    decoder_ = std::move(other.decoder_);
    other.fd_ = -1;
  }
  return *this;
}

Channel::~Channel() { close(); }

void Channel::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Channel::send(const Frame& frame) {
  if (fd_ < 0) throw TransportError("send on closed channel");
  const auto bytes = wire::encode(frame);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(sys_error("send"));
    }
    off += static_cast<std::size_t>(n);
  }
}

Frame Channel::recv() {
  if (fd_ < 0) throw TransportError("recv on closed channel");
  std::uint8_t buf[4096];
  for (;;) {
    try {
      if (auto f = decoder_.next()) return std::move(*f);
    } catch (const ProtocolError&) {
      close();
      throw;
    }
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n == 0) throw TransportError("connection closed by peer");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(sys_error("recv"));
    }
    decoder_.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
  }
}

// --- listener / connect ------------------------------------------------------------

Listener::Listener(const Endpoint& at) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(sys_error("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(at);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = sys_error("bind");
    ::close(fd_);
    throw TransportError(msg);
  }
  if (::listen(fd_, 16) != 0) {
    const std::string msg = sys_error("listen");
    ::close(fd_);
    throw TransportError(msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

Channel Listener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      set_timeouts(fd);
      return Channel(fd);
    }
    if (errno != EINTR) throw TransportError(sys_error("accept"));
  }
}

Channel connect(const Endpoint& to, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(to);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError(sys_error("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
      set_timeouts(fd);
      return Channel(fd);
    }
    const int err = errno;
    ::close(fd);
    const bool retry = err == ECONNREFUSED || err == EINTR || err == EAGAIN;
    if (!retry || std::chrono::steady_clock::now() >= deadline) {
      errno = err;
      throw TransportError(sys_error("connect"));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

// --- handshake and pumping -----------------------------------------------------------

Frame hello_frame(const Hello& hello) {
  Frame f{FrameType::kHello, {}};
  f.payload.push_back(hello.protocol);
  put_u64(f.payload, hello.params_hash);
  put_u64(f.payload, hello.trial);
  return f;
}

Hello parse_hello(const Frame& frame) {
  wire::expect(frame, FrameType::kHello);
  if (frame.payload.size() != 17) throw ProtocolError("HELLO: payload must be 17 bytes");
  return Hello{frame.payload[0], get_u64(frame.payload, 1), get_u64(frame.payload, 9)};
}

Hello hello_for(const runner::RunConfig& cfg, std::uint64_t trial) {
  return Hello{static_cast<std::uint8_t>(cfg.protocol), cfg.params_hash(), trial};
}

void handshake(Channel& ch, const Hello& mine) {
  ch.send(hello_frame(mine));
  const Hello theirs = parse_hello(ch.recv());
  if (!(theirs == mine)) {
    ch.close();
    throw ConfigError("HELLO mismatch: peer runs a different protocol, parameter set or trial");
  }
}

void drive(Channel& ch, session::Party& party, bool is_verifier, session::Transcript* transcript) {
  using session::Direction;
  const Direction out_dir = is_verifier ? Direction::kToProver : Direction::kToVerifier;
  const Direction in_dir = is_verifier ? Direction::kToVerifier : Direction::kToProver;
  auto send_all = [&](std::vector<Frame> frames) {
    for (auto& f : frames) {
      ch.send(f);
      if (transcript) transcript->add(out_dir, std::move(f));
    }
  };
  send_all(party.start());
  while (!party.finished()) {
    Frame f = ch.recv();
    auto out = party.on_frame(f);
    if (transcript) transcript->add(in_dir, std::move(f));
    send_all(std::move(out));
  }
}

namespace {

runner::TrialOutcome aborted(std::uint64_t trial, const Error& e) {
  runner::TrialOutcome o;
  o.trial = trial;
  o.aborted = true;
  o.error_code = e.code();
  o.error = e.what();
  return o;
}

runner::TrialOutcome aborted(std::uint64_t trial, const std::exception& e) {
  runner::TrialOutcome o;
  o.trial = trial;
  o.aborted = true;
  o.error_code = ExitCode::kFailure;
  o.error = e.what();
  return o;
}

}  // namespace

runner::TrialOutcome run_loopback_trial(const runner::RunConfig& cfg, std::uint64_t trial,
                                        Listener& listener, session::Transcript* transcript) {
  session::Transcript local;
  session::Transcript& t = transcript ? *transcript : local;
  std::unique_ptr<runner::Trial> tr;
  try {
    tr = runner::make_trial(cfg, trial);
  } catch (const Error& e) {
    return aborted(trial, e);
  }
  const Hello hello = hello_for(cfg, trial);
  std::exception_ptr prover_error;
  std::thread prover([&]() {
    try {
      Channel ch = connect(Endpoint{"127.0.0.1", listener.port()});
      handshake(ch, hello);
      drive(ch, tr->prover(), false);
    } catch (...) {
      prover_error = std::current_exception();
    }
  });
  std::exception_ptr verifier_error;
  try {
    Channel ch = listener.accept();
    handshake(ch, hello);
    drive(ch, tr->verifier(), true, &t);
  } catch (...) {
    verifier_error = std::current_exception();
  }
  prover.join();
  // A prover-side failure (say a memory-bound violation) also surfaces on
  // the verifier as a lost connection; report the root cause.
  const std::exception_ptr first = prover_error ? prover_error : verifier_error;
  try {
    if (first) std::rethrow_exception(first);
    runner::TrialOutcome out = tr->outcome(t, true);
    out.trial = trial;
    return out;
  } catch (const Error& e) {
    return aborted(trial, e);
  } catch (const std::exception& e) {
    return aborted(trial, e);
  }
}

runner::RunOutput serve_verifier(const runner::RunConfig& cfg, Listener& listener,
                                 bool keep_transcripts) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  runner::RunOutput out;
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    session::Transcript t;
    runner::TrialOutcome o;
    try {
      auto tr = runner::make_trial(cfg, i);
      Channel ch = listener.accept();
      handshake(ch, hello_for(cfg, i));
      try {
        drive(ch, tr->verifier(), true, &t);
        o = tr->outcome(t, false);
        o.trial = i;
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        o = aborted(i, e);
      } catch (const std::exception& e) {
        o = aborted(i, e);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      o = aborted(i, e);
    }
    out.outcomes.push_back(std::move(o));
    if (keep_transcripts) out.transcripts.push_back(std::move(t));
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.report = runner::aggregate(cfg, out.outcomes, wall);
  return out;
}

runner::RunOutput serve_prover(const runner::RunConfig& cfg, const Endpoint& to) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  runner::RunOutput out;
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    runner::TrialOutcome o;
    o.trial = i;
    try {
      auto tr = runner::make_trial(cfg, i);
      Channel ch = connect(to);
      handshake(ch, hello_for(cfg, i));
      try {
        drive(ch, tr->prover(), false);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        o = aborted(i, e);
      } catch (const std::exception& e) {
        o = aborted(i, e);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      o = aborted(i, e);
    }
    out.outcomes.push_back(std::move(o));
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.report = runner::aggregate(cfg, out.outcomes, wall);
  return out;
}

}  // namespace poq::transport
