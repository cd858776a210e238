#pragma once

#include <stdexcept>
#include <string>

namespace poq {

/// Process exit status for each failure class.
enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kTransport = 3,
  kProtocol = 4,
  kMemoryBound = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

struct TransportError : Error {
  explicit TransportError(const std::string& what) : Error(ExitCode::kTransport, what) {}
};

/// Unexpected or malformed message, or a message out of phase.
struct ProtocolError : Error {
  explicit ProtocolError(const std::string& what) : Error(ExitCode::kProtocol, what) {}
};

/// An adversary tried to persist more than its bound between rounds.
struct MemoryBoundViolation : Error {
  MemoryBoundViolation(std::size_t attempted, std::size_t capacity)
      : Error(ExitCode::kMemoryBound, "memory bound violated: " + std::to_string(attempted) +
                                          " bits > capacity " + std::to_string(capacity)),
        attempted_bits(attempted),
        capacity_bits(capacity) {}
  std::size_t attempted_bits;
  std::size_t capacity_bits;
};

struct AttemptBudgetExceeded : Error {
  explicit AttemptBudgetExceeded(const std::string& what) : Error(ExitCode::kFailure, what) {}
};

}  // namespace poq
