#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "poq/f2.hpp"
#include "poq/rng.hpp"

/// Stateless interactive hashing over [k] with the linear-row protocol:
/// Alice sends log2(k) - 1 independent rows h_i one at a time, Bob answers
/// h_i . bin(v). The finished transcript fixes a 2-to-1 linear map and a
/// value with exactly two preimages.
///
/// Index v in [k] (1-based) is encoded as bin(v - 1), log2(k) bits, bit 0
/// first.
namespace poq::ih {

using f2::BitVec;
using Index = std::uint32_t;

/// log2(k). Throws std::invalid_argument unless k is a power of two >= 2.
std::size_t index_width(std::size_t k);
BitVec encode_index(Index v, std::size_t width);
Index decode_index(const BitVec& bits);

struct IHTranscript {
  std::size_t k = 2;
  std::vector<BitVec> rows;
  std::vector<bool> responses;

  std::size_t width() const { return index_width(k); }
  std::size_t rounds() const { return width() - 1; }
  bool complete() const { return rows.size() == rounds() && responses.size() == rounds(); }
  /// True when v agrees with every response recorded so far.
  bool consistent(Index v) const;
};

/// Alice's side of one hashing run.
class IHSession {
 public:
  explicit IHSession(std::size_t k);

  std::size_t k() const { return transcript_.k; }
  std::size_t rounds() const { return transcript_.rounds(); }
  std::size_t round() const { return transcript_.rows.size(); }
  bool complete() const { return transcript_.complete(); }
  bool awaiting_response() const {
    return transcript_.rows.size() > transcript_.responses.size();
  }

  /// Records a row Alice sent. Throws if rows are dependent or the session
  /// is complete.
  void push_row(BitVec h);
  void push_response(bool y);
  const IHTranscript& transcript() const { return transcript_; }

 private:
  IHTranscript transcript_;
};

/// Uniform row independent of the rows already sent, by rejection. Throws
/// std::logic_error when the session has no rounds left.
BitVec alice_next_row(const IHSession& session, RandomSource& rng);

bool bob_respond(Index v, const BitVec& h);

/// The two solutions of h . bin(v) = y in increasing order. Throws
/// std::logic_error on an incomplete transcript.
std::pair<Index, Index> preimages(const IHTranscript& t);

/// One branch of Bob's coherent input: |v>|payload>.
struct SupportEntry {
  Index v;
  std::uint8_t payload;
  bool operator==(const SupportEntry&) const = default;
};
using Support = std::vector<SupportEntry>;

/// Restricts a uniform-amplitude support to the entries consistent with the
/// transcript. Throws std::logic_error if nothing survives.
Support coherent_collapse(const Support& support, const IHTranscript& t);

struct CoherentResponse {
  bool bit;
  Support support;
};

/// Computes h . bin(v) into an ancilla and measures it: y is drawn with the
/// fraction of the support that produces it, and the support shrinks to that
/// half.
CoherentResponse coherent_bob_respond(const Support& support, const BitVec& h,
                                      RandomSource& rng);

/// Exact value of the best adaptive Bob against uniform independent rows:
/// max over strategies of Pr({v0, v1} subset of B). k <= 32.
double optimal_adversary_value(std::size_t k, const std::vector<Index>& bset);

}  // namespace poq::ih
