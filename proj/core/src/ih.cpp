#include "poq/ih.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <unordered_map>

namespace poq::ih {

std::size_t index_width(std::size_t k) {
  if (k < 2 || !std::has_single_bit(k)) {
    throw std::invalid_argument("interactive hashing: k must be a power of two >= 2");
  }
  return static_cast<std::size_t>(std::countr_zero(k));
}

BitVec encode_index(Index v, std::size_t width) {
  if (v == 0 || (width < 32 && v > (Index{1} << width))) {
    throw std::out_of_range("encode_index: index outside [k]");
  }
  return BitVec::from_uint(v - 1, width);
}

Index decode_index(const BitVec& bits) { return static_cast<Index>(bits.to_uint()) + 1; }

bool IHTranscript::consistent(Index v) const {
  const BitVec x = encode_index(v, width());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (f2::dot(rows[i], x) != responses[i]) return false;
  }
  return true;
}

IHSession::IHSession(std::size_t k) {
  index_width(k);
  transcript_.k = k;
}

namespace {

// True iff h is outside the span of rows (all of width <= 64).
bool independent_narrow(const std::vector<BitVec>& rows, const BitVec& h) {
  std::uint64_t basis[64] = {};
  auto insert = [&basis](std::uint64_t v) {
    while (v != 0) {
      const int top = 63 - std::countl_zero(v);
      if (basis[top] == 0) {
        basis[top] = v;
        return true;
      }
      v ^= basis[top];
    }
    return false;
  };
  for (const auto& r : rows) insert(r.to_uint());
  return insert(h.to_uint());
}

bool independent(const std::vector<BitVec>& rows, const BitVec& h) {
  if (h.size() <= 64) return independent_narrow(rows, h);
  f2::BitMat m(0, h.size());
  for (const auto& r : rows) m.append_row(r);
  m.append_row(h);
  return f2::rank(m) == m.rows();
}

}  // namespace

void IHSession::push_row(BitVec h) {
  if (round() >= rounds()) throw std::logic_error("IHSession: no rounds left");
  if (awaiting_response()) throw std::logic_error("IHSession: response pending");
  if (h.size() != transcript_.width()) throw std::invalid_argument("IHSession: row width");
  if (!independent(transcript_.rows, h)) throw std::invalid_argument("IHSession: dependent row");
  transcript_.rows.push_back(std::move(h));
}

void IHSession::push_response(bool y) {
  if (!awaiting_response()) throw std::logic_error("IHSession: no row awaiting a response");
  transcript_.responses.push_back(y);
}

BitVec alice_next_row(const IHSession& session, RandomSource& rng) {
  if (session.round() >= session.rounds()) {
    throw std::logic_error("alice_next_row: session complete");
  }
  const auto& rows = session.transcript().rows;
  const std::size_t width = session.transcript().width();
  for (;;) {
    BitVec h = f2::sample_uniform(width, rng);
    if (independent(rows, h)) return h;
  }
}

bool bob_respond(Index v, const BitVec& h) { return f2::dot(h, encode_index(v, h.size())); }

std::pair<Index, Index> preimages(const IHTranscript& t) {
  if (!t.complete()) throw std::logic_error("preimages: transcript incomplete");
  const std::size_t width = t.width();
  f2::BitMat m(0, width);
  BitVec y(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    m.append_row(t.rows[i]);
    y.set(i, t.responses[i]);
  }
  const auto sols = f2::solve_preimages(m, y);
  if (sols.size() != 2) throw std::logic_error("preimages: hash is not 2-to-1");
  Index a = decode_index(sols[0]);
  Index b = decode_index(sols[1]);
  if (a > b) std::swap(a, b);
  return {a, b};
}

Support coherent_collapse(const Support& support, const IHTranscript& t) {
  Support out;
  for (const auto& e : support) {
    if (t.consistent(e.v)) out.push_back(e);
  }
  if (out.empty()) throw std::logic_error("coherent_collapse: transcript inconsistent with support");
  return out;
}

CoherentResponse coherent_bob_respond(const Support& support, const BitVec& h,
                                      RandomSource& rng) {
  if (support.empty()) throw std::invalid_argument("coherent_bob_respond: empty support");
  std::size_t ones = 0;
  for (const auto& e : support) ones += bob_respond(e.v, h) ? 1 : 0;
  const bool bit = rng.below(support.size()) < ones;
  CoherentResponse out{bit, {}};
  out.support.reserve(bit ? ones : support.size() - ones);
  for (const auto& e : support) {
    if (bob_respond(e.v, h) == bit) out.support.push_back(e);
  }
  return out;
}

namespace {

// State of the game is the set S of indices still consistent, as a bitmask
// over v - 1. The rows sent so far are exactly those constant on S, so S
// alone determines which rows Alice may still send.
struct AdversaryGame {
  std::size_t k;
  std::size_t width;
  std::uint64_t bmask;
  std::unordered_map<std::uint64_t, double> memo;

  double value(std::uint64_t s) {
    if (std::popcount(s) == 2) return (s & ~bmask) == 0 ? 1.0 : 0.0;
    if (const auto it = memo.find(s); it != memo.end()) return it->second;
    double total = 0.0;
    std::size_t options = 0;
    for (std::uint64_t h = 1; h < (std::uint64_t{1} << width); ++h) {
      std::uint64_t ones = 0;
      for (std::uint64_t x = 0; x < k; ++x) {
        if (((s >> x) & 1U) && (std::popcount(h & x) & 1)) ones |= std::uint64_t{1} << x;
      }
      const std::uint64_t zeros = s & ~ones;
      if (ones == 0 || zeros == 0) continue;  // h is in the span already sent
      ++options;
      total += std::max(value(ones), value(zeros));
    }
    const double v = total / static_cast<double>(options);
    memo.emplace(s, v);
    return v;
  }
};

}  // namespace

double optimal_adversary_value(std::size_t k, const std::vector<Index>& bset) {
  const std::size_t width = index_width(k);
  if (k > 32) throw std::invalid_argument("optimal_adversary_value: k > 32");
  std::uint64_t bmask = 0;
  for (Index v : bset) {
    if (v == 0 || v > k) throw std::out_of_range("optimal_adversary_value: index outside [k]");
    bmask |= std::uint64_t{1} << (v - 1);
  }
  AdversaryGame game{k, width, bmask, {}};
  return game.value((std::uint64_t{1} << k) - 1);
}

}  // namespace poq::ih
