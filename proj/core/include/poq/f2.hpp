#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poq/rng.hpp"

/// Bit-packed linear algebra over GF(2).
///
/// Over GF(2), -1 == 1: the vector t = (s, -1) is stored as (s, 1).
namespace poq::f2 {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

/// Vector over GF(2). Bit i lives in word i / 64 at position i % 64; the
/// storage past size() is always zero, so equality and hashing are
/// structural.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t len);

  /// Parses "1011" (character i is bit i). Throws on other characters.
  static BitVec from_string(std::string_view bits);
  /// Low `len` bits of `value`, bit i = (value >> i) & 1. len <= 64.
  static BitVec from_uint(std::uint64_t value, std::size_t len);
  static BitVec unit(std::size_t len, std::size_t index);

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(std::size_t i) const {
    check(i);
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }
  void set(std::size_t i, bool value) {
    check(i);
    const Word mask = Word{1} << (i % kWordBits);
    words_[i / kWordBits] = value ? (words_[i / kWordBits] | mask) : (words_[i / kWordBits] & ~mask);
  }
  void flip(std::size_t i) {
    check(i);
    words_[i / kWordBits] ^= Word{1} << (i % kWordBits);
  }
  bool operator[](std::size_t i) const { return get(i); }

  BitVec& operator^=(const BitVec& other);
  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
  bool operator==(const BitVec& other) const = default;

  std::size_t popcount() const;
  bool is_zero() const;
  /// Index of the lowest set bit, or size() if zero.
  std::size_t lowest_set() const;

  /// Value of bits [0, min(size, 64)) as an integer.
  std::uint64_t to_uint() const;
  std::string to_string() const;

  BitVec concat(const BitVec& tail) const;
  BitVec slice(std::size_t begin, std::size_t count) const;
  /// Bits [begin, begin + width) as an integer. width <= 64.
  std::uint64_t extract(std::size_t begin, std::size_t width) const;
  void push_back(bool value) {
    if (len_ % kWordBits == 0) words_.push_back(0);
    ++len_;
    set(len_ - 1, value);
  }
  /// Appends the low `width` bits of value, bit 0 first. width <= 64.
  void append(std::uint64_t value, std::size_t width);

  std::span<const Word> words() const { return words_; }

  /// 4-byte big-endian bit length, then ceil(len/8) bytes with bit i at
  /// byte i/8, position i%8.
  std::vector<std::uint8_t> serialize() const;
  void serialize_into(std::vector<std::uint8_t>& out) const;
  /// Parses one vector from the front of `bytes`; `consumed` receives the
  /// byte count. Throws std::invalid_argument on truncation or a non-zero
  /// padding tail.
  static BitVec deserialize(std::span<const std::uint8_t> bytes,
                            std::size_t* consumed = nullptr);

 private:
  void check(std::size_t i) const {
    if (i >= len_) out_of_range(i);
  }
  [[noreturn]] void out_of_range(std::size_t i) const;

  std::size_t len_ = 0;
  std::vector<Word> words_;
};

struct BitVecHash {
  std::size_t operator()(const BitVec& v) const noexcept;
};

/// Parity of the AND. Throws std::invalid_argument on a length mismatch.
bool dot(const BitVec& a, const BitVec& b);

/// Row-major matrix over GF(2).
class BitMat {
 public:
  BitMat() = default;
  BitMat(std::size_t rows, std::size_t cols);
  explicit BitMat(std::vector<BitVec> rows);
  /// Each string is one row.
  static BitMat from_strings(std::initializer_list<std::string_view> rows);
  static BitMat identity(std::size_t n);

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }

  const BitVec& row(std::size_t r) const { return rows_.at(r); }
  BitVec& row(std::size_t r) { return rows_.at(r); }
  bool get(std::size_t r, std::size_t c) const { return rows_.at(r).get(c); }
  void set(std::size_t r, std::size_t c, bool v) { rows_.at(r).set(c, v); }
  void append_row(BitVec row);

  BitVec column(std::size_t c) const;
  /// M x.
  BitVec apply(const BitVec& x) const;

  bool operator==(const BitMat& other) const = default;

 private:
  std::size_t cols_ = 0;
  std::vector<BitVec> rows_;
};

/// Reduced row echelon form of a copy of the input.
struct Echelon {
  std::vector<BitVec> rows;           // nonzero rows, one per pivot
  std::vector<std::size_t> pivots;    // pivot column of each row, increasing
  std::vector<bool> targets;          // right-hand side, when augmented
  bool consistent = true;             // false if 0 = 1 appeared
  std::size_t cols = 0;

  std::size_t rank() const { return rows.size(); }
};

Echelon reduce(const BitMat& m);
Echelon reduce(const BitMat& m, const BitVec& y);

std::size_t rank(const BitMat& m);
/// Basis of {x : M x = 0}. One vector per free column.
std::vector<BitVec> kernel(const BitMat& m);
/// Every x with M x = y. Throws std::length_error when the solution set
/// would exceed 2^20 elements.
std::vector<BitVec> solve_preimages(const BitMat& m, const BitVec& y);
/// One solution of M x = y drawn uniformly from the solution set, or nullopt
/// when the system is inconsistent.
std::optional<BitVec> sample_solution(const BitMat& m, const BitVec& y,
                                      RandomSource& rng);

BitVec sample_uniform(std::size_t len, RandomSource& rng);
/// Uniform over {r : r.t == bit} by rejection. Throws std::invalid_argument
/// when t == 0 and bit == 1 (empty set) or on length mismatch.
BitVec sample_conditioned(std::size_t len, const BitVec& t, bool bit,
                          RandomSource& rng);

}  // namespace poq::f2
