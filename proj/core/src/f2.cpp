#include "poq/f2.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace poq::f2 {

namespace {

std::size_t word_count(std::size_t len) { return (len + kWordBits - 1) / kWordBits; }


}  // namespace

BitVec::BitVec(std::size_t len) : len_(len), words_(word_count(len), 0) {}

BitVec BitVec::from_string(std::string_view bits) {
  BitVec v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i, true);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("BitVec::from_string: expected 0/1");
    }
  }
  return v;
}

BitVec BitVec::from_uint(std::uint64_t value, std::size_t len) {
  if (len > kWordBits) throw std::invalid_argument("BitVec::from_uint: len > 64");
  BitVec v(len);
  if (len > 0) {
    v.words_[0] = len == kWordBits ? value : (value & ((Word{1} << len) - 1));
  }
  return v;
}

BitVec BitVec::unit(std::size_t len, std::size_t index) {
  BitVec v(len);
  v.set(index, true);
  return v;
}

void BitVec::out_of_range(std::size_t i) const {
  throw std::out_of_range("BitVec index " + std::to_string(i) + " out of range " +
                          std::to_string(len_));
}

BitVec& BitVec::operator^=(const BitVec& other) {
  if (other.len_ != len_) throw std::invalid_argument("BitVec xor: length mismatch");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  return *this;
}

std::size_t BitVec::popcount() const {
  std::size_t n = 0;
  for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitVec::is_zero() const {
  return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
}

std::size_t BitVec::lowest_set() const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (words_[w] != 0) {
      return w * kWordBits + static_cast<std::size_t>(std::countr_zero(words_[w]));
    }
  }
  return len_;
}

std::uint64_t BitVec::to_uint() const { return words_.empty() ? 0 : words_[0]; }

std::string BitVec::to_string() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

BitVec BitVec::concat(const BitVec& tail) const {
  BitVec out(len_ + tail.len_);
  out.words_.assign(words_.begin(), words_.end());
  out.words_.resize(word_count(out.len_), 0);
  const std::size_t shift = len_ % kWordBits;
  std::size_t base = len_ / kWordBits;
  for (std::size_t w = 0; w < tail.words_.size(); ++w) {
    const Word v = tail.words_[w];
    out.words_[base + w] |= v << shift;
    if (shift != 0 && base + w + 1 < out.words_.size()) {
      out.words_[base + w + 1] |= v >> (kWordBits - shift);
    }
  }
  return out;
}

BitVec BitVec::slice(std::size_t begin, std::size_t count) const {
  if (begin > len_ || count > len_ - begin) throw std::out_of_range("BitVec::slice out of range");
  BitVec out(count);
  const std::size_t shift = begin % kWordBits;
  const std::size_t base = begin / kWordBits;
  for (std::size_t w = 0; w < out.words_.size(); ++w) {
    Word v = words_[base + w] >> shift;
    if (shift != 0 && base + w + 1 < words_.size()) v |= words_[base + w + 1] << (kWordBits - shift);
    out.words_[w] = v;
  }
  if (count % kWordBits != 0) out.words_.back() &= (Word{1} << (count % kWordBits)) - 1;
  return out;
}

std::uint64_t BitVec::extract(std::size_t begin, std::size_t width) const {
  if (width > kWordBits) throw std::invalid_argument("BitVec::extract: width > 64");
  if (begin > len_ || width > len_ - begin) throw std::out_of_range("BitVec::extract out of range");
  if (width == 0) return 0;
  const std::size_t shift = begin % kWordBits;
  const std::size_t base = begin / kWordBits;
  Word v = words_[base] >> shift;
  if (shift != 0 && shift + width > kWordBits) v |= words_[base + 1] << (kWordBits - shift);
  return width < kWordBits ? v & ((Word{1} << width) - 1) : v;
}

void BitVec::append(std::uint64_t value, std::size_t width) {
  if (width > kWordBits) throw std::invalid_argument("BitVec::append: width > 64");
  if (width == 0) return;
  if (width < kWordBits) value &= (Word{1} << width) - 1;
  const std::size_t shift = len_ % kWordBits;
  if (shift == 0) {
    words_.push_back(value);
  } else {
    words_.back() |= value << shift;
    if (shift + width > kWordBits) words_.push_back(value >> (kWordBits - shift));
  }
  len_ += width;
}

void BitVec::serialize_into(std::vector<std::uint8_t>& out) const {
  const auto len = static_cast<std::uint32_t>(len_);
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  const std::size_t nbytes = (len_ + 7) / 8;
  for (std::size_t b = 0; b < nbytes; ++b) {
    out.push_back(static_cast<std::uint8_t>(words_[b / 8] >> (8 * (b % 8))));
  }
}

std::vector<std::uint8_t> BitVec::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(4 + (len_ + 7) / 8);
  serialize_into(out);
  return out;
}

BitVec BitVec::deserialize(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  if (bytes.size() < 4) throw std::invalid_argument("BitVec: truncated length header");
  const std::size_t len = (std::size_t{bytes[0]} << 24) | (std::size_t{bytes[1]} << 16) |
                          (std::size_t{bytes[2]} << 8) | std::size_t{bytes[3]};
  const std::size_t nbytes = (len + 7) / 8;
  if (bytes.size() < 4 + nbytes) throw std::invalid_argument("BitVec: truncated payload");
  BitVec v(len);
  for (std::size_t b = 0; b < nbytes; ++b) {
    v.words_[b / 8] |= Word{bytes[4 + b]} << (8 * (b % 8));
  }
  if (len % 8 != 0 && (bytes[4 + nbytes - 1] >> (len % 8)) != 0) {
    throw std::invalid_argument("BitVec: non-zero padding bits");
  }
  if (consumed != nullptr) *consumed = 4 + nbytes;
  return v;
}

std::size_t BitVecHash::operator()(const BitVec& v) const noexcept {
  std::size_t h = std::hash<std::size_t>{}(v.size());
  for (Word w : v.words()) h ^= std::hash<Word>{}(w) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

bool dot(const BitVec& a, const BitVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  const auto wa = a.words();
  const auto wb = b.words();
  Word acc = 0;
  for (std::size_t w = 0; w < wa.size(); ++w) acc ^= wa[w] & wb[w];
  return (std::popcount(acc) & 1) != 0;
}

// --- BitMat ---------------------------------------------------------------

BitMat::BitMat(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVec(cols)) {}

BitMat::BitMat(std::vector<BitVec> rows) : rows_(std::move(rows)) {
  cols_ = rows_.empty() ? 0 : rows_.front().size();
  for (const auto& r : rows_) {
    if (r.size() != cols_) throw std::invalid_argument("BitMat: ragged rows");
  }
}

BitMat BitMat::from_strings(std::initializer_list<std::string_view> rows) {
  std::vector<BitVec> out;
  for (auto r : rows) out.push_back(BitVec::from_string(r));
  return BitMat(std::move(out));
}

BitMat BitMat::identity(std::size_t n) {
  BitMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

void BitMat::append_row(BitVec row) {
  if (rows_.empty() && cols_ == 0) cols_ = row.size();
  if (row.size() != cols_) throw std::invalid_argument("BitMat::append_row: width mismatch");
  rows_.push_back(std::move(row));
}

BitVec BitMat::column(std::size_t c) const {
  BitVec out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out.set(r, rows_[r].get(c));
  return out;
}

BitVec BitMat::apply(const BitVec& x) const {
  if (x.size() != cols_) throw std::invalid_argument("BitMat::apply: width mismatch");
  BitVec out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out.set(r, dot(rows_[r], x));
  return out;
}

// --- elimination ------------------------------------------------------------

namespace {

Echelon eliminate(std::vector<BitVec> rows, std::vector<bool> rhs, std::size_t cols) {
  Echelon e;
  e.cols = cols;
  std::size_t next = 0;
  for (std::size_t c = 0; c < cols && next < rows.size(); ++c) {
    std::size_t pivot = next;
    while (pivot < rows.size() && !rows[pivot].get(c)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[next], rows[pivot]);
    std::swap(rhs[next], rhs[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != next && rows[r].get(c)) {
        rows[r] ^= rows[next];
        rhs[r] = rhs[r] != rhs[next];
      }
    }
    e.pivots.push_back(c);
    ++next;
  }
  for (std::size_t r = next; r < rows.size(); ++r) {
    if (rhs[r]) e.consistent = false;
  }
  rows.resize(next);
  rhs.resize(next);
  e.rows = std::move(rows);
  e.targets = std::move(rhs);
  return e;
}

std::vector<std::size_t> free_columns(const Echelon& e) {
  std::vector<std::size_t> free;
  std::size_t p = 0;
  for (std::size_t c = 0; c < e.cols; ++c) {
    if (p < e.pivots.size() && e.pivots[p] == c) {
      ++p;
    } else {
      free.push_back(c);
    }
  }
  return free;
}

BitVec particular_solution(const Echelon& e) {
  BitVec x(e.cols);
  for (std::size_t i = 0; i < e.rank(); ++i) x.set(e.pivots[i], e.targets[i]);
  return x;
}

}  // namespace

Echelon reduce(const BitMat& m) {
  std::vector<BitVec> rows;
  rows.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r));
  return eliminate(std::move(rows), std::vector<bool>(m.rows(), false), m.cols());
}

Echelon reduce(const BitMat& m, const BitVec& y) {
  if (y.size() != m.rows()) throw std::invalid_argument("reduce: rhs length mismatch");
  std::vector<BitVec> rows;
  std::vector<bool> rhs;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(m.row(r));
    rhs.push_back(y.get(r));
  }
  return eliminate(std::move(rows), std::move(rhs), m.cols());
}

std::size_t rank(const BitMat& m) { return reduce(m).rank(); }

std::vector<BitVec> kernel(const BitMat& m) {
  const Echelon e = reduce(m);
  std::vector<BitVec> basis;
  for (std::size_t f : free_columns(e)) {
    BitVec k(m.cols());
    k.set(f, true);
    for (std::size_t i = 0; i < e.rank(); ++i) {
      if (e.rows[i].get(f)) k.set(e.pivots[i], true);
    }
    basis.push_back(std::move(k));
  }
  return basis;
}

std::vector<BitVec> solve_preimages(const BitMat& m, const BitVec& y) {
  const Echelon e = reduce(m, y);
  if (!e.consistent) return {};
  const std::vector<BitVec> basis = kernel(m);
  if (basis.size() > 20) throw std::length_error("solve_preimages: solution set too large");
  const BitVec base = particular_solution(e);
  std::vector<BitVec> out;
  out.reserve(std::size_t{1} << basis.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << basis.size()); ++mask) {
    BitVec x = base;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      if ((mask >> b) & 1U) x ^= basis[b];
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::optional<BitVec> sample_solution(const BitMat& m, const BitVec& y, RandomSource& rng) {
  const Echelon e = reduce(m, y);
  if (!e.consistent) return std::nullopt;
  BitVec x(m.cols());
  const auto free = free_columns(e);
  for (std::size_t f : free) x.set(f, rng.bit());
  for (std::size_t i = 0; i < e.rank(); ++i) {
    bool v = e.targets[i];
    for (std::size_t f : free) {
      if (e.rows[i].get(f) && x.get(f)) v = !v;
    }
    x.set(e.pivots[i], v);
  }
  return x;
}

BitVec sample_uniform(std::size_t len, RandomSource& rng) {
  BitVec v(len);
  for (std::size_t base = 0; base < len; base += kWordBits) {
    const auto count = static_cast<unsigned>(std::min(kWordBits, len - base));
    const std::uint64_t w = rng.bits(count);
    for (unsigned i = 0; i < count; ++i) {
      if ((w >> i) & 1U) v.set(base + i, true);
    }
  }
  return v;
}

BitVec sample_conditioned(std::size_t len, const BitVec& t, bool bit, RandomSource& rng) {
  if (t.size() != len) throw std::invalid_argument("sample_conditioned: length mismatch");
  if (t.is_zero() && bit) {
    throw std::invalid_argument("sample_conditioned: no r satisfies r.t = 1 for t = 0");
  }
  for (;;) {
    BitVec r = sample_uniform(len, rng);
    if (dot(r, t) == bit) return r;
  }
}

}  // namespace poq::f2
