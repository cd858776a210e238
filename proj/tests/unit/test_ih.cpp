#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "poq/f2.hpp"
#include "poq/ih.hpp"

namespace {

using poq::Rng;
using poq::f2::BitMat;
using poq::f2::BitVec;
using namespace poq::ih;

BitVec bv(const char* s) { return BitVec::from_string(s); }

IHTranscript honest_run(std::size_t k, Index v, poq::RandomSource& rng) {
  IHSession sess(k);
  while (!sess.complete()) {
    const BitVec h = alice_next_row(sess, rng);
    sess.push_row(h);
    sess.push_response(bob_respond(v, h));
  }
  return sess.transcript();
}

TEST(Index, EncodingIsLsbFirstOfVMinusOne) {
  EXPECT_EQ(index_width(2), 1u);
  EXPECT_EQ(index_width(64), 6u);
  EXPECT_THROW(index_width(6), std::invalid_argument);
  EXPECT_THROW(index_width(1), std::invalid_argument);
  EXPECT_EQ(encode_index(1, 3).to_string(), "000");
  EXPECT_EQ(encode_index(2, 3).to_string(), "100");
  EXPECT_EQ(encode_index(8, 3).to_string(), "111");
  for (Index v = 1; v <= 32; ++v) EXPECT_EQ(decode_index(encode_index(v, 5)), v);
}

TEST(AliceNextRow, KEqualsTwoHasNoRounds) {
  Rng rng(1, 1);
  IHSession sess(2);
  EXPECT_EQ(sess.rounds(), 0u);
  EXPECT_TRUE(sess.complete());
  EXPECT_THROW(alice_next_row(sess, rng), std::logic_error);
}

TEST(AliceNextRow, KEqualsFourOneNonzeroRow) {
  Rng rng(1, 2);
  for (int i = 0; i < 100; ++i) {
    IHSession sess(4);
    const BitVec h = alice_next_row(sess, rng);
    EXPECT_FALSE(h.is_zero());
    sess.push_row(h);
    sess.push_response(false);
    EXPECT_TRUE(sess.complete());
    EXPECT_THROW(alice_next_row(sess, rng), std::logic_error);
  }
}

TEST(AliceNextRow, CompletedRowsHaveFullRank) {
  Rng rng(1, 3);
  for (int i = 0; i < 10000; ++i) {
    const auto t = honest_run(16, 1 + static_cast<Index>(rng.below(16)), rng);
    ASSERT_EQ(poq::f2::rank(BitMat(t.rows)), 3u);
  }
}

TEST(IHSession, RejectsDependentRows) {
  IHSession sess(8);
  sess.push_row(bv("110"));
  sess.push_response(true);
  EXPECT_THROW(sess.push_row(bv("110")), std::exception);
  EXPECT_THROW(sess.push_row(bv("000")), std::exception);
}

TEST(BobRespond, Examples) {
  for (const char* h : {"000", "101", "111", "011"}) EXPECT_FALSE(bob_respond(1, bv(h)));
  EXPECT_TRUE(bob_respond(2, bv("100")));
  EXPECT_TRUE(bob_respond(6, bv("100")));
  EXPECT_FALSE(bob_respond(3, bv("100")));
}

TEST(Preimages, Examples) {
  IHTranscript empty;
  empty.k = 2;
  EXPECT_EQ(preimages(empty), (std::pair<Index, Index>{1, 2}));

  IHTranscript t;
  t.k = 4;
  t.rows = {bv("11")};
  t.responses = {false};
  EXPECT_EQ(preimages(t), (std::pair<Index, Index>{1, 4}));

  IHTranscript partial;
  partial.k = 8;
  partial.rows = {bv("100")};
  partial.responses = {true};
  EXPECT_THROW(preimages(partial), std::logic_error);
}

// Every transcript has exactly two preimages, found by enumerating [k], and
// the honest input is one of them.
TEST(Preimages, TwoToOneAndHonestCompleteness) {
  Rng rng(2, 1);
  for (std::size_t k : {2u, 4u, 8u, 16u, 32u, 64u}) {
    for (int i = 0; i < 200; ++i) {
      const Index v = 1 + static_cast<Index>(rng.below(k));
      const auto t = honest_run(k, v, rng);
      std::vector<Index> found;
      for (Index w = 1; w <= k; ++w) {
        if (t.consistent(w)) found.push_back(w);
      }
      ASSERT_EQ(found.size(), 2u) << "k=" << k;
      const auto [a, b] = preimages(t);
      ASSERT_LT(a, b);
      ASSERT_EQ(found[0], a);
      ASSERT_EQ(found[1], b);
      ASSERT_TRUE(v == a || v == b);
    }
  }
}

TEST(Preimages, ArbitraryResponsesStillTwo) {
  Rng rng(2, 2);
  for (std::size_t k : {8u, 32u}) {
    for (int i = 0; i < 200; ++i) {
      IHSession sess(k);
      while (!sess.complete()) {
        sess.push_row(alice_next_row(sess, rng));
        sess.push_response(rng.bit());
      }
      std::size_t count = 0;
      for (Index w = 1; w <= k; ++w) count += sess.transcript().consistent(w);
      ASSERT_EQ(count, 2u);
    }
  }
}

Support full_support(std::size_t k) {
  Support s;
  for (Index v = 1; v <= k; ++v) s.push_back({v, static_cast<std::uint8_t>(v * 7)});
  return s;
}

TEST(CoherentCollapse, FullSupportGivesPreimagePair) {
  Rng rng(3, 1);
  const auto t = honest_run(16, 5, rng);
  const auto out = coherent_collapse(full_support(16), t);
  ASSERT_EQ(out.size(), 2u);
  const auto [a, b] = preimages(t);
  EXPECT_EQ(out[0], (SupportEntry{a, static_cast<std::uint8_t>(a * 7)}));
  EXPECT_EQ(out[1], (SupportEntry{b, static_cast<std::uint8_t>(b * 7)}));
  EXPECT_EQ(coherent_collapse(out, t), out);
}

TEST(CoherentCollapse, InconsistentThrows) {
  IHTranscript t;
  t.k = 4;
  t.rows = {bv("10")};
  t.responses = {true};
  EXPECT_THROW(coherent_collapse(Support{{1, 0}}, t), std::logic_error);
}

TEST(CoherentBobRespond, SupportHalvesEachRound) {
  Rng rng(3, 2);
  for (int i = 0; i < 100; ++i) {
    IHSession sess(8);
    Support support = full_support(8);
    std::vector<std::size_t> sizes{support.size()};
    while (!sess.complete()) {
      const BitVec h = alice_next_row(sess, rng);
      auto resp = coherent_bob_respond(support, h, rng);
      sess.push_row(h);
      sess.push_response(resp.bit);
      support = std::move(resp.support);
      sizes.push_back(support.size());
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>{8, 4, 2}));
    EXPECT_EQ(coherent_collapse(full_support(8), sess.transcript()), support);
  }
}

TEST(CoherentBobRespond, SingletonMatchesClassical) {
  Rng rng(3, 3);
  for (int i = 0; i < 500; ++i) {
    const Index v = 1 + static_cast<Index>(rng.below(32));
    BitVec h(5);
    for (std::size_t j = 0; j < 5; ++j) h.set(j, rng.bit());
    const auto resp = coherent_bob_respond(Support{{v, 3}}, h, rng);
    ASSERT_EQ(resp.bit, bob_respond(v, h));
    ASSERT_EQ(resp.support, (Support{{v, 3}}));
  }
}

TEST(CoherentBobRespond, ResponseFrequencyFollowsSupport) {
  Rng rng(3, 4);
  // Three of four entries answer 1 on h = 10.
  const Support support{{2, 0}, {4, 0}, {6, 0}, {1, 0}};
  int ones = 0;
  for (int i = 0; i < 8000; ++i) ones += coherent_bob_respond(support, bv("100"), rng).bit;
  EXPECT_NEAR(ones / 8000.0, 0.75, 0.02);
}

// Independent game-tree search over explicit rows.
double brute_value(std::size_t k, const std::set<Index>& bset) {
  const std::size_t w = index_width(k);
  std::function<double(std::vector<BitVec>&, std::vector<bool>&)> go =
      [&](std::vector<BitVec>& rows, std::vector<bool>& ys) -> double {
    if (rows.size() == w - 1) {
      std::vector<Index> hits;
      for (Index v = 1; v <= k; ++v) {
        const BitVec x = encode_index(v, w);
        bool ok = true;
        for (std::size_t i = 0; i < rows.size(); ++i) ok &= poq::f2::dot(rows[i], x) == ys[i];
        if (ok) hits.push_back(v);
      }
      return bset.count(hits[0]) && bset.count(hits[1]) ? 1.0 : 0.0;
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t hv = 1; hv < k; ++hv) {
      BitVec h = BitVec::from_uint(hv, w);
      std::vector<BitVec> next = rows;
      next.push_back(h);
      if (poq::f2::rank(BitMat(next)) != next.size()) continue;
      ++count;
      double best = 0.0;
      for (bool y : {false, true}) {
        rows.push_back(h);
        ys.push_back(y);
        best = std::max(best, go(rows, ys));
        rows.pop_back();
        ys.pop_back();
      }
      sum += best;
    }
    return sum / static_cast<double>(count);
  };
  std::vector<BitVec> rows;
  std::vector<bool> ys;
  return go(rows, ys);
}

TEST(OptimalAdversary, TrivialValues) {
  EXPECT_DOUBLE_EQ(optimal_adversary_value(16, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14,
                                                15, 16}),
                   1.0);
  EXPECT_DOUBLE_EQ(optimal_adversary_value(16, {7}), 0.0);
  EXPECT_DOUBLE_EQ(optimal_adversary_value(16, {}), 0.0);
  EXPECT_DOUBLE_EQ(optimal_adversary_value(2, {1, 2}), 1.0);
}

TEST(OptimalAdversary, HandValuesAtKFour) {
  // {1, 2} differ by 10; one of the three nonzero rows kills it.
  EXPECT_NEAR(optimal_adversary_value(4, {1, 2}), 1.0 / 3.0, 1e-12);
  // Three pairs cover all three nonzero differences.
  EXPECT_NEAR(optimal_adversary_value(4, {1, 2, 3}), 1.0, 1e-12);
}

TEST(OptimalAdversary, MatchesBruteForce) {
  Rng rng(4, 1);
  for (std::size_t k : {4u, 8u, 16u}) {
    for (int i = 0; i < 12; ++i) {
      std::set<Index> b;
      const std::size_t size = 2 + rng.below(k - 1);
      while (b.size() < size) b.insert(1 + static_cast<Index>(rng.below(k)));
      const std::vector<Index> bvec(b.begin(), b.end());
      ASSERT_NEAR(optimal_adversary_value(k, bvec), brute_value(k, b), 1e-12) << "k=" << k;
    }
  }
}

TEST(OptimalAdversary, MonotoneInB) {
  Rng rng(4, 2);
  for (std::size_t k : {8u, 16u, 32u}) {
    std::vector<Index> perm(k);
    for (Index v = 0; v < k; ++v) perm[v] = v + 1;
    for (std::size_t i = k - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    double prev = 0.0;
    for (std::size_t size = 0; size <= k; ++size) {
      const std::vector<Index> b(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
      const double v = optimal_adversary_value(k, b);
      ASSERT_GE(v + 1e-12, prev) << "k=" << k << " |B|=" << size;
      if (size < 2) {
        ASSERT_EQ(v, 0.0);
      }
      prev = v;
    }
    ASSERT_NEAR(prev, 1.0, 1e-12);
  }
}

TEST(OptimalAdversary, NestedSetsAtSixteen) {
  const double v2 = optimal_adversary_value(16, {1, 2});
  const double v4 = optimal_adversary_value(16, {1, 2, 3, 4});
  const double v8 = optimal_adversary_value(16, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_LE(v2, v4);
  EXPECT_LE(v4, v8);
  EXPECT_GT(v2, 0.0);
}

TEST(OptimalAdversary, RejectsLargeK) {
  EXPECT_THROW(optimal_adversary_value(64, {1, 2}), std::invalid_argument);
}

}  // namespace
