#include <doctest.h>

#include <algorithm>
#include <map>

#include "fragdyn/core.hpp"
#include "fragdyn/models.hpp"
#include "fragdyn/rng.hpp"

using namespace fragdyn;

namespace {

Word bsw(const char* s) { return parse_word(s, presentation(ModelId::BS).alphabet); }

// Index and direction of the relation taking lhs to rhs.
std::pair<std::size_t, Direction> find_relation(const Presentation& p, const Word& lhs, const Word& rhs) {
  for (std::size_t r = 0; r < p.relations.size(); ++r) {
    if (p.relations[r].lhs == lhs && p.relations[r].rhs == rhs) return {r, Direction::Forward};
    if (p.relations[r].rhs == lhs && p.relations[r].lhs == rhs) return {r, Direction::Backward};
  }
  FAIL("relation not found");
  return {0, Direction::Forward};
}

Word random_word(ModelId m, std::size_t L, Philox& rng) {
  Word w(L);
  for (auto& x : w) x = static_cast<Symbol>(rng.bounded(static_cast<std::uint32_t>(presentation(m).alphabet.size())));
  return w;
}

}  // namespace

TEST_CASE("textual encodings") {
  CHECK(bsw("a B a b") == Word{bs::a, bs::B, bs::a, bs::b});
  CHECK(bsw("e e e") == Word{bs::e, bs::e, bs::e});
  CHECK(parse_word("( * )", presentation(ModelId::Star).alphabet) == Word{mz::open, mz::star, mz::close});
  CHECK(parse_word("(>)", presentation(ModelId::Chiral).alphabet) == Word{mz::open, mz::star, mz::close});
  CHECK(parse_word("1 2 3", presentation(ModelId::PairFlip).alphabet) == Word{0, 1, 2});
  CHECK(format_word(bsw("aBab"), presentation(ModelId::BS).alphabet) == "aBab");

  try {
    bsw("ab x");
    FAIL("expected UnknownSymbol");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownSymbol);
    CHECK(e.position() == 3);
  }
  try {
    bsw("  ");
    FAIL("expected EmptyWord");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyWord);
  }
  CHECK_THROWS_AS(parse_word("*", presentation(ModelId::Chiral).alphabet), Error);
}

TEST_CASE("alphabet validation") {
  for (ModelId m : kAllModels) CHECK_NOTHROW(presentation(m).alphabet.validate());
  Alphabet dup;
  dup.symbols = {'x', 'x'};
  CHECK_THROWS_AS(dup.validate(), Error);
  Alphabet bad = presentation(ModelId::BS).alphabet;
  bad.inverse[1] = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
  Alphabet id = presentation(ModelId::BS).alphabet;
  id.inverse[0] = 1;
  id.inverse[1] = 0;
  CHECK_THROWS_AS(id.validate(), Error);
}

TEST_CASE("bundled presentations have equal-length relations of range 3") {
  for (ModelId m : kAllModels) {
    const Presentation& p = presentation(m);
    std::size_t range = 0;
    for (const Relation& r : p.relations) {
      CHECK(r.lhs.size() == r.rhs.size());
      range = std::max(range, r.lhs.size());
    }
    CHECK(range == (m == ModelId::PairFlip ? 2u : 3u));
    CHECK(p.locality == 3);
  }
}

TEST_CASE("BS relations are the padded family of ab = baa") {
  const Presentation& p = presentation(ModelId::BS);
  auto [r, d] = find_relation(p, bsw("abe"), bsw("baa"));
  CHECK(p.relations[r].core);
  auto y = apply_relation_at(bsw("abe"), p, r, 0, d);
  REQUIRE(y);
  CHECK(*y == bsw("baa"));
  // The same relation padded the other way round exists too.
  find_relation(p, bsw("eab"), bsw("baa"));
  find_relation(p, bsw("aeb"), bsw("baa"));
}

TEST_CASE("apply_relation_at reports a non-match") {
  const Presentation& p = presentation(ModelId::BS);
  auto [r, d] = find_relation(p, bsw("abe"), bsw("baa"));
  CHECK_FALSE(apply_relation_at(bsw("eee"), p, r, 0, d));
  CHECK_THROWS_AS(apply_relation_at(bsw("ee"), p, r, 0, d), Error);
}

TEST_CASE("star rule duplicates the star") {
  const Presentation& p = presentation(ModelId::Star);
  const Alphabet& al = p.alphabet;
  auto [r, d] = find_relation(p, parse_word("(*0", al), parse_word("**(", al));
  auto y = apply_relation_at(parse_word("(*0", al), p, r, 0, d);
  REQUIRE(y);
  CHECK(format_word(*y, al) == "**(");
}

TEST_CASE("oriented relations refuse the backward direction") {
  Presentation p = presentation(ModelId::PairFlip);
  p.relations[0].oriented = true;
  CHECK_THROWS_AS(apply_relation_at(Word{1, 1}, p, 0, 0, Direction::Backward), Error);
}

TEST_CASE("neighbors") {
  const Presentation& p = presentation(ModelId::BS);
  auto ns = neighbors(bsw("ee"), p);
  for (const char* w : {"aA", "Aa", "bB", "Bb"}) CHECK(std::count(ns.begin(), ns.end(), bsw(w)) == 1);
  auto red = neighbors(bsw("aAe"), p);
  CHECK(std::count(red.begin(), red.end(), bsw("eee")) == 1);
  CHECK(neighbors(Word{0, 1, 0}, presentation(ModelId::PairFlip)).empty());
}

TEST_CASE("move properties on random configurations") {
  Philox rng(11);
  for (ModelId m : kAllModels) {
    const Presentation& p = presentation(m);
    for (int trial = 0; trial < 200; ++trial) {
      Word x = random_word(m, 3 + rng.bounded(5), rng);
      for (std::size_t r = 0; r < p.relations.size(); ++r)
        for (std::size_t pos = 0; pos + p.relations[r].lhs.size() <= x.size(); ++pos) {
          auto y = apply_relation_at(x, p, r, pos, Direction::Forward);
          if (!y) continue;
          CHECK(y->size() == x.size());
          auto back = apply_relation_at(*y, p, r, pos, Direction::Backward);
          REQUIRE(back);
          CHECK(*back == x);
        }
      for (const Word& y : neighbors(x, p)) {
        auto ny = neighbors(y, p);
        CHECK(std::binary_search(ny.begin(), ny.end(), x));
      }
    }
  }
}

TEST_CASE("identity paddings") {
  auto ps = identity_paddings(Word{1, 3}, 3, 0);
  CHECK(ps == std::vector<Word>{{0, 1, 3}, {1, 0, 3}, {1, 3, 0}});
  CHECK(identity_paddings(Word{1, 1}, 3, 0).size() == 3);
  CHECK(identity_paddings(Word{1, 2, 3}, 2, 0).empty());
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox::Block;
  using K = Philox::Key;
  CHECK(Philox::block(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::block(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::block(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("generator state round trip and stream splitting") {
  Philox a(42);
  for (int i = 0; i < 7; ++i) a();
  Philox b;
  b.set_state(a.state());
  for (int i = 0; i < 100; ++i) CHECK(a() == b());

  Philox root(5);
  Philox c1 = root.split(3), c2 = root.split(3), c3 = root.split(4);
  root();
  Philox c4 = root.split(3);
  std::uint32_t x1 = c1(), x2 = c2(), x3 = c3(), x4 = c4();
  CHECK(x1 == x2);
  CHECK(x1 == x4);
  CHECK(x1 != x3);
}

TEST_CASE("bounded draws are uniform") {
  Philox rng(9);
  const std::uint32_t n = 7;
  const int draws = 700000;
  std::vector<int> hist(n);
  for (int i = 0; i < draws; ++i) ++hist[rng.bounded(n)];
  double chi2 = 0, e = static_cast<double>(draws) / n;
  for (int h : hist) chi2 += (h - e) * (h - e) / e;
  CHECK(chi2 < 22.46);  // 99.9% quantile, 6 degrees of freedom
  double u = 0;
  for (int i = 0; i < 100000; ++i) {
    double v = rng.uniform01();
    CHECK((v >= 0 && v < 1));
    u += v;
  }
  CHECK(u / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
