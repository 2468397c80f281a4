#pragma once

// Independent reference implementations shared by the tests. None of them
// reuses library code beyond symbol codes.

#include <boost/rational.hpp>
#include <deque>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/models.hpp"

namespace support {

using fragdyn::Symbol;
using fragdyn::Word;
namespace bs = fragdyn::bs;

// BS(1,2) as 2x2 upper-triangular rational matrices with a = [[1,1],[0,1]] and
// b = [[1/2,0],[0,1]], so that b^-1 a b = a^2. Exact for words whose b-height
// stays within about 60.
using Q = boost::rational<long long>;

struct M2 {
  Q p = 1, q = 0, r = 1;  // [[p, q], [0, r]]
  bool operator<(const M2& o) const { return std::tie(p, q, r) < std::tie(o.p, o.q, o.r); }
  bool operator==(const M2& o) const { return p == o.p && q == o.q && r == o.r; }
};

inline M2 mul(const M2& x, const M2& y) { return {x.p * y.p, x.p * y.q + x.q * y.r, x.r * y.r}; }

inline M2 gen(Symbol s) {
  switch (s) {
    case bs::a: return {1, 1, 1};
    case bs::A: return {1, -1, 1};
    case bs::b: return {Q(1, 2), 0, 1};
    case bs::B: return {2, 0, 1};
    default: return {};
  }
}

inline M2 rational_eval(const Word& w) {
  M2 m;
  for (Symbol s : w) m = mul(m, gen(s));
  return m;
}

// Word length of every element of BS(1,2) within `radius` of the identity, by
// breadth-first search of the Cayley graph on a, a^-1, b, b^-1.
inline std::map<M2, int> cayley_ball(int radius) {
  std::map<M2, int> dist{{M2{}, 0}};
  std::deque<M2> q{M2{}};
  while (!q.empty()) {
    M2 x = q.front();
    q.pop_front();
    int d = dist[x];
    if (d == radius) continue;
    for (Symbol s : {bs::a, bs::A, bs::b, bs::B}) {
      M2 y = mul(x, gen(s));
      if (dist.emplace(y, d + 1).second) q.push_back(y);
    }
  }
  return dist;
}

// Word problem of <a, b, c | ab = ba^2, bc = cb^2> by Britton's lemma: the
// group is an HNN extension of BS(1,2) with stable letter c and c^-1 b c = b^2.
// Pinch c^-1 g c with g = b^k into b^2k and c g c^-1 with g = b^2k into b^k
// until no pinch applies; the word is trivial iff no c remains and the rest is
// the identity of BS(1,2).
inline bool bs2_is_identity(const Word& w) {
  struct Token {
    int stable;  // +1 for c, -1 for c^-1, 0 for a BS(1,2) segment
    M2 g;
  };
  std::vector<Token> t{{0, M2{}}};
  for (Symbol s : w) {
    if (s == bs::c || s == bs::C) {
      t.push_back({s == bs::c ? 1 : -1, M2{}});
      t.push_back({0, M2{}});
    } else {
      t.back().g = mul(t.back().g, gen(s));
    }
  }
  // Exponent k with g = b^k, if g lies in <b>.
  auto b_power = [](const M2& g) -> std::optional<long long> {
    if (g.q != Q(0) || g.r != Q(1)) return std::nullopt;
    long long num = g.p.numerator(), den = g.p.denominator();
    long long k = 0;
    while (num > 1 && num % 2 == 0) num /= 2, --k;
    while (den > 1 && den % 2 == 0) den /= 2, ++k;
    if (num != 1 || den != 1) return std::nullopt;
    return k;
  };
  auto b_to = [](long long k) {
    M2 g;
    g.p = k >= 0 ? Q(1, 1LL << k) : Q(1LL << -k);
    return g;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 1; i + 2 < t.size(); i += 2) {
      // t[i] stable, t[i+1] segment, t[i+2] stable
      auto k = b_power(t[i + 1].g);
      if (!k) continue;
      M2 image;
      if (t[i].stable == -1 && t[i + 2].stable == 1)
        image = b_to(2 * *k);
      else if (t[i].stable == 1 && t[i + 2].stable == -1 && *k % 2 == 0)
        image = b_to(*k / 2);
      else
        continue;
      M2 merged = mul(mul(t[i - 1].g, image), t[i + 3].g);
      t.erase(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + 4));
      t[i - 1].g = merged;
      changed = true;
      break;
    }
  }
  return t.size() == 1 && t[0].g == M2{};
}

// Breadth-first distance between two configurations under single relation
// applications, straight from the presentation's relation list.
inline std::optional<int> naive_distance(const Word& u, const Word& v, const fragdyn::Presentation& p,
                                         std::size_t cap = 2'000'000) {
  std::map<Word, int> dist{{u, 0}};
  std::deque<Word> q{u};
  while (!q.empty() && dist.size() < cap) {
    Word x = q.front();
    q.pop_front();
    if (x == v) return dist[x];
    for (const Word& y : fragdyn::neighbors(x, p))
      if (dist.emplace(y, dist[x] + 1).second) q.push_back(y);
  }
  return std::nullopt;
}

// Every word of length L over an alphabet of size S, in lexicographic order.
inline std::vector<Word> all_words(std::size_t L, std::uint32_t S) {
  std::vector<Word> out;
  Word w(L, 0);
  for (;;) {
    out.push_back(w);
    std::size_t i = L;
    while (i > 0 && w[i - 1] == S - 1) w[--i] = 0;
    if (i == 0) return out;
    ++w[i - 1];
  }
}

}  // namespace support
