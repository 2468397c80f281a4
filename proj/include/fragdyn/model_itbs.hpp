#pragma once

#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/model_bs.hpp"
#include "fragdyn/models.hpp"
#include "fragdyn/rng.hpp"

namespace fragdyn {

inline long n_abs_c(const Word& w) {
  long n = 0;
  for (Symbol s : w) n += (s == bs::c) + (s == bs::C);
  return n;
}

inline long n_c(const Word& w) {
  long n = 0;
  for (Symbol s : w) n += (s == bs::c) - (s == bs::C);
  return n;
}

// Image under the homomorphism BS(2) -> BS(1,2) sending a -> e, b -> a, c -> b;
// it respects both defining relations, so it is a conserved sector label.
inline Word itbs_to_bs_image(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Symbol s : w) {
    switch (s) {
      case bs::b: out.push_back(bs::a); break;
      case bs::B: out.push_back(bs::A); break;
      case bs::c: out.push_back(bs::b); break;
      case bs::C: out.push_back(bs::B); break;
      default: out.push_back(bs::e); break;
    }
  }
  return out;
}

inline Word make_v(int n) {
  using namespace bs;
  Word v;
  v.insert(v.end(), static_cast<std::size_t>(n), C);
  v.push_back(B);
  v.insert(v.end(), static_cast<std::size_t>(n), c);
  v.push_back(a);
  v.insert(v.end(), static_cast<std::size_t>(n), C);
  v.push_back(b);
  v.insert(v.end(), static_cast<std::size_t>(n), c);
  return v;
}

// a^-1 v(n)^-1 a v(n), of length 8n + 8.
inline Word w_huge_core(int n) {
  const Alphabet& al = presentation(ModelId::ITBS).alphabet;
  Word v = make_v(n);
  Word w{bs::A};
  Word vi = invert_word(v, al);
  w.insert(w.end(), vi.begin(), vi.end());
  w.push_back(bs::a);
  w.insert(w.end(), v.begin(), v.end());
  return w;
}

inline Word make_w_huge(int n, std::size_t L, Philox& rng) {
  Word core = w_huge_core(n);
  if (L < core.size()) throw Error(Errc::TooLong, "w_huge does not fit");
  return pad_randomly(core, L, bs::e, rng);
}

struct ItbsClosureOptions {
  std::size_t cap = 24;          // scratch chain length
  std::size_t state_budget = 20000;
};

namespace itbsdetail {

// Moves of a chain of length `cap` with identities removed: identity cells can
// be shuffled anywhere, so a state is the word of non-identity letters and a
// relation that lengthens the word needs spare identity cells.
struct StrippedMoves {
  std::vector<std::pair<std::string, std::string>> pairs;  // short = long
  std::string letters = "\1\2\3\4\5\6";
  StrippedMoves() {
    const Alphabet& al = presentation(ModelId::ITBS).alphabet;
    for (auto [x, y] : {std::pair<Symbol, Symbol>{bs::a, bs::b}, {bs::b, bs::c}})
      for (const auto& [s, l] : detail::bs_family_pairs(al, x, y))
        pairs.emplace_back(std::string(s.begin(), s.end()), std::string(l.begin(), l.end()));
  }
  static char inv(char x) { return static_cast<char>(x % 2 == 1 ? x + 1 : x - 1); }

  template <class F>
  void for_each(const std::string& w, std::size_t cap, F&& f) const {
    for (const auto& [s, l] : pairs) {
      for (std::size_t p = 0; p + 2 <= w.size(); ++p)
        if (w.size() + 1 <= cap && w.compare(p, 2, s) == 0) f(w.substr(0, p) + l + w.substr(p + 2));
      for (std::size_t p = 0; p + 3 <= w.size(); ++p)
        if (w.compare(p, 3, l) == 0) f(w.substr(0, p) + s + w.substr(p + 3));
    }
    for (std::size_t p = 0; p + 2 <= w.size(); ++p)
      if (w[p + 1] == inv(w[p])) f(w.substr(0, p) + w.substr(p + 2));
    if (w.size() + 2 <= cap)
      for (std::size_t p = 0; p <= w.size(); ++p)
        for (char x : letters) f(w.substr(0, p) + x + inv(x) + w.substr(p));
  }
};

inline const StrippedMoves& stripped_moves() {
  static const StrippedMoves m;
  return m;
}

inline std::string strip(const Word& w) {
  std::string s;
  for (Symbol x : w)
    if (x != bs::e) s.push_back(static_cast<char>(x));
  return s;
}

// Breadth-first closure from `start`, stopping after `budget` states.
inline std::unordered_set<std::string> closure(const std::string& start, const ItbsClosureOptions& opt) {
  std::unordered_set<std::string> seen{start};
  std::deque<std::string> q{start};
  const auto& mv = stripped_moves();
  while (!q.empty() && seen.size() < opt.state_budget) {
    std::string w = std::move(q.front());
    q.pop_front();
    mv.for_each(w, opt.cap, [&](std::string y) {
      if (seen.size() < opt.state_budget && seen.insert(y).second) q.push_back(std::move(y));
    });
  }
  return seen;
}

}  // namespace itbsdetail

// True iff u and v (words of equal length over the BS(2) alphabet) are connected
// by padded-relation moves inside a `cap`-cell chain, as found by a bounded
// breadth-first search. Conserved labels are compared first.
inline bool itbs_window_equal(const Word& u, const Word& v, const ItbsClosureOptions& opt = {}) {
  if (u.size() != v.size()) return false;
  if (!(evaluate(itbs_to_bs_image(u)) == evaluate(itbs_to_bs_image(v)))) return false;
  std::string su = itbsdetail::strip(u), sv = itbsdetail::strip(v);
  if (su == sv) return true;
  return itbsdetail::closure(su, opt).count(sv) > 0;
}

// Class representative for every length-3 window under bounded-closure
// equality: windows are joined whenever one closure reaches the other.
inline std::vector<std::uint32_t> itbs_window_partition(const ItbsClosureOptions& opt = {}) {
  const std::uint32_t S = 7, N = S * S * S;
  std::vector<std::uint32_t> parent(N);
  for (std::uint32_t i = 0; i < N; ++i) parent[i] = i;
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](std::uint32_t x, std::uint32_t y) {
    x = find(x);
    y = find(y);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  };
  auto decode = [&](std::uint32_t x) { return Word{static_cast<Symbol>(x / 49), static_cast<Symbol>(x / 7 % 7), static_cast<Symbol>(x % 7)}; };
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_strip;
  for (std::uint32_t x = 0; x < N; ++x) by_strip[itbsdetail::strip(decode(x))].push_back(x);
  for (auto& [s, xs] : by_strip)
    for (std::uint32_t x : xs) unite(xs[0], x);
  for (auto& [s, xs] : by_strip) {
    for (const std::string& y : itbsdetail::closure(s, opt)) {
      if (y.size() > 3) continue;
      auto it = by_strip.find(y);
      if (it != by_strip.end()) unite(xs[0], it->second[0]);
    }
  }
  std::vector<std::uint32_t> rep(N);
  for (std::uint32_t x = 0; x < N; ++x) rep[x] = find(x);
  return rep;
}

}  // namespace fragdyn
