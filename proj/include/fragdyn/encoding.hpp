#pragma once

#include <cstdint>
#include <vector>

#include "fragdyn/core.hpp"

namespace fragdyn {

// Base-|S| integer encoding of fixed-length words (site i has weight S^i), used
// by the exhaustive searches. Requires S^L < 2^64.
struct Codec {
  std::uint32_t S = 0;
  std::size_t L = 0;
  std::vector<std::uint64_t> pw;

  Codec() = default;
  Codec(std::uint32_t S_, std::size_t L_) : S(S_), L(L_), pw(L_ + 1) {
    pw[0] = 1;
    for (std::size_t i = 1; i <= L; ++i) {
      if (pw[i - 1] > ~std::uint64_t{0} / S) throw Error(Errc::BudgetExceeded, "word space too large to encode");
      pw[i] = pw[i - 1] * S;
    }
  }
  std::uint64_t count() const { return pw[L]; }

  std::uint64_t encode(const Word& w) const {
    std::uint64_t x = 0;
    for (std::size_t i = L; i-- > 0;) x = x * S + w[i];
    return x;
  }
  Word decode(std::uint64_t x) const {
    Word w(L);
    for (std::size_t i = 0; i < L; ++i) {
      w[i] = static_cast<Symbol>(x % S);
      x /= S;
    }
    return w;
  }
  Symbol at(std::uint64_t x, std::size_t i) const { return static_cast<Symbol>((x / pw[i]) % S); }
};

// Every single-relation move inside a window of `width` sites, indexed by the
// window's own base-S code. Two-letter relations are placed at each offset.
struct WindowMoveTable {
  std::uint32_t S = 0;
  std::size_t width = 0;
  struct Move {
    std::uint32_t target;
    bool core;
  };
  std::vector<std::vector<Move>> moves;

  WindowMoveTable() = default;
  WindowMoveTable(const Presentation& pres, std::size_t width_) : S(static_cast<std::uint32_t>(pres.alphabet.size())), width(width_) {
    Codec c(S, width);
    moves.resize(c.count());
    for (std::uint64_t x = 0; x < c.count(); ++x) {
      Word w = c.decode(x);
      for (std::size_t r = 0; r < pres.relations.size(); ++r) {
        const Relation& rel = pres.relations[r];
        if (rel.lhs.size() > width) continue;
        for (std::size_t p = 0; p + rel.lhs.size() <= width; ++p) {
          for (Direction d : {Direction::Forward, Direction::Backward}) {
            if (d == Direction::Backward && rel.oriented) continue;
            if (auto y = apply_relation_at(w, pres, r, p, d)) {
              if (*y == w) continue;
              auto t = static_cast<std::uint32_t>(c.encode(*y));
              bool dup = false;
              for (auto& m : moves[x])
                if (m.target == t) {
                  m.core = m.core && rel.core;  // a free route exists if any relation is trivial
                  dup = true;
                }
              if (!dup) moves[x].push_back({t, rel.core});
            }
          }
        }
      }
    }
  }
};

// Calls f(neighbor_code, is_core) for every move of the encoded word x of
// length codec.L. Moves spanning two windows may be reported twice.
template <class F>
inline void for_each_move(std::uint64_t x, const Codec& codec, const WindowMoveTable& t3,
                          const WindowMoveTable& t2, F&& f) {
  const WindowMoveTable& t = codec.L >= 3 ? t3 : t2;
  if (codec.L < t.width) return;
  const std::uint64_t span = codec.pw[t.width];
  for (std::size_t p = 0; p + t.width <= codec.L; ++p) {
    std::uint64_t hi = x / codec.pw[p];
    auto win = static_cast<std::uint32_t>(hi % span);
    for (const auto& m : t.moves[win]) {
      std::uint64_t y = x + (static_cast<std::uint64_t>(m.target) - win) * codec.pw[p];
      f(y, m.core);
    }
  }
}

}  // namespace fragdyn
