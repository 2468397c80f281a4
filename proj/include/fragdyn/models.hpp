#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fragdyn/core.hpp"

namespace fragdyn {

enum class ModelId { BS, ITBS, Star, Chiral, PairFlip };

inline constexpr std::array<ModelId, 5> kAllModels{ModelId::BS, ModelId::ITBS, ModelId::Star, ModelId::Chiral,
                                                  ModelId::PairFlip};

inline std::string model_name(ModelId m) {
  switch (m) {
    case ModelId::BS: return "bs";
    case ModelId::ITBS: return "itbs";
    case ModelId::Star: return "star";
    case ModelId::Chiral: return "chiral";
    case ModelId::PairFlip: return "pairflip";
  }
  return "?";
}

inline ModelId parse_model(std::string_view s) {
  for (ModelId m : kAllModels)
    if (model_name(m) == s) return m;
  throw Error(Errc::InvalidConfig, "unknown model '" + std::string(s) + "'");
}

// Symbol codes. Textual encodings are the alphabet strings below.
namespace bs {
inline constexpr Symbol e = 0, a = 1, A = 2, b = 3, B = 4, c = 5, C = 6;
}
namespace mz {
inline constexpr Symbol zero = 0, open = 1, close = 2, star = 3;
}

namespace detail {

inline Alphabet group_alphabet(std::string_view names) {
  Alphabet al;
  al.symbols.assign(names.begin(), names.end());
  al.identity = 0;
  al.inverse.assign(names.size(), std::nullopt);
  al.inverse[0] = 0;
  for (std::size_t i = 1; i + 1 < names.size(); i += 2) {
    al.inverse[i] = static_cast<Symbol>(i + 1);
    al.inverse[i + 1] = static_cast<Symbol>(i);
  }
  return al;
}

// The ten two-letter = three-letter relations read off the cyclic conjugates of
// the relator x y X X Y (from x y = y x x) and of its inverse.
inline std::vector<std::pair<Word, Word>> bs_family_pairs(const Alphabet& al, Symbol x, Symbol y) {
  std::vector<std::pair<Word, Word>> out;
  Word rel{x, y, *al.inverse[x], *al.inverse[x], *al.inverse[y]};
  Word inv = invert_word(rel, al);
  for (const Word* r : {&rel, &inv}) {
    for (std::size_t s = 0; s < 5; ++s) {
      Word c(5);
      for (std::size_t i = 0; i < 5; ++i) c[i] = (*r)[(s + i) % 5];
      out.emplace_back(Word{c[0], c[1]}, invert_word(Word{c[2], c[3], c[4]}, al));
    }
  }
  return out;
}

inline void add_bs_family(Presentation& p, Symbol x, Symbol y) {
  for (const auto& [lhs, rhs] : bs_family_pairs(p.alphabet, x, y)) add_padded_relation(p, lhs, rhs, true);
}

}  // namespace detail

inline Presentation make_presentation(ModelId m) {
  Presentation p;
  p.name = model_name(m);
  p.locality = 3;
  switch (m) {
    case ModelId::BS:
      p.alphabet = detail::group_alphabet("eaAbB");
      detail::add_bs_family(p, bs::a, bs::b);
      add_trivial_relations(p);
      break;
    case ModelId::ITBS:
      p.alphabet = detail::group_alphabet("eaAbBcC");
      detail::add_bs_family(p, bs::a, bs::b);
      detail::add_bs_family(p, bs::b, bs::c);
      add_trivial_relations(p);
      break;
    case ModelId::Star:
    case ModelId::Chiral: {
      p.alphabet.symbols = {'0', '(', ')', m == ModelId::Star ? '*' : '>'};
      using namespace mz;
      p.relations.push_back({{open, zero}, {zero, open}, false, false});
      p.relations.push_back({{close, zero}, {zero, close}, false, false});
      p.relations.push_back({{zero, star}, {star, zero}, false, false});
      p.relations.push_back({{open, close}, {zero, zero}, false, true});
      if (m == ModelId::Star) p.relations.push_back({{open, star, zero}, {star, star, open}, false, true});
      p.relations.push_back({{zero, star, close}, {close, star, star}, false, true});
      break;
    }
    case ModelId::PairFlip:
      p.alphabet.symbols = {'1', '2', '3'};
      for (Symbol g = 0; g < 3; ++g)
        for (Symbol h = g + 1; h < 3; ++h) p.relations.push_back({{g, g}, {h, h}, false, true});
      break;
  }
  p.alphabet.validate();
  return p;
}

inline const Presentation& presentation(ModelId m) {
  static const std::array<Presentation, 5> all{make_presentation(ModelId::BS), make_presentation(ModelId::ITBS),
                                               make_presentation(ModelId::Star),
                                               make_presentation(ModelId::Chiral),
                                               make_presentation(ModelId::PairFlip)};
  return all[static_cast<std::size_t>(m)];
}

// Symbol used to pad words when extra space is granted (identity or its stand-in).
inline std::optional<Symbol> padding_symbol(ModelId m) {
  switch (m) {
    case ModelId::BS:
    case ModelId::ITBS: return bs::e;
    case ModelId::Star:
    case ModelId::Chiral: return mz::zero;
    case ModelId::PairFlip: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace fragdyn
