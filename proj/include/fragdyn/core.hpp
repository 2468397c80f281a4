#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fragdyn {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;
// A configuration is a fixed-length word; site 1 is cells[0].
using Configuration = Word;

enum class Errc {
  UnknownSymbol,
  EmptyWord,
  InvalidArgument,
  OrientedRelationReversed,
  EvaluatorUnavailable,
  PredicateKillsSelfTransition,
  ChainTooShort,
  TooLong,
  InsufficientLength,
  WindowOutOfRange,
  ZeroInitialContrast,
  SectorMismatch,
  BudgetExceeded,
  NotIrreducible,
  InvalidConfig,
  ResumeMismatch,
  SchemaMismatch,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, long position = -1)
      : std::runtime_error(what), code_(code), position_(position) {}
  Errc code() const { return code_; }
  long position() const { return position_; }

 private:
  Errc code_;
  long position_;
};

struct Alphabet {
  std::vector<char> symbols;
  std::optional<Symbol> identity;
  std::vector<std::optional<Symbol>> inverse;

  std::size_t size() const { return symbols.size(); }
  char name(Symbol s) const { return symbols.at(s); }

  std::optional<Symbol> find(char c) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
      if (symbols[i] == c) return static_cast<Symbol>(i);
    return std::nullopt;
  }

  bool is_identity(Symbol s) const { return identity && *identity == s; }

  void validate() const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
      for (std::size_t j = i + 1; j < symbols.size(); ++j)
        if (symbols[i] == symbols[j])
          throw Error(Errc::InvalidArgument, "duplicate symbol name");
    if (!inverse.empty() && inverse.size() != symbols.size())
      throw Error(Errc::InvalidArgument, "inverse map size mismatch");
    for (std::size_t i = 0; i < inverse.size(); ++i) {
      if (!inverse[i]) continue;
      Symbol j = *inverse[i];
      if (j >= symbols.size() || !inverse[j] || *inverse[j] != i)
        throw Error(Errc::InvalidArgument, "inverse map is not an involution");
    }
    if (identity) {
      if (*identity >= symbols.size())
        throw Error(Errc::InvalidArgument, "identity out of range");
      if (!inverse.empty() && inverse[*identity] && *inverse[*identity] != *identity)
        throw Error(Errc::InvalidArgument, "identity inverse must be itself");
    }
  }
};

struct Relation {
  Word lhs;
  Word rhs;
  bool oriented = false;
  // Core relations are the 2-cells counted by the area metric; trivial ones
  // (identity shuffles, free reduction) cost nothing.
  bool core = true;
};

struct Presentation {
  std::string name;
  Alphabet alphabet;
  std::vector<Relation> relations;
  int locality = 3;
};

enum class Direction { Forward, Backward };

inline Word parse_word(std::string_view text, const Alphabet& alphabet) {
  Word w;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',') continue;
    auto s = alphabet.find(c);
    if (!s)
      throw Error(Errc::UnknownSymbol,
                  "unknown symbol '" + std::string(1, c) + "' at position " + std::to_string(i),
                  static_cast<long>(i));
    w.push_back(*s);
  }
  if (w.empty()) throw Error(Errc::EmptyWord, "empty word");
  return w;
}

inline std::string format_word(const Word& w, const Alphabet& alphabet, std::string_view sep = "") {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i && !sep.empty()) out += sep;
    out += alphabet.name(w[i]);
  }
  return out;
}

inline Word invert_word(const Word& w, const Alphabet& alphabet) {
  Word out(w.rbegin(), w.rend());
  for (auto& s : out) {
    if (alphabet.is_identity(s)) continue;
    if (alphabet.inverse.empty() || !alphabet.inverse[s])
      throw Error(Errc::InvalidArgument, "symbol has no inverse");
    s = *alphabet.inverse[s];
  }
  return out;
}

inline std::optional<Configuration> apply_relation_at(const Configuration& config,
                                                      const Presentation& pres,
                                                      std::size_t relation_index,
                                                      std::size_t position, Direction dir) {
  const Relation& r = pres.relations.at(relation_index);
  if (dir == Direction::Backward && r.oriented)
    throw Error(Errc::OrientedRelationReversed, "oriented relation applied backward");
  const Word& from = dir == Direction::Forward ? r.lhs : r.rhs;
  const Word& to = dir == Direction::Forward ? r.rhs : r.lhs;
  if (position + from.size() > config.size())
    throw Error(Errc::InvalidArgument, "relation does not fit at position");
  if (!std::equal(from.begin(), from.end(), config.begin() + static_cast<long>(position)))
    return std::nullopt;
  Configuration out = config;
  std::copy(to.begin(), to.end(), out.begin() + static_cast<long>(position));
  return out;
}

// Every distinct configuration one relation application away, sorted.
inline std::vector<Configuration> neighbors(const Configuration& config, const Presentation& pres) {
  std::vector<Configuration> out;
  for (std::size_t r = 0; r < pres.relations.size(); ++r) {
    const Relation& rel = pres.relations[r];
    if (rel.lhs.size() > config.size()) continue;
    for (std::size_t p = 0; p + rel.lhs.size() <= config.size(); ++p) {
      if (auto y = apply_relation_at(config, pres, r, p, Direction::Forward)) out.push_back(*y);
      if (!rel.oriented)
        if (auto y = apply_relation_at(config, pres, r, p, Direction::Backward)) out.push_back(*y);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), config), out.end());
  return out;
}

// All distinct ways of inserting identity symbols into `shorter` to reach `length`.
inline std::vector<Word> identity_paddings(const Word& shorter, std::size_t length, Symbol identity) {
  std::vector<Word> out;
  if (shorter.size() > length) return out;
  std::size_t k = length - shorter.size();
  std::vector<bool> mask(length, false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
  std::sort(mask.begin(), mask.end());
  do {
    Word w;
    std::size_t j = 0;
    for (std::size_t i = 0; i < length; ++i) w.push_back(mask[i] ? identity : shorter[j++]);
    out.push_back(w);
  } while (std::next_permutation(mask.begin(), mask.end()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Adds lhs=rhs to `pres`, padding the shorter side with identities in every distinct way.
inline void add_padded_relation(Presentation& pres, const Word& lhs, const Word& rhs, bool core,
                                bool oriented = false) {
  if (lhs.size() == rhs.size()) {
    pres.relations.push_back({lhs, rhs, oriented, core});
    return;
  }
  if (!pres.alphabet.identity)
    throw Error(Errc::InvalidArgument, "unequal relation lengths need an identity symbol");
  bool left_short = lhs.size() < rhs.size();
  const Word& s = left_short ? lhs : rhs;
  const Word& l = left_short ? rhs : lhs;
  for (const Word& p : identity_paddings(s, l.size(), *pres.alphabet.identity)) {
    if (left_short)
      pres.relations.push_back({p, l, oriented, core});
    else
      pres.relations.push_back({l, p, oriented, core});
  }
}

// Free reduction x x^-1 = e e and identity commutation x e = e x for every non-identity symbol.
inline void add_trivial_relations(Presentation& pres) {
  const Alphabet& a = pres.alphabet;
  if (!a.identity) return;
  Symbol e = *a.identity;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Symbol x = static_cast<Symbol>(i);
    if (x == e) continue;
    if (!a.inverse.empty() && a.inverse[x]) pres.relations.push_back({{x, *a.inverse[x]}, {e, e}, false, false});
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    Symbol x = static_cast<Symbol>(i);
    if (x == e) continue;
    pres.relations.push_back({{x, e}, {e, x}, false, false});
  }
}

// Integer power with overflow left to the caller.
constexpr std::uint64_t ipow(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace fragdyn
