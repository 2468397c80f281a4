#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/encoding.hpp"
#include "fragdyn/model_bs.hpp"
#include "fragdyn/model_itbs.hpp"
#include "fragdyn/model_motzkin.hpp"
#include "fragdyn/models.hpp"
#include "fragdyn/rng.hpp"

namespace fragdyn {

// Reduced form in the free product of three order-two groups.
inline Word pairflip_reduce(const Word& w) {
  Word s;
  for (Symbol x : w) {
    if (!s.empty() && s.back() == x)
      s.pop_back();
    else
      s.push_back(x);
  }
  return s;
}

// Conserved label of a whole configuration: the element it represents (BS,
// pair-flip), its image in BS(1,2) (BS(2)), or the Motzkin sector data.
inline std::string sector_label(ModelId m, const Word& w) {
  switch (m) {
    case ModelId::BS: return evaluate(w).label();
    case ModelId::ITBS: return "image:" + evaluate(itbs_to_bs_image(w)).label();
    case ModelId::Star: return motzkin_sector(w, false).label();
    case ModelId::Chiral: return motzkin_sector(w, true).label();
    case ModelId::PairFlip: return "red:" + format_word(pairflip_reduce(w), presentation(m).alphabet);
  }
  return {};
}

// Windows are coded big-endian (c0 S^2 + c1 S + c2) so numeric order is
// lexicographic order of the words.
inline std::uint32_t window_code(const Symbol* c, std::uint32_t S) { return (c[0] * S + c[1]) * S + c[2]; }
inline Word window_word(std::uint32_t x, std::uint32_t S) {
  return {static_cast<Symbol>(x / (S * S)), static_cast<Symbol>(x / S % S), static_cast<Symbol>(x % S)};
}

struct WindowClassTable {
  std::string model;
  std::uint32_t S = 0;
  std::size_t locality = 3;
  std::size_t window_count = 0;
  std::vector<std::uint32_t> class_of;
  std::vector<std::vector<std::uint32_t>> members;  // ordered by smallest member

  const std::vector<std::uint32_t>& class_members(std::uint32_t window) const { return members[class_of[window]]; }
};

namespace gtdetail {

inline WindowClassTable from_representatives(const std::string& name, std::uint32_t S,
                                             const std::vector<std::uint32_t>& rep) {
  WindowClassTable t;
  t.model = name;
  t.S = S;
  t.window_count = rep.size();
  std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
  for (std::uint32_t x = 0; x < rep.size(); ++x) groups[rep[x]].push_back(x);
  std::vector<std::vector<std::uint32_t>> classes;
  for (auto& [r, xs] : groups) classes.push_back(xs);
  std::sort(classes.begin(), classes.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  t.class_of.assign(rep.size(), 0);
  for (std::uint32_t c = 0; c < classes.size(); ++c)
    for (std::uint32_t x : classes[c]) t.class_of[x] = c;
  t.members = std::move(classes);
  return t;
}

inline std::vector<std::uint32_t> reps_from_labels(std::uint32_t S, const std::function<std::string(const Word&)>& label) {
  std::uint32_t N = S * S * S;
  std::map<std::string, std::uint32_t> first;
  std::vector<std::uint32_t> rep(N);
  for (std::uint32_t x = 0; x < N; ++x) {
    auto [it, fresh] = first.emplace(label(window_word(x, S)), x);
    rep[x] = it->second;
  }
  return rep;
}

}  // namespace gtdetail

// Partition of the windows by connectivity under single-relation moves that
// stay inside the window.
inline std::vector<std::uint32_t> move_closure_representatives(const Presentation& pres) {
  auto S = static_cast<std::uint32_t>(pres.alphabet.size());
  std::uint32_t N = S * S * S;
  WindowMoveTable t(pres, 3);
  Codec c(S, 3);
  std::vector<std::uint32_t> parent(N);
  for (std::uint32_t i = 0; i < N; ++i) parent[i] = i;
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::uint32_t le = 0; le < N; ++le)
    for (const auto& m : t.moves[le]) {
      // little-endian codec code -> big-endian window code
      std::uint32_t a = window_code(c.decode(le).data(), S), b = window_code(c.decode(m.target).data(), S);
      a = find(a);
      b = find(b);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<std::uint32_t> rep(N);
  for (std::uint32_t x = 0; x < N; ++x) rep[x] = find(x);
  return rep;
}

inline WindowClassTable build_table_uncached(ModelId m, const ItbsClosureOptions& itbs = {}) {
  const Presentation& pres = presentation(m);
  auto S = static_cast<std::uint32_t>(pres.alphabet.size());
  switch (m) {
    case ModelId::BS:
      return gtdetail::from_representatives(
          pres.name, S, gtdetail::reps_from_labels(S, [](const Word& w) { return evaluate(w).label(); }));
    case ModelId::PairFlip:
      return gtdetail::from_representatives(
          pres.name, S, gtdetail::reps_from_labels(S, [](const Word& w) { return sector_label(ModelId::PairFlip, w); }));
    case ModelId::ITBS: return gtdetail::from_representatives(pres.name, S, itbs_window_partition(itbs));
    case ModelId::Star:
    case ModelId::Chiral:
      // Every relation preserves length, so semigroup equality of two windows
      // is connectivity of the window itself.
      return gtdetail::from_representatives(pres.name, S, move_closure_representatives(pres));
  }
  throw Error(Errc::EvaluatorUnavailable, "no evaluator");
}

// Custom presentations: decidable here only when every relation preserves
// length and there is no identity, in which case equality is window closure.
inline WindowClassTable build_table(const Presentation& pres) {
  bool length_preserving = std::all_of(pres.relations.begin(), pres.relations.end(),
                                       [](const Relation& r) { return r.lhs.size() == r.rhs.size(); });
  if (pres.alphabet.identity || !length_preserving || pres.locality != 3)
    throw Error(Errc::EvaluatorUnavailable, "presentation '" + pres.name + "' has no decision procedure");
  return gtdetail::from_representatives(pres.name, static_cast<std::uint32_t>(pres.alphabet.size()),
                                        move_closure_representatives(pres));
}

inline const WindowClassTable& build_table(ModelId m) {
  static std::mutex mu;
  static std::map<ModelId, WindowClassTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build_table_uncached(m)).first;
  return it->second;
}

inline std::uint32_t sample_transition(const WindowClassTable& t, std::uint32_t window, Philox& rng) {
  const auto& mem = t.class_members(window);
  if (mem.size() == 1) return mem[0];
  return mem[rng.bounded(static_cast<std::uint32_t>(mem.size()))];
}

// Flat per-window transition lists consumed by the engine: a window moves to a
// uniformly chosen entry of its list.
struct WindowSampler {
  std::uint32_t S = 0;
  std::vector<std::uint32_t> begin;
  std::vector<std::uint32_t> count;
  std::vector<std::uint32_t> targets;
  std::vector<std::array<Symbol, 3>> digits;

  std::uint32_t sample(std::uint32_t window, Philox& rng) const {
    std::uint32_t n = count[window];
    if (n == 1) return targets[begin[window]];
    return targets[begin[window] + rng.bounded(n)];
  }
  std::vector<std::uint32_t> allowed(std::uint32_t window) const {
    return {targets.begin() + begin[window], targets.begin() + begin[window] + count[window]};
  }
};

using TransitionPredicate = std::function<bool(const Word& from, const Word& to)>;

// Uniform law over the members of each window's class allowed by `keep`.
inline WindowSampler filter_table(const WindowClassTable& t, const TransitionPredicate& keep = {}) {
  WindowSampler s;
  s.S = t.S;
  std::uint32_t N = static_cast<std::uint32_t>(t.window_count);
  s.begin.resize(N);
  s.count.resize(N);
  s.digits.resize(N);
  for (std::uint32_t x = 0; x < N; ++x) {
    Word wx = window_word(x, t.S);
    s.digits[x] = {wx[0], wx[1], wx[2]};
    s.begin[x] = static_cast<std::uint32_t>(s.targets.size());
    bool self = false;
    for (std::uint32_t y : t.class_members(x)) {
      if (keep && !keep(wx, window_word(y, t.S))) continue;
      self = self || y == x;
      s.targets.push_back(y);
    }
    if (!self)
      throw Error(Errc::PredicateKillsSelfTransition,
                  "predicate removes the self-transition of window " + std::to_string(x));
    s.count[x] = static_cast<std::uint32_t>(s.targets.size()) - s.begin[x];
  }
  return s;
}

inline WindowSampler make_sampler(ModelId m) { return filter_table(build_table(m)); }

// Irreversible BS(2) gate: c c^-1 pairs may annihilate but never appear.
inline WindowSampler make_irreversible_itbs_sampler() {
  return filter_table(build_table(ModelId::ITBS),
                      [](const Word& from, const Word& to) { return n_abs_c(to) <= n_abs_c(from); });
}

inline std::string table_csv(const WindowClassTable& t, const Alphabet& al) {
  std::ostringstream os;
  os << "window,class_id\n";
  for (std::uint32_t x = 0; x < t.window_count; ++x)
    os << format_word(window_word(x, t.S), al) << ',' << t.class_of[x] << '\n';
  return os.str();
}

}  // namespace fragdyn
