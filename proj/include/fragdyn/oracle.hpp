#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/encoding.hpp"
#include "fragdyn/gate_table.hpp"
#include "fragdyn/models.hpp"

namespace fragdyn {

// Exhaustive ground truth for short chains. All searches act on fixed-length
// configurations through single relation applications, the moves a gate can make.

struct OracleBudget {
  std::uint64_t max_states = 20'000'000;  // words held in one search
};

namespace odetail {

struct MoveSpace {
  Codec codec;
  WindowMoveTable t3, t2;
  MoveSpace(ModelId m, std::size_t L, const OracleBudget& b)
      : codec(static_cast<std::uint32_t>(presentation(m).alphabet.size()), L),
        t3(presentation(m), 3),
        t2(presentation(m), 2) {
    if (codec.count() > b.max_states) throw Error(Errc::BudgetExceeded, "state space exceeds the oracle budget");
  }
  template <class F>
  void moves(std::uint64_t x, F&& f) const {
    for_each_move(x, codec, t3, t2, f);
  }
};

struct UnionFind {
  std::vector<std::uint64_t> parent;
  explicit UnionFind(std::uint64_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::uint64_t find(std::uint64_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint64_t a, std::uint64_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

inline Word pad_right(Word w, std::size_t L, ModelId m) {
  if (w.size() == L) return w;
  auto p = padding_symbol(m);
  if (!p) throw Error(Errc::InvalidArgument, "model has no padding symbol");
  w.resize(L, *p);
  return w;
}

}  // namespace odetail

struct SectorPartition {
  ModelId model = ModelId::BS;
  std::size_t L = 0;
  std::map<std::string, std::vector<Word>> by_evaluator;
  std::map<std::uint64_t, std::vector<Word>> by_moves;  // keyed by the smallest member's code

  std::size_t largest_evaluator_sector() const {
    std::size_t n = 0;
    for (const auto& [k, v] : by_evaluator) n = std::max(n, v.size());
    return n;
  }
};

inline SectorPartition enumerate_sectors(ModelId m, std::size_t L, const OracleBudget& budget = {}) {
  if (L == 0) throw Error(Errc::InvalidArgument, "length must be positive");
  odetail::MoveSpace sp(m, L, budget);
  SectorPartition out;
  out.model = m;
  out.L = L;
  odetail::UnionFind uf(sp.codec.count());
  for (std::uint64_t x = 0; x < sp.codec.count(); ++x) {
    Word w = sp.codec.decode(x);
    out.by_evaluator[sector_label(m, w)].push_back(w);
    sp.moves(x, [&](std::uint64_t y, bool) { uf.unite(x, y); });
  }
  for (std::uint64_t x = 0; x < sp.codec.count(); ++x) out.by_moves[uf.find(x)].push_back(sp.codec.decode(x));
  return out;
}

// Fewest moves from u to v at fixed length; nullopt when unreachable.
inline std::optional<std::uint64_t> bfs_distance(const Word& u, const Word& v, ModelId m,
                                                 const OracleBudget& budget = {}) {
  if (u.size() != v.size()) throw Error(Errc::InvalidArgument, "words differ in length");
  if (sector_label(m, u) != sector_label(m, v)) return std::nullopt;
  if (u == v) return 0;
  Codec codec(static_cast<std::uint32_t>(presentation(m).alphabet.size()), u.size());
  WindowMoveTable t3(presentation(m), 3), t2(presentation(m), 2);
  std::uint64_t s = codec.encode(u), goal = codec.encode(v);
  std::unordered_map<std::uint64_t, std::uint64_t> dist{{s, 0}};
  std::deque<std::uint64_t> q{s};
  while (!q.empty()) {
    std::uint64_t x = q.front();
    q.pop_front();
    std::uint64_t d = dist[x];
    bool found = false;
    for_each_move(x, codec, t3, t2, [&](std::uint64_t y, bool) {
      if (found || dist.count(y)) return;
      if (dist.size() >= budget.max_states) throw Error(Errc::BudgetExceeded, "bfs_distance budget exhausted");
      dist.emplace(y, d + 1);
      if (y == goal) found = true;
      q.push_back(y);
    });
    if (found) return d + 1;
  }
  return std::nullopt;
}

// Move-connected component of w (codes at length |w|).
inline std::vector<std::uint64_t> move_component(const Word& w, ModelId m, const OracleBudget& budget = {}) {
  Codec codec(static_cast<std::uint32_t>(presentation(m).alphabet.size()), w.size());
  WindowMoveTable t3(presentation(m), 3), t2(presentation(m), 2);
  std::uint64_t s = codec.encode(w);
  std::unordered_set<std::uint64_t> seen{s};
  std::vector<std::uint64_t> out{s};
  for (std::size_t i = 0; i < out.size(); ++i)
    for_each_move(out[i], codec, t3, t2, [&](std::uint64_t y, bool) {
      if (seen.insert(y).second) {
        if (seen.size() > budget.max_states) throw Error(Errc::BudgetExceeded, "component exceeds budget");
        out.push_back(y);
      }
    });
  std::sort(out.begin(), out.end());
  return out;
}

// Smallest L' >= max(|u|, |v|) at which the right-padded words are
// move-connected; nullopt means NotWithin(L_max).
inline std::optional<std::size_t> min_connecting_length(const Word& u, const Word& v, ModelId m, std::size_t L_max,
                                                        const OracleBudget& budget = {}) {
  std::size_t L0 = std::max(u.size(), v.size());
  if (u.size() != v.size() && !padding_symbol(m))
    throw Error(Errc::InvalidArgument, "words differ in length and the model has no padding");
  if (sector_label(m, odetail::pad_right(u, L0, m)) != sector_label(m, odetail::pad_right(v, L0, m)))
    throw Error(Errc::SectorMismatch, "words lie in different sectors");
  for (std::size_t L = L0; L <= L_max; ++L) {
    if (L > L0 && !padding_symbol(m)) break;
    if (bfs_distance(odetail::pad_right(u, L, m), odetail::pad_right(v, L, m), m, budget)) return L;
  }
  return std::nullopt;
}

struct FragileSector {
  std::string label;
  std::vector<std::size_t> component_sizes;  // descending
  // For each component beyond the largest: one member, a member of the largest
  // component, and the minimal connecting length (nullopt: not within L_max).
  struct Pair {
    Word a, b;
    std::optional<std::size_t> min_length;
  };
  std::vector<Pair> pairs;
};

// Evaluator sectors split into several move components at length L.
inline std::vector<FragileSector> detect_fragile(ModelId m, std::size_t L, std::size_t L_max,
                                                 const OracleBudget& budget = {}) {
  SectorPartition sp = enumerate_sectors(m, L, budget);
  Codec codec(static_cast<std::uint32_t>(presentation(m).alphabet.size()), L);
  std::map<std::string, std::vector<const std::vector<Word>*>> comps;
  for (const auto& [id, ws] : sp.by_moves) comps[sector_label(m, ws.front())].push_back(&ws);
  std::vector<FragileSector> out;
  for (auto& [label, cs] : comps) {
    if (cs.size() < 2) continue;
    std::stable_sort(cs.begin(), cs.end(), [](auto* x, auto* y) { return x->size() > y->size(); });
    FragileSector f;
    f.label = label;
    for (auto* c : cs) f.component_sizes.push_back(c->size());
    for (std::size_t k = 1; k < cs.size(); ++k)
      f.pairs.push_back({cs[k]->front(), cs[0]->front(), min_connecting_length(cs[k]->front(), cs[0]->front(), m, L_max, budget)});
    out.push_back(std::move(f));
  }
  return out;
}

// ---- area ---------------------------------------------------------------

struct AreaResult {
  long area = -1;            // fewest core-relation applications found
  std::size_t length = 0;    // chain length at which it was found
  std::size_t explored = 0;  // largest chain length fully searched
  bool complete = true;      // false: the budget stopped the sweep before `scratch`
};

namespace odetail {

// Group models with identity cells: an identity can sit anywhere for free, so a
// chain of length cap is a word without identities of length <= cap. Core moves
// swap the two sides of a relation; free reduction and insertion of x x^-1 cost 0.
struct StrippedGroupMoves {
  std::vector<std::pair<std::string, std::string>> core;
  std::vector<char> letters;
  std::vector<char> inv;
  explicit StrippedGroupMoves(const Presentation& p) {
    const Alphabet& al = p.alphabet;
    Symbol e = *al.identity;
    std::set<std::pair<std::string, std::string>> seen;
    for (const Relation& r : p.relations) {
      if (!r.core) continue;
      std::string l, s;
      for (Symbol x : r.lhs)
        if (x != e) l.push_back(static_cast<char>(x));
      for (Symbol x : r.rhs)
        if (x != e) s.push_back(static_cast<char>(x));
      if (l != s) seen.emplace(l, s), seen.emplace(s, l);
    }
    core.assign(seen.begin(), seen.end());
    inv.assign(al.size(), 0);
    for (std::size_t i = 0; i < al.size(); ++i) {
      if (al.is_identity(static_cast<Symbol>(i))) continue;
      letters.push_back(static_cast<char>(i));
      inv[i] = static_cast<char>(*al.inverse[i]);
    }
  }
  template <class F>
  void each(const std::string& w, std::size_t cap, F&& f) const {
    for (const auto& [from, to] : core)
      if (w.size() - from.size() + to.size() <= cap)
        for (std::size_t p = w.find(from); p != std::string::npos; p = w.find(from, p + 1))
          f(w.substr(0, p) + to + w.substr(p + from.size()), 1);
    for (std::size_t p = 0; p + 2 <= w.size(); ++p)
      if (w[p + 1] == inv[static_cast<unsigned char>(w[p])]) f(w.substr(0, p) + w.substr(p + 2), 0);
    if (w.size() + 2 <= cap)
      for (std::size_t p = 0; p <= w.size(); ++p)
        for (char x : letters) f(w.substr(0, p) + x + inv[static_cast<unsigned char>(x)] + w.substr(p), 0);
  }
};

// 0-1 breadth-first search from start to goal; -1 when unreachable, throws when
// the budget runs out.
template <class State, class Moves>
long zero_one_bfs(const State& start, const State& goal, Moves&& moves, std::uint64_t budget) {
  std::unordered_map<State, long> dist{{start, 0}};
  std::deque<State> q{start};
  std::unordered_set<State> done;
  while (!q.empty()) {
    State x = q.front();
    q.pop_front();
    if (!done.insert(x).second) continue;
    long d = dist[x];
    if (x == goal) return d;
    moves(x, [&](State y, int cost) {
      long nd = d + cost;
      auto it = dist.find(y);
      if (it != dist.end() && it->second <= nd) return;
      if (it == dist.end() && dist.size() >= budget) throw Error(Errc::BudgetExceeded, "area search budget exhausted");
      dist[y] = nd;
      if (cost == 0)
        q.push_front(std::move(y));
      else
        q.push_back(std::move(y));
    });
  }
  return -1;
}

}  // namespace odetail

// Fewest core-relation applications taking w to the all-identity (all-padding)
// word, with trivial moves free, sweeping chain lengths |w|..scratch (default
// 3|w|). Extra length never hurts, so the last completed length gives the
// answer; a budget cut is reported through `complete`.
inline AreaResult min_area(const Word& w, ModelId m, std::size_t scratch = 0, const OracleBudget& budget = {}) {
  if (scratch == 0) scratch = 3 * w.size();
  scratch = std::max(scratch, w.size());
  const Presentation& pres = presentation(m);
  auto pad = padding_symbol(m);
  if (!pad) throw Error(Errc::InvalidArgument, "model has no identity or padding word");
  if (sector_label(m, w) != sector_label(m, Word(w.size(), *pad)))
    throw Error(Errc::SectorMismatch, "word is not in the sector of the padding word");
  AreaResult res;
  for (std::size_t L = w.size(); L <= scratch; ++L) {
    long a;
    try {
      if (pres.alphabet.identity) {
        static std::map<ModelId, odetail::StrippedGroupMoves> cache;
        auto it = cache.find(m);
        if (it == cache.end()) it = cache.emplace(m, odetail::StrippedGroupMoves(pres)).first;
        const auto& mv = it->second;
        std::string s;
        for (Symbol x : w)
          if (x != *pad) s.push_back(static_cast<char>(x));
        a = odetail::zero_one_bfs(s, std::string(), [&](const std::string& x, auto&& f) { mv.each(x, L, f); },
                                  budget.max_states);
      } else {
        Codec codec(static_cast<std::uint32_t>(pres.alphabet.size()), L);
        WindowMoveTable t3(pres, 3), t2(pres, 2);
        a = odetail::zero_one_bfs(
            codec.encode(odetail::pad_right(w, L, m)), codec.encode(Word(L, *pad)),
            [&](std::uint64_t x, auto&& f) { for_each_move(x, codec, t3, t2, [&](std::uint64_t y, bool core) { f(y, core ? 1 : 0); }); },
            budget.max_states);
      }
    } catch (const Error& e) {
      if (e.code() != Errc::BudgetExceeded) throw;
      if (res.area < 0) throw;
      res.complete = false;
      break;
    }
    res.explored = L;
    if (a >= 0 && (res.area < 0 || a < res.area)) {
      res.area = a;
      res.length = L;
    }
    if (res.area == 0) break;
  }
  if (res.area < 0) throw Error(Errc::BudgetExceeded, "no derivation within the scratch length");
  return res;
}

// ---- exact Markov analysis ------------------------------------------------

struct MarkovAnalysis {
  std::string model;
  std::size_t L = 0;
  std::string sector;
  std::size_t size = 0;
  double lambda2 = 0;            // second eigenvalue of the symmetrized step
  double t_rel = 0;              // 1 / (1 - lambda2), in symmetrized steps
  std::uint64_t t_mix = 0;       // three-layer steps until max_w |M^t w - pi|_1 <= 1/2
  std::uint64_t t_mix_sym = 0;   // the same for the symmetrized step
  double stationarity_error = 0; // max |pi M - pi| for uniform pi
};

inline nlohmann::json to_json(const MarkovAnalysis& a) {
  return {{"model", a.model}, {"L", a.L}, {"sector", a.sector}, {"size", a.size}, {"lambda2", a.lambda2},
          {"t_rel", a.t_rel}, {"t_mix", a.t_mix}, {"t_mix_sym", a.t_mix_sym}, {"stationarity_error", a.stationarity_error}};
}

// Words of length L in the evaluator sector of `representative`.
inline std::vector<Word> sector_words(ModelId m, const Word& representative, const OracleBudget& budget = {}) {
  Codec codec(static_cast<std::uint32_t>(presentation(m).alphabet.size()), representative.size());
  if (codec.count() > budget.max_states) throw Error(Errc::BudgetExceeded, "state space exceeds the oracle budget");
  std::string label = sector_label(m, representative);
  std::vector<Word> out;
  for (std::uint64_t x = 0; x < codec.count(); ++x) {
    Word w = codec.decode(x);
    if (sector_label(m, w) == label) out.push_back(std::move(w));
  }
  return out;
}

// Layer matrix P_o over the sector: every gate at windows o, o+3, ... acts
// independently with its uniform class law.
inline Eigen::MatrixXd layer_matrix(const std::vector<Word>& states, const WindowSampler& smp, std::size_t offset) {
  const std::size_t n = states.size();
  std::map<Word, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[states[i]] = i;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Word& w = states[i];
    std::vector<std::size_t> pos;
    for (std::size_t p = offset; p + 3 <= w.size(); p += 3) pos.push_back(p);
    Word cur = w;
    auto rec = [&](auto&& self, std::size_t k, double prob) -> void {
      if (k == pos.size()) {
        auto it = index.find(cur);
        if (it == index.end()) throw Error(Errc::InvalidArgument, "gate leaves the sector");
        P(static_cast<long>(i), static_cast<long>(it->second)) += prob;
        return;
      }
      std::size_t p = pos[k];
      std::uint32_t win = window_code(&w[p], smp.S);
      auto targets = smp.allowed(win);
      for (std::uint32_t t : targets) {
        const auto& d = smp.digits[t];
        cur[p] = d[0], cur[p + 1] = d[1], cur[p + 2] = d[2];
        self(self, k + 1, prob / static_cast<double>(targets.size()));
      }
      cur[p] = w[p], cur[p + 1] = w[p + 1], cur[p + 2] = w[p + 2];
    };
    rec(rec, 0, 1.0);
  }
  return P;
}

// Support components of a stochastic matrix (sizes, descending).
inline std::vector<std::size_t> support_components(const Eigen::MatrixXd& M) {
  const auto n = static_cast<std::uint64_t>(M.rows());
  odetail::UnionFind uf(n);
  for (long i = 0; i < M.rows(); ++i)
    for (long j = 0; j < M.cols(); ++j)
      if (M(i, j) > 0) uf.unite(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
  std::map<std::uint64_t, std::size_t> c;
  for (std::uint64_t i = 0; i < n; ++i) ++c[uf.find(i)];
  std::vector<std::size_t> out;
  for (auto& [k, v] : c) out.push_back(v);
  std::sort(out.rbegin(), out.rend());
  return out;
}

// Exact analysis of the brickwork chain restricted to the evaluator sector of
// `representative`. The step is M = P0 P1 P2; the spectrum is taken from the
// symmetrized step P0 P1 P2 P2 P1 P0 so it is real.
inline MarkovAnalysis sector_markov_analysis(ModelId m, const Word& representative, std::size_t max_states = 3000,
                                             std::uint64_t max_steps = 1'000'000) {
  MarkovAnalysis res;
  res.model = model_name(m);
  res.L = representative.size();
  res.sector = sector_label(m, representative);
  std::vector<Word> states = sector_words(m, representative);
  res.size = states.size();
  if (states.size() > max_states) throw Error(Errc::BudgetExceeded, "sector too large for dense analysis");
  if (states.size() == 1) return res;
  if (representative.size() < 3) throw Error(Errc::ChainTooShort, "brickwork needs at least three sites");
  const WindowSampler& smp = [&]() -> const WindowSampler& {
    static std::map<ModelId, WindowSampler> cache;
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, make_sampler(m)).first;
    return it->second;
  }();
  Eigen::MatrixXd P0 = layer_matrix(states, smp, 0), P1 = layer_matrix(states, smp, 1),
                  P2 = layer_matrix(states, smp, 2);
  Eigen::MatrixXd A = P0 * P1 * P2;
  Eigen::MatrixXd M = A * A.transpose();
  auto comps = support_components(M);
  if (comps.size() > 1) {
    std::string s;
    for (std::size_t c : comps) s += (s.empty() ? "" : ",") + std::to_string(c);
    throw Error(Errc::NotIrreducible, "sector splits into dynamical components of sizes " + s);
  }
  const double n = static_cast<double>(states.size());
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(M.rows(), 1.0 / n);
  res.stationarity_error = (pi * M - pi).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  res.lambda2 = ev(ev.size() - 2);
  res.t_rel = 1.0 / (1.0 - res.lambda2);
  auto mixing = [&](const Eigen::MatrixXd& step) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(step.rows(), step.cols());
    for (std::uint64_t t = 0; t <= max_steps; ++t) {
      if ((D.array() - 1.0 / n).abs().rowwise().sum().maxCoeff() <= 0.5) return t;
      D = D * step;
    }
    throw Error(Errc::BudgetExceeded, "mixing not reached within the step budget");
  };
  res.t_mix = mixing(A);
  res.t_mix_sym = mixing(M);
  return res;
}

// Largest move distance between two words of one move component (its diameter).
inline std::uint64_t move_diameter(const Word& w, ModelId m, const OracleBudget& budget = {}) {
  std::vector<std::uint64_t> comp = move_component(w, m, budget);
  Codec codec(static_cast<std::uint32_t>(presentation(m).alphabet.size()), w.size());
  WindowMoveTable t3(presentation(m), 3), t2(presentation(m), 2);
  std::unordered_map<std::uint64_t, std::uint32_t> idx;
  for (std::uint32_t i = 0; i < comp.size(); ++i) idx[comp[i]] = i;
  std::vector<std::vector<std::uint32_t>> adj(comp.size());
  for (std::uint32_t i = 0; i < comp.size(); ++i)
    for_each_move(comp[i], codec, t3, t2, [&](std::uint64_t y, bool) { adj[i].push_back(idx.at(y)); });
  std::uint64_t diam = 0;
  std::vector<std::uint32_t> dist(comp.size());
  std::vector<std::uint32_t> q(comp.size());
  for (std::uint32_t s = 0; s < comp.size(); ++s) {
    std::fill(dist.begin(), dist.end(), ~0u);
    dist[s] = 0;
    std::size_t h = 0, t = 0;
    q[t++] = s;
    while (h < t) {
      std::uint32_t x = q[h++];
      for (std::uint32_t y : adj[x])
        if (dist[y] == ~0u) dist[y] = dist[x] + 1, q[t++] = y;
    }
    diam = std::max<std::uint64_t>(diam, dist[q[t - 1]]);
  }
  return diam;
}

}  // namespace fragdyn
