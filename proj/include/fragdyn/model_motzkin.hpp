#pragma once

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/encoding.hpp"
#include "fragdyn/model_bs.hpp"
#include "fragdyn/models.hpp"

namespace fragdyn {

// Prefix heights h_1..h_{L+1} with h_i = sum_{j<i} (#( - #)), shifted so that
// the minimum over all L+1 values is zero. Including the final height keeps the
// minimum fixed under every move.
inline std::vector<long> height_profile(const Word& w) {
  std::vector<long> h(w.size() + 1, 0);
  for (std::size_t i = 0; i < w.size(); ++i)
    h[i + 1] = h[i] + (w[i] == mz::open) - (w[i] == mz::close);
  long lo = *std::min_element(h.begin(), h.end());
  for (auto& x : h) x -= lo;
  return h;
}

inline BigInt charge_Q(const Word& w) {
  std::vector<long> h = height_profile(w);
  BigInt q = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] == mz::star) q += BigInt(1) << static_cast<unsigned>(h[i]);
  return q;
}

inline long star_count(const Word& w, std::size_t lo = 0, std::size_t hi = ~std::size_t{0}) {
  long n = 0;
  for (std::size_t i = lo; i < std::min(hi, w.size()); ++i) n += w[i] == mz::star;
  return n;
}

struct MotzkinSector {
  long m = 0;                // unmatched )
  long n = 0;                // unmatched (
  BigInt Q = 0;
  std::vector<BigInt> gaps;  // chiral only: charge before and between unmatched (
  bool operator==(const MotzkinSector& o) const { return m == o.m && n == o.n && Q == o.Q && gaps == o.gaps; }
  std::string label() const {
    std::string s = "m=" + std::to_string(m) + ";n=" + std::to_string(n) + ";Q=" + Q.str();
    if (!gaps.empty()) {
      s += ";k=";
      for (std::size_t i = 0; i < gaps.size(); ++i) s += (i ? "," : "") + gaps[i].str();
    }
    return s;
  }
};

// Positions of unmatched ( and the count of unmatched ).
inline std::pair<std::vector<std::size_t>, long> unmatched_parens(const Word& w) {
  std::vector<std::size_t> open;
  long closes = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == mz::open) open.push_back(i);
    if (w[i] == mz::close) {
      if (open.empty())
        ++closes;
      else
        open.pop_back();
    }
  }
  return {open, closes};
}

// (m, n, Q); in the chiral model also the charge trapped in each gap between
// unmatched ( characters, which no move can carry across them.
inline MotzkinSector motzkin_sector(const Word& w, bool chiral) {
  MotzkinSector s;
  auto [open, closes] = unmatched_parens(w);
  s.m = closes;
  s.n = static_cast<long>(open.size());
  s.Q = charge_Q(w);
  if (chiral) {
    std::vector<long> h = height_profile(w);
    s.gaps.assign(open.size() + 1, 0);
    std::size_t g = 0;
    long base = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (g < open.size() && i == open[g]) {
        ++g;
        base = h[i + 1];
        continue;
      }
      if (w[i] == mz::star) s.gaps[g] += BigInt(1) << static_cast<unsigned>(h[i] - base);
    }
  }
  return s;
}

// Cancels every ( ... ) pair that encloses only 0s, innermost first, in one pass.
inline Word clean(const Word& w) {
  Word out = w;
  std::vector<std::size_t> stack;
  std::size_t dirty = 0;  // stack entries below this index enclose a non-0 symbol
  for (std::size_t i = 0; i < out.size(); ++i) {
    Symbol s = out[i];
    if (s == mz::open) {
      stack.push_back(i);
    } else if (s == mz::close) {
      if (stack.empty()) {
        dirty = 0;
        continue;
      }
      if (stack.size() > dirty) {
        out[stack.back()] = mz::zero;
        out[i] = mz::zero;
        stack.pop_back();
      } else {
        stack.pop_back();
        dirty = stack.size();
      }
    } else if (s == mz::star) {
      dirty = stack.size();
    }
  }
  return out;
}

// Charges of the contiguous regions lying above height h: a site belongs to the
// restriction when its shifted height exceeds h, or equals h and it carries a
// star. Regions without charge are dropped; the result is sorted descending.
inline std::vector<BigInt> h_restriction(const Word& w, long h) {
  std::vector<long> ht = height_profile(w);
  std::vector<BigInt> q;
  bool inside = false;
  BigInt cur = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool in = ht[i] > h || (ht[i] == h && w[i] == mz::star);
    if (in) {
      if (w[i] == mz::star) cur += BigInt(1) << static_cast<unsigned>(ht[i]);
      inside = true;
    } else if (inside) {
      if (cur != 0) q.push_back(cur);
      cur = 0;
      inside = false;
    }
  }
  if (inside && cur != 0) q.push_back(cur);
  std::sort(q.begin(), q.end(), std::greater<>());
  return q;
}

// 2^-h times the L1 distance between the zero-padded h-restriction charge
// vectors of the cleaned configurations.
inline double hitting_lower_bound(const Word& x, const Word& y, long h, bool chiral = false) {
  if (!(motzkin_sector(x, chiral) == motzkin_sector(y, chiral)))
    throw Error(Errc::SectorMismatch, "configurations lie in different sectors");
  auto qa = h_restriction(clean(x), h), qb = h_restriction(clean(y), h);
  std::size_t n = std::max(qa.size(), qb.size());
  qa.resize(n, 0);
  qb.resize(n, 0);
  BigInt d = 0;
  for (std::size_t i = 0; i < n; ++i) d += abs(qa[i] - qb[i]);
  return std::ldexp(d.convert_to<double>(), static_cast<int>(-h));
}

// )^m 0...0 R (^n, where R = (^{k-1} *^{m_1} ) *^{m_2} ) ... ) *^{m_k} carries the
// binary digits m_1...m_k of Q at depths k-1, ..., 0.
inline Word reference_state(const BigInt& Q, long m, long n, std::size_t L) {
  Word R;
  if (Q > 0) {
    unsigned k = boost::multiprecision::msb(Q) + 1;
    R.insert(R.end(), k - 1, mz::open);
    for (unsigned i = 0; i < k; ++i) {
      if (boost::multiprecision::bit_test(Q, k - 1 - i)) R.push_back(mz::star);
      if (i + 1 < k) R.push_back(mz::close);
    }
  }
  std::size_t need = static_cast<std::size_t>(m + n) + R.size();
  if (need > L) throw Error(Errc::InsufficientLength, "reference state does not fit");
  Word w(static_cast<std::size_t>(m), mz::close);
  w.insert(w.end(), L - need, mz::zero);
  w.insert(w.end(), R.begin(), R.end());
  w.insert(w.end(), static_cast<std::size_t>(n), mz::open);
  return w;
}

struct ReachableCounts {
  std::set<long> counts;
  bool complete = true;  // false: budget hit, counts form a lower bound
  std::uint64_t states = 0;
};

// Exhaustive search over the move closure of `config` followed by `extra_space`
// 0 cells. Star counts in region A = [a_lo, a_hi) are recorded for the states
// whose extra cells are all 0 again, i.e. configurations of the original chain
// reachable when borrowing that much scratch space.
inline ReachableCounts reachable_star_counts(ModelId model, const Word& config, std::size_t a_lo, std::size_t a_hi,
                                             std::size_t extra_space, std::uint64_t cap) {
  if (model != ModelId::Star && model != ModelId::Chiral)
    throw Error(Errc::InvalidArgument, "reachable_star_counts needs a Motzkin-type model");
  const Presentation& pres = presentation(model);
  Word start = config;
  start.insert(start.end(), extra_space, mz::zero);
  Codec codec(4, start.size());
  WindowMoveTable t3(pres, 3), t2(pres, 2);
  std::uint64_t tail_unit = codec.pw[config.size()];
  ReachableCounts res;
  std::unordered_set<std::uint64_t> seen;
  std::deque<std::uint64_t> q;
  std::uint64_t x0 = codec.encode(start);
  seen.insert(x0);
  q.push_back(x0);
  while (!q.empty()) {
    std::uint64_t x = q.front();
    q.pop_front();
    if (x / tail_unit == 0) {
      long c = 0;
      for (std::size_t i = a_lo; i < a_hi; ++i) c += codec.at(x, i) == mz::star;
      res.counts.insert(c);
    }
    for_each_move(x, codec, t3, t2, [&](std::uint64_t y, bool) {
      if (seen.size() >= cap) {
        res.complete = false;
        return;
      }
      if (seen.insert(y).second) q.push_back(y);
    });
  }
  res.states = seen.size();
  return res;
}

}  // namespace fragdyn
