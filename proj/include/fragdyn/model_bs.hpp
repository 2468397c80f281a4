#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/models.hpp"
#include "fragdyn/rng.hpp"

namespace fragdyn {

using BigInt = boost::multiprecision::cpp_int;

// Element of BS(1,2) as the matrix [[2^a_exponent, b_numerator / 2^b_exponent], [0, 1]],
// with a = [[1,1],[0,1]] and b = [[1/2,0],[0,1]]. b_exponent is the smallest
// non-negative exponent, so the numerator is odd whenever b_exponent > 0.
struct DyadicMatrix {
  long a_exponent = 0;
  BigInt b_numerator = 0;
  long b_exponent = 0;

  void normalize() {
    if (b_numerator == 0) {
      b_exponent = 0;
      return;
    }
    if (b_exponent > 0) {
      long tz = static_cast<long>(boost::multiprecision::lsb(abs(b_numerator)));
      long shift = std::min(tz, b_exponent);
      b_numerator >>= shift;
      b_exponent -= shift;
    }
  }

  bool is_identity() const { return a_exponent == 0 && b_numerator == 0; }
  bool operator==(const DyadicMatrix& o) const {
    return a_exponent == o.a_exponent && b_numerator == o.b_numerator && b_exponent == o.b_exponent;
  }

  std::string label() const {
    return "A=2^" + std::to_string(a_exponent) + ";B=" + b_numerator.str() + "/2^" + std::to_string(b_exponent);
  }
};

inline DyadicMatrix operator*(const DyadicMatrix& x, const DyadicMatrix& y) {
  // [[2^p, B1],[0,1]] [[2^q, B2],[0,1]] = [[2^(p+q), 2^p B2 + B1],[0,1]]
  DyadicMatrix r;
  r.a_exponent = x.a_exponent + y.a_exponent;
  long p = x.a_exponent;
  // 2^p * n2 / 2^e2 + n1 / 2^e1 over the common denominator 2^E.
  long e2 = y.b_exponent - p;
  long E = std::max({x.b_exponent, e2, 0L});
  BigInt t1 = x.b_numerator << static_cast<unsigned>(E - x.b_exponent);
  BigInt t2 = y.b_numerator << static_cast<unsigned>(E - e2);
  r.b_numerator = t1 + t2;
  r.b_exponent = E;
  r.normalize();
  return r;
}

struct CanonicalKNL {
  long k = 0;
  BigInt n = 0;
  long l = 0;
  bool operator==(const CanonicalKNL& o) const { return k == o.k && n == o.n && l == o.l; }
};

namespace bsdetail {

inline void require_bs(Symbol s) {
  if (s > bs::B) throw Error(Errc::InvalidArgument, "symbol outside the BS alphabet");
}

}  // namespace bsdetail

// Net b charge: number of b minus number of b^-1.
inline long n_b(const Word& w) {
  long n = 0;
  for (Symbol s : w) n += (s == bs::b) - (s == bs::B);
  return n;
}

// Left-to-right matrix product. The (1,2) entry is the sum over a-letters of
// +-2^(-h) with h the b-height reached before the letter, so the letters are
// histogrammed by height and the big integer is assembled once.
inline DyadicMatrix evaluate(const Word& w) {
  const long L = static_cast<long>(w.size());
  std::vector<long> cnt(static_cast<std::size_t>(2 * L + 1), 0);
  long h = 0, hmin = L + 1, hmax = -L - 1;
  for (Symbol s : w) {
    bsdetail::require_bs(s);
    switch (s) {
      case bs::a:
      case bs::A:
        cnt[static_cast<std::size_t>(h + L)] += s == bs::a ? 1 : -1;
        hmin = std::min(hmin, h);
        hmax = std::max(hmax, h);
        break;
      case bs::b: ++h; break;
      case bs::B: --h; break;
      default: break;
    }
  }
  DyadicMatrix m;
  m.a_exponent = -h;
  if (hmin > hmax) return m;
  BigInt acc = 0;
  for (long x = hmin; x <= hmax; ++x) {
    if (x > hmin) acc <<= 1;
    acc += cnt[static_cast<std::size_t>(x + L)];
  }
  // value = acc * 2^(-hmax)
  if (hmax <= 0) {
    m.b_numerator = acc << static_cast<unsigned>(-hmax);
    m.b_exponent = 0;
  } else {
    m.b_numerator = acc;
    m.b_exponent = hmax;
  }
  m.normalize();
  return m;
}

// Exact identity test with machine integers only: n_b = 0 and the height
// histogram sums to zero, checked by carrying from the finest scale upward.
inline bool is_identity_fast(const Symbol* w, std::size_t len, std::vector<long>& scratch) {
  const long L = static_cast<long>(len);
  scratch.assign(static_cast<std::size_t>(2 * L + 1), 0);
  long h = 0, hmin = L + 1, hmax = -L - 1;
  for (std::size_t i = 0; i < len; ++i) {
    Symbol s = w[i];
    if (s == bs::a || s == bs::A) {
      scratch[static_cast<std::size_t>(h + L)] += s == bs::a ? 1 : -1;
      if (h < hmin) hmin = h;
      if (h > hmax) hmax = h;
    } else if (s == bs::b) {
      ++h;
    } else if (s == bs::B) {
      --h;
    }
  }
  if (h != 0) return false;
  if (hmin > hmax) return true;
  long carry = 0;
  for (long x = hmax; x > hmin; --x) {
    long t = scratch[static_cast<std::size_t>(x + L)] + carry;
    if (t & 1) return false;
    carry = t / 2;
  }
  return scratch[static_cast<std::size_t>(hmin + L)] + carry == 0;
}

inline CanonicalKNL knl_from_matrix(const DyadicMatrix& m) {
  CanonicalKNL r;
  long nb = -m.a_exponent;
  if (m.b_numerator == 0) {
    r.k = std::max(0L, nb);
    r.l = r.k - nb;
    r.n = 0;
    return r;
  }
  // 2-adic valuation of the (1,2) entry.
  long v = m.b_exponent > 0 ? -m.b_exponent
                            : static_cast<long>(boost::multiprecision::lsb(abs(m.b_numerator)));
  r.k = std::max({0L, nb, -v});
  r.l = r.k - nb;
  r.n = m.b_numerator << static_cast<unsigned>(r.k - m.b_exponent);
  return r;
}

inline CanonicalKNL canonical_knl(const Word& w) { return knl_from_matrix(evaluate(w)); }

inline DyadicMatrix matrix_from_knl(const CanonicalKNL& c) {
  DyadicMatrix m;
  m.a_exponent = c.l - c.k;
  m.b_numerator = c.n;
  m.b_exponent = c.k;
  m.normalize();
  return m;
}

// log2|n| for n != 0, accurate to double precision.
inline double log2_abs(const BigInt& n) {
  BigInt a = abs(n);
  if (a == 0) return -INFINITY;
  unsigned msb = boost::multiprecision::msb(a);
  if (msb < 60) return std::log2(a.convert_to<double>());
  BigInt top = a >> (msb - 52);
  return static_cast<double>(msb - 52) + std::log2(top.convert_to<double>());
}

struct Bounds {
  double lower = 0;
  double upper = 0;
};

inline Bounds geodesic_bounds(const CanonicalKNL& c) {
  if (c.n == 0) {
    double d = static_cast<double>(std::labs(c.k - c.l));
    return {d, d};
  }
  double s = static_cast<double>(c.k + c.l) + log2_abs(c.n);
  return {0.5 * s, 4.0 * (s + 1.0)};
}

// Places `core` into a length-L word with L-|core| padding symbols at uniformly
// random positions (every placement equally likely).
inline Word pad_randomly(const Word& core, std::size_t L, Symbol pad, Philox& rng) {
  if (core.size() > L) throw Error(Errc::TooLong, "word longer than chain");
  Word out;
  out.reserve(L);
  std::size_t need_pad = L - core.size(), need_core = core.size(), j = 0;
  for (std::size_t i = 0; i < L; ++i) {
    std::size_t remaining = L - i;
    if (rng.bounded(static_cast<std::uint32_t>(remaining)) < need_pad) {
      out.push_back(pad);
      --need_pad;
    } else {
      out.push_back(core[j++]);
      --need_core;
    }
  }
  return out;
}

inline Word w_large_core(int n) {
  using namespace bs;
  Word w{a};
  w.insert(w.end(), static_cast<std::size_t>(n), B);
  w.push_back(A);
  w.insert(w.end(), static_cast<std::size_t>(n), b);
  w.push_back(A);
  w.insert(w.end(), static_cast<std::size_t>(n), B);
  w.push_back(a);
  w.insert(w.end(), static_cast<std::size_t>(n), b);
  return w;
}

inline Word make_w_large(int n, std::size_t L, Philox& rng) {
  Word core = w_large_core(n);
  if (L < core.size()) throw Error(Errc::TooLong, "w_large does not fit");
  return pad_randomly(core, L, bs::e, rng);
}

// w1 b^n w2 b^-n w3 b^n w4 b^-n w5 with the w_i uniform over {a, a^-1, e}.
inline Word make_random_wave(int n, std::size_t L, Philox& rng) {
  if (L < 4 * static_cast<std::size_t>(n)) throw Error(Errc::TooLong, "random wave does not fit");
  std::size_t free = L - 4 * static_cast<std::size_t>(n);
  std::size_t base = free / 5, extra = free % 5;
  static constexpr Symbol horiz[3] = {bs::a, bs::A, bs::e};
  Word w;
  for (std::size_t block = 0; block < 5; ++block) {
    std::size_t len = base + (block < extra ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i) w.push_back(horiz[rng.bounded(3)]);
    if (block < 4) w.insert(w.end(), static_cast<std::size_t>(n), block % 2 == 0 ? bs::b : bs::B);
  }
  return w;
}

inline void random_word(Word& w, std::size_t L, std::uint32_t alphabet_size, Philox& rng) {
  w.resize(L);
  for (auto& s : w) s = static_cast<Symbol>(rng.bounded(alphabet_size));
}

struct ProportionEstimate {
  double p = 0;
  double lower = 0;
  double upper = 0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

inline ProportionEstimate wilson_interval(std::uint64_t hits, std::uint64_t n, double z = 1.959963984540054) {
  ProportionEstimate r;
  r.hits = hits;
  r.samples = n;
  if (n == 0) return r;
  double p = static_cast<double>(hits) / static_cast<double>(n), nn = static_cast<double>(n);
  double d = 1 + z * z / nn;
  double c = (p + z * z / (2 * nn)) / d;
  double h = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / d;
  r.p = p;
  r.lower = std::max(0.0, c - h);
  r.upper = std::min(1.0, c + h);
  return r;
}

inline ProportionEstimate sample_identity_fraction(std::size_t L, std::uint64_t samples, Philox& rng) {
  if (samples < 1) throw Error(Errc::InvalidArgument, "samples must be positive");
  Word w;
  std::vector<long> scratch;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    random_word(w, L, 5, rng);
    hits += is_identity_fast(w.data(), w.size(), scratch);
  }
  return wilson_interval(hits, samples);
}

struct GeometryRecord {
  long k = 0;
  long l = 0;
  long n_b = 0;
  double log2_n_abs = 0;  // log2(|n| + 1)
  bool in_identity_sector = false;
};

inline GeometryRecord geometry_record(const Word& w) {
  DyadicMatrix m = evaluate(w);
  CanonicalKNL c = knl_from_matrix(m);
  GeometryRecord r;
  r.k = c.k;
  r.l = c.l;
  r.n_b = c.k - c.l;
  r.log2_n_abs = log2_abs(abs(c.n) + 1);
  r.in_identity_sector = m.is_identity();
  return r;
}

// Canonical data of uniform length-L words. With `identity_conditioned`, words
// are postselected on the identity sector and the record describes their
// first half (the midpoint excursion).
inline std::vector<GeometryRecord> geometry_histograms(std::size_t L, std::uint64_t samples, Philox& rng,
                                                       bool identity_conditioned = false) {
  std::vector<GeometryRecord> out;
  out.reserve(samples);
  Word w;
  std::vector<long> scratch;
  while (out.size() < samples) {
    random_word(w, L, 5, rng);
    if (!identity_conditioned) {
      out.push_back(geometry_record(w));
      continue;
    }
    if (!is_identity_fast(w.data(), w.size(), scratch)) continue;
    Word half(w.begin(), w.begin() + static_cast<long>(L / 2));
    GeometryRecord r = geometry_record(half);
    r.in_identity_sector = true;
    out.push_back(r);
  }
  return out;
}

struct TreeStepCounts {
  std::uint64_t up_same = 0;
  std::uint64_t up_other = 0;
  std::uint64_t down = 0;
  std::uint64_t total() const { return up_same + up_other + down; }
};

// Projects a uniform letter stream onto the b-tree: b moves down to the unique
// parent coset, b^-1 moves up, onto the same sheet when an even number of
// horizontal letters preceded it since the last vertical move.
inline TreeStepCounts tree_steps_from_letters(std::uint64_t vertical_moves, Philox& rng) {
  TreeStepCounts c;
  std::uint64_t horizontal = 0;
  while (c.total() < vertical_moves) {
    switch (rng.bounded(5)) {
      case bs::a:
      case bs::A: ++horizontal; break;
      case bs::b:
        ++c.down;
        horizontal = 0;
        break;
      case bs::B:
        ++(horizontal % 2 == 0 ? c.up_same : c.up_other);
        horizontal = 0;
        break;
      default: break;
    }
  }
  return c;
}

enum class TreeMove { UpSame, UpOther, Down };

inline TreeMove tree_step(Philox& rng) {
  std::uint32_t r = rng.bounded(6);
  if (r < 2) return TreeMove::UpSame;
  if (r < 3) return TreeMove::UpOther;
  return TreeMove::Down;
}

struct TreeWalkResult {
  std::map<long, std::uint64_t> branch_histogram;  // depth -> pair count
  TreeStepCounts steps;                            // every sampled step, before rejection
  std::uint64_t walks_tried = 0;
  std::uint64_t walks_accepted = 0;
};

namespace bsdetail {

// Vertices are strings of child bits read upward from a base `steps` levels
// below the start, whose ancestors all sit on one sheet (child 0).
struct TreeWalker {
  std::string path;
  long base_depth;
  explicit TreeWalker(long steps) : path(static_cast<std::size_t>(steps), '0'), base_depth(steps) {}
  long depth() const { return static_cast<long>(path.size()) - base_depth; }
  void move(TreeMove m) {
    if (m == TreeMove::Down)
      path.pop_back();
    else
      path.push_back(m == TreeMove::UpSame ? '0' : '1');
  }
};

inline bool returning_walk(long steps, Philox& rng, std::vector<std::string>& visited, TreeStepCounts& counts) {
  TreeWalker w(steps);
  std::string start = w.path;
  visited.clear();
  visited.push_back(w.path);
  for (long i = 0; i < steps; ++i) {
    TreeMove m = tree_step(rng);
    ++(m == TreeMove::UpSame ? counts.up_same : m == TreeMove::UpOther ? counts.up_other : counts.down);
    w.move(m);
    visited.push_back(w.path);
  }
  return w.path == start;
}

}  // namespace bsdetail

// Pairs of returning walks of `steps` steps on the 3-regular tree; Br is the
// largest depth (relative to the start) of a vertex visited by both walks.
inline TreeWalkResult tree_walk_branch_point(long steps, std::uint64_t pairs, Philox& rng) {
  TreeWalkResult res;
  std::vector<std::string> v1, v2;
  auto draw = [&](std::vector<std::string>& v) {
    for (;;) {
      ++res.walks_tried;
      if (bsdetail::returning_walk(steps, rng, v, res.steps)) {
        ++res.walks_accepted;
        return;
      }
    }
  };
  for (std::uint64_t p = 0; p < pairs; ++p) {
    draw(v1);
    draw(v2);
    std::unordered_set<std::string> s1(v1.begin(), v1.end());
    long best = std::numeric_limits<long>::min();
    for (const auto& x : v2)
      if (s1.count(x)) best = std::max(best, static_cast<long>(x.size()) - steps);
    ++res.branch_histogram[best];
  }
  return res;
}

}  // namespace fragdyn
