#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fragdyn/model_bs.hpp"
#include "fragdyn/observables.hpp"
#include "support.hpp"

using namespace fragdyn;
using support::M2;
using support::Q;

namespace {

Word bsw(const char* s) { return parse_word(s, presentation(ModelId::BS).alphabet); }

M2 to_rational(const DyadicMatrix& m) {
  Q p = m.a_exponent >= 0 ? Q(1LL << m.a_exponent) : Q(1, 1LL << -m.a_exponent);
  Q q(static_cast<long long>(m.b_numerator), 1LL << m.b_exponent);
  return {p, q, 1};
}

bool normalized(const DyadicMatrix& m) {
  if (m.b_numerator == 0) return m.b_exponent == 0;
  return m.b_exponent == 0 || boost::multiprecision::lsb(abs(m.b_numerator)) == 0;
}

Word random_bs(std::size_t L, Philox& rng) {
  Word w;
  random_word(w, L, 5, rng);
  return w;
}

}  // namespace

TEST_CASE("evaluate matches the rational matrix product") {
  CHECK(evaluate(bsw("eee")).is_identity());
  DyadicMatrix m = evaluate(bsw("Bab"));
  CHECK(m.a_exponent == 0);
  CHECK(m.b_numerator == 2);
  CHECK(m.b_exponent == 0);

  Philox rng(1);
  for (int i = 0; i < 20000; ++i) {
    Word w = random_bs(1 + rng.bounded(24), rng);
    DyadicMatrix d = evaluate(w);
    CHECK(normalized(d));
    CHECK(to_rational(d) == support::rational_eval(w));
  }
}

TEST_CASE("evaluate is a homomorphism") {
  Philox rng(2);
  for (int i = 0; i < 20000; ++i) {
    Word u = random_bs(1 + rng.bounded(60), rng), v = random_bs(1 + rng.bounded(60), rng);
    Word uv = u;
    uv.insert(uv.end(), v.begin(), v.end());
    CHECK(evaluate(uv) == evaluate(u) * evaluate(v));
  }
}

TEST_CASE("canonical form examples") {
  CanonicalKNL c = canonical_knl(bsw("abab"));
  CHECK(c.k == 2);
  CHECK(c.n == 6);
  CHECK(c.l == 0);
  CHECK(canonical_knl(bsw("Bab")) == CanonicalKNL{0, 2, 0});
  CHECK(canonical_knl(bsw("eeeeee")) == CanonicalKNL{0, 0, 0});
  CHECK(canonical_knl(bsw("bb")) == CanonicalKNL{2, 0, 0});
  CHECK(canonical_knl(bsw("BB")) == CanonicalKNL{0, 0, 2});
}

TEST_CASE("canonical form rebuilds the matrix on a million random words") {
  Philox rng(3);
  long checked = 0;
  for (int i = 0; i < 1000000; ++i) {
    Word w = random_bs(1 + rng.bounded(200), rng);
    DyadicMatrix m = evaluate(w);
    CanonicalKNL c = knl_from_matrix(m);
    bool ok = matrix_from_knl(c) == m && c.k - c.l == n_b(w) && c.k >= 0 && c.l >= 0;
    bool unique = !(c.n != 0 && c.n % 2 == 0 && c.k > 0 && c.l > 0);
    if (!ok || !unique) {
      FAIL_CHECK("canonical form broken for " << format_word(w, presentation(ModelId::BS).alphabet));
      break;
    }
    ++checked;
  }
  CHECK(checked == 1000000);
}

TEST_CASE("geodesic bounds") {
  Bounds z = geodesic_bounds({0, 0, 0});
  CHECK(z.lower == 0);
  CHECK(z.upper == 0);
  Bounds b = geodesic_bounds({2, 6, 0});
  CHECK(b.lower == doctest::Approx(2.2925).epsilon(1e-4));
  CHECK(b.upper == doctest::Approx(22.34).epsilon(1e-3));
}

TEST_CASE("Cayley-graph geodesics of short words lie within the bounds") {
  auto ball = support::cayley_ball(6);
  std::size_t checked = 0;
  for (std::size_t L = 1; L <= 6; ++L)
    for (const Word& w : support::all_words(L, 5)) {
      int d = ball.at(support::rational_eval(w));
      Bounds b = geodesic_bounds(canonical_knl(w));
      CHECK(b.lower <= d + 1e-12);
      CHECK(d <= b.upper + 1e-12);
      ++checked;
    }
  MESSAGE(checked << " words, " << ball.size() << " group elements within radius 6");
}

TEST_CASE("w_large") {
  CHECK(format_word(w_large_core(1), presentation(ModelId::BS).alphabet) == "aBAbABab");
  Philox rng(4);
  for (int n = 0; n <= 12; ++n) {
    CHECK(w_large_core(n).size() == static_cast<std::size_t>(4 * n + 4));
    for (std::size_t L : {static_cast<std::size_t>(4 * n + 4), static_cast<std::size_t>(10 * n + 8)}) {
      Word w = make_w_large(n, L, rng);
      CHECK(w.size() == L);
      CHECK(evaluate(w).is_identity());
      Word stripped;
      for (Symbol s : w)
        if (s != bs::e) stripped.push_back(s);
      CHECK(stripped == w_large_core(n));
    }
  }
  CHECK_THROWS_AS(make_w_large(3, 10, rng), Error);
}

TEST_CASE("random padding is uniform over placements") {
  // Placements of 2 core letters among 4 sites: 6 equally likely patterns.
  Philox rng(5);
  std::map<Word, int> hist;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++hist[pad_randomly(Word{bs::a, bs::b}, 4, bs::e, rng)];
  CHECK(hist.size() == 6);
  for (const auto& [w, c] : hist) CHECK(std::abs(c - draws / 6.0) < 5 * std::sqrt(draws / 6.0));
}

TEST_CASE("random waves carry two square-wave periods of b charge") {
  Philox rng(6);
  for (int n : {0, 1, 3, 6}) {
    Word w = make_random_wave(n, 60, rng);
    CHECK(w.size() == 60);
    auto q = nb_profile(w);
    std::vector<int> cum(q.size());
    std::partial_sum(q.begin(), q.end(), cum.begin());
    CHECK(cum.back() == 0);
    CHECK(*std::max_element(cum.begin(), cum.end()) == n);
    CHECK(*std::min_element(cum.begin(), cum.end()) == 0);
    int rises = 0;
    for (std::size_t i = 1; i < cum.size(); ++i) rises += cum[i] == n && cum[i - 1] == n - 1 && n > 0;
    CHECK(rises == (n > 0 ? 2 : 0));
    if (n == 0)
      for (Symbol s : w) CHECK((s == bs::a || s == bs::A || s == bs::e));
  }
}

TEST_CASE("identity fraction") {
  // Exact counts by enumeration against the rational evaluator.
  for (std::size_t L : {1u, 2u, 4u}) {
    std::size_t ke = 0, fast = 0;
    std::vector<long> scratch;
    for (const Word& w : support::all_words(L, 5)) {
      bool id = support::rational_eval(w) == M2{};
      ke += id;
      fast += is_identity_fast(w.data(), w.size(), scratch);
      CHECK(id == is_identity_fast(w.data(), w.size(), scratch));
    }
    if (L == 1) CHECK(ke == 1);
    if (L == 2) CHECK(ke == 5);
    Philox rng(7 + L);
    ProportionEstimate p = sample_identity_fraction(L, 200000, rng);
    double exact = static_cast<double>(ke) / std::pow(5.0, static_cast<double>(L));
    CHECK(p.lower <= exact);
    CHECK(exact <= p.upper);
  }
}

TEST_CASE("fast identity test agrees with the exact evaluator on long words") {
  Philox rng(8);
  const Alphabet& al = presentation(ModelId::BS).alphabet;
  std::vector<long> scratch;
  for (int i = 0; i < 20000; ++i) {
    Word w = random_bs(1 + rng.bounded(120), rng);
    if (i % 2) {  // force identities by appending an inverse, possibly perturbed
      Word inv = invert_word(w, al);
      w.insert(w.end(), inv.begin(), inv.end());
      if (i % 4 == 1) w[rng.bounded(static_cast<std::uint32_t>(w.size()))] = static_cast<Symbol>(rng.bounded(5));
    }
    CHECK(is_identity_fast(w.data(), w.size(), scratch) == evaluate(w).is_identity());
  }
}

TEST_CASE("identity-sector words are homogeneous in b charge") {
  const std::size_t L = 10, want = 10000;
  Philox rng(9);
  std::vector<double> sum(L, 0), sq(L, 0);
  std::size_t got = 0;
  std::vector<long> scratch;
  Word w;
  while (got < want) {
    random_word(w, L, 5, rng);
    if (!is_identity_fast(w.data(), w.size(), scratch)) continue;
    ++got;
    auto q = nb_profile(w);
    for (std::size_t i = 0; i < L; ++i) sum[i] += q[i], sq[i] += q[i] * q[i];
  }
  for (std::size_t i = 0; i < L; ++i) {
    double m = sum[i] / want, var = sq[i] / want - m * m;
    CHECK(std::abs(m) <= 3 * std::sqrt(var / want));
  }
}

TEST_CASE("geometry records") {
  Philox rng(10);
  for (const auto& r : geometry_histograms(100, 2000, rng)) CHECK(r.n_b == r.k - r.l);
  auto cond = geometry_histograms(30, 200, rng, true);
  CHECK(cond.size() == 200);
  for (const auto& r : cond) CHECK(r.in_identity_sector);
  GeometryRecord g = geometry_record(bsw("abab"));
  CHECK(g.k == 2);
  CHECK(g.log2_n_abs == doctest::Approx(std::log2(7.0)));
}

TEST_CASE("tree steps from uniform letters") {
  Philox rng(11);
  TreeStepCounts c = tree_steps_from_letters(1000000, rng);
  double n = static_cast<double>(c.total());
  CHECK(c.up_same / n == doctest::Approx(1.0 / 3).epsilon(0.03));
  CHECK(c.up_other / n == doctest::Approx(1.0 / 6).epsilon(0.06));
  CHECK(c.down / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("branch points of returning walks") {
  Philox rng(12);
  TreeWalkResult r = tree_walk_branch_point(20, 300, rng);
  std::uint64_t total = 0;
  for (const auto& [depth, count] : r.branch_histogram) {
    CHECK(depth >= 0);
    total += count;
  }
  CHECK(total == 300);
  CHECK(r.walks_accepted == 600);

  // Two copies of one walk share every vertex, so Br is the deepest point.
  std::vector<std::string> v1, v2;
  TreeStepCounts counts;
  Philox a(77), b(77);
  bool ok1 = bsdetail::returning_walk(16, a, v1, counts);
  bool ok2 = bsdetail::returning_walk(16, b, v2, counts);
  CHECK(ok1 == ok2);
  CHECK(v1 == v2);
}
