// Acceptance run: one PASS/FAIL line per criterion. Arguments select a subset
// of criteria by number; no arguments runs all of them. Exit status is 1 when
// any selected criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "fragdyn/experiments.hpp"
#include "fragdyn/model_motzkin.hpp"
#include "fragdyn/oracle.hpp"

using namespace fragdyn;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

const std::uint64_t kRoot = 20240601;

// Shared by criteria 2, 3 and 13: w_large(n, 10n) for n = 4..8, 20 seeds each,
// continued to 1.5 t_th so the whole collapse is on record.
const WlargeScan& wlarge_runs() {
  static const WlargeScan scan = wlarge_scan({4, 5, 6, 7, 8}, 20, 100'000'000, kRoot, 1, 1.5);
  return scan;
}

Verdict identity_sector_scaling() {
  IdentityScaling r = identity_scaling({20, 30, 40, 50, 60, 70, 80}, 1'000'000, kRoot);
  std::ostringstream os;
  os << "alpha = " << r.fit.slope << " (R^2 " << r.fit.r2 << "), p_e(20) = " << r.p.front().p
     << ", p_e(80) = " << r.p.back().p << " (" << r.p.back().hits << " hits)";
  bool all_hit = true;
  for (const auto& p : r.p) all_hit &= p.hits > 0;
  return {all_hit && r.fit.slope >= 1.6 && r.fit.slope <= 2.1, os.str()};
}

Verdict exponential_thermalization() {
  const WlargeScan& s = wlarge_runs();
  std::ostringstream os;
  bool censored = false;
  for (const auto& p : s.points) {
    os << "n=" << p.n << " median " << p.median.value << (p.median.censored ? " (censored)" : "") << "; ";
    censored |= p.median.censored;
  }
  os << "slope " << s.fit.slope << " (R^2 " << s.fit.r2 << ")";
  // Context only: the slope without the smallest n.
  std::vector<double> x, y;
  for (const auto& p : s.points)
    if (p.n >= 5 && !p.median.censored) x.push_back(p.n), y.push_back(std::log2(p.median.value));
  if (x.size() >= 2) os << "; n >= 5 only: " << linear_fit(x, y).slope;
  return {!censored && s.fit.slope >= 1.6 && s.fit.slope <= 2.4, os.str()};
}

Verdict sudden_collapse() {
  std::vector<const ContrastRun*> runs;
  std::size_t seeds = 0;
  for (const auto& p : wlarge_runs().points)
    if (p.n >= 6)
      for (const auto& r : p.runs) runs.push_back(&r), ++seeds;
  CollapseAnalysis a = collapse_analysis(runs);
  const double frac = seeds ? static_cast<double>(a.sudden) / static_cast<double>(seeds) : 0.0;
  std::ostringstream os;
  os << a.sudden << "/" << seeds << " seeds hold >= 80% contrast up to t_th/2 (" << a.runs
     << " thermalized); collapse-curve fit R^2 " << a.r2 << " at depth " << a.n0;
  return {frac >= 0.8 && a.r2 >= 0.8, os.str()};
}

Verdict jamming_threshold() {
  const std::vector<std::size_t> Ls{44, 46, 50, 53, 56, 58, 60};
  JammingScan s = jamming_scan(10, Ls, 20, 100'000'000, 100'000, kRoot);
  std::ostringstream os;
  bool ok = true;
  for (const auto& p : s.points) {
    os << "L=" << p.L << " " << p.thermalized << "/" << p.runs << "; ";
    if (p.L <= 46) ok &= p.thermalized == 0;
    if (p.L >= 56) ok &= p.thermalized * 5 >= p.runs * 4;
  }
  if (s.L_star) os << "L* = " << *s.L_star;
  else os << "no L* fit";
  ok &= s.L_star && *s.L_star >= 45 && *s.L_star <= 55;
  return {ok, os.str()};
}

Verdict expansion_length() {
  std::vector<double> el;
  std::ostringstream os;
  bool ok = true;
  for (int n = 1; n <= 4; ++n) {
    ElResult r = itbs_expansion_length(n, 1000, 1'000'000, 256, kRoot);
    os << "EL(" << n << ") = " << (r.el ? std::to_string(*r.el) : "none") << "; ";
    if (!r.el) ok = false;
    else el.push_back(static_cast<double>(*r.el));
  }
  for (std::size_t i = 1; i < el.size(); ++i) {
    double q = el[i] / el[i - 1];
    os << "ratio " << q << " ";
    ok &= q >= 1.4 && q <= 3.5;
  }
  return {ok && el.size() == 4, os.str()};
}

Verdict exact_area() {
  long a1 = min_area(w_large_core(1), ModelId::BS).area, a2 = min_area(w_large_core(2), ModelId::BS).area;
  std::ostringstream os;
  os << "area(w_large(1)) = " << a1 << ", area(w_large(2)) = " << a2;
  return {a1 == 2 && a2 == 6, os.str()};
}

Verdict mixing_bound() {
  std::ostringstream os;
  bool ok = true;
  for (std::size_t L : {4u, 5u, 6u}) {
    Word e(L, bs::e);
    MarkovAnalysis a = sector_markov_analysis(ModelId::BS, e);
    const double dehn = static_cast<double>(move_diameter(e, ModelId::BS));
    const double bound = dehn * dehn / (16 * std::log(static_cast<double>(a.size)));
    const bool holds = static_cast<double>(a.t_mix) > bound;
    os << "L=" << L << " t_mix " << a.t_mix << " vs " << bound << (holds ? "" : " (violated)") << "; ";
    ok &= holds;
  }
  return {ok, os.str()};
}

Verdict geodesic_collapse() {
  auto pts = geometry_scan({100, 200, 400}, 20000, kRoot);
  std::vector<double> proxy, logn;
  std::ostringstream os;
  for (const auto& p : pts) {
    proxy.push_back(p.median_proxy);
    logn.push_back(p.median_log_n);
    os << "L=" << p.L << " " << p.median_proxy << "/" << p.median_log_n << "; ";
  }
  double sp = relative_spread(proxy), sl = relative_spread(logn);
  os << "spread " << sp << " and " << sl;
  return {sp <= 0.15 && sl <= 0.2, os.str()};
}

Verdict tree_walk() {
  Philox rng = run_rng(kRoot, 9);
  TreeStepCounts c = tree_steps_from_letters(1'000'000, rng);
  const double t = static_cast<double>(c.total());
  const double up_same = static_cast<double>(c.up_same) / t, up_other = static_cast<double>(c.up_other) / t,
               down = static_cast<double>(c.down) / t;
  TreeWalkResult w = tree_walk_branch_point(200, 1000, rng);
  std::uint64_t small = 0, all = 0;
  for (const auto& [depth, count] : w.branch_histogram) {
    all += count;
    if (depth <= 3) small += count;
  }
  const double p_br = static_cast<double>(small) / static_cast<double>(all);
  std::ostringstream os;
  os << "p_up_same " << up_same << ", p_up_other " << up_other << ", p_down " << down << ", P(Br <= 3) " << p_br;
  bool ok = std::abs(up_same - 1.0 / 3) <= 0.01 && std::abs(up_other - 1.0 / 6) <= 0.01 && std::abs(down - 0.5) <= 0.01 &&
            p_br >= 0.5;
  return {ok, os.str()};
}

Verdict conservation() {
  std::ostringstream os;
  bool ok = true;
  for (ModelId m : kAllModels) {
    ConservationReport c = conservation_check(m, 250'000, 12, kRoot);
    UniformityReport u = gate_uniformity(m, 2000, kRoot);
    os << model_name(m) << ": " << c.violations << "/" << c.moves << " violations, " << u.failures << "/"
       << u.classes_tested << " classes reject uniformity; ";
    ok &= c.violations == 0 && c.moves >= 1'000'000 && u.failures == 0;
  }
  return {ok, os.str()};
}

Verdict fragile_witness() {
  Word w = parse_word("(((>)))00", presentation(ModelId::Chiral).alphabet);
  ReachableCounts fixed = reachable_star_counts(ModelId::Chiral, w, 0, 7, 0, 10'000'000);
  ReachableCounts padded = reachable_star_counts(ModelId::Chiral, w, 0, 7, 4, 10'000'000);
  auto show = [](const std::set<long>& s) {
    std::ostringstream os;
    os << "{";
    for (long k : s) os << (k == *s.begin() ? "" : ",") << k;
    return os.str() + "}";
  };
  const bool strict = padded.counts.size() > fixed.counts.size() &&
                      std::includes(padded.counts.begin(), padded.counts.end(), fixed.counts.begin(), fixed.counts.end());
  std::ostringstream os;
  os << "(((>)))00 region [0,7): fixed " << show(fixed.counts) << ", +4 cells " << show(padded.counts);
  return {fixed.complete && padded.complete && w.size() <= 14 && strict, os.str()};
}

Verdict random_wave_relaxation() {
  WavePoint p3 = random_wave_point(3, 100, 100, 500'000, kRoot), p6 = random_wave_point(6, 100, 100, 500'000, kRoot);
  auto done = [](const WavePoint& p) {
    std::size_t k = 0;
    for (const auto& t : p.t_th) k += t.has_value();
    return k;
  };
  const double growth = p6.median.value / p3.median.value;
  std::ostringstream os;
  os << "n=3 median " << p3.median.value << (p3.median.censored ? " (censored)" : "") << ", " << done(p3)
     << "/100 thermalized; n=6 median " << p6.median.value << (p6.median.censored ? " (censored)" : "") << ", " << done(p6)
     << "/100 thermalized; growth " << growth;
  return {!p3.median.censored && growth >= 4, os.str()};
}

Verdict broad_distribution() {
  std::ostringstream os;
  bool ok = true;
  for (const auto& p : wlarge_runs().points) {
    if (p.n != 6 && p.n != 8) continue;
    os << "n=" << p.n << " sigma/median " << p.width << "; ";
    ok &= p.width >= 0.3;
  }
  return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, identity_sector_scaling}, {2, exponential_thermalization}, {3, sudden_collapse},
      {4, jamming_threshold},       {5, expansion_length},           {6, exact_area},
      {7, mixing_bound},            {8, geodesic_collapse},          {9, tree_walk},
      {10, conservation},           {11, fragile_witness},           {12, random_wave_relaxation},
      {13, broad_distribution}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [k, run] : criteria) {
    if (!selected.empty() && !selected.count(k)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << k << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  [" << secs << " s]"
              << std::endl;
    failures += !v.pass;
  }
  return failures ? 1 : 0;
}
