#pragma once

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "fragdyn/engine.hpp"
#include "fragdyn/gate_table.hpp"
#include "fragdyn/model_bs.hpp"
#include "fragdyn/model_itbs.hpp"
#include "fragdyn/model_motzkin.hpp"
#include "fragdyn/observables.hpp"

namespace fragdyn {

// Runs job(i) for i in [0, count) on up to `threads` workers. Results must be
// written to slot i so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// Stream of run `index` under `root`: the documented seed fan-out.
inline Philox run_rng(std::uint64_t root, std::uint64_t index) { return Philox(root).split(index); }

// ---- identity-sector scaling ----------------------------------------------

struct IdentityScaling {
  std::vector<std::size_t> L;
  std::vector<ProportionEstimate> p;
  LinearFit fit;  // -ln p_e = alpha L^{1/3} + c
};

inline IdentityScaling identity_scaling(const std::vector<std::size_t>& Ls, std::uint64_t samples, std::uint64_t root,
                                        unsigned threads = 1) {
  IdentityScaling r;
  r.L = Ls;
  r.p.resize(Ls.size());
  parallel_for(Ls.size(), threads, [&](std::size_t i) {
    Philox rng = run_rng(root, Ls[i]);
    r.p[i] = sample_identity_fraction(Ls[i], samples, rng);
  });
  std::vector<double> x, y;
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    if (r.p[i].hits == 0) continue;
    x.push_back(std::cbrt(static_cast<double>(Ls[i])));
    y.push_back(-std::log(r.p[i].p));
  }
  r.fit = linear_fit(x, y);
  return r;
}

// ---- contrast runs --------------------------------------------------------

struct ContrastRun {
  std::optional<std::uint64_t> t_th;  // nullopt: censored at max_layers
  std::uint64_t layers = 0;
  ObservableSeries series;
};

// Evolves `config` measuring contrast in windows of T layers. After
// thermalization the run continues until `tail` * t_th so the collapse can be
// seen in full; tail = 1 stops at detection.
inline ContrastRun run_contrast(Word config, const WindowSampler& smp, Philox rng, std::uint64_t T,
                                std::uint64_t max_layers, double fraction = 0.1, double tail = 1.0) {
  TrajectoryState s{std::move(config), 0, rng};
  RunSpec spec;
  spec.max_layers = max_layers;
  spec.contrast = ContrastSpec{charge_table(ModelId::BS), T, 1.05, fraction, tail <= 1.0, false};
  Trajectory tr(std::move(s), smp, spec);
  if (tail <= 1.0) {
    tr.run();
  } else {
    std::uint64_t chunk = std::max<std::uint64_t>(T, 1024);
    while (!tr.finished() && !tr.t_th()) tr.advance(tr.state().layer_count + chunk);
    if (tr.t_th())
      tr.advance(std::min<std::uint64_t>(max_layers, static_cast<std::uint64_t>(tail * static_cast<double>(*tr.t_th())) + T));
  }
  return {tr.t_th(), tr.state().layer_count, tr.series()};
}

// Window rule for w_large(n, 10n): T = 4^(n-1) layers, a fixed fraction of the
// expected 2^(2n) collapse time, so the initial window resolves the density wave
// and later windows average away equilibrium fluctuations.
inline std::uint64_t wlarge_window(int n) { return std::uint64_t{1} << (2 * (n - 1)); }

struct WlargePoint {
  int n = 0;
  std::size_t L = 0;
  std::uint64_t T = 0;
  std::vector<ContrastRun> runs;
  CensoredMedian median;
  double width = 0;  // stddev / median over thermalized runs
};

struct WlargeScan {
  std::vector<WlargePoint> points;
  LinearFit fit;  // log2 median t_th against n
  double log2_C = 0;  // t_th ~ C 2^(2n): intercept of a slope-2 fit
};

inline WlargeScan wlarge_scan(const std::vector<int>& ns, std::size_t seeds, std::uint64_t max_layers,
                              std::uint64_t root, unsigned threads = 1, double tail = 1.0,
                              const std::function<std::uint64_t(int)>& window = wlarge_window) {
  const WindowSampler& smp = [] () -> const WindowSampler& { static const WindowSampler s = make_sampler(ModelId::BS); return s; }();
  WlargeScan scan;
  std::vector<double> x, y, off;
  for (int n : ns) {
    WlargePoint pt;
    pt.n = n;
    pt.L = 10 * static_cast<std::size_t>(n);
    pt.T = window(n);
    pt.runs.resize(seeds);
    parallel_for(seeds, threads, [&](std::size_t s) {
      Philox rng = run_rng(root + static_cast<std::uint64_t>(n) * 1000003, s);
      Word w = make_w_large(n, pt.L, rng);
      pt.runs[s] = run_contrast(std::move(w), smp, rng.split(1), pt.T, max_layers, 0.1, tail);
    });
    std::vector<std::optional<double>> obs;
    std::vector<double> done;
    for (const auto& r : pt.runs) {
      obs.push_back(r.t_th ? std::optional<double>(static_cast<double>(*r.t_th)) : std::nullopt);
      if (r.t_th) done.push_back(static_cast<double>(*r.t_th));
    }
    pt.median = censored_median(obs, static_cast<double>(max_layers));
    pt.width = done.empty() ? 0.0 : stddev(done) / median(done);
    if (!pt.median.censored && pt.median.value > 0) {
      x.push_back(n);
      y.push_back(std::log2(pt.median.value));
      off.push_back(std::log2(pt.median.value) - 2.0 * n);
    }
    scan.points.push_back(std::move(pt));
  }
  scan.fit = linear_fit(x, y);
  scan.log2_C = mean(off);
  return scan;
}

// ---- sudden collapse ------------------------------------------------------

struct CollapseAnalysis {
  std::size_t runs = 0;            // thermalized runs examined
  std::size_t sudden = 0;          // contrast >= level * initial for every window before half_point * t_th
  std::vector<double> x, y;        // rescaled time grid and averaged contrast / initial
  double n0 = 0;                   // fitted depth of the collapse curve
  double r2 = 0;
};

inline double interpolate_series(const std::vector<double>& t, const std::vector<double>& v, double at) {
  if (at <= t.front()) return v.front();
  if (at >= t.back()) return v.back();
  auto it = std::upper_bound(t.begin(), t.end(), at);
  std::size_t j = static_cast<std::size_t>(it - t.begin());
  double f = (at - t[j - 1]) / (t[j] - t[j - 1]);
  return v[j - 1] + f * (v[j] - v[j - 1]);
}

// Rescales every thermalized run by its own t_th (window midpoints are used as
// times), averages contrast / initial contrast on a common grid and fits the
// squared collapse curve (normalised to 1 at t = 0) over its depth n0.
inline CollapseAnalysis collapse_analysis(const std::vector<const ContrastRun*>& runs, double level = 0.8,
                                          double half_point = 0.5, std::size_t grid = 60, double x_max = 1.2) {
  CollapseAnalysis a;
  std::vector<std::vector<double>> curves;
  for (const ContrastRun* r : runs) {
    if (!r->t_th || r->series.contrast.empty()) continue;
    const auto& s = r->series;
    double tth = static_cast<double>(*r->t_th), c0 = s.contrast.front();
    ++a.runs;
    bool ok = true;
    for (std::size_t k = 0; k < s.times.size(); ++k)
      if (static_cast<double>(s.times[k]) < half_point * tth && s.contrast[k] < level * c0) ok = false;
    a.sudden += ok;
    std::vector<double> t, v;
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      t.push_back(static_cast<double>(s.times[k]) / tth);
      v.push_back(s.contrast[k] / c0);
    }
    std::vector<double> c;
    for (std::size_t g = 0; g < grid; ++g) c.push_back(interpolate_series(t, v, x_max * static_cast<double>(g) / static_cast<double>(grid - 1)));
    curves.push_back(std::move(c));
  }
  if (curves.empty()) return a;
  for (std::size_t g = 0; g < grid; ++g) {
    double m = 0;
    for (const auto& c : curves) m += c[g];
    a.x.push_back(x_max * static_cast<double>(g) / static_cast<double>(grid - 1));
    a.y.push_back(m / static_cast<double>(curves.size()));
  }
  a.r2 = -std::numeric_limits<double>::infinity();
  for (double n0 = 0.25; n0 <= 40.0; n0 += 0.25) {
    std::vector<double> model;
    for (double xi : a.x) {
      double f = collapse_curve(xi, 1.0, n0) / n0;
      model.push_back(f * f);
    }
    double r2 = r_squared(a.y, model);
    if (r2 > a.r2) a.r2 = r2, a.n0 = n0;
  }
  return a;
}

// ---- jamming --------------------------------------------------------------

struct JammingPoint {
  std::size_t L = 0;
  std::size_t thermalized = 0;
  std::size_t runs = 0;
  double mean_t_th = 0;  // over thermalized runs
};

struct JammingScan {
  std::vector<JammingPoint> points;
  std::optional<double> L_star;  // 1/t_th extrapolated linearly to zero
};

inline JammingScan jamming_scan(int n, const std::vector<std::size_t>& Ls, std::size_t seeds, std::uint64_t max_layers,
                                std::uint64_t T, std::uint64_t root, unsigned threads = 1,
                                const std::function<void(const JammingPoint&)>& progress = {}) {
  const WindowSampler smp = make_sampler(ModelId::BS);
  JammingScan scan;
  for (std::size_t L : Ls) {
    std::vector<std::optional<std::uint64_t>> t(seeds);
    parallel_for(seeds, threads, [&](std::size_t s) {
      Philox rng = run_rng(root + L * 7919, s);
      Word w = make_w_large(n, L, rng);
      t[s] = run_contrast(std::move(w), smp, rng.split(1), T, max_layers).t_th;
    });
    JammingPoint p;
    p.L = L;
    p.runs = seeds;
    std::vector<double> done;
    for (const auto& x : t)
      if (x) done.push_back(static_cast<double>(*x));
    p.thermalized = done.size();
    p.mean_t_th = done.empty() ? 0.0 : mean(done);
    if (progress) progress(p);
    scan.points.push_back(p);
  }
  std::vector<double> x, y;
  for (const auto& p : scan.points)
    if (p.thermalized > 0) x.push_back(static_cast<double>(p.L)), y.push_back(1.0 / p.mean_t_th);
  if (x.size() >= 2) {
    LinearFit f = linear_fit(x, y);
    if (f.slope > 0) scan.L_star = -f.intercept / f.slope;
  }
  return scan;
}

// ---- iterated BS expansion length ------------------------------------------

struct ElProbe {
  std::size_t L = 0;
  bool thermalized = false;
  std::size_t runs_used = 0;
};

struct ElResult {
  int n = 0;
  std::optional<std::size_t> el;  // nullopt: no thermalization up to L_max
  std::vector<ElProbe> probes;
};

// One irreversible run from w_huge(n, L): true when every c, c^-1 annihilates
// within max_layers.
inline bool itbs_irreversible_thermalizes(int n, std::size_t L, std::uint64_t max_layers, Philox rng,
                                          const WindowSampler& smp) {
  TrajectoryState s{make_w_huge(n, L, rng), 0, rng.split(1)};
  RunSpec spec;
  spec.max_layers = max_layers;
  spec.track = TrackSpec{{0, 0, 0, 0, 0, 1, 1}, true};
  Trajectory tr(std::move(s), smp, spec);
  tr.run();
  return tr.reason() == StopReason::TrackedZero;
}

// Minimal L >= |w_huge(n)| at which at least one of `runs` irreversible runs
// thermalizes. More room never hurts, so L is found by doubling the step from
// the core length and then bisecting; a length is accepted at its first
// thermalized run.
inline ElResult itbs_expansion_length(int n, std::size_t runs, std::uint64_t max_layers, std::size_t L_max,
                                      std::uint64_t root) {
  static const WindowSampler smp = make_irreversible_itbs_sampler();
  ElResult res;
  res.n = n;
  std::map<std::size_t, bool> cache;
  auto probe = [&](std::size_t L) {
    auto it = cache.find(L);
    if (it != cache.end()) return it->second;
    ElProbe p;
    p.L = L;
    for (std::size_t r = 0; r < runs && !p.thermalized; ++r) {
      ++p.runs_used;
      p.thermalized = itbs_irreversible_thermalizes(n, L, max_layers, run_rng(root + L * 104729 + static_cast<std::uint64_t>(n), r), smp);
    }
    res.probes.push_back(p);
    cache[L] = p.thermalized;
    return p.thermalized;
  };
  std::size_t lo = w_huge_core(n).size();
  if (probe(lo)) return res.el = lo, res;
  std::size_t step = 1, hi = lo;
  for (;;) {
    hi = std::min(L_max, lo + step);
    if (probe(hi)) break;
    if (hi == L_max) return res;
    lo = hi;
    step *= 2;
  }
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    (probe(mid) ? hi : lo) = mid;
  }
  res.el = hi;
  return res;
}

// ---- random waves ---------------------------------------------------------

struct WavePoint {
  int n = 0;
  std::size_t L = 0;
  std::vector<std::optional<std::uint64_t>> t_th;
  CensoredMedian median;
  std::size_t skipped = 0;  // initial states with zero contrast
};

inline WavePoint random_wave_point(int n, std::size_t seeds, std::uint64_t T, std::uint64_t max_layers, std::uint64_t root,
                                   unsigned threads = 1) {
  const WindowSampler& smp = [] () -> const WindowSampler& { static const WindowSampler s = make_sampler(ModelId::BS); return s; }();
  WavePoint p;
  p.n = n;
  p.L = 10 * static_cast<std::size_t>(n);
  p.t_th.resize(seeds);
  parallel_for(seeds, threads, [&](std::size_t s) {
    Philox rng = run_rng(root + static_cast<std::uint64_t>(n) * 31337, s);
    Word w = make_random_wave(n, p.L, rng);
    p.t_th[s] = run_contrast(std::move(w), smp, rng.split(1), T, max_layers).t_th;
  });
  std::vector<std::optional<double>> obs;
  for (const auto& t : p.t_th) obs.push_back(t ? std::optional<double>(static_cast<double>(*t)) : std::nullopt);
  p.median = censored_median(obs, static_cast<double>(max_layers));
  return p;
}

// ---- geometry -------------------------------------------------------------

struct GeometryPoint {
  std::size_t L = 0;
  double median_proxy = 0;  // median of (k + l + log2(|n|+1)) / sqrt(L)
  double median_log_n = 0;  // median of log2(|n|+1) / sqrt(L)
};

inline std::vector<GeometryPoint> geometry_scan(const std::vector<std::size_t>& Ls, std::uint64_t samples,
                                                std::uint64_t root, unsigned threads = 1) {
  std::vector<GeometryPoint> out(Ls.size());
  parallel_for(Ls.size(), threads, [&](std::size_t i) {
    Philox rng = run_rng(root, Ls[i]);
    auto recs = geometry_histograms(Ls[i], samples, rng);
    std::vector<double> proxy, logn;
    double s = std::sqrt(static_cast<double>(Ls[i]));
    for (const auto& r : recs) {
      proxy.push_back((static_cast<double>(r.k + r.l) + r.log2_n_abs) / s);
      logn.push_back(r.log2_n_abs / s);
    }
    out[i] = {Ls[i], median(proxy), median(logn)};
  });
  return out;
}

// Largest relative deviation from the mean of a set of values.
inline double relative_spread(const std::vector<double>& v) {
  double m = mean(v), d = 0;
  for (double x : v) d = std::max(d, std::abs(x - m) / m);
  return d;
}

// ---- conservation and gate uniformity ---------------------------------------

struct ConservationReport {
  std::uint64_t moves = 0;
  std::uint64_t violations = 0;
};

// Random configurations receive one random gate at a random window; the sector
// label and the model's local charges must be unchanged.
inline ConservationReport conservation_check(ModelId m, std::uint64_t trials, std::size_t L, std::uint64_t root) {
  const WindowSampler smp = make_sampler(m);
  const auto S = smp.S;
  Philox rng = run_rng(root, static_cast<std::uint64_t>(m));
  ConservationReport rep;
  Word w;
  auto charges = [&](const Word& x) {
    std::vector<BigInt> c;
    switch (m) {
      case ModelId::BS: c.push_back(n_b(x)); break;
      case ModelId::ITBS: c.push_back(n_c(x)); break;
      case ModelId::Star:
      case ModelId::Chiral: c.push_back(charge_Q(x)); break;
      case ModelId::PairFlip: break;
    }
    return c;
  };
  for (std::uint64_t t = 0; t < trials; ++t) {
    random_word(w, L, S, rng);
    std::string before = sector_label(m, w);
    auto q0 = charges(w);
    // Several gates per trial so that moves compound.
    for (int g = 0; g < 4; ++g) {
      std::size_t p = rng.bounded(static_cast<std::uint32_t>(L - 2));
      std::uint32_t win = window_code(&w[p], S);
      const auto& d = smp.digits[smp.sample(win, rng)];
      w[p] = d[0], w[p + 1] = d[1], w[p + 2] = d[2];
      ++rep.moves;
    }
    if (sector_label(m, w) != before || charges(w) != q0) ++rep.violations;
  }
  return rep;
}

struct UniformityReport {
  std::size_t classes_tested = 0;
  std::size_t failures = 0;
  double min_p = 1.0;
  double threshold = 0;  // Bonferroni-corrected per-class level
};

// Chi-square test that the engine's gate law is uniform over each class, from
// every member of every class with more than one member.
inline UniformityReport gate_uniformity(ModelId m, std::uint64_t draws_per_member, std::uint64_t root,
                                        double family_alpha = 1e-3) {
  const WindowClassTable& t = build_table(m);
  const WindowSampler smp = make_sampler(m);
  Philox rng = run_rng(root, 100 + static_cast<std::uint64_t>(m));
  UniformityReport rep;
  std::size_t tests = 0;
  for (const auto& mem : t.members) tests += mem.size() > 1 ? mem.size() : 0;
  rep.threshold = family_alpha / static_cast<double>(std::max<std::size_t>(tests, 1));
  for (const auto& mem : t.members) {
    if (mem.size() < 2) continue;
    ++rep.classes_tested;
    std::map<std::uint32_t, std::size_t> slot;
    for (std::size_t i = 0; i < mem.size(); ++i) slot[mem[i]] = i;
    for (std::uint32_t from : mem) {
      std::vector<double> counts(mem.size(), 0);
      for (std::uint64_t d = 0; d < draws_per_member; ++d) counts[slot.at(smp.sample(from, rng))] += 1;
      double e = static_cast<double>(draws_per_member) / static_cast<double>(mem.size()), chi = 0;
      for (double c : counts) chi += (c - e) * (c - e) / e;
      boost::math::chi_squared dist(static_cast<double>(mem.size() - 1));
      double p = boost::math::cdf(boost::math::complement(dist, chi));
      rep.min_p = std::min(rep.min_p, p);
      if (p < rep.threshold) ++rep.failures;
    }
  }
  return rep;
}

}  // namespace fragdyn
