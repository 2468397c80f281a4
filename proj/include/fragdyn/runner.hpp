#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "fragdyn/config.hpp"
#include "fragdyn/engine.hpp"
#include "fragdyn/experiments.hpp"
#include "fragdyn/model_bs.hpp"
#include "fragdyn/model_itbs.hpp"
#include "fragdyn/model_motzkin.hpp"
#include "fragdyn/oracle.hpp"

namespace fragdyn {

// Experiment front door. Data files depend only on (config, seed); wall time
// and thread count live in the summary record's meta field.

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  bool resume = false;
};

struct RunOutcome {
  nlohmann::json results;
  std::vector<std::string> files;  // relative to out_dir
};

namespace rdetail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

class Outputs {
 public:
  Outputs(const RunOptions& o, RunOutcome& r) : opt_(o), out_(r) { std::filesystem::create_directories(o.out_dir); }

  void write(const std::string& name, const std::string& content) {
    auto path = opt_.out_dir / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
    f << content;
    out_.files.push_back(name);
  }

 private:
  const RunOptions& opt_;
  RunOutcome& out_;
};

// Atomic checkpoint write: a reader never sees a half-written file.
inline void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& j) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << j.dump();
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<std::size_t> sizes(const std::vector<std::int64_t>& v) {
  std::vector<std::size_t> out;
  for (auto x : v) {
    if (x < 0) throw Error(Errc::InvalidConfig, "negative size in list");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

inline std::vector<int> ints(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

inline OracleBudget budget(const ExperimentConfig& c) {
  OracleBudget b;
  if (c.has("max_states")) b.max_states = c.u64("max_states");
  return b;
}

inline const Alphabet& alphabet(ModelId m) { return presentation(m).alphabet; }

// ---- simulate -----------------------------------------------------------

inline nlohmann::json run_simulate(const ExperimentConfig& c, const RunOptions& opt, Outputs& out) {
  const ModelId model = parse_model(c.str("model"));
  const std::string init = c.str("init");
  const bool irreversible = c.flag("irreversible");
  const std::size_t L = static_cast<std::size_t>(c.integer("L"));
  const int n = static_cast<int>(c.integer("n"));
  const std::size_t seeds = static_cast<std::size_t>(c.integer("seeds", 1));
  const std::uint64_t root = c.u64("seed"), max_layers = c.u64("max_layers");
  const std::uint64_t T = c.u64("T", n > 0 ? wlarge_window(n) : 1000);
  const std::uint64_t every = c.u64("checkpoint_every", 0);
  const std::string tag = model_name(model) + (irreversible ? "-irreversible" : "");
  const WindowSampler smp = irreversible ? make_irreversible_itbs_sampler() : make_sampler(model);
  const std::string hash = c.hash();

  auto initial = [&](Philox& rng) -> Word {
    if (init == "w_large") return make_w_large(n, L, rng);
    if (init == "random_wave") return make_random_wave(n, L, rng);
    if (init == "w_huge") return make_w_huge(n, L, rng);
    Word w = parse_word(c.str("word"), alphabet(model));
    if (w.size() > L) throw Error(Errc::InvalidConfig, "word longer than L");
    return odetail::pad_right(w, L, model);
  };
  RunSpec spec;
  spec.max_layers = max_layers;
  if (irreversible)
    spec.track = TrackSpec{{0, 0, 0, 0, 0, 1, 1}, true};
  else
    spec.contrast = ContrastSpec{charge_table(model), T, 1.05, c.real("fraction", 0.1), true, false};

  std::vector<nlohmann::json> runs(seeds);
  std::vector<ObservableSeries> series(seeds);
  parallel_for(seeds, opt.threads, [&](std::size_t s) {
    auto ck = opt.out_dir / "checkpoints" / ("seed_" + std::to_string(s) + ".json");
    std::optional<Trajectory> tr;
    if (opt.resume && std::filesystem::exists(ck)) {
      std::ifstream f(ck);
      nlohmann::json j = nlohmann::json::parse(f);
      if (j.value("config_hash", "") != hash)
        throw Error(Errc::ResumeMismatch, "checkpoint " + ck.string() + " was written for config " +
                                              j.value("config_hash", "?") + ", not " + hash);
      tr.emplace(Trajectory::resume(j.at("trajectory"), smp, tag));
    } else {
      Philox rng = run_rng(root, s);
      Word w = initial(rng);
      tr.emplace(TrajectoryState{std::move(w), 0, rng.split(1)}, smp, spec, tag);
    }
    while (!tr->finished()) {
      tr->advance(every ? tr->state().layer_count + every : max_layers);
      if (every) write_checkpoint(ck, {{"config_hash", hash}, {"seed_index", s}, {"trajectory", tr->checkpoint()}});
    }
    nlohmann::json r{{"seed_index", s}, {"layers", tr->state().layer_count}, {"reason", stop_reason_name(tr->reason())}};
    if (irreversible) {
      r["thermalized"] = tr->reason() == StopReason::TrackedZero;
      r["t_th"] = r["thermalized"].get<bool>() ? nlohmann::json(tr->state().layer_count) : nlohmann::json(nullptr);
    } else {
      r["thermalized"] = tr->t_th().has_value();
      r["t_th"] = tr->t_th() ? nlohmann::json(*tr->t_th()) : nlohmann::json(nullptr);
    }
    r["final"] = format_word(tr->state().config, alphabet(model));
    runs[s] = r;
    series[s] = tr->series();
  });

  std::ostringstream rc, sc;
  rc << "seed_index,thermalized,t_th,layers\n";
  sc << "seed_index,t_layer,contrast\n";
  std::vector<std::optional<double>> obs;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto& r = runs[s];
    bool th = r["thermalized"].get<bool>();
    rc << s << ',' << (th ? 1 : 0) << ',' << (th ? std::to_string(r["t_th"].get<std::uint64_t>()) : "nan") << ','
       << r["layers"].get<std::uint64_t>() << '\n';
    obs.push_back(th ? std::optional<double>(r["t_th"].get<double>()) : std::nullopt);
    for (std::size_t k = 0; k < series[s].times.size(); ++k)
      sc << s << ',' << series[s].times[k] << ',' << fmt(series[s].contrast[k]) << '\n';
  }
  out.write("runs.csv", rc.str());
  if (!irreversible) out.write("series.csv", sc.str());
  CensoredMedian med = censored_median(obs, static_cast<double>(max_layers));
  return {{"runs", runs}, {"median_t_th", med.value}, {"median_censored", med.censored}, {"T", irreversible ? 0 : T}};
}

// ---- oracle ---------------------------------------------------------------

inline nlohmann::json run_oracle(const ExperimentConfig& c, Outputs& out) {
  const ModelId m = parse_model(c.str("model"));
  const std::string op = c.str("op");
  const OracleBudget b = budget(c);
  const Alphabet& al = alphabet(m);
  auto word = [&](const std::string& key) { return parse_word(c.str(key), al); };
  if (op == "sectors") {
    SectorPartition sp = enumerate_sectors(m, static_cast<std::size_t>(c.integer("L")), b);
    std::ostringstream os;
    os << "component,size,label\n";
    std::size_t k = 0;
    for (const auto& [id, ws] : sp.by_moves) os << k++ << ',' << ws.size() << ",\"" << sector_label(m, ws.front()) << "\"\n";
    out.write("components.csv", os.str());
    return {{"evaluator_sectors", sp.by_evaluator.size()},
            {"move_components", sp.by_moves.size()},
            {"largest_evaluator_sector", sp.largest_evaluator_sector()}};
  }
  if (op == "fragile") {
    std::size_t L = static_cast<std::size_t>(c.integer("L"));
    auto fs = detect_fragile(m, L, static_cast<std::size_t>(c.integer("L_max", static_cast<std::int64_t>(L) + 4)), b);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : fs) {
      nlohmann::json pairs = nlohmann::json::array();
      for (const auto& p : f.pairs)
        pairs.push_back({{"a", format_word(p.a, al)},
                         {"b", format_word(p.b, al)},
                         {"min_length", p.min_length ? nlohmann::json(*p.min_length) : nlohmann::json(nullptr)}});
      arr.push_back({{"label", f.label}, {"component_sizes", f.component_sizes}, {"pairs", pairs}});
    }
    return {{"fragile_sectors", arr}};
  }
  if (op == "markov") {
    MarkovAnalysis a = sector_markov_analysis(m, word("word"), static_cast<std::size_t>(c.u64("max_states", 3000)));
    nlohmann::json j = to_json(a);
    j["diameter"] = move_diameter(word("word"), m, b);
    return j;
  }
  if (op == "area") {
    AreaResult r = min_area(word("word"), m, static_cast<std::size_t>(c.integer("scratch", 0)), b);
    return {{"area", r.area}, {"length", r.length}, {"explored", r.explored}, {"complete", r.complete}};
  }
  if (op == "distance") {
    auto d = bfs_distance(word("word"), word("word2"), m, b);
    return {{"distance", d ? nlohmann::json(*d) : nlohmann::json(nullptr)}};
  }
  auto len = min_connecting_length(word("word"), word("word2"), m,
                                   static_cast<std::size_t>(c.integer("L_max", static_cast<std::int64_t>(c.str("word").size()) + 8)), b);
  return {{"min_length", len ? nlohmann::json(*len) : nlohmann::json(nullptr)}};
}

// ---- geometry and identity sector --------------------------------------------

inline nlohmann::json run_geometry(const ExperimentConfig& c, Outputs& out) {
  const bool cond = c.flag("conditioned");
  const std::uint64_t samples = c.u64("samples"), root = c.u64("seed");
  std::ostringstream summary;
  summary << "L,median_proxy,median_log_n\n";
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t L : sizes(c.list("Ls"))) {
    Philox rng = run_rng(root, L);
    auto recs = geometry_histograms(L, samples, rng, cond);
    std::ostringstream os;
    os << "L,seed,k,l,n_b,log2_n_abs,in_identity_sector\n";
    std::vector<double> proxy, logn;
    const double s = std::sqrt(static_cast<double>(L));
    for (const auto& r : recs) {
      os << L << ',' << root << ',' << r.k << ',' << r.l << ',' << r.n_b << ',' << fmt(r.log2_n_abs) << ','
         << (r.in_identity_sector ? 1 : 0) << '\n';
      proxy.push_back((static_cast<double>(r.k + r.l) + r.log2_n_abs) / s);
      logn.push_back(r.log2_n_abs / s);
    }
    out.write("geometry_L" + std::to_string(L) + ".csv", os.str());
    double mp = median(proxy), ml = median(logn);
    summary << L << ',' << fmt(mp) << ',' << fmt(ml) << '\n';
    pts.push_back({{"L", L}, {"median_proxy", mp}, {"median_log_n", ml}});
  }
  out.write("geometry.csv", summary.str());
  return {{"points", pts}};
}

inline nlohmann::json run_identity(const ExperimentConfig& c, const RunOptions& opt, Outputs& out) {
  IdentityScaling r = identity_scaling(sizes(c.list("Ls")), c.u64("samples"), c.u64("seed"), opt.threads);
  std::ostringstream os;
  os << "L,p,lo,hi\n";
  for (std::size_t i = 0; i < r.L.size(); ++i)
    os << r.L[i] << ',' << fmt(r.p[i].p) << ',' << fmt(r.p[i].lower) << ',' << fmt(r.p[i].upper) << '\n';
  out.write("identity.csv", os.str());
  return {{"alpha", r.fit.slope}, {"intercept", r.fit.intercept}, {"r2", r.fit.r2}};
}

inline nlohmann::json run_motzkin(const ExperimentConfig& c, Outputs& out) {
  const ModelId m = parse_model(c.str("model"));
  Word w = parse_word(c.str("word"), alphabet(m));
  auto region = sizes(c.list("region"));
  if (region[0] > region[1] || region[1] > w.size()) throw Error(Errc::InvalidConfig, "region outside the word");
  std::vector<std::size_t> extras = c.has("extra_space") ? sizes(c.list("extra_space")) : std::vector<std::size_t>{0, 4};
  std::ostringstream os;
  os << "extra_space,star_count\n";
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t e : extras) {
    ReachableCounts r = reachable_star_counts(m, w, region[0], region[1], e, c.u64("cap", 5'000'000));
    for (long k : r.counts) os << e << ',' << k << '\n';
    pts.push_back({{"extra_space", e}, {"counts", r.counts}, {"complete", r.complete}, {"states", r.states}});
  }
  out.write("star_counts.csv", os.str());
  return {{"points", pts}};
}

// ---- scans ----------------------------------------------------------------

inline nlohmann::json run_jamming(const ExperimentConfig& c, const RunOptions& opt, Outputs& out) {
  const int n = static_cast<int>(c.integer("n"));
  JammingScan s = jamming_scan(n, sizes(c.list("Ls")), static_cast<std::size_t>(c.integer("seeds")), c.u64("max_layers"),
                               c.u64("T", 100000), c.u64("seed"), opt.threads);
  std::ostringstream os;
  os << "L,runs,thermalized,mean_t_th\n";
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points) {
    os << p.L << ',' << p.runs << ',' << p.thermalized << ',' << fmt(p.mean_t_th) << '\n';
    pts.push_back({{"L", p.L}, {"runs", p.runs}, {"thermalized", p.thermalized}, {"mean_t_th", p.mean_t_th}});
  }
  out.write("jamming.csv", os.str());
  return {{"points", pts}, {"L_star", s.L_star ? nlohmann::json(*s.L_star) : nlohmann::json(nullptr)}};
}

inline nlohmann::json run_el(const ExperimentConfig& c, Outputs& out) {
  std::ostringstream os;
  os << "n,el\n";
  nlohmann::json pts = nlohmann::json::array();
  for (int n : ints(c.list("ns"))) {
    ElResult r = itbs_expansion_length(n, static_cast<std::size_t>(c.integer("runs")), c.u64("max_layers"),
                                       static_cast<std::size_t>(c.integer("L_max", 4096)), c.u64("seed"));
    os << n << ',' << (r.el ? std::to_string(*r.el) : "nan") << '\n';
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& p : r.probes) probes.push_back({{"L", p.L}, {"thermalized", p.thermalized}, {"runs_used", p.runs_used}});
    pts.push_back({{"n", n}, {"el", r.el ? nlohmann::json(*r.el) : nlohmann::json(nullptr)}, {"probes", probes}});
  }
  out.write("expansion_length.csv", os.str());
  return {{"points", pts}};
}

inline nlohmann::json run_wlarge(const ExperimentConfig& c, const RunOptions& opt, Outputs& out) {
  WlargeScan s = wlarge_scan(ints(c.list("ns")), static_cast<std::size_t>(c.integer("seeds")), c.u64("max_layers"),
                             c.u64("seed"), opt.threads);
  std::ostringstream pts_csv, runs_csv;
  pts_csv << "n,L,T,median_t_th,censored,width\n";
  runs_csv << "n,seed_index,thermalized,t_th\n";
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points) {
    pts_csv << p.n << ',' << p.L << ',' << p.T << ',' << fmt(p.median.value) << ',' << (p.median.censored ? 1 : 0) << ','
            << fmt(p.width) << '\n';
    for (std::size_t k = 0; k < p.runs.size(); ++k)
      runs_csv << p.n << ',' << k << ',' << (p.runs[k].t_th ? 1 : 0) << ','
               << (p.runs[k].t_th ? std::to_string(*p.runs[k].t_th) : "nan") << '\n';
    pts.push_back({{"n", p.n}, {"T", p.T}, {"median_t_th", p.median.value}, {"censored", p.median.censored}, {"width", p.width}});
  }
  out.write("wlarge.csv", pts_csv.str());
  out.write("wlarge_runs.csv", runs_csv.str());
  return {{"points", pts}, {"slope", s.fit.slope}, {"r2", s.fit.r2}, {"log2_C", s.log2_C}};
}

inline nlohmann::json run_wave(const ExperimentConfig& c, const RunOptions& opt, Outputs& out) {
  std::ostringstream os;
  os << "n,L,median_t_th,censored\n";
  nlohmann::json pts = nlohmann::json::array();
  for (int n : ints(c.list("ns"))) {
    WavePoint p = random_wave_point(n, static_cast<std::size_t>(c.integer("seeds")), c.u64("T", 100), c.u64("max_layers"),
                                    c.u64("seed"), opt.threads);
    os << n << ',' << p.L << ',' << fmt(p.median.value) << ',' << (p.median.censored ? 1 : 0) << '\n';
    pts.push_back({{"n", n}, {"median_t_th", p.median.value}, {"censored", p.median.censored}});
  }
  out.write("waves.csv", os.str());
  return {{"points", pts}};
}

}  // namespace rdetail

// Runs a validated config. Files land in opt.out_dir; the returned results go
// into the summary record.
inline RunOutcome run_experiment(const ExperimentConfig& c, const RunOptions& opt) {
  RunOutcome r;
  rdetail::Outputs out(opt, r);
  const std::string& k = c.kind();
  if (k == "simulate") r.results = rdetail::run_simulate(c, opt, out);
  else if (k == "oracle") r.results = rdetail::run_oracle(c, out);
  else if (k == "geometry") r.results = rdetail::run_geometry(c, out);
  else if (k == "identity-scaling") r.results = rdetail::run_identity(c, opt, out);
  else if (k == "motzkin-probe") r.results = rdetail::run_motzkin(c, out);
  else if (k == "jamming-scan") r.results = rdetail::run_jamming(c, opt, out);
  else if (k == "itbs-el-scan") r.results = rdetail::run_el(c, out);
  else if (k == "wlarge-scan") r.results = rdetail::run_wlarge(c, opt, out);
  else if (k == "wave-scan") r.results = rdetail::run_wave(c, opt, out);
  else throw Error(Errc::InvalidConfig, "unknown kind '" + k + "'");
  return r;
}

inline nlohmann::json summary_record(const ExperimentConfig& c, const RunOutcome& r, double wall_seconds, unsigned threads) {
  return {{"config_hash", c.hash()},
          {"code_version", kCodeVersion},
          {"rng", kRngTag},
          {"kind", c.kind()},
          {"seed", c.u64("seed")},
          {"config", c.text},
          {"results", r.results},
          {"files", r.files},
          {"meta", {{"wall_seconds", wall_seconds}, {"threads", threads}}}};
}

// Subcommand to accepted kinds.
inline bool kind_matches(const std::string& subcommand, const std::string& kind) {
  if (subcommand == "motzkin") return kind == "motzkin-probe";
  if (subcommand == "scan")
    return kind == "jamming-scan" || kind == "itbs-el-scan" || kind == "wlarge-scan" || kind == "wave-scan" ||
           kind == "identity-scaling";
  return subcommand == kind;
}

}  // namespace fragdyn
