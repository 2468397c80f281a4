#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/gate_table.hpp"
#include "fragdyn/observables.hpp"
#include "fragdyn/rng.hpp"

namespace fragdyn {

struct TrajectoryState {
  Configuration config;
  std::uint64_t layer_count = 0;
  Philox rng;
};

// One brickwork layer: gates on the windows starting at offset, offset+3, ...
// with offset = layer_count mod 3. on_change(position, old_window, new_window)
// fires for every window whose content changed.
template <class OnChange>
inline void step_layer(TrajectoryState& s, const WindowSampler& smp, OnChange&& on_change) {
  const std::size_t L = s.config.size();
  if (L < 3) throw Error(Errc::ChainTooShort, "brickwork needs at least three sites");
  const std::uint32_t S = smp.S;
  Symbol* c = s.config.data();
  for (std::size_t p = s.layer_count % 3; p + 3 <= L; p += 3) {
    std::uint32_t w = (c[p] * S + c[p + 1]) * S + c[p + 2];
    std::uint32_t n = smp.count[w];
    if (n == 1) continue;
    std::uint32_t t = smp.targets[smp.begin[w] + s.rng.bounded(n)];
    if (t == w) continue;
    const auto& d = smp.digits[t];
    c[p] = d[0];
    c[p + 1] = d[1];
    c[p + 2] = d[2];
    on_change(p, w, t);
  }
  ++s.layer_count;
}

inline void step_layer(TrajectoryState& s, const WindowSampler& smp) {
  step_layer(s, smp, [](std::size_t, std::uint32_t, std::uint32_t) {});
}

struct ContrastSpec {
  std::vector<int> charge;  // per symbol
  std::uint64_t T = 100000;
  double ratio = 1.05;
  double fraction = 0.1;
  bool stop_when_thermalized = true;
  bool record_profiles = false;
};

// Incrementally tracked sum of a per-symbol weight, e.g. the number of c, c^-1.
struct TrackSpec {
  std::vector<int> weight;
  bool stop_at_zero = true;
};

struct RunSpec {
  std::uint64_t max_layers = 0;
  std::optional<ContrastSpec> contrast;
  std::optional<TrackSpec> track;
};

enum class StopReason { Running, MaxLayers, Thermalized, TrackedZero };

inline std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::Running: return "running";
    case StopReason::MaxLayers: return "max_layers";
    case StopReason::Thermalized: return "thermalized";
    case StopReason::TrackedZero: return "tracked_zero";
  }
  return "?";
}

inline constexpr const char* kCheckpointVersion = "fragdyn-checkpoint/1";

// A resumable trajectory with its observers. Contrast is measured in
// non-overlapping windows [t_k, t_k + T) on the grid t_{k+1} = max(t_k + T,
// ceil(ratio t_k)); site values are integrated lazily, only when they change.
class Trajectory {
 public:
  Trajectory(TrajectoryState init, const WindowSampler& sampler, RunSpec spec, std::string sampler_tag = "")
      : st_(std::move(init)), smp_(&sampler), spec_(std::move(spec)), tag_(std::move(sampler_tag)) {
    const std::size_t L = st_.config.size();
    if (spec_.contrast) {
      if (spec_.contrast->T == 0) throw Error(Errc::InvalidArgument, "window T must be positive");
      acc_.assign(L, 0);
      since_.assign(L, st_.layer_count);
      ws_ = st_.layer_count;
    }
    if (spec_.track) {
      tracked_ = 0;
      for (Symbol x : st_.config) tracked_ += spec_.track->weight.at(x);
      if (spec_.track->stop_at_zero && tracked_ == 0) reason_ = StopReason::TrackedZero;
    }
  }

  void advance(std::uint64_t until_layer) {
    until_layer = std::min(until_layer, spec_.max_layers);
    while (reason_ == StopReason::Running && st_.layer_count < until_layer) {
      if (spec_.contrast && st_.layer_count == ws_ + spec_.contrast->T) {
        close_window();
        if (reason_ != StopReason::Running) break;
      }
      const std::uint64_t t1 = st_.layer_count + 1;
      step_layer(st_, *smp_, [&](std::size_t p, std::uint32_t from, std::uint32_t to) {
        const auto& a = smp_->digits[from];
        const auto& b = smp_->digits[to];
        for (std::size_t j = 0; j < 3; ++j) {
          if (a[j] == b[j]) continue;
          if (spec_.track) tracked_ += spec_.track->weight[b[j]] - spec_.track->weight[a[j]];
          if (spec_.contrast) {
            const auto& q = spec_.contrast->charge;
            if (q[a[j]] != q[b[j]]) {
              std::size_t i = p + j;
              std::uint64_t lo = std::max(since_[i], ws_);
              if (t1 > lo) acc_[i] += static_cast<std::int64_t>(q[a[j]]) * static_cast<std::int64_t>(t1 - lo);
              since_[i] = t1;
            }
          }
        }
      });
      if (spec_.track && spec_.track->stop_at_zero && tracked_ == 0) reason_ = StopReason::TrackedZero;
    }
    if (reason_ == StopReason::Running && spec_.contrast && st_.layer_count == ws_ + spec_.contrast->T &&
        st_.layer_count < spec_.max_layers)
      close_window();
    if (reason_ == StopReason::Running && st_.layer_count >= spec_.max_layers) {
      if (spec_.contrast && st_.layer_count == ws_ + spec_.contrast->T) close_window();
      if (reason_ == StopReason::Running) reason_ = StopReason::MaxLayers;
    }
  }

  void run() { advance(spec_.max_layers); }

  bool finished() const { return reason_ != StopReason::Running; }
  StopReason reason() const { return reason_; }
  const TrajectoryState& state() const { return st_; }
  const ObservableSeries& series() const { return series_; }
  std::optional<std::uint64_t> t_th() const { return t_th_; }
  long tracked() const { return tracked_; }

  nlohmann::json checkpoint() const {
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["sampler_tag"] = tag_;
    j["config"] = st_.config;
    j["layer_count"] = st_.layer_count;
    j["rng"] = {st_.rng.state().key, st_.rng.state().counter, st_.rng.state().used};
    j["max_layers"] = spec_.max_layers;
    if (spec_.contrast) {
      const auto& c = *spec_.contrast;
      j["contrast"] = {{"charge", c.charge},   {"T", c.T},
                       {"ratio", c.ratio},     {"fraction", c.fraction},
                       {"stop", c.stop_when_thermalized}, {"profiles", c.record_profiles}};
      j["acc"] = acc_;
      j["since"] = since_;
      j["ws"] = ws_;
    }
    if (spec_.track) j["track"] = {{"weight", spec_.track->weight}, {"stop", spec_.track->stop_at_zero}};
    j["tracked"] = tracked_;
    j["series"] = {{"times", series_.times}, {"contrast", series_.contrast}, {"profile", series_.profile},
                   {"aux", series_.aux}};
    j["t_th"] = t_th_ ? nlohmann::json(*t_th_) : nlohmann::json(nullptr);
    j["reason"] = static_cast<int>(reason_);
    return j;
  }

  static Trajectory resume(const nlohmann::json& j, const WindowSampler& sampler, const std::string& sampler_tag = "") {
    if (j.value("version", "") != kCheckpointVersion)
      throw Error(Errc::ResumeMismatch, "unsupported checkpoint version");
    if (j.at("sampler_tag").get<std::string>() != sampler_tag)
      throw Error(Errc::ResumeMismatch, "checkpoint was written for a different gate sampler");
    TrajectoryState s;
    s.config = j.at("config").get<Word>();
    s.layer_count = j.at("layer_count").get<std::uint64_t>();
    Philox::State rs;
    rs.key = j.at("rng")[0].get<std::uint64_t>();
    rs.counter = j.at("rng")[1].get<std::uint64_t>();
    rs.used = j.at("rng")[2].get<std::uint32_t>();
    s.rng.set_state(rs);
    RunSpec spec;
    spec.max_layers = j.at("max_layers").get<std::uint64_t>();
    if (j.contains("contrast")) {
      const auto& c = j["contrast"];
      spec.contrast = ContrastSpec{c.at("charge").get<std::vector<int>>(), c.at("T").get<std::uint64_t>(),
                                   c.at("ratio").get<double>(),         c.at("fraction").get<double>(),
                                   c.at("stop").get<bool>(),            c.at("profiles").get<bool>()};
    }
    if (j.contains("track")) spec.track = TrackSpec{j["track"].at("weight").get<std::vector<int>>(), j["track"].at("stop").get<bool>()};
    Trajectory t(std::move(s), sampler, spec, sampler_tag);
    if (spec.contrast) {
      t.acc_ = j.at("acc").get<std::vector<std::int64_t>>();
      t.since_ = j.at("since").get<std::vector<std::uint64_t>>();
      t.ws_ = j.at("ws").get<std::uint64_t>();
    }
    t.tracked_ = j.at("tracked").get<long>();
    t.series_.times = j["series"]["times"].get<std::vector<std::uint64_t>>();
    t.series_.contrast = j["series"]["contrast"].get<std::vector<double>>();
    t.series_.profile = j["series"]["profile"].get<std::vector<std::vector<double>>>();
    t.series_.aux = j["series"]["aux"].get<std::map<std::string, std::vector<double>>>();
    if (!j["t_th"].is_null()) t.t_th_ = j["t_th"].get<std::uint64_t>();
    t.reason_ = static_cast<StopReason>(j.at("reason").get<int>());
    return t;
  }

 private:
  void close_window() {
    const auto& c = *spec_.contrast;
    const std::uint64_t we = ws_ + c.T;
    const std::size_t L = st_.config.size();
    std::vector<double> means(L);
    for (std::size_t i = 0; i < L; ++i) {
      std::uint64_t lo = std::max(since_[i], ws_);
      std::int64_t a = acc_[i];
      if (we > lo) a += static_cast<std::int64_t>(c.charge[st_.config[i]]) * static_cast<std::int64_t>(we - lo);
      means[i] = static_cast<double>(a) / static_cast<double>(c.T);
      acc_[i] = 0;
    }
    double k = contrast_of_means(means);
    series_.times.push_back(ws_);
    series_.contrast.push_back(k);
    if (spec_.track) series_.aux["tracked"].push_back(static_cast<double>(tracked_));
    if (c.record_profiles) series_.profile.push_back(means);
    if (!t_th_ && series_.contrast.front() > 0 && k < c.fraction * series_.contrast.front()) {
      t_th_ = ws_;
      if (c.stop_when_thermalized) reason_ = StopReason::Thermalized;
    }
    std::uint64_t next = std::max(we, static_cast<std::uint64_t>(std::ceil(c.ratio * static_cast<double>(ws_))));
    ws_ = next;
  }

  TrajectoryState st_;
  const WindowSampler* smp_;
  RunSpec spec_;
  std::string tag_;
  std::vector<std::int64_t> acc_;
  std::vector<std::uint64_t> since_;
  std::uint64_t ws_ = 0;
  long tracked_ = 0;
  ObservableSeries series_;
  std::optional<std::uint64_t> t_th_;
  StopReason reason_ = StopReason::Running;
};

struct DecoupleResult {
  Configuration config;
  bool stuck = false;  // the end cell never read as identity within the patience bound
  std::uint64_t measurements = 0;
  std::uint64_t accepted = 0;
  long min_nonidentity = 0;  // fewest non-identity cells seen at a measurement
};

// Classical compression: append ancillas, thermalize, then repeatedly read the
// last cell, drop it when it is the identity, and rethermalize. Stops at
// `floor_length`, or when `patience` consecutive reads fail.
inline DecoupleResult decouple_protocol(const Configuration& config0, std::size_t ancilla_count, std::uint64_t t_th,
                                        std::uint64_t t_retherm, Philox& rng, const WindowSampler& sampler,
                                        Symbol identity, std::uint64_t patience, std::size_t floor_length) {
  TrajectoryState s;
  s.config = config0;
  s.config.insert(s.config.end(), ancilla_count, identity);
  s.rng = rng;
  auto evolve = [&](std::uint64_t layers) {
    if (s.config.size() < 3) return;
    for (std::uint64_t i = 0; i < layers; ++i) step_layer(s, sampler);
  };
  auto nonid = [&] {
    long n = 0;
    for (Symbol x : s.config) n += x != identity;
    return n;
  };
  DecoupleResult r;
  evolve(t_th);
  r.min_nonidentity = nonid();
  std::uint64_t failures = 0;
  while (s.config.size() > floor_length) {
    ++r.measurements;
    // Below three cells no gate can rethermalize, so the last cells above the
    // floor are read together and dropped only when all are identities.
    const std::size_t drop = s.config.size() <= 3 ? s.config.size() - floor_length : 1;
    if (std::all_of(s.config.end() - static_cast<long>(drop), s.config.end(), [&](Symbol x) { return x == identity; })) {
      s.config.resize(s.config.size() - drop);
      r.accepted += drop;
      failures = 0;
    } else if (++failures >= patience) {
      r.stuck = true;
      break;
    }
    evolve(t_retherm);
    r.min_nonidentity = std::min(r.min_nonidentity, nonid());
  }
  rng = s.rng;
  r.config = s.config;
  return r;
}

// Geodesic-length estimate: compress with no floor beyond the three cells the
// gates need, keep measuring until the end freezes, and report the fewest
// non-identity cells observed. Always an upper bound on the geodesic length.
inline long geodesic_by_freezing(const Configuration& config0, Philox& rng, std::uint64_t patience,
                                 const WindowSampler& sampler, Symbol identity, std::size_t ancillas = 0,
                                 std::uint64_t t_retherm = 0) {
  if (ancillas == 0) ancillas = config0.size() + 3;
  std::uint64_t L = config0.size() + ancillas;
  if (t_retherm == 0) t_retherm = L;
  DecoupleResult first = decouple_protocol(config0, ancillas, 4 * L * L, t_retherm, rng, sampler, identity, patience, 3);
  long best = first.min_nonidentity;
  // Once the end has frozen, keep sampling the remaining sector.
  TrajectoryState s{first.config, 0, rng};
  if (s.config.size() >= 3) {
    for (std::uint64_t i = 0; i < patience && best > 0; ++i) {
      step_layer(s, sampler);
      long n = 0;
      for (Symbol x : s.config) n += x != identity;
      best = std::min(best, n);
    }
  }
  rng = s.rng;
  return best;
}

}  // namespace fragdyn
