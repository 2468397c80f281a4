#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/models.hpp"

namespace fragdyn {

// Per-symbol site charge: b for BS, c for BS(2), star count for Motzkin models.
inline std::vector<int> charge_table(ModelId m) {
  switch (m) {
    case ModelId::BS: return {0, 0, 0, 1, -1};
    case ModelId::ITBS: return {0, 0, 0, 0, 0, 1, -1};
    case ModelId::Star:
    case ModelId::Chiral: return {0, 0, 0, 1};
    case ModelId::PairFlip: return {0, 0, 0};
  }
  return {};
}

inline std::vector<int> nb_profile(const Word& w, ModelId m = ModelId::BS) {
  std::vector<int> q = charge_table(m), out;
  out.reserve(w.size());
  for (Symbol s : w) out.push_back(q.at(s));
  return out;
}

struct ObservableSeries {
  std::vector<std::uint64_t> times;          // window start layers
  std::vector<double> contrast;
  std::vector<std::vector<double>> profile;  // windowed site means, when recorded
  std::map<std::string, std::vector<double>> aux;
};

// Two-pass definition: (1/L) sum_i (mean over layers [t, t+T) of n_i)^2 from a
// dense history indexed [layer][site].
inline double contrast(const std::vector<std::vector<int>>& history, std::size_t t, std::size_t T) {
  if (T == 0 || t + T > history.size()) throw Error(Errc::WindowOutOfRange, "window exceeds series");
  std::size_t L = history[t].size();
  double s = 0;
  for (std::size_t i = 0; i < L; ++i) {
    double m = 0;
    for (std::size_t u = t; u < t + T; ++u) m += history[u][i];
    m /= static_cast<double>(T);
    s += m * m;
  }
  return s / static_cast<double>(L);
}

inline double contrast_of_means(const std::vector<double>& means) {
  double s = 0;
  for (double m : means) s += m * m;
  return means.empty() ? 0.0 : s / static_cast<double>(means.size());
}

// First recorded time whose contrast falls below fraction * contrast(first).
inline std::optional<std::uint64_t> thermalization_time(const ObservableSeries& s, double fraction = 0.1) {
  if (s.contrast.empty() || s.contrast.front() <= 0)
    throw Error(Errc::ZeroInitialContrast, "initial contrast is zero");
  double thr = fraction * s.contrast.front();
  for (std::size_t k = 0; k < s.contrast.size(); ++k)
    if (s.contrast[k] < thr) return s.times[k];
  return std::nullopt;
}

// Theta(t_th - t) (n0 + log2(1 - t/t_th + 2^-n0 t/t_th)).
inline double collapse_curve(double t, double t_th, double n0) {
  if (t >= t_th) return 0.0;
  double x = t / t_th;
  return std::max(0.0, n0 + std::log2(1.0 - x + std::exp2(-n0) * x));
}

// ---- summary statistics -------------------------------------------------

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(const std::vector<double>& v) { return quantile(v, 0.5); }

inline double mean(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct CensoredMedian {
  double value = 0;
  bool censored = false;  // the median itself is only known to exceed `value`
};

// Censored observations count as larger than every observed value.
inline CensoredMedian censored_median(const std::vector<std::optional<double>>& obs, double budget) {
  std::vector<double> v;
  for (const auto& o : obs) v.push_back(o ? *o : std::numeric_limits<double>::infinity());
  std::sort(v.begin(), v.end());
  if (v.empty()) return {budget, true};
  std::size_t n = v.size();
  double m = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (std::isinf(m)) return {budget, true};
  return {m, false};
}

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  double mx = mean(x), my = mean(y), sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

inline double r_squared(const std::vector<double>& y, const std::vector<double>& model) {
  double my = mean(y), ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - model[i]) * (y[i] - model[i]);
    ss_tot += (y[i] - my) * (y[i] - my);
  }
  return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

}  // namespace fragdyn
