#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fragdyn/core.hpp"
#include "fragdyn/rng.hpp"

namespace fragdyn {

inline constexpr const char* kCodeVersion = "fragdyn 0.1.0";

// A key = value experiment description. Blank lines and # comments are
// ignored; the verbatim text travels into every output record.
struct ExperimentConfig {
  std::string text;
  std::map<std::string, std::string> values;

  bool has(const std::string& k) const { return values.count(k) > 0; }
  const std::string& kind() const { return values.at("kind"); }
  std::string str(const std::string& k, const std::string& def = "") const {
    auto it = values.find(k);
    return it == values.end() ? def : it->second;
  }
  std::int64_t integer(const std::string& k, std::int64_t def = 0) const {
    return has(k) ? std::stoll(values.at(k)) : def;
  }
  std::uint64_t u64(const std::string& k, std::uint64_t def = 0) const {
    return has(k) ? static_cast<std::uint64_t>(std::stod(values.at(k))) : def;
  }
  double real(const std::string& k, double def = 0) const { return has(k) ? std::stod(values.at(k)) : def; }
  bool flag(const std::string& k, bool def = false) const { return has(k) ? values.at(k) == "true" : def; }
  std::vector<std::int64_t> list(const std::string& k) const;

  // FNV-1a over the sorted key = value pairs: stable across platforms and
  // independent of comments, whitespace and key order.
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : values)
      for (char c : k + "=" + v + "\n") h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

namespace cfgdetail {

inline std::string trim(std::string_view s) {
  std::size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
  return a == std::string_view::npos ? std::string() : std::string(s.substr(a, b - a + 1));
}

// Lists are comma separated integers; a:b expands to the inclusive range.
inline std::vector<std::int64_t> parse_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw Error(Errc::InvalidConfig, "empty list item in '" + s + "'");
    auto colon = item.find(':');
    std::size_t used = 0;
    if (colon == std::string::npos) {
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw Error(Errc::InvalidConfig, "bad list item '" + item + "'");
    } else {
      std::int64_t a = std::stoll(item.substr(0, colon)), b = std::stoll(item.substr(colon + 1));
      if (b < a) throw Error(Errc::InvalidConfig, "empty range '" + item + "'");
      for (std::int64_t x = a; x <= b; ++x) out.push_back(x);
    }
  }
  return out;
}

enum class Type { Int, U64, Real, Bool, Text, List };

struct KeySpec {
  Type type;
  bool required = false;
  std::vector<std::string> choices = {};
  double min = -1e300;
};

using Schema = std::map<std::string, KeySpec>;

inline const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> s = [] {
    Schema common{{"kind", {Type::Text, true}},
                  {"seed", {Type::U64, false}},
                  {"rng", {Type::Text, false, {kRngTag}}}};
    auto with = [&](Schema extra) {
      Schema out = common;
      for (auto& [k, v] : extra) out[k] = v;
      return out;
    };
    std::map<std::string, Schema> m;
    m["simulate"] = with({{"model", {Type::Text, true, {"bs", "itbs"}}},
                          {"init", {Type::Text, true, {"w_large", "random_wave", "w_huge", "word"}}},
                          {"n", {Type::Int, false, {}, 0}},
                          {"L", {Type::Int, true, {}, 3}},
                          {"word", {Type::Text, false}},
                          {"seeds", {Type::Int, false, {}, 1}},
                          {"max_layers", {Type::U64, true, {}, 1}},
                          {"T", {Type::U64, false, {}, 1}},
                          {"fraction", {Type::Real, false, {}, 0}},
                          {"irreversible", {Type::Bool, false}},
                          {"checkpoint_every", {Type::U64, false, {}, 1}}});
    m["oracle"] = with({{"model", {Type::Text, true, {"bs", "itbs", "star", "chiral", "pairflip"}}},
                        {"op", {Type::Text, true, {"sectors", "fragile", "markov", "area", "distance", "connect"}}},
                        {"L", {Type::Int, false, {}, 1}},
                        {"word", {Type::Text, false}},
                        {"word2", {Type::Text, false}},
                        {"L_max", {Type::Int, false, {}, 1}},
                        {"scratch", {Type::Int, false, {}, 0}},
                        {"max_states", {Type::U64, false, {}, 1}}});
    m["geometry"] = with({{"Ls", {Type::List, true}},
                          {"samples", {Type::U64, true, {}, 1}},
                          {"conditioned", {Type::Bool, false}}});
    m["identity-scaling"] = with({{"Ls", {Type::List, true}}, {"samples", {Type::U64, true, {}, 1}}});
    m["motzkin-probe"] = with({{"model", {Type::Text, true, {"star", "chiral"}}},
                               {"word", {Type::Text, true}},
                               {"region", {Type::List, true}},
                               {"extra_space", {Type::List, false}},
                               {"cap", {Type::U64, false, {}, 1}}});
    m["jamming-scan"] = with({{"n", {Type::Int, true, {}, 1}},
                              {"Ls", {Type::List, true}},
                              {"seeds", {Type::Int, true, {}, 1}},
                              {"max_layers", {Type::U64, true, {}, 1}},
                              {"T", {Type::U64, false, {}, 1}}});
    m["itbs-el-scan"] = with({{"ns", {Type::List, true}},
                              {"runs", {Type::Int, true, {}, 1}},
                              {"max_layers", {Type::U64, true, {}, 1}},
                              {"L_max", {Type::Int, false, {}, 3}}});
    m["wlarge-scan"] = with({{"ns", {Type::List, true}},
                             {"seeds", {Type::Int, true, {}, 1}},
                             {"max_layers", {Type::U64, true, {}, 1}}});
    m["wave-scan"] = with({{"ns", {Type::List, true}},
                           {"seeds", {Type::Int, true, {}, 1}},
                           {"max_layers", {Type::U64, true, {}, 1}},
                           {"T", {Type::U64, false, {}, 1}}});
    return m;
  }();
  return s;
}

inline void check_value(const std::string& key, const std::string& v, const KeySpec& spec) {
  auto bad = [&](const std::string& why) { throw Error(Errc::InvalidConfig, "key '" + key + "': " + why); };
  try {
    std::size_t used = 0;
    switch (spec.type) {
      case Type::Int: {
        long long x = std::stoll(v, &used);
        if (used != v.size()) bad("not an integer");
        if (static_cast<double>(x) < spec.min) bad("below minimum");
        break;
      }
      case Type::U64:
      case Type::Real: {
        double x = std::stod(v, &used);
        if (used != v.size()) bad("not a number");
        if (x < spec.min || (spec.type == Type::U64 && (x < 0 || x != std::floor(x)))) bad("out of range");
        break;
      }
      case Type::Bool:
        if (v != "true" && v != "false") bad("expected true or false");
        break;
      case Type::List: parse_list(v); break;
      case Type::Text: break;
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    bad("malformed value '" + v + "'");
  }
  if (!spec.choices.empty() && std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end())
    bad("unsupported value '" + v + "'");
}

}  // namespace cfgdetail

inline std::vector<std::int64_t> ExperimentConfig::list(const std::string& k) const {
  return cfgdetail::parse_list(values.at(k));
}

// Parses and validates against the schema of the declared kind before any
// work starts; every problem is an InvalidConfig error.
inline ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  c.text = std::string(text);
  std::stringstream ss(c.text);
  std::string line;
  int no = 0;
  while (std::getline(ss, line)) {
    ++no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = cfgdetail::trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(Errc::InvalidConfig, "line " + std::to_string(no) + ": expected key = value");
    std::string k = cfgdetail::trim(t.substr(0, eq)), v = cfgdetail::trim(t.substr(eq + 1));
    if (k.empty() || v.empty()) throw Error(Errc::InvalidConfig, "line " + std::to_string(no) + ": empty key or value");
    if (!c.values.emplace(k, v).second) throw Error(Errc::InvalidConfig, "duplicate key '" + k + "'");
  }
  if (!c.has("kind")) throw Error(Errc::InvalidConfig, "missing key 'kind'");
  auto it = cfgdetail::schemas().find(c.kind());
  if (it == cfgdetail::schemas().end()) throw Error(Errc::InvalidConfig, "unknown kind '" + c.kind() + "'");
  const auto& schema = it->second;
  for (const auto& [k, v] : c.values) {
    auto s = schema.find(k);
    if (s == schema.end()) throw Error(Errc::InvalidConfig, "key '" + k + "' not allowed for kind " + c.kind());
    cfgdetail::check_value(k, v, s->second);
  }
  for (const auto& [k, s] : schema)
    if (s.required && !c.has(k)) throw Error(Errc::InvalidConfig, "missing key '" + k + "'");
  // Cross-field rules.
  const std::string& kind = c.kind();
  if (kind == "simulate") {
    const std::string init = c.str("init");
    if (init == "word" && !c.has("word")) throw Error(Errc::InvalidConfig, "init = word needs 'word'");
    if (init != "word" && !c.has("n")) throw Error(Errc::InvalidConfig, "init = " + init + " needs 'n'");
    if (init == "w_huge" && c.str("model") != "itbs") throw Error(Errc::InvalidConfig, "w_huge needs model = itbs");
    if ((init == "w_large" || init == "random_wave") && c.str("model") != "bs")
      throw Error(Errc::InvalidConfig, init + " needs model = bs");
    if (c.flag("irreversible") && c.str("model") != "itbs")
      throw Error(Errc::InvalidConfig, "irreversible dynamics is defined for model = itbs");
  }
  if (kind == "oracle") {
    const std::string op = c.str("op");
    if ((op == "sectors" || op == "fragile") && !c.has("L")) throw Error(Errc::InvalidConfig, op + " needs 'L'");
    if ((op == "markov" || op == "area" || op == "distance" || op == "connect") && !c.has("word"))
      throw Error(Errc::InvalidConfig, op + " needs 'word'");
    if ((op == "distance" || op == "connect") && !c.has("word2")) throw Error(Errc::InvalidConfig, op + " needs 'word2'");
  }
  if (kind == "motzkin-probe" && c.list("region").size() != 2)
    throw Error(Errc::InvalidConfig, "region must be lo,hi");
  return c;
}

}  // namespace fragdyn
