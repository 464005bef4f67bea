// Copyright 2026 The qsdc-hsps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration: defaults, JSON load/save with strict schema checks.
// Every value lives under a dotted path (e.g. "source.mu") that is echoed
// back in validation errors.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsdc/capacity.hpp"
#include "qsdc/error.hpp"
#include "qsdc/link_model.hpp"
#include "qsdc/mc_oracle.hpp"
#include "qsdc/optimize.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc {

struct SweepConfig {
  double alpha_min_db = 0.0;
  double alpha_max_db = 8.0;
  double step_db = 0.01;
  std::vector<double> mu{0.01};

  /// Axis values min, min + step, ... up to max (inclusive within 1e-9 steps).
  std::vector<double> alpha_grid() const {
    const auto n = static_cast<std::size_t>(std::floor((alpha_max_db - alpha_min_db) / step_db + 1e-9)) + 1;
    std::vector<double> g(n);
    // Rounded to 1e-9 dB so grid values print as typed (0.01 * 399 -> 3.99).
    for (std::size_t i = 0; i < n; ++i) g[i] = std::round((alpha_min_db + double(i) * step_db) * 1e9) / 1e9;
    return g;
  }

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct McRunConfig {
  std::uint64_t shots = 10'000'000;
  std::uint64_t seed = 20240601;
  Leg leg = Leg::BAB;
  double alpha_db = 4.0;  ///< axis value, interpreted like the sweep axis
  unsigned partitions = 64;

  friend bool operator==(const McRunConfig&, const McRunConfig&) = default;
};

struct RunConfig {
  SourceParams source;
  LinkParams link;
  DecoyMode mode = DecoyMode::Finite;
  Protocol protocol = Protocol::Hsps;
  double eve_ratio = 1.0;
  std::size_t n_max = kDefaultNMax;
  bool one_way = false;
  SweepConfig sweep;
  MuBounds optimize;
  RootOptions maxdist;
  std::optional<McRunConfig> mc;

  AttenuationAxis axis() const { return one_way ? AttenuationAxis::OneWay : AttenuationAxis::RoundTrip; }

  CapacityModel model() const {
    CapacityModel m;
    m.sp = source;
    m.lp = link;
    m.protocol = protocol;
    m.mode = mode;
    m.eve_ratio = eve_ratio;
    m.n_max = n_max;
    m.axis = axis();
    return m;
  }

  McConfig mc_config() const {
    const McRunConfig r = mc.value_or(McRunConfig{});
    McConfig c;
    c.shots = r.shots;
    c.seed = r.seed;
    c.sp = source;
    c.lp = link.at_attenuation(r.alpha_db, axis());
    c.leg = r.leg;
    c.partitions = r.partitions;
    return c;
  }

  void validate() const {
    source.validate();
    link.validate();
    if (!(std::isfinite(eve_ratio) && eve_ratio > 0.0)) throw ValidationError("eve_ratio", "must be finite and > 0");
    if (n_max < 2 || n_max > kMaxNMax) throw ValidationError("n_max", "must lie in [2, " + std::to_string(kMaxNMax) + "]");
    auto finite_nonneg = [](double v, std::string_view f) {
      if (!(std::isfinite(v) && v >= 0.0)) throw ValidationError(std::string(f), "must be finite and >= 0");
    };
    finite_nonneg(sweep.alpha_min_db, "sweep.alpha_min_db");
    finite_nonneg(sweep.alpha_max_db, "sweep.alpha_max_db");
    if (!(std::isfinite(sweep.step_db) && sweep.step_db > 0.0)) throw ValidationError("sweep.step_db", "must be > 0");
    if (sweep.alpha_min_db > sweep.alpha_max_db)
      throw ValidationError("sweep.alpha_min_db", "empty grid: alpha_min_db exceeds alpha_max_db");
    if ((sweep.alpha_max_db - sweep.alpha_min_db) / sweep.step_db > 1e7)
      throw ValidationError("sweep.step_db", "grid exceeds 1e7 points");
    if (sweep.mu.empty()) throw ValidationError("sweep.mu", "must list at least one intensity");
    for (std::size_t i = 0; i < sweep.mu.size(); ++i)
      finite_nonneg(sweep.mu[i], "sweep.mu[" + std::to_string(i) + "]");
    if (!(optimize.mu_min > 0.0)) throw ValidationError("optimize.mu_min", "must be > 0");
    if (!(optimize.mu_max <= 1.0)) throw ValidationError("optimize.mu_max", "must be <= 1");
    if (!(optimize.mu_min < optimize.mu_max)) throw ValidationError("optimize.mu_min", "must be < optimize.mu_max");
    if (!(std::isfinite(maxdist.floor) && maxdist.floor >= 0.0)) throw ValidationError("maxdist.floor", "must be >= 0");
    if (!(std::isfinite(maxdist.tol_db) && maxdist.tol_db > 0.0)) throw ValidationError("maxdist.tol_db", "must be > 0");
    if (!(maxdist.max_db > 0.0)) throw ValidationError("maxdist.max_db", "must be > 0");
    if (mc) {
      if (mc->shots < 1 || mc->shots > kMaxShots) throw ValidationError("mc.shots", "must lie in [1, 2^40]");
      if (mc->partitions < 1) throw ValidationError("mc.partitions", "must be >= 1");
      finite_nonneg(mc->alpha_db, "mc.alpha_db");
    }
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline DecoyMode parse_mode(std::string_view s, std::string_view field = "mode") {
  if (s == "finite") return DecoyMode::Finite;
  if (s == "infinite") return DecoyMode::Infinite;
  throw ValidationError(std::string(field), "expected finite|infinite, got '" + std::string(s) + "'");
}

inline Protocol parse_protocol(std::string_view s, std::string_view field = "protocol") {
  if (s == "hsps") return Protocol::Hsps;
  if (s == "dl04") return Protocol::Dl04;
  throw ValidationError(std::string(field), "expected hsps|dl04, got '" + std::string(s) + "'");
}

inline Leg parse_leg(std::string_view s, std::string_view field = "mc.leg") {
  if (s == "BA") return Leg::BA;
  if (s == "BAB") return Leg::BAB;
  throw ValidationError(std::string(field), "expected BA|BAB, got '" + std::string(s) + "'");
}

namespace detail {

using json = nlohmann::ordered_json;

inline std::string join_path(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

inline void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<std::string_view> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto k : keys) known = known || it.key() == k;
    if (!known) throw ValidationError(join_path(prefix, it.key()), "unknown key");
  }
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path.empty() ? "<root>" : path, "expected an object");
  return j;
}

inline void read_number(const json& obj, const std::string& prefix, std::string_view key, double& out) {
  if (!obj.contains(std::string(key))) return;
  const auto& v = obj.at(std::string(key));
  if (!v.is_number()) throw ValidationError(join_path(prefix, key), "expected a number");
  out = v.get<double>();
}

template <class UInt>
inline void read_unsigned(const json& obj, const std::string& prefix, std::string_view key, UInt& out) {
  if (!obj.contains(std::string(key))) return;
  const auto& v = obj.at(std::string(key));
  if (!v.is_number_unsigned()) throw ValidationError(join_path(prefix, key), "expected a non-negative integer");
  out = static_cast<UInt>(v.get<std::uint64_t>());
}

inline void read_bool(const json& obj, const std::string& prefix, std::string_view key, bool& out) {
  if (!obj.contains(std::string(key))) return;
  const auto& v = obj.at(std::string(key));
  if (!v.is_boolean()) throw ValidationError(join_path(prefix, key), "expected true or false");
  out = v.get<bool>();
}

inline std::optional<std::string> read_string(const json& obj, const std::string& prefix, std::string_view key) {
  if (!obj.contains(std::string(key))) return std::nullopt;
  const auto& v = obj.at(std::string(key));
  if (!v.is_string()) throw ValidationError(join_path(prefix, key), "expected a string");
  return v.get<std::string>();
}

inline void read_source(const json& j, SourceParams& s) {
  const std::string p = "source";
  reject_unknown(require_object(j, p), p, {"mu", "eta_x", "eta_h", "eta_1", "eta_2", "t", "d_1", "d_2"});
  read_number(j, p, "mu", s.mu);
  read_number(j, p, "eta_x", s.eta_x);
  read_number(j, p, "eta_h", s.eta_h);
  read_number(j, p, "eta_1", s.eta_1);
  read_number(j, p, "eta_2", s.eta_2);
  read_number(j, p, "t", s.t);
  read_number(j, p, "d_1", s.d_1);
  read_number(j, p, "d_2", s.d_2);
}

inline void read_link(const json& j, LinkParams& l) {
  const std::string p = "link";
  reject_unknown(require_object(j, p), p,
                 {"eta_opt_ba", "eta_opt_bab", "eta_d_A", "eta_d_B", "Y0_A", "Y0_B", "e_d_A", "e_d_B", "e_0"});
  read_number(j, p, "eta_opt_ba", l.eta_opt_ba);
  read_number(j, p, "eta_opt_bab", l.eta_opt_bab);
  read_number(j, p, "eta_d_A", l.eta_d_A);
  read_number(j, p, "eta_d_B", l.eta_d_B);
  read_number(j, p, "Y0_A", l.Y0_A);
  read_number(j, p, "Y0_B", l.Y0_B);
  read_number(j, p, "e_d_A", l.e_d_A);
  read_number(j, p, "e_d_B", l.e_d_B);
  double e0 = LinkParams::e_0;
  read_number(j, p, "e_0", e0);
  if (e0 != LinkParams::e_0) throw ValidationError("link.e_0", "is fixed at 0.5 and cannot be changed");
}

inline void read_sweep(const json& j, SweepConfig& s) {
  const std::string p = "sweep";
  reject_unknown(require_object(j, p), p, {"alpha_min_db", "alpha_max_db", "step_db", "mu"});
  read_number(j, p, "alpha_min_db", s.alpha_min_db);
  read_number(j, p, "alpha_max_db", s.alpha_max_db);
  read_number(j, p, "step_db", s.step_db);
  if (j.contains("mu")) {
    const auto& arr = j.at("mu");
    if (!arr.is_array()) throw ValidationError("sweep.mu", "expected an array of numbers");
    s.mu.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) throw ValidationError("sweep.mu[" + std::to_string(i) + "]", "expected a number");
      s.mu.push_back(arr[i].get<double>());
    }
  }
}

inline void read_mc(const json& j, McRunConfig& m) {
  const std::string p = "mc";
  reject_unknown(require_object(j, p), p, {"shots", "seed", "leg", "alpha_db", "partitions"});
  read_unsigned(j, p, "shots", m.shots);
  read_unsigned(j, p, "seed", m.seed);
  if (auto s = read_string(j, p, "leg")) m.leg = parse_leg(*s);
  read_number(j, p, "alpha_db", m.alpha_db);
  read_unsigned(j, p, "partitions", m.partitions);
}

}  // namespace detail

/// Builds a config from JSON text. Missing keys keep their defaults;
/// unknown keys and ill-typed values are rejected with their path.
inline RunConfig config_from_json(std::string_view text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("<root>", std::string("malformed JSON: ") + e.what());
  }
  RunConfig c;
  detail::require_object(j, "");
  detail::reject_unknown(j, "", {"source", "link", "mode", "protocol", "eve_ratio", "n_max", "one_way", "sweep",
                                 "optimize", "maxdist", "mc"});
  if (j.contains("source")) detail::read_source(j.at("source"), c.source);
  if (j.contains("link")) detail::read_link(j.at("link"), c.link);
  if (auto s = detail::read_string(j, "", "mode")) c.mode = parse_mode(*s);
  if (auto s = detail::read_string(j, "", "protocol")) c.protocol = parse_protocol(*s);
  detail::read_number(j, "", "eve_ratio", c.eve_ratio);
  detail::read_unsigned(j, "", "n_max", c.n_max);
  detail::read_bool(j, "", "one_way", c.one_way);
  if (j.contains("sweep")) detail::read_sweep(j.at("sweep"), c.sweep);
  if (j.contains("optimize")) {
    const auto& o = detail::require_object(j.at("optimize"), "optimize");
    detail::reject_unknown(o, "optimize", {"mu_min", "mu_max"});
    detail::read_number(o, "optimize", "mu_min", c.optimize.mu_min);
    detail::read_number(o, "optimize", "mu_max", c.optimize.mu_max);
  }
  if (j.contains("maxdist")) {
    const auto& o = detail::require_object(j.at("maxdist"), "maxdist");
    detail::reject_unknown(o, "maxdist", {"floor", "tol_db", "max_db"});
    detail::read_number(o, "maxdist", "floor", c.maxdist.floor);
    detail::read_number(o, "maxdist", "tol_db", c.maxdist.tol_db);
    detail::read_number(o, "maxdist", "max_db", c.maxdist.max_db);
  }
  if (j.contains("mc")) {
    McRunConfig m;
    detail::read_mc(j.at("mc"), m);
    c.mc = m;
  }
  c.validate();
  return c;
}

/// Full JSON document for a config, every field spelled out.
inline std::string config_to_json(const RunConfig& c) {
  using detail::json;
  json j;
  j["source"] = {{"mu", c.source.mu},       {"eta_x", c.source.eta_x}, {"eta_h", c.source.eta_h},
                 {"eta_1", c.source.eta_1}, {"eta_2", c.source.eta_2}, {"t", c.source.t},
                 {"d_1", c.source.d_1},     {"d_2", c.source.d_2}};
  j["link"] = {{"eta_opt_ba", c.link.eta_opt_ba}, {"eta_opt_bab", c.link.eta_opt_bab}, {"eta_d_A", c.link.eta_d_A},
               {"eta_d_B", c.link.eta_d_B},       {"Y0_A", c.link.Y0_A},               {"Y0_B", c.link.Y0_B},
               {"e_d_A", c.link.e_d_A},           {"e_d_B", c.link.e_d_B},             {"e_0", LinkParams::e_0}};
  j["mode"] = std::string(to_string(c.mode));
  j["protocol"] = std::string(to_string(c.protocol));
  j["eve_ratio"] = c.eve_ratio;
  j["n_max"] = c.n_max;
  j["one_way"] = c.one_way;
  j["sweep"] = {{"alpha_min_db", c.sweep.alpha_min_db},
                {"alpha_max_db", c.sweep.alpha_max_db},
                {"step_db", c.sweep.step_db},
                {"mu", c.sweep.mu}};
  j["optimize"] = {{"mu_min", c.optimize.mu_min}, {"mu_max", c.optimize.mu_max}};
  j["maxdist"] = {{"floor", c.maxdist.floor}, {"tol_db", c.maxdist.tol_db}, {"max_db", c.maxdist.max_db}};
  if (c.mc) {
    j["mc"] = {{"shots", c.mc->shots},
               {"seed", c.mc->seed},
               {"leg", std::string(to_string(c.mc->leg))},
               {"alpha_db", c.mc->alpha_db},
               {"partitions", c.mc->partitions}};
  }
  return j.dump(2) + "\n";
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

inline void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file '" + path + "'");
  out << config_to_json(c);
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace qsdc
