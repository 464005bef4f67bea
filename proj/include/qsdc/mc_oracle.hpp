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

// Event-level Monte Carlo of pulse generation, heralding, channel loss,
// background clicks and error flags. Used as an independent check of the
// closed-form source, link and rate models.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qsdc/error.hpp"
#include "qsdc/link_model.hpp"
#include "qsdc/rate_model.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc {

inline constexpr std::string_view kMcRngName = "mt19937_64/splitmix64-partitioned";
inline constexpr std::uint64_t kMaxShots = std::uint64_t{1} << 40;

struct McConfig {
  std::uint64_t shots = 10'000'000;
  std::uint64_t seed = 20240601;
  SourceParams sp;
  LinkParams lp;
  Leg leg = Leg::BA;
  unsigned partitions = 64;  ///< fixed work split; results do not depend on thread count

  void validate() const {
    if (shots < 1) throw ValidationError("mc.shots", "must be >= 1");
    if (shots > kMaxShots) throw ValidationError("mc.shots", "exceeds the supported maximum of 2^40");
    if (partitions < 1) throw ValidationError("mc.partitions", "must be >= 1");
    sp.validate();
    lp.validate();
  }
};

struct McEstimate {
  std::uint64_t shots = 0;
  std::array<std::uint64_t, 4> event_counts{};
  std::array<std::uint64_t, 4> click_counts{};
  std::array<std::uint64_t, 4> error_counts{};

  static std::size_t index(HeraldEvent e) { return static_cast<std::size_t>(e); }

  double event_freq(HeraldEvent e) const { return double(event_counts[index(e)]) / double(shots); }

  /// Empirical gain; NaN without events.
  double gain(HeraldEvent e) const {
    const auto n = event_counts[index(e)];
    return n ? double(click_counts[index(e)]) / double(n) : std::numeric_limits<double>::quiet_NaN();
  }

  /// Empirical error rate; NaN without clicks.
  double qber(HeraldEvent e) const {
    const auto n = click_counts[index(e)];
    return n ? double(error_counts[index(e)]) / double(n) : std::numeric_limits<double>::quiet_NaN();
  }

  double gain_stderr(HeraldEvent e) const {
    const double q = gain(e);
    return std::sqrt(q * (1.0 - q) / double(event_counts[index(e)]));
  }

  double qber_stderr(HeraldEvent e) const {
    const double x = qber(e);
    return std::sqrt(x * (1.0 - x) / double(click_counts[index(e)]));
  }

  McEstimate& operator+=(const McEstimate& o) {
    shots += o.shots;
    for (std::size_t i = 0; i < 4; ++i) {
      event_counts[i] += o.event_counts[i];
      click_counts[i] += o.click_counts[i];
      error_counts[i] += o.error_counts[i];
    }
    return *this;
  }

  friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class McRng {
public:
  explicit McRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

  unsigned poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    unsigned k = 0;
    while (u >= cdf && k < 10'000) {
      ++k;
      p *= mean / k;
      cdf += p;
      if (p == 0.0) break;
    }
    return k;
  }

private:
  std::mt19937_64 engine_;
};

inline std::uint64_t partition_seed(std::uint64_t master, unsigned partition) {
  return splitmix64(master ^ splitmix64(0xA5A5A5A5ULL + partition));
}

inline HeraldEvent classify(bool d1, bool d2) {
  if (d1 && d2) return HeraldEvent::X4;
  if (d1) return HeraldEvent::X2;
  if (d2) return HeraldEvent::X3;
  return HeraldEvent::X1;
}

struct HeraldOutcome {
  bool d1;
  bool d2;
};

inline HeraldOutcome herald(McRng& rng, const SourceParams& sp, unsigned k) {
  bool d1 = rng.bernoulli(sp.d_1);
  bool d2 = rng.bernoulli(sp.d_2);
  for (unsigned i = 0; i < k; ++i) {
    if (!rng.bernoulli(sp.eta_h)) continue;
    if (rng.bernoulli(sp.t)) {
      d1 = rng.bernoulli(sp.eta_1) || d1;
    } else {
      d2 = rng.bernoulli(sp.eta_2) || d2;
    }
  }
  return {d1, d2};
}

inline McEstimate run_partition(const McConfig& cfg, std::uint64_t shots, std::uint64_t seed) {
  McRng rng(seed);
  McEstimate est;
  est.shots = shots;
  const double eta = overall_efficiency(cfg.lp, cfg.leg);
  const double y0 = cfg.lp.background(cfg.leg);
  const double e_d = cfg.lp.misalignment(cfg.leg);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const unsigned k = rng.poisson(cfg.sp.mu);
    const auto h = herald(rng, cfg.sp, k);
    unsigned detected = 0;
    for (unsigned i = 0; i < k; ++i) {
      if (rng.bernoulli(cfg.sp.eta_x) && rng.bernoulli(eta)) ++detected;
    }
    const bool background = rng.bernoulli(y0);
    const auto ev = McEstimate::index(classify(h.d1, h.d2));
    ++est.event_counts[ev];
    if (!background && detected == 0) continue;
    ++est.click_counts[ev];
    // The background and signal error channels are disjoint, so the error
    // probability is additive: e_0 Y_0 + e_d [1 - (1 - eta)^n].
    double p_err = 0.0;
    if (background) p_err += LinkParams::e_0;
    if (detected > 0) p_err += e_d;
    if (rng.bernoulli(p_err)) ++est.error_counts[ev];
  }
  return est;
}

template <class Fn>
void for_each_partition(unsigned partitions, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, partitions);
  if (threads <= 1) {
    for (unsigned p = 0; p < partitions; ++p) fn(p);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (unsigned p = w; p < partitions; p += threads) fn(p);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Simulates cfg.shots pulses. Deterministic for a fixed seed and partition
/// count, whatever the number of worker threads.
inline McEstimate run(const McConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  std::vector<McEstimate> parts(cfg.partitions);
  const std::uint64_t base = cfg.shots / cfg.partitions;
  const std::uint64_t extra = cfg.shots % cfg.partitions;
  detail::for_each_partition(cfg.partitions, threads, [&](unsigned p) {
    parts[p] = detail::run_partition(cfg, base + (p < extra ? 1 : 0), detail::partition_seed(cfg.seed, p));
  });
  McEstimate total;
  for (const auto& part : parts) total += part;
  return total;
}

/// Herald-only simulation for a fixed photon number k: tallies of the four
/// detector responses.
inline std::array<std::uint64_t, 4> herald_counts(const SourceParams& sp, unsigned k, std::uint64_t shots,
                                                  std::uint64_t seed) {
  sp.validate();
  if (shots < 1 || shots > kMaxShots) throw ValidationError("shots", "out of range");
  detail::McRng rng(detail::partition_seed(seed, 0));
  std::array<std::uint64_t, 4> counts{};
  for (std::uint64_t s = 0; s < shots; ++s) {
    const auto h = detail::herald(rng, sp, k);
    ++counts[McEstimate::index(detail::classify(h.d1, h.d2))];
  }
  return counts;
}

struct ComparisonRow {
  std::string quantity;
  double model;
  double mc;
  double sigma;
  double z;
  bool flagged;  ///< |z| > 4
};

inline constexpr double kZLimit = 4.0;

namespace detail {

inline ComparisonRow compare(std::string name, double model, double mc, double sigma) {
  double z = 0.0;
  if (sigma > 0.0) {
    z = (mc - model) / sigma;
  } else if (mc != model) {
    z = std::numeric_limits<double>::infinity();
  }
  return {std::move(name), model, mc, sigma, z, std::abs(z) > kZLimit};
}

}  // namespace detail

/// Closed-form model against the Monte Carlo estimate for every event
/// probability, gain and error rate. Standard errors use the model value
/// in the binomial variance.
inline std::vector<ComparisonRow> estimate_vs_model(const McConfig& cfg, unsigned threads = 0) {
  const McEstimate est = run(cfg, threads);
  const double n = double(est.shots);
  std::vector<ComparisonRow> rows;
  for (HeraldEvent ev : kHeraldEvents) {
    const std::string tag(to_string(ev));
    const double p = event_probability(cfg.sp, ev);
    rows.push_back(detail::compare("P_" + tag, p, est.event_freq(ev), std::sqrt(p * (1.0 - p) / n)));
  }
  for (HeraldEvent ev : kHeraldEvents) {
    const std::string tag = std::string(to_string(ev)) + "_" + std::string(to_string(cfg.leg));
    const auto events = est.event_counts[McEstimate::index(ev)];
    if (event_probability(cfg.sp, ev) <= 0.0 || events == 0) continue;
    const double q = gain(ev, cfg.leg, cfg.sp, cfg.lp);
    rows.push_back(detail::compare("Q_" + tag, q, est.gain(ev), std::sqrt(q * (1.0 - q) / double(events))));
    const auto clicks = est.click_counts[McEstimate::index(ev)];
    if (q <= 0.0 || clicks == 0) continue;
    const double e = qber(ev, cfg.leg, cfg.sp, cfg.lp);
    rows.push_back(detail::compare("E_" + tag, e, est.qber(ev), std::sqrt(e * (1.0 - e) / double(clicks))));
  }
  return rows;
}

inline void write_report_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  const auto old_prec = os.precision(17);
  os << "quantity,model,mc,sigma,z\n";
  for (const auto& r : rows) os << r.quantity << ',' << r.model << ',' << r.mc << ',' << r.sigma << ',' << r.z << '\n';
  os.precision(old_prec);
}

}  // namespace qsdc
