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

// Brute-force reference computations and random parameter draws shared by
// the test suites. Nothing here reuses the closed forms under test.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qsdc/link_model.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc::testing {

inline double poisson_pmf(double mean, unsigned k) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

inline double binomial_pmf(unsigned n, unsigned k, double p) {
  if (k > n) return 0.0;
  const double c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(c + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// Herald response for k photons by enumerating how many photons each
/// detector receives and registers, then folding in dark counts.
inline double herald_enumerated(const SourceParams& p, HeraldEvent ev, unsigned k) {
  const double p1 = p.eta_h * p.t * p.eta_1;
  const double p2 = p.eta_h * (1.0 - p.t) * p.eta_2;
  const double p0 = 1.0 - p1 - p2;
  double none = 0.0, only1 = 0.0, only2 = 0.0, both = 0.0;
  for (unsigned a = 0; a <= k; ++a) {
    for (unsigned b = 0; a + b <= k; ++b) {
      const double lc = std::lgamma(k + 1.0) - std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(k - a - b + 1.0);
      const double pr = std::exp(lc) * std::pow(p1, a) * std::pow(p2, b) * std::pow(p0, k - a - b);
      if (a == 0 && b == 0) none += pr;
      else if (b == 0) only1 += pr;
      else if (a == 0) only2 += pr;
      else both += pr;
    }
  }
  const double n1 = 1.0 - p.d_1, n2 = 1.0 - p.d_2;
  switch (ev) {
    case HeraldEvent::X1: return none * n1 * n2;
    case HeraldEvent::X2: return none * p.d_1 * n2 + only1 * n2;
    case HeraldEvent::X3: return none * n1 * p.d_2 + only2 * n1;
    case HeraldEvent::X4: return none * p.d_1 * p.d_2 + only1 * p.d_2 + only2 * p.d_1 + both;
  }
  return 0.0;
}

/// q_ev(n) by summing over the emitted pair number k.
inline std::vector<double> series_dist(const SourceParams& p, HeraldEvent ev, unsigned n_max, unsigned k_max = 80) {
  std::vector<double> q(n_max + 1, 0.0);
  for (unsigned k = 0; k <= k_max; ++k) {
    const double pk = poisson_pmf(p.mu, k);
    if (pk < 1e-300) continue;
    const double g = herald_enumerated(p, ev, k);
    for (unsigned n = 0; n <= std::min(k, n_max); ++n) q[n] += pk * g * binomial_pmf(k, n, p.eta_x);
  }
  return q;
}

inline double series_event_probability(const SourceParams& p, HeraldEvent ev, unsigned k_max = 80) {
  double s = 0.0;
  for (unsigned k = 0; k <= k_max; ++k) s += poisson_pmf(p.mu, k) * herald_enumerated(p, ev, k);
  return s;
}

/// Click and error probabilities for n photons entering the channel,
/// from independent photon losses and the additive error model.
inline double series_yield(double eta, double y0, unsigned n) { return 1.0 - (1.0 - y0) * std::pow(1.0 - eta, n); }

inline double series_error_yield(double eta, double y0, double e_d, unsigned n) {
  return 0.5 * y0 + e_d * (1.0 - std::pow(1.0 - eta, n));
}

class Draws {
public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

  SourceParams source() {
    SourceParams p;
    p.mu = log_uniform(1e-3, 0.5);
    p.eta_x = uniform(0.3, 1.0);
    p.eta_h = uniform(0.3, 1.0);
    p.eta_1 = uniform(0.3, 1.0);
    p.eta_2 = uniform(0.3, 1.0);
    p.t = uniform(0.1, 0.9);
    p.d_1 = log_uniform(1e-9, 1e-6);
    p.d_2 = log_uniform(1e-9, 1e-6);
    return p;
  }

  LinkParams link() {
    LinkParams l;
    l.alpha_ba_db = uniform(0.0, 5.0);
    l.eta_opt_ba = uniform(0.05, 0.5);
    l.eta_opt_bab = uniform(0.05, 0.5);
    l.eta_d_A = uniform(0.3, 0.95);
    l.eta_d_B = uniform(0.3, 0.95);
    l.Y0_A = log_uniform(1e-8, 1e-5);
    l.Y0_B = log_uniform(1e-8, 1e-5);
    l.e_d_A = uniform(0.0, 0.05);
    l.e_d_B = uniform(0.0, 0.05);
    return l;
  }

  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

}  // namespace qsdc::testing
