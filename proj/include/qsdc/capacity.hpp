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

// Secrecy message capacity of the heralded passive-decoy protocol and of the
// weak-coherent-pulse baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "qsdc/decoy_estimator.hpp"
#include "qsdc/error.hpp"
#include "qsdc/link_model.hpp"
#include "qsdc/rate_model.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc {

enum class DecoyMode { Finite, Infinite };
enum class Protocol { Hsps, Dl04 };

constexpr std::string_view to_string(DecoyMode m) noexcept { return m == DecoyMode::Finite ? "finite" : "infinite"; }
constexpr std::string_view to_string(Protocol p) noexcept { return p == Protocol::Hsps ? "hsps" : "dl04"; }

/// h(x) in bits, with h(0) = h(1) = 0.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x", "binary entropy argument must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Holevo leakage h(2e) of a single-photon pulse with error rate e. Saturates
/// at one bit once 2e reaches 1/2, so the leakage never decreases in e.
inline double single_photon_leakage(double e) {
  const double x = 2.0 * std::clamp(e, 0.0, 0.5);
  return x >= 0.5 ? 1.0 : binary_entropy(x);
}

/// 1/2 h(2e) + 1/2: one photon split off, the other attacked as a single photon.
inline double two_photon_leakage(double e) { return 0.5 * single_photon_leakage(e) + 0.5; }

/// Contribution of one message-carrying pulse class.
struct ClassCapacity {
  double iab = 0.0;
  double iae = 0.0;
  double cs = 0.0;     ///< max(0, iab - iae)
  double q_bab = 0.0;
  double e_bab = 0.0;
  EveRates eve;
};

struct CapacityPoint {
  double alpha_bab_db = 0.0;
  double mu = 0.0;
  Protocol protocol = Protocol::Hsps;
  DecoyMode mode = DecoyMode::Finite;
  double iab = 0.0;
  double iae = 0.0;
  double cs_x2 = 0.0;  ///< the only class for the baseline
  double cs_x3 = 0.0;
  double cs = 0.0;
  std::array<ClassCapacity, 2> classes{};  ///< x2, x3 (baseline: signal, unused)
  DecoyBounds bounds;
};

/// I(A:B) = Q_BAB [1 - h(E_BAB)].
inline double mutual_info_ab(double q_bab, double e_bab) { return q_bab * (1.0 - binary_entropy(std::clamp(e_bab, 0.0, 1.0))); }

inline double mutual_info_ab(HeraldEvent event, const SourceParams& sp, const LinkParams& lp) {
  if (event != HeraldEvent::X2 && event != HeraldEvent::X3)
    throw ValidationError("event", "only x2 and x3 carry message bits");
  return mutual_info_ab(gain(event, Leg::BAB, sp, lp), qber(event, Leg::BAB, sp, lp));
}

/// Eve's information from the n = 1, n = 2 and n >= 3 gains.
inline double eve_info(const EveRates& eve, const DecoyBounds& bounds) {
  return eve.Q_bae_1 * single_photon_leakage(bounds.e1_u) + eve.Q_bae_2 * two_photon_leakage(bounds.e2_u) +
         eve.Q_bae_ge3;
}

/// I(A:E) for a heralded class. A failed estimate leaks everything Bob gets.
inline double eve_info(HeraldEvent event, const SourceParams& sp, const LinkParams& lp, const DecoyBounds& bounds,
                       double ratio = 1.0) {
  if (bounds.estimation_failed) return mutual_info_ab(event, sp, lp);
  return eve_info(eve_gains(event, sp, lp, ratio), bounds);
}

namespace detail {

inline ClassCapacity class_capacity(double q_bab, double e_bab, const EveRates& eve, const DecoyBounds& bounds) {
  ClassCapacity c;
  c.q_bab = q_bab;
  c.e_bab = e_bab;
  c.eve = eve;
  c.iab = mutual_info_ab(q_bab, e_bab);
  c.iae = bounds.estimation_failed ? c.iab : eve_info(eve, bounds);
  c.cs = std::max(0.0, c.iab - c.iae);
  return c;
}

}  // namespace detail

/// Capacity of the heralded protocol at the link's current attenuation.
inline CapacityPoint capacity(const SourceParams& sp, const LinkParams& lp, DecoyMode mode = DecoyMode::Finite,
                              double ratio = 1.0, std::size_t n_max = kDefaultNMax) {
  sp.validate();
  lp.validate();
  CapacityPoint pt;
  pt.alpha_bab_db = lp.alpha_db(Leg::BAB);
  pt.mu = sp.mu;
  pt.protocol = Protocol::Hsps;
  pt.mode = mode;
  pt.bounds = mode == DecoyMode::Finite ? estimate_bounds(hsps_decoy_inputs(sp, lp, n_max)) : ideal_bounds(sp, lp);
  for (std::size_t k = 0; k < kSignalEvents.size(); ++k) {
    const HeraldEvent ev = kSignalEvents[k];
    pt.classes[k] = detail::class_capacity(gain(ev, Leg::BAB, sp, lp), qber(ev, Leg::BAB, sp, lp),
                                           eve_gains(ev, sp, lp, ratio, n_max), pt.bounds);
    pt.iab += pt.classes[k].iab;
    pt.iae += pt.classes[k].iae;
  }
  pt.cs_x2 = pt.classes[0].cs;
  pt.cs_x3 = pt.classes[1].cs;
  pt.cs = pt.cs_x2 + pt.cs_x3;
  return pt;
}

/// Capacity of the WCP baseline with signal intensity mu. The finite mode
/// estimates bounds from vacuum, weak decoy and signal classes.
inline CapacityPoint dl04_capacity(double mu, const LinkParams& lp, DecoyMode mode = DecoyMode::Finite,
                                   double ratio = 1.0, std::size_t n_max = kDefaultNMax) {
  detail::require_finite_nonneg(mu, "mu");
  lp.validate();
  CapacityPoint pt;
  pt.alpha_bab_db = lp.alpha_db(Leg::BAB);
  pt.mu = mu;
  pt.protocol = Protocol::Dl04;
  pt.mode = mode;
  if (mu == 0.0) {
    pt.bounds = ideal_bounds(lp);
    return pt;
  }
  pt.bounds = mode == DecoyMode::Finite ? estimate_bounds(dl04_decoy_inputs(mu, lp, n_max)) : ideal_bounds(lp);
  const auto bab = poisson_rate_set(mu, Leg::BAB, lp, n_max);
  pt.classes[0] = detail::class_capacity(bab.Q, bab.E, eve_gains(poisson_dist(mu, n_max), lp, ratio), pt.bounds);
  pt.iab = pt.classes[0].iab;
  pt.iae = pt.classes[0].iae;
  pt.cs_x2 = pt.classes[0].cs;
  pt.cs = pt.cs_x2;
  return pt;
}

inline CapacityPoint protocol_capacity(Protocol protocol, const SourceParams& sp, const LinkParams& lp,
                                       DecoyMode mode = DecoyMode::Finite, double ratio = 1.0,
                                       std::size_t n_max = kDefaultNMax) {
  return protocol == Protocol::Hsps ? capacity(sp, lp, mode, ratio, n_max)
                                    : dl04_capacity(sp.mu, lp, mode, ratio, n_max);
}

}  // namespace qsdc
