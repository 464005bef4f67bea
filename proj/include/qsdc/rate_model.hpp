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

// Overall gains, error rates and eavesdropper gains per pulse class.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qsdc/error.hpp"
#include "qsdc/link_model.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc {

/// Detection statistics of one pulse class on one leg, conditioned on the
/// pulse class having been prepared.
struct RateSet {
  std::optional<HeraldEvent> event;  ///< empty for the Poisson source
  Leg leg = Leg::BA;
  double Q = 0.0;             ///< overall gain
  double E = 0.0;             ///< overall error rate
  double QE = 0.0;            ///< Q * E
  std::vector<double> Q_n;    ///< q(n) Y_n / P for n <= n_max
};

/// Upper bounds on the per-photon-number gains available to Eve.
struct EveRates {
  double Q_bae_1 = 0.0;
  double Q_bae_2 = 0.0;
  double Q_bae_ge3 = 0.0;  ///< n >= 3 aggregate, truncation remainder included
  double ratio = 1.0;      ///< gamma_E / gamma_A
};

namespace detail {

struct GainPair {
  double Q;
  double QE;
};

// log_ratio = ln( sum_n q(n) (1 - eta)^n / sum_n q(n) ).
inline GainPair gains_from_log_ratio(double log_ratio, double y0, double e_d) {
  const double detected = -std::expm1(log_ratio);  // 1 - G(1 - eta) / G(1)
  return {detected + y0 * std::exp(log_ratio), LinkParams::e_0 * y0 + e_d * detected};
}

inline GainPair heralded_gains(HeraldEvent event, Leg leg, const SourceParams& sp, const LinkParams& lp) {
  const double eta = overall_efficiency(lp, leg);
  const double log_p = log_generating(sp, event, 1.0);
  if (!std::isfinite(log_p)) {
    throw DegenerateError("gain conditioned on event " + std::string(to_string(event)) +
                          " is undefined: event probability is zero");
  }
  const double log_ratio = log_generating(sp, event, 1.0 - eta) - log_p;
  return gains_from_log_ratio(log_ratio, lp.background(leg), lp.misalignment(leg));
}

inline double checked_qber(const GainPair& g) {
  if (!(g.Q > 0.0)) throw NumericalError("error rate undefined: overall gain is zero");
  return g.QE / g.Q;
}

inline std::vector<double> photon_gains(const PhotonDist& dist, Leg leg, const LinkParams& lp) {
  if (!(dist.event_prob > 0.0)) throw DegenerateError("photon gains undefined: event probability is zero");
  std::vector<double> out(dist.weights.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = dist.weights[n] * yield_n(lp, leg, static_cast<unsigned>(n)) / dist.event_prob;
  return out;
}

}  // namespace detail

/// Overall gain Q of a heralded pulse class, closed form.
inline double gain(HeraldEvent event, Leg leg, const SourceParams& sp, const LinkParams& lp) {
  return detail::heralded_gains(event, leg, sp, lp).Q;
}

/// Overall error rate E of a heralded pulse class, closed form.
inline double qber(HeraldEvent event, Leg leg, const SourceParams& sp, const LinkParams& lp) {
  return detail::checked_qber(detail::heralded_gains(event, leg, sp, lp));
}

inline RateSet rate_set(HeraldEvent event, Leg leg, const SourceParams& sp, const LinkParams& lp,
                        std::size_t n_max = kDefaultNMax) {
  const auto g = detail::heralded_gains(event, leg, sp, lp);
  RateSet r;
  r.event = event;
  r.leg = leg;
  r.Q = g.Q;
  r.QE = g.QE;
  r.E = detail::checked_qber(g);
  r.Q_n = detail::photon_gains(heralded_dist(sp, event, n_max), leg, lp);
  return r;
}

/// Weak coherent pulse of intensity mu.
inline RateSet poisson_rate_set(double mu, Leg leg, const LinkParams& lp, std::size_t n_max = kDefaultNMax) {
  const double eta = overall_efficiency(lp, leg);
  const auto g = detail::gains_from_log_ratio(-mu * eta, lp.background(leg), lp.misalignment(leg));
  RateSet r;
  r.leg = leg;
  r.Q = g.Q;
  r.QE = g.QE;
  r.E = detail::checked_qber(g);
  r.Q_n = detail::photon_gains(poisson_dist(mu, n_max), leg, lp);
  return r;
}

/// Eve's per-photon-number gain bound from the first transmission: the
/// background-subtracted BA gain, scaled by max(1, gamma_E / gamma_A).
/// Vacuum pulses contribute nothing.
inline EveRates eve_gains(const PhotonDist& dist, const LinkParams& lp, double ratio = 1.0) {
  if (!(ratio > 0.0)) throw ValidationError("eve_ratio", "must be > 0");
  if (!(dist.event_prob > 0.0)) throw DegenerateError("eve gains undefined: event probability is zero");
  const double scale = std::max(1.0, ratio);
  const double y0 = lp.Y0_A;
  const auto per_n = [&](std::size_t n) {
    const double q = dist.weight(n) / dist.event_prob;
    return std::max(0.0, q * yield_n(lp, Leg::BA, static_cast<unsigned>(n)) - q * y0) * scale;
  };
  EveRates out;
  out.ratio = ratio;
  out.Q_bae_1 = per_n(1);
  out.Q_bae_2 = per_n(2);
  double multi = 0.0;
  for (std::size_t n = 3; n <= dist.n_max(); ++n) multi += per_n(n);
  // Beyond n_max every photon is assumed detected and leaked.
  multi += dist.tail_bound / dist.event_prob * (1.0 - y0) * scale;
  out.Q_bae_ge3 = multi;
  return out;
}

inline EveRates eve_gains(HeraldEvent event, const SourceParams& sp, const LinkParams& lp, double ratio = 1.0,
                          std::size_t n_max = kDefaultNMax) {
  return eve_gains(heralded_dist(sp, event, n_max), lp, ratio);
}

}  // namespace qsdc
