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

// Fiber link and detector model for the two transmissions of the protocol:
// BA (Bob to Alice) and BAB (Bob to Alice and back to Bob).

#include <cmath>
#include <string_view>

#include "qsdc/error.hpp"
#include "qsdc/source_model.hpp"

namespace qsdc {

enum class Leg { BA, BAB };

constexpr std::string_view to_string(Leg leg) noexcept { return leg == Leg::BA ? "BA" : "BAB"; }

/// Fiber loss per kilometre; the attenuation axis is the round-trip loss, so
/// one kilometre of separation costs twice this.
inline constexpr double kFiberLossDbPerKm = 0.2;

/// How an attenuation value on a sweep axis maps onto the link.
enum class AttenuationAxis {
  RoundTrip,  ///< axis value is the BAB loss; BA loss is half of it
  OneWay,     ///< axis value is the BA loss; BAB loss is twice it
};

struct LinkParams {
  static constexpr double e_0 = 0.5;  ///< error probability of a background click

  double alpha_ba_db = 0.0;   ///< one-way channel loss
  double eta_opt_ba = 0.21;   ///< intrinsic optical efficiency, BA
  double eta_opt_bab = 0.088; ///< intrinsic optical efficiency, BAB
  double eta_d_A = 0.7;       ///< Alice's detection efficiency
  double eta_d_B = 0.7;       ///< Bob's detection efficiency
  double Y0_A = 8e-8;         ///< Alice's background rate per pulse
  double Y0_B = 8e-8;         ///< Bob's background rate per pulse
  double e_d_A = 0.0131;      ///< Alice's misalignment error
  double e_d_B = 0.0026;      ///< Bob's misalignment error

  void validate() const {
    if (!(std::isfinite(alpha_ba_db) && alpha_ba_db >= 0.0))
      throw ValidationError("link.alpha_ba_db", "must be finite and >= 0");
    detail::require_unit(eta_opt_ba, "link.eta_opt_ba");
    detail::require_unit(eta_opt_bab, "link.eta_opt_bab");
    detail::require_unit(eta_d_A, "link.eta_d_A");
    detail::require_unit(eta_d_B, "link.eta_d_B");
    detail::require_unit(Y0_A, "link.Y0_A");
    detail::require_unit(Y0_B, "link.Y0_B");
    if (!(e_d_A >= 0.0 && e_d_A <= 0.5)) throw ValidationError("link.e_d_A", "must lie in [0, 0.5]");
    if (!(e_d_B >= 0.0 && e_d_B <= 0.5)) throw ValidationError("link.e_d_B", "must lie in [0, 0.5]");
  }

  /// Copy with the channel loss set from an axis value.
  LinkParams at_attenuation(double axis_db, AttenuationAxis axis = AttenuationAxis::RoundTrip) const {
    LinkParams out = *this;
    out.alpha_ba_db = axis == AttenuationAxis::RoundTrip ? axis_db / 2.0 : axis_db;
    return out;
  }

  double alpha_db(Leg leg) const noexcept { return leg == Leg::BA ? alpha_ba_db : 2.0 * alpha_ba_db; }
  double background(Leg leg) const noexcept { return leg == Leg::BA ? Y0_A : Y0_B; }
  double misalignment(Leg leg) const noexcept { return leg == Leg::BA ? e_d_A : e_d_B; }

  friend bool operator==(const LinkParams&, const LinkParams&) = default;
};

/// Separation in km that corresponds to an axis value.
inline double distance_km(double axis_db, AttenuationAxis axis = AttenuationAxis::RoundTrip) {
  return axis == AttenuationAxis::RoundTrip ? axis_db / (2.0 * kFiberLossDbPerKm)
                                            : axis_db / kFiberLossDbPerKm;
}

inline double channel_transmittance(const LinkParams& lp, Leg leg) {
  lp.validate();
  return std::pow(10.0, -lp.alpha_db(leg) / 10.0);
}

/// Channel transmittance times optical and detection efficiency of the
/// receiving party (Alice for BA, Bob for BAB).
inline double overall_efficiency(const LinkParams& lp, Leg leg) {
  const double tc = channel_transmittance(lp, leg);
  return leg == Leg::BA ? tc * lp.eta_opt_ba * lp.eta_d_A : tc * lp.eta_opt_bab * lp.eta_d_B;
}

namespace detail {

// 1 - (1 - eta)^n without cancellation for small eta or n = 0.
inline double any_detected(double eta, unsigned n) {
  if (n == 0) return 0.0;
  if (eta >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-eta));
}

}  // namespace detail

/// Probability of a click given n photons enter the channel.
inline double yield_n(const LinkParams& lp, Leg leg, unsigned n) {
  const double y0 = lp.background(leg);
  return y0 + (1.0 - y0) * detail::any_detected(overall_efficiency(lp, leg), n);
}

/// e_n * Y_n: probability of an erroneous click given n photons.
inline double error_yield_n(const LinkParams& lp, Leg leg, unsigned n) {
  return LinkParams::e_0 * lp.background(leg) +
         lp.misalignment(leg) * detail::any_detected(overall_efficiency(lp, leg), n);
}

/// e_n alone; 0 when Y_n = 0.
inline double error_rate_n(const LinkParams& lp, Leg leg, unsigned n) {
  const double y = yield_n(lp, leg, n);
  return y > 0.0 ? error_yield_n(lp, leg, n) / y : 0.0;
}

}  // namespace qsdc
