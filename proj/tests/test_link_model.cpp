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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qsdc/link_model.hpp"

namespace qsdc {
namespace {

TEST(LinkModel, DefaultEfficiencies) {
  const LinkParams lp;
  EXPECT_NEAR(overall_efficiency(lp, Leg::BA), 0.21 * 0.7, 1e-15);
  EXPECT_NEAR(overall_efficiency(lp, Leg::BAB), 0.088 * 0.7, 1e-15);
}

TEST(LinkModel, RoundTripLossIsTwiceOneWay) {
  const auto lp = LinkParams{}.at_attenuation(4.0);
  EXPECT_DOUBLE_EQ(lp.alpha_db(Leg::BA), 2.0);
  EXPECT_DOUBLE_EQ(lp.alpha_db(Leg::BAB), 4.0);
  EXPECT_NEAR(channel_transmittance(lp, Leg::BA), std::pow(10.0, -0.2), 1e-15);
  EXPECT_NEAR(channel_transmittance(lp, Leg::BAB), std::pow(10.0, -0.4), 1e-15);
  const auto ow = LinkParams{}.at_attenuation(4.0, AttenuationAxis::OneWay);
  EXPECT_DOUBLE_EQ(ow.alpha_db(Leg::BAB), 8.0);
}

TEST(LinkModel, DistanceMapping) {
  EXPECT_DOUBLE_EQ(distance_km(4.0), 10.0);
  EXPECT_DOUBLE_EQ(distance_km(7.19), 17.975);
  EXPECT_DOUBLE_EQ(distance_km(4.0, AttenuationAxis::OneWay), 20.0);
}

TEST(LinkModel, YieldsMatchPhotonEnumeration) {
  testing::Draws d(11);
  for (int i = 0; i < 100; ++i) {
    const auto lp = d.link();
    for (Leg leg : {Leg::BA, Leg::BAB}) {
      const double eta = overall_efficiency(lp, leg);
      for (unsigned n = 0; n < 10; ++n) {
        // Complement of "no photon detected and no background".
        double none = 1.0 - lp.background(leg);
        for (unsigned k = 0; k < n; ++k) none *= 1.0 - eta;
        EXPECT_NEAR(yield_n(lp, leg, n), 1.0 - none, 1e-15);
        EXPECT_NEAR(error_yield_n(lp, leg, n),
                    testing::series_error_yield(eta, lp.background(leg), lp.misalignment(leg), n), 1e-15);
      }
    }
  }
}

TEST(LinkModel, VacuumAndHighNLimits) {
  const LinkParams lp;
  EXPECT_DOUBLE_EQ(yield_n(lp, Leg::BA, 0), lp.Y0_A);
  EXPECT_DOUBLE_EQ(error_rate_n(lp, Leg::BA, 0), LinkParams::e_0);
  EXPECT_NEAR(error_rate_n(lp, Leg::BA, 1000), lp.e_d_A + 0.5 * lp.Y0_A, 1e-9);
}

TEST(LinkModel, ZeroBackgroundVacuum) {
  LinkParams lp;
  lp.Y0_A = 0.0;
  EXPECT_EQ(yield_n(lp, Leg::BA, 0), 0.0);
  EXPECT_EQ(error_rate_n(lp, Leg::BA, 0), 0.0);
}

TEST(LinkModel, ErrorRateBelowOneHalf) {
  testing::Draws d(12);
  for (int i = 0; i < 200; ++i) {
    const auto lp = d.link();
    for (unsigned n = 0; n < 6; ++n) {
      EXPECT_LE(error_rate_n(lp, Leg::BA, n), 0.5 + 1e-15);
      EXPECT_LE(error_rate_n(lp, Leg::BAB, n), 0.5 + 1e-15);
    }
  }
}

TEST(LinkModel, YieldDecreasesWithAttenuation) {
  double prev = 2.0;
  for (double a = 0.0; a <= 20.0; a += 0.5) {
    const double y = yield_n(LinkParams{}.at_attenuation(a), Leg::BAB, 1);
    EXPECT_LT(y, prev);
    prev = y;
  }
}

TEST(LinkModel, Validation) {
  auto field_of = [](LinkParams lp) -> std::string {
    try {
      lp.validate();
    } catch (const ValidationError& e) {
      return e.field();
    }
    return "";
  };
  LinkParams lp;
  EXPECT_EQ(field_of(lp), "");
  lp.e_d_A = 0.6;
  EXPECT_EQ(field_of(lp), "link.e_d_A");
  lp = {};
  lp.alpha_ba_db = -1.0;
  EXPECT_EQ(field_of(lp), "link.alpha_ba_db");
  lp = {};
  lp.Y0_B = 2.0;
  EXPECT_EQ(field_of(lp), "link.Y0_B");
  lp = {};
  lp.eta_opt_bab = std::nan("");
  EXPECT_EQ(field_of(lp), "link.eta_opt_bab");
}

}  // namespace
}  // namespace qsdc
