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
#include "qsdc/optimize.hpp"

namespace qsdc {
namespace {

struct GridMax {
  double mu;
  double cs;
  double log_step;
};

GridMax grid_argmax(const CapacityModel& m, double alpha, std::size_t n, MuBounds b = {}) {
  const double lo = std::log(b.mu_min), hi = std::log(b.mu_max);
  GridMax g{b.mu_min, -1.0, (hi - lo) / double(n - 1)};
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = std::exp(lo + g.log_step * double(i));
    const double cs = m.cs(mu, alpha);
    if (cs > g.cs) g = {mu, cs, g.log_step};
  }
  return g;
}

TEST(OptimalMu, MatchesFineGridOnRandomConfigs) {
  testing::Draws d(51);
  int checked = 0;
  for (int i = 0; checked < 20 && i < 200; ++i) {
    CapacityModel m;
    m.sp = d.source();
    m.lp = d.link();
    m.protocol = i % 2 ? Protocol::Dl04 : Protocol::Hsps;
    const double alpha = d.uniform(0.0, 6.0);
    const auto g = grid_argmax(m, alpha, 1000);
    if (g.cs <= 0.0) continue;
    const auto r = optimal_mu(alpha, m);
    EXPECT_LE(std::abs(std::log(r.mu_star) - std::log(g.mu)), g.log_step * (1.0 + 1e-9)) << i;
    EXPECT_GE(r.cs_star, g.cs * (1.0 - 1e-6)) << i;
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(OptimalMu, DominatesBracketEnds) {
  const CapacityModel m;
  for (double a : {0.0, 3.0, 6.0}) {
    const auto r = optimal_mu(a, m);
    EXPECT_GE(r.cs_star, m.cs(r.bracket[0], a));
    EXPECT_GE(r.cs_star, m.cs(r.bracket[1], a));
    EXPECT_GE(r.mu_star, 1e-4);
    EXPECT_LE(r.mu_star, 1.0);
    EXPECT_LE(r.bracket[1] / r.bracket[0], 1.0 + 2e-3);
  }
}

TEST(OptimalMu, NonIncreasingInAttenuation) {
  for (Protocol p : {Protocol::Hsps, Protocol::Dl04}) {
    CapacityModel m;
    m.protocol = p;
    double prev = 2.0;
    for (double a = 0.0; a <= 7.0; a += 0.5) {
      double mu = 0.0;
      try {
        mu = optimal_mu(a, m).mu_star;
      } catch (const NoPositiveCapacityError&) {
        break;
      }
      EXPECT_LE(mu, prev * (1.0 + 2e-3)) << to_string(p) << " alpha=" << a;
      prev = mu;
    }
  }
}

TEST(OptimalMu, BaselineOptimumIsAnUpperGridIntensity) {
  CapacityModel m;
  m.protocol = Protocol::Dl04;
  const auto r = optimal_mu(0.0, m);
  EXPECT_GT(r.mu_star, 0.1);
  EXPECT_LT(r.mu_star, 1.0);
}

TEST(OptimalMu, PositiveAtSevenDb) {
  const auto r = optimal_mu(7.0, CapacityModel{});
  EXPECT_GT(r.cs_star, 0.0);
  EXPECT_GE(r.mu_star, 1e-4);
  EXPECT_LE(r.mu_star, 1.0);
}

TEST(OptimalMu, NoPositiveCapacityFarAway) {
  EXPECT_THROW(optimal_mu(40.0, CapacityModel{}), NoPositiveCapacityError);
}

TEST(OptimalMu, RejectsBadBounds) {
  EXPECT_THROW(optimal_mu(1.0, CapacityModel{}, {0.0, 1.0}), ValidationError);
  EXPECT_THROW(optimal_mu(1.0, CapacityModel{}, {1e-3, 2.0}), ValidationError);
  EXPECT_THROW(optimal_mu(1.0, CapacityModel{}, {0.5, 0.1}), ValidationError);
}

TEST(MaxDistance, BracketInvariantAndIterationBound) {
  const CapacityModel m;
  for (double mu : {0.001, 0.01, 0.1, 0.5}) {
    const auto r = max_distance(mu, m);
    EXPECT_GT(m.cs(mu, r.bracket[0]), 1e-12);
    EXPECT_LE(m.cs(mu, r.bracket[1]), 1e-12);
    EXPECT_LE(r.bracket[1] - r.bracket[0], 0.01);
    EXPECT_DOUBLE_EQ(r.alpha_star_db, r.bracket[0]);
    EXPECT_DOUBLE_EQ(r.distance_km, r.alpha_star_db / 0.4);
    // Doubling stops at the first power of two past the root; bisection
    // then halves [hi / 2, hi] (or [0, 1]) down to the tolerance.
    const double hi = std::exp2(std::ceil(std::log2(r.bracket[1])));
    const double width = hi <= 1.0 ? 1.0 : hi / 2.0;
    EXPECT_LE(r.iterations, static_cast<std::size_t>(std::ceil(std::log2(width / 0.01))));
  }
}

TEST(MaxDistance, LowIntensityReference) {
  const auto r = max_distance(0.01, CapacityModel{});
  EXPECT_NEAR(r.alpha_star_db, 7.19, 0.15);
  EXPECT_NEAR(r.distance_km, 17.975, 0.4);
}

TEST(MaxDistance, OneWayAxis) {
  CapacityModel m;
  m.axis = AttenuationAxis::OneWay;
  const auto ow = max_distance(0.01, m);
  const auto rt = max_distance(0.01, CapacityModel{});
  EXPECT_NEAR(ow.alpha_star_db, rt.alpha_star_db / 2.0, 0.011);
  EXPECT_NEAR(ow.distance_km, rt.distance_km, 0.03);
}

TEST(MaxDistance, DeadProtocol) {
  RootOptions o;
  o.floor = 1.0;
  EXPECT_THROW(max_distance(0.01, CapacityModel{}, o), ProtocolDeadError);
}

TEST(MaxDistance, DecreasesWithIntensity) {
  const CapacityModel m;
  double prev = 1e9;
  for (double mu : {0.001, 0.01, 0.1, 0.5}) {
    const double a = max_distance(mu, m).alpha_star_db;
    EXPECT_LT(a, prev) << mu;
    prev = a;
  }
}

}  // namespace
}  // namespace qsdc
