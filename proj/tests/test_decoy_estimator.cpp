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
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "qsdc/decoy_estimator.hpp"

namespace qsdc {
namespace {

using testing::Draws;

struct TrueValues {
  double Y1, Y2, e1, e2;
};

TrueValues truth(const LinkParams& lp) {
  return {yield_n(lp, Leg::BA, 1), yield_n(lp, Leg::BA, 2), error_rate_n(lp, Leg::BA, 1), error_rate_n(lp, Leg::BA, 2)};
}

void expect_one_sided(const DecoyBounds& b, const TrueValues& t, const std::string& ctx) {
  EXPECT_LE(b.Y1_l, t.Y1) << ctx;
  EXPECT_LE(b.Y2_l, t.Y2) << ctx;
  EXPECT_GE(b.e1_u, t.e1) << ctx;
  EXPECT_GE(b.e2_u, t.e2) << ctx;
}

TEST(DecoyEstimator, IdealBoundsAreTrueValues) {
  const LinkParams lp = LinkParams{}.at_attenuation(3.0);
  const auto b = ideal_bounds(lp);
  const auto t = truth(lp);
  EXPECT_TRUE(b.ideal);
  EXPECT_DOUBLE_EQ(b.Y1_l, t.Y1);
  EXPECT_DOUBLE_EQ(b.Y2_l, t.Y2);
  EXPECT_DOUBLE_EQ(b.e1_u, t.e1);
  EXPECT_DOUBLE_EQ(b.e2_u, t.e2);
}

TEST(DecoyEstimator, DefaultsAreTightAndOneSided) {
  for (double a : {0.0, 2.0, 4.0, 6.0}) {
    const LinkParams lp = LinkParams{}.at_attenuation(a);
    const auto b = estimate_bounds(hsps_decoy_inputs(SourceParams{}, lp));
    const auto t = truth(lp);
    expect_one_sided(b, t, "alpha=" + std::to_string(a));
    EXPECT_FALSE(b.estimation_failed);
    EXPECT_GT(b.Y1_l, 0.99 * t.Y1);
    EXPECT_GT(b.Y2_l, 0.99 * t.Y2);
    EXPECT_LT(b.e1_u, 1.01 * t.e1);
    EXPECT_LT(b.e2_u, 1.1 * t.e2);
  }
}

TEST(DecoyEstimator, OneSidedOnRandomDraws) {
  Draws d(31);
  for (int i = 0; i < 500; ++i) {
    const auto sp = d.source();
    const auto lp = d.link();
    expect_one_sided(estimate_bounds(hsps_decoy_inputs(sp, lp)), truth(lp), "hsps draw " + std::to_string(i));
    expect_one_sided(estimate_bounds(dl04_decoy_inputs(sp.mu, lp)), truth(lp), "dl04 draw " + std::to_string(i));
  }
}

// Synthetic classes supported on n <= 2: every combination that removes one
// of n = 1, 2 is exact.
DecoyInputs three_level_inputs(const std::array<double, 3>& y, const std::array<double, 3>& ey) {
  const std::array<std::array<double, 3>, 3> w{{{0.5, 0.4, 0.1}, {0.3, 0.5, 0.2}, {0.1, 0.4, 0.5}}};
  DecoyInputs in;
  in.Y0_A = y[0];
  for (std::size_t c = 0; c < 3; ++c) {
    DecoyClass k;
    k.label = "c" + std::to_string(c);
    k.dist.weights.assign(w[c].begin(), w[c].end());
    k.dist.event_prob = 1.0;
    double q = 0.0, qe = 0.0;
    for (std::size_t n = 0; n < 3; ++n) {
      q += w[c][n] * y[n];
      qe += w[c][n] * ey[n];
    }
    k.Q = q;
    k.E = qe / q;
    in.classes.push_back(k);
  }
  return in;
}

TEST(DecoyEstimator, ExactWithoutMultiPhotonTail) {
  const std::array<double, 3> y{1e-6, 0.1, 0.19};
  const std::array<double, 3> ey{0.5e-6, 0.002, 0.0038};
  const auto in = three_level_inputs(y, ey);
  EXPECT_NEAR(y1_lower(in).value, y[1], 1e-11);
  EXPECT_NEAR(y2_lower(in).value, y[2], 1e-11);
  const auto b = estimate_bounds(in);
  EXPECT_NEAR(b.e1_u, ey[1] / y[1], 1e-12);
  EXPECT_NEAR(b.e2_u, ey[2] / y[2], 1e-12);
}

TEST(DecoyEstimator, StableUnderSmallPerturbation) {
  const LinkParams lp = LinkParams{}.at_attenuation(4.0);
  auto in = hsps_decoy_inputs(SourceParams{}, lp);
  const auto base = estimate_bounds(in);
  for (auto& c : in.classes) c.Q *= 1.0 + 1e-9;
  const auto moved = estimate_bounds(in);
  EXPECT_NEAR(moved.Y1_l, base.Y1_l, 1e-6 * base.Y1_l);
  EXPECT_NEAR(moved.Y2_l, base.Y2_l, 1e-6 * base.Y2_l);
  EXPECT_NEAR(moved.e1_u, base.e1_u, 1e-6 * base.e1_u);
}

TEST(DecoyEstimator, FailsGracefullyWithoutSinglePhotonSignal) {
  // Y1 = 0: no single-photon yield can be certified.
  const auto in = three_level_inputs({0.0, 0.0, 0.2}, {0.0, 0.0, 0.004});
  const auto b = estimate_bounds(in);
  EXPECT_EQ(b.Y1_l, 0.0);
  EXPECT_TRUE(b.estimation_failed);
  EXPECT_EQ(b.e1_u, 0.5);
  EXPECT_EQ(b.e2_u, 0.5);
}

TEST(DecoyEstimator, NoChannelBoundsOnlyBackground) {
  LinkParams lp;
  lp.eta_opt_ba = 0.0;
  const auto in = hsps_decoy_inputs(SourceParams{}, lp);
  EXPECT_LE(y1_lower(in).value, lp.Y0_A);
  EXPECT_GE(y1_lower(in).value, 0.0);
  EXPECT_LE(y2_lower(in).value, lp.Y0_A);
}

TEST(DecoyEstimator, ErrorFreeChannelHasZeroErrorBounds) {
  LinkParams lp = LinkParams{}.at_attenuation(2.0);
  lp.Y0_A = 0.0;
  lp.e_d_A = 0.0;
  const auto b = estimate_bounds(hsps_decoy_inputs(SourceParams{}, lp));
  EXPECT_FALSE(b.estimation_failed);
  EXPECT_LE(b.e1_u, 1e-12);
  EXPECT_LE(b.e2_u, 1e-12);
}

TEST(DecoyEstimator, IdenticalClassesAreDegenerate) {
  auto in = hsps_decoy_inputs(SourceParams{}, LinkParams{});
  in.classes[1] = in.classes[0];
  in.classes[2] = in.classes[0];
  EXPECT_THROW(y1_lower(in), DegenerateError);
}

TEST(DecoyEstimator, ClassOrderDoesNotMatter) {
  const auto in = hsps_decoy_inputs(SourceParams{}, LinkParams{}.at_attenuation(3.0));
  const auto base = estimate_bounds(in);
  auto perm = in;
  std::swap(perm.classes[0], perm.classes[2]);
  const auto b = estimate_bounds(perm);
  EXPECT_NEAR(b.Y1_l, base.Y1_l, 1e-13 * base.Y1_l);
  EXPECT_NEAR(b.Y2_l, base.Y2_l, 1e-13 * base.Y2_l);
  EXPECT_NEAR(b.e1_u, base.e1_u, 1e-13);
  EXPECT_NEAR(b.e2_u, base.e2_u, 1e-13);
}

TEST(DecoyEstimator, MonotonicityAtDefaults) {
  EXPECT_TRUE(check_monotonicity(hsps_decoy_inputs(SourceParams{}, LinkParams{}), 20).ok);
  EXPECT_TRUE(check_monotonicity(dl04_decoy_inputs(0.1, LinkParams{}), 20).ok);
  auto same = hsps_decoy_inputs(SourceParams{}, LinkParams{});
  same.classes[2] = same.classes[1];
  EXPECT_TRUE(check_monotonicity(same, 20).ok);
}

TEST(DecoyEstimator, MonotonicityViolationIsReported) {
  // Ratios q_2(n)/q_1(n) for n = 1, 2, 3: 0.75, 4/3, then 0.5, breaking the chain at n = 3.
  DecoyInputs in;
  for (const auto& w : {std::vector<double>{0.3, 0.4, 0.2, 0.05}, std::vector<double>{0.2, 0.4, 0.3, 0.2},
                        std::vector<double>{0.1, 0.3, 0.4, 0.1}}) {
    DecoyClass c;
    c.dist.weights = w;
    c.dist.event_prob = 1.0;
    in.classes.push_back(c);
  }
  const auto rep = check_monotonicity(in, 3);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.i, 2u);
  EXPECT_EQ(rep.j, 1u);
  EXPECT_EQ(rep.n, 3u);
  in.classes[2].dist.weights[3] = 0.4;
  EXPECT_TRUE(check_monotonicity(in, 3).ok);
}

TEST(DecoyEstimator, NoisyObservablesRarelyFlipBounds) {
  const LinkParams lp = LinkParams{}.at_attenuation(4.0);
  const auto clean = hsps_decoy_inputs(SourceParams{}, lp);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  int flips = 0;
  for (int i = 0; i < 1000; ++i) {
    auto in = clean;
    for (auto& c : in.classes) {
      c.Q *= 1.0 + noise(rng);
      c.E *= 1.0 + noise(rng);
    }
    const auto b = estimate_bounds(in);
    flips += b.Y1_l > yield_n(lp, Leg::BA, 1) || b.e1_u < error_rate_n(lp, Leg::BA, 1);
  }
  std::printf("bound flips under 1%% noise: %d / 1000\n", flips);
  EXPECT_LT(flips, 10);
}

TEST(DecoyEstimator, CandidateListsAreLabelled) {
  const auto in = hsps_decoy_inputs(SourceParams{}, LinkParams{});
  const auto y1 = y1_candidates(in);
  ASSERT_EQ(y1.size(), 3u);
  for (const auto& c : y1) EXPECT_NE(c.classes.find('/'), std::string::npos);
  const auto best = y1_lower(in);
  for (const auto& c : y1) EXPECT_GE(best.value, std::clamp(c.value, 0.0, 1.0));
}

TEST(DecoyEstimator, BaselineVacuumClassIsBackground) {
  const LinkParams lp;
  const auto in = dl04_decoy_inputs(0.1, lp);
  ASSERT_EQ(in.classes.size(), 3u);
  EXPECT_DOUBLE_EQ(in.classes[0].Q, lp.Y0_A);
  EXPECT_DOUBLE_EQ(in.classes[0].E, LinkParams::e_0);
  EXPECT_DOUBLE_EQ(in.classes[1].dist.weight(1), 0.05 * std::exp(-0.05));
}

}  // namespace
}  // namespace qsdc
